use serde::{Deserialize, Serialize};

use super::{probe_trace_closed_form, HAlpha, ProbeFamily};
use crate::error::{Error, Result};
use crate::regularity::{scaled_distance, A1Membership, DyadicWitness};
use crate::wavelet::PeriodizedG;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundRow {
    pub n: usize,
    /// Irreducible level `J_n` of the approximant.
    pub level: u32,
    /// `j_n = ⌊α J_n⌋`.
    pub j: u32,
    pub member: usize,
    pub k: Vec<u64>,
    pub coefficient: f64,
    /// `j_n^{−(2d'+(q+2)/(qp))}·2^{−H(α) j_n}`.
    pub shape: f64,
    pub ratio: f64,
    pub in_cone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub alpha: f64,
    pub h_alpha: f64,
    pub cone_width: f64,
    pub log_exponent: f64,
    pub j_a: u32,
    pub rows: Vec<LowerBoundRow>,
    /// Empirical constant: the smallest ratio over all rows.
    pub constant: f64,
    pub all_in_cone: bool,
}

/// Checks the trace lower bound at the subcubes `λ_n^{(i)}` above `x`.
///
/// For each witness `(J_n, K_n)` with `j_n = ⌊αJ_n⌋` in `[j_a, j_max]`, the
/// cube `K_n·2^{−J_n}` at scale `j_n − J₀` is split into the `d₁` subcubes of
/// the family. Each must lie in the cone of width `2^{J₀+2}` above `x`, and
/// `|e^{(i)}(a)| / (j_n^{−(2d'+(q+2)/(qp))}·2^{−H(α)j_n})` is recorded.
pub fn verify_lower_bound(
    family: &ProbeFamily,
    g: &PeriodizedG,
    a: &[f64],
    membership: &A1Membership,
    witness: &DyadicWitness,
) -> Result<LowerBoundReport> {
    let params = family.params();
    let d = family.d();
    let dp = params.dim - d;
    let j_a = membership
        .j_a
        .ok_or_else(|| Error::Parameter("offset is not in A1 on the tested range".into()))?;
    let alpha = witness.alpha;
    if !alpha.is_finite() {
        return Err(Error::Parameter(
            "dyadic points carry no finite rate".into(),
        ));
    }
    let h = HAlpha::new(params.s, params.p, d, alpha)?.value();
    let q_term = if params.q.is_infinite() {
        1.0 / params.p
    } else {
        (params.q + 2.0) / (params.q * params.p)
    };
    let log_exponent = 2.0 * dp as f64 + q_term;
    let width = ((family.j0 + 2) as f64).exp2();
    let mut rows = Vec::new();
    for (n, hit) in witness.hits.iter().enumerate() {
        let j = (alpha * hit.level as f64).floor() as u32;
        if j < j_a || j > family.j_max || j < hit.level + family.j0 {
            continue;
        }
        let coarse = j - family.j0;
        let k: Vec<u64> = hit.k.iter().map(|&c| c << (coarse - hit.level)).collect();
        let shape = (j as f64).powf(-log_exponent) * (-h * j as f64).exp2();
        for (i, (jj, sub)) in family.subcubes(coarse, &k).into_iter().enumerate() {
            debug_assert_eq!(jj, j);
            let coefficient = probe_trace_closed_form(family, i, j, &sub, a, g);
            rows.push(LowerBoundRow {
                n,
                level: hit.level,
                j,
                member: i,
                in_cone: scaled_distance(j, &witness.x, &sub) <= width,
                k: sub,
                coefficient,
                shape,
                ratio: coefficient.abs() / shape,
            });
        }
    }
    if rows.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no witness level J_n with j_a = {j_a} ≤ ⌊αJ_n⌋ ≤ {}",
            family.j_max
        )));
    }
    Ok(LowerBoundReport {
        alpha,
        h_alpha: h,
        cone_width: width,
        log_exponent,
        j_a,
        constant: rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min),
        all_in_cone: rows.iter().all(|r| r.in_cone),
        rows,
    })
}
