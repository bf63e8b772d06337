use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Check, Context, ExperimentResult, Table};
use crate::error::Result;
use crate::stats::{fit_line, kronecker_point};
use crate::trace::trace_scale;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFractions {
    /// `C_f = max_j mean_a 2^{(sp−d)j}·S_j(a)` over the window.
    pub norm_constant: f64,
    pub scales: Vec<u32>,
    pub fractions: Vec<f64>,
    /// `max_a 2^{((s−ε)p−d)j}·S_j(a) / C_f`; a fraction is nonzero iff this exceeds 1.
    pub worst_excess: Vec<f64>,
}

/// Bad-set fractions from per-point energies `energies[a][j − j_min] = S_j(a)`.
///
/// A point is bad at scale `j` when `S_j(a) > C_f·2^{−((s−ε)p−d)j}`, with
/// `C_f` the measured grid-mean norm constant, so Markov bounds each
/// fraction by `2^{−jεp}`.
pub fn bad_set_fractions(
    energies: &[Vec<f64>],
    j_min: u32,
    s: f64,
    p: f64,
    d: usize,
    epsilon: f64,
) -> DecayFractions {
    let n = energies.len().max(1) as f64;
    let width = energies.first().map_or(0, Vec::len);
    let scales: Vec<u32> = (0..width as u32).map(|i| j_min + i).collect();
    let weight = |j: u32, e: f64| (j as f64 * (e * p - d as f64)).exp2();
    let norm_constant = scales
        .iter()
        .enumerate()
        .map(|(i, &j)| energies.iter().map(|row| row[i]).sum::<f64>() * weight(j, s) / n)
        .fold(0.0, f64::max);
    let mut fractions = Vec::new();
    let mut worst_excess = Vec::new();
    for (i, &j) in scales.iter().enumerate() {
        let w = weight(j, s - epsilon);
        let bad = energies
            .iter()
            .filter(|row| row[i] * w > norm_constant)
            .count();
        fractions.push(bad as f64 / n);
        let worst = energies.iter().map(|row| row[i] * w).fold(0.0, f64::max);
        worst_excess.push(if norm_constant > 0.0 {
            worst / norm_constant
        } else {
            0.0
        });
    }
    DecayFractions {
        norm_constant,
        scales,
        fractions,
        worst_excess,
    }
}

/// Markov/Borel–Cantelli decay of the traces of a random field.
pub fn exp_trace_decay(ctx: &Context) -> Result<ExperimentResult> {
    let c = &ctx.config;
    let field = ctx.random_field()?;
    let dp = c.d_prime();
    let points: Vec<Vec<f64>> = (0..c.decay_grid_points as u64)
        .map(|i| kronecker_point(i, dp))
        .collect();
    let energies: Vec<Vec<f64>> = points
        .par_iter()
        .map(|a| {
            (c.decay_j_min..=c.decay_j_max)
                .map(|j| {
                    let v = trace_scale(&field, &ctx.system, a, c.d, j)?;
                    Ok(v.iter().map(|x| x.abs().powf(c.p)).sum())
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let r = bad_set_fractions(&energies, c.decay_j_min, c.s, c.p, c.d, c.epsilon);
    let mut out = ExperimentResult::new("trace-decay");
    let mut table = Table::new("fractions", &["j", "fraction", "bound", "worst_excess"]);
    for (i, &j) in r.scales.iter().enumerate() {
        let bound = c.markov_slack * (-(j as f64) * c.epsilon * c.p).exp2();
        out.check(Check::at_most(
            format!("fraction at j = {j}"),
            r.fractions[i],
            bound,
        ));
        table.push(vec![j as f64, r.fractions[i], bound, r.worst_excess[i]]);
    }
    out.tables.push(table);
    let target = c.epsilon * c.p - c.decay_exponent_margin;
    let js: Vec<f64> = r.scales.iter().map(|&j| j as f64).collect();
    let nonzero: Vec<(f64, f64)> = js
        .iter()
        .zip(&r.fractions)
        .filter(|(_, &f)| f > 0.0)
        .map(|(&j, &f)| (j, f.log2()))
        .collect();
    if nonzero.len() >= 3 {
        let (x, y): (Vec<f64>, Vec<f64>) = nonzero.into_iter().unzip();
        let fit = fit_line(&x, &y).expect("distinct scales");
        out.check(Check::at_least(
            "fraction decay exponent",
            -fit.slope,
            target,
        ));
        out.fit("log2 fraction vs j", fit);
    } else {
        // Too few nonzero fractions to fit; the margin to the bad-set
        // threshold decays at the same rate and is always measurable.
        let y: Vec<f64> = r.worst_excess.iter().map(|v| v.log2()).collect();
        let fit = fit_line(&js, &y).expect("distinct scales");
        out.check(Check::at_least(
            "worst-excess decay exponent",
            -fit.slope,
            target,
        ));
        out.fit("log2 worst excess vs j", fit);
    }
    out.value("norm_constant", r.norm_constant);
    out.value("grid_points", c.decay_grid_points);
    Ok(out)
}
