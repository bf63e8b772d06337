use serde::{Deserialize, Serialize};

use super::TraceCoefficients;
use crate::error::{Error, Result};
use crate::stats::fit_line;
use crate::trace::TraceField;

/// Exponent reported when no singularity is visible at the available depth.
pub const H_CAP: f64 = 20.0;

/// Per-scale maxima `M_j` over the cone `|2^j x − k| ≤ L` (sup norm, periodic).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeLeaders {
    pub x: Vec<f64>,
    pub width: f64,
    pub scales: Vec<u32>,
    pub values: Vec<f64>,
    /// `M_j = 0`, either from an empty slice or from zero coefficients.
    pub empty: Vec<bool>,
}

/// `|2^j x − k|` on the torus of size `2^j`, sup over coordinates.
pub fn scaled_distance(j: u32, x: &[f64], k: &[u64]) -> f64 {
    let size = (1u64 << j) as f64;
    x.iter()
        .zip(k)
        .map(|(&xi, &ki)| {
            let t = (xi * size - ki as f64).rem_euclid(size);
            t.min(size - t)
        })
        .fold(0.0, f64::max)
}

/// Positions `k` with `|2^j x_i − k_i| ≤ L` in every coordinate.
fn cone_slice(j: u32, x: &[f64], width: f64) -> Vec<Vec<u64>> {
    let size = 1i64 << j;
    let axes: Vec<Vec<u64>> = x
        .iter()
        .map(|&xi| {
            let c = xi.rem_euclid(1.0) * size as f64;
            let lo = (c - width).ceil() as i64;
            let hi = (c + width).floor() as i64;
            let mut ks: Vec<u64> = if hi - lo + 1 >= size {
                (0..size as u64).collect()
            } else {
                (lo..=hi).map(|k| k.rem_euclid(size) as u64).collect()
            };
            ks.sort_unstable();
            ks.dedup();
            ks
        })
        .collect();
    let mut out = vec![Vec::new()];
    for axis in &axes {
        out = out
            .into_iter()
            .flat_map(|k| {
                axis.iter().map(move |&c| {
                    let mut k2 = k.clone();
                    k2.push(c);
                    k2
                })
            })
            .collect();
    }
    out
}

pub fn cone_leaders(
    tf: &dyn TraceCoefficients,
    x: &[f64],
    width: f64,
    scales: std::ops::RangeInclusive<u32>,
) -> ConeLeaders {
    assert!(width >= 1.0, "cone width must be at least 1");
    assert_eq!(x.len(), tf.d(), "point dimension must match the trace");
    let scales: Vec<u32> = scales.filter(|&j| j >= 1 && j <= tf.j_max()).collect();
    let values: Vec<f64> = scales
        .iter()
        .map(|&j| {
            cone_slice(j, x, width)
                .iter()
                .map(|k| tf.magnitude(j, k))
                .fold(0.0, f64::max)
        })
        .collect();
    ConeLeaders {
        x: x.to_vec(),
        width,
        empty: values.iter().map(|&v| v == 0.0).collect(),
        scales,
        values,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HolderMethod {
    /// Least-squares slope of `log2 M_j` against `j`.
    ConeRegression,
    /// Every `M_j` in the window is below `2^{−H_CAP·j}`.
    Capped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    /// Slope estimate, clamped to `[0, H_CAP]`.
    pub h: f64,
    /// `min_j −log2(M_j)/j` over the finer half of the window, the
    /// liminf-type exponent.
    pub h_liminf: f64,
    pub window: (u32, u32),
    pub r_squared: f64,
    pub residual: f64,
    pub method: HolderMethod,
}

/// Hölder exponent at `x` from the cone above it.
///
/// The regression window drops the two coarsest and two finest scales of
/// `scales`; at least five scales with `M_j > 0` must remain.
pub fn estimate_holder(
    tf: &dyn TraceCoefficients,
    x: &[f64],
    width: f64,
    scales: std::ops::RangeInclusive<u32>,
) -> Result<HolderEstimate> {
    let (lo, hi) = (*scales.start() + 2, scales.end().saturating_sub(2));
    if hi < lo {
        return Err(Error::InsufficientData(format!(
            "scale range {scales:?} leaves no regression window"
        )));
    }
    let leaders = cone_leaders(tf, x, width, lo..=hi);
    let window = (lo, hi);
    if leaders
        .scales
        .iter()
        .zip(&leaders.values)
        .all(|(&j, &m)| m < (-H_CAP * j as f64).exp2())
    {
        return Ok(HolderEstimate {
            h: H_CAP,
            h_liminf: H_CAP,
            window,
            r_squared: 1.0,
            residual: 0.0,
            method: HolderMethod::Capped,
        });
    }
    let (js, ys): (Vec<f64>, Vec<f64>) = leaders
        .scales
        .iter()
        .zip(&leaders.values)
        .filter(|(_, &m)| m > 0.0)
        .map(|(&j, &m)| (j as f64, m.log2()))
        .unzip();
    if js.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} usable scales in window {lo}..={hi}, need 5",
            js.len()
        )));
    }
    let fit = fit_line(&js, &ys).expect("distinct scales");
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res = fit.residual * fit.residual * ys.len() as f64;
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    // The coarsest scales only see the few cubes of small irreducible level,
    // so the liminf is taken over the finer half of the window.
    let half = js.len() / 2;
    let h_liminf = js[half..]
        .iter()
        .zip(&ys[half..])
        .map(|(j, y)| -y / j)
        .fold(f64::INFINITY, f64::min);
    Ok(HolderEstimate {
        h: (-fit.slope).clamp(0.0, H_CAP),
        h_liminf: h_liminf.clamp(0.0, H_CAP),
        window,
        r_squared,
        residual: fit.residual,
        method: HolderMethod::ConeRegression,
    })
}

/// Whether every coefficient up to `j_max` satisfies
/// `|d_λ| ≤ N·2^{−γj}(1 + |2^j x − k|)^γ`.
pub fn holder_candidate_test(
    tf: &TraceField,
    gamma: f64,
    n_const: f64,
    x: &[f64],
    j_max: u32,
) -> bool {
    let mut ok = true;
    tf.for_each_nonzero(|j, k, _, v| {
        if ok && j <= j_max {
            let bound =
                n_const * (-gamma * j as f64).exp2() * (1.0 + scaled_distance(j, x, k)).powf(gamma);
            ok = v.abs() <= bound;
        }
    });
    ok
}
