//! Test fields with known pointwise behaviour.

use super::TraceCoefficients;
use crate::error::Result;
use crate::field::irreducible_level;
use crate::trace::TraceField;
use crate::wavelet::WaveletSystem;

/// `|d_{(j,k)}| = 2^{−(s−d/p)j − (d/p)J(k)}`, the envelope the probe family
/// saturates. Procedural, so scans can go as deep as `f64` resolves `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturatedField {
    pub s: f64,
    pub p: f64,
    pub d: usize,
    pub j_max: u32,
}

impl TraceCoefficients for SaturatedField {
    fn d(&self) -> usize {
        self.d
    }

    fn j_max(&self) -> u32 {
        self.j_max
    }

    fn magnitude(&self, j: u32, k: &[u64]) -> f64 {
        if j == 0 || j > self.j_max {
            return 0.0;
        }
        let dp = self.d as f64 / self.p;
        let level = irreducible_level(j, k).unwrap_or(0) as f64;
        (-(self.s - dp) * j as f64 - dp * level).exp2()
    }
}

/// `d_λ = 2^{−hj}` on the width-1 cone above `x0` (wavelet band `l = 1`).
pub fn cone_field(x0: &[f64], h: f64, j_max: u32) -> Result<TraceField> {
    let d = x0.len();
    let mut tf = TraceField::zeros(d, j_max, Vec::new())?;
    for j in 1..=j_max {
        let size = 1i64 << j;
        let axes: Vec<Vec<u64>> = x0
            .iter()
            .map(|&x| {
                let c = x * size as f64;
                let mut v: Vec<u64> = ((c - 1.0).ceil() as i64..=(c + 1.0).floor() as i64)
                    .map(|k| k.rem_euclid(size) as u64)
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        let mut ks = vec![Vec::new()];
        for axis in &axes {
            ks = ks
                .into_iter()
                .flat_map(|k: Vec<u64>| {
                    axis.iter().map(move |&c| {
                        let mut k2 = k.clone();
                        k2.push(c);
                        k2
                    })
                })
                .collect();
        }
        for k in ks {
            tf.set(j, &k, 1, (-h * j as f64).exp2())?;
        }
    }
    Ok(tf)
}

/// Wavelet coefficients `c_{(j,k)} = 2^j ∫ f(x) ψ(2^j x − k) dx` of the
/// periodic cusp `f(x) = |x − x0|^h` (torus distance), by left Riemann sums
/// on the wavelet's own sample grid.
pub fn cusp_coefficients(
    system: &WaveletSystem,
    x0: f64,
    h: f64,
    j_max: u32,
) -> Result<TraceField> {
    let mut tf = TraceField::zeros(1, j_max, vec![])?;
    let step = system.spacing();
    let f = |x: f64| {
        let t = (x - x0).rem_euclid(1.0);
        t.min(1.0 - t).powf(h)
    };
    for j in 1..=j_max {
        let size = (1u64 << j) as f64;
        for k in 0..1u64 << j {
            // Substituting u = 2^j x − k, the integral becomes ∫ f((u+k)/2^j) ψ(u) du.
            let c: f64 = system
                .psi
                .iter()
                .enumerate()
                .map(|(m, &psi)| f((m as f64 * step + k as f64) / size) * psi)
                .sum::<f64>()
                * step;
            tf.set(j, &[k], 1, c)?;
        }
    }
    Ok(tf)
}
