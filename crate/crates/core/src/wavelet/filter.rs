use nalgebra::{Complex, DMatrix};

use crate::error::{param, Result};

type C64 = Complex<f64>;

/// Extremal-phase Daubechies refinement mask with `moments` vanishing
/// moments, normalised so that the coefficients sum to one.
///
/// The mask has length `2·moments` and satisfies
/// `Σ_k h_k h_{k+2m} = ½·[m = 0]`.
pub fn generate_filter(moments: usize) -> Result<Vec<f64>> {
    if !(1..=16).contains(&moments) {
        return param(format!(
            "vanishing moments must be in 1..=16, got {moments}"
        ));
    }
    if moments == 1 {
        return Ok(vec![0.5, 0.5]);
    }
    let n = moments;
    // Bezout polynomial P(y) = Σ_{k<N} C(N-1+k, k) y^k.
    let coeffs: Vec<f64> = (0..n).map(|k| binomial(n - 1 + k, k)).collect();
    let roots = polynomial_roots(&coeffs);

    let mut mask: Vec<C64> = vec![C64::new(1.0, 0.0)];
    let half = C64::new(0.5, 0.0);
    for _ in 0..n {
        mask = convolve(&mask, &[half, half]);
    }
    for y in roots {
        // y = (1 - cos ω)/2 maps to z + 1/z = 2(1 - 2y); keep the root inside
        // the unit circle (minimum phase).
        let b = C64::new(1.0, 0.0) - y * 2.0;
        let disc = (b * b - C64::new(1.0, 0.0)).sqrt();
        let z = if (b + disc).norm() < 1.0 {
            b + disc
        } else {
            b - disc
        };
        let scale = C64::new(1.0, 0.0) / (C64::new(1.0, 0.0) - z);
        mask = convolve(&mask, &[scale, -z * scale]);
    }
    let h: Vec<f64> = mask.iter().map(|c| c.re).collect();
    let sum: f64 = h.iter().sum();
    Ok(h.into_iter().map(|v| v / sum).collect())
}

/// Largest violation of `Σ h = 1` and `Σ_k h_k h_{k+2m} = ½·[m=0]`.
pub fn orthonormality_residual(h: &[f64]) -> f64 {
    let mut worst = (h.iter().sum::<f64>() - 1.0).abs();
    for m in 0..h.len().div_ceil(2) {
        let s: f64 = (0..h.len().saturating_sub(2 * m))
            .map(|k| h[k] * h[k + 2 * m])
            .sum();
        let target = if m == 0 { 0.5 } else { 0.0 };
        worst = worst.max((s - target).abs());
    }
    worst
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn convolve(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Roots of `Σ c_k y^k` from the companion matrix, polished by Newton steps.
fn polynomial_roots(c: &[f64]) -> Vec<C64> {
    let deg = c.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    let companion = DMatrix::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -c[deg - 1 - j] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eig = companion.complex_eigenvalues();
    eig.iter()
        .map(|&z0| {
            let mut z = z0;
            for _ in 0..8 {
                let (p, dp) = horner(c, z);
                if dp.norm() == 0.0 {
                    break;
                }
                let step = p / dp;
                z -= step;
                if step.norm() <= 1e-17 * z.norm().max(1.0) {
                    break;
                }
            }
            z
        })
        .collect()
}

fn horner(c: &[f64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &ck in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ck;
    }
    (p, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_is_forced() {
        assert_eq!(generate_filter(1).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn out_of_range_is_rejected() {
        assert!(generate_filter(0).is_err());
        assert!(generate_filter(17).is_err());
    }

    #[test]
    fn db2_matches_closed_form() {
        // (1+√3, 3+√3, 3−√3, 1−√3)/8 in the unit-sum normalisation.
        let s3 = 3f64.sqrt();
        let expect = [
            (1.0 + s3) / 8.0,
            (3.0 + s3) / 8.0,
            (3.0 - s3) / 8.0,
            (1.0 - s3) / 8.0,
        ];
        let h = generate_filter(2).unwrap();
        for (a, b) in h.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn all_orders_are_orthonormal() {
        for n in 1..=16 {
            let h = generate_filter(n).unwrap();
            assert_eq!(h.len(), 2 * n);
            let r = orthonormality_residual(&h);
            assert!(r <= 1e-12, "N={n}: residual {r:e}");
        }
    }

    #[test]
    fn highpass_annihilates_low_degree_monomials() {
        // Σ (-1)^k k^n h_k = 0 for n < N.
        for n_mom in [2usize, 4, 8] {
            let h = generate_filter(n_mom).unwrap();
            for deg in 0..n_mom {
                let s: f64 = h
                    .iter()
                    .enumerate()
                    .map(|(k, v)| {
                        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                        sign * (k as f64).powi(deg as i32) * v
                    })
                    .sum();
                let scale = ((2 * n_mom) as f64).powi(deg as i32);
                assert!(s.abs() / scale < 1e-12, "N={n_mom} deg={deg}: {s:e}");
            }
        }
    }
}
