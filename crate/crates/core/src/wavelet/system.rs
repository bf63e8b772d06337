use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::filter::orthonormality_residual;
use super::FILTER_TOLERANCE;
use crate::error::{param, Error, Result};
use crate::stats::{compensated_sum, fit_line};

/// Stop the cascade once successive iterates differ by less than this.
const CASCADE_TOLERANCE: f64 = 1e-12;
const CASCADE_MAX_ITERATIONS: usize = 2000;
/// Window over which the residual must shrink for the cascade to continue.
const STALL_WINDOW: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivativeMethod {
    /// Exact dyadic recursion of the differentiated refinement equation.
    Refinement,
    /// Central differences at the sample spacing.
    CentralDifference,
}

/// Scaling function `Ψ⁰` and mother wavelet `Ψ¹` sampled on the dyadic grid
/// `m·2^{-r}`, `m = 0..=support_length·2^r`, in the L∞ normalisation
/// `Ψ⁰(x) = 2 Σ_k h_k Ψ⁰(2x−k)`, `Σ h = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletSystem {
    pub moments: usize,
    pub filter: Vec<f64>,
    pub support_length: usize,
    pub grid_resolution: u32,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub dpsi: Vec<f64>,
    pub derivative_method: DerivativeMethod,
    /// Informational Hölder exponent of `Ψ⁰` from fourth-order differences.
    pub regularity_estimate: f64,
    /// `max|Tφ − φ|` after each cascade sweep.
    pub cascade_residuals: Vec<f64>,
}

/// Runs the cascade from the indicator of `[0,1)` to its fixed point on the
/// grid of spacing `2^{-r}` and derives `Ψ¹`, the derivatives and metadata.
pub fn cascade_evaluate(filter: &[f64], r: u32) -> Result<WaveletSystem> {
    if filter.len() < 2 || !filter.len().is_multiple_of(2) {
        return param("filter length must be even and at least 2");
    }
    let res = orthonormality_residual(filter);
    if !(res <= FILTER_TOLERANCE) {
        return param(format!("filter orthonormality residual {res:e} too large"));
    }
    if !(6..=24).contains(&r) {
        return param(format!("grid resolution r must be in 6..=24, got {r}"));
    }
    let support = filter.len() - 1;
    let step = 1usize << r;
    let n = support * step + 1;

    let mut v = vec![0.0; n];
    v[..step].fill(1.0);
    let mut residuals = Vec::new();
    loop {
        let next = refine(filter, &v, step, 2.0);
        let residual = max_abs_diff(&next, &v);
        residuals.push(residual);
        v = next;
        if residual <= CASCADE_TOLERANCE {
            break;
        }
        let it = residuals.len();
        let stalled = it > STALL_WINDOW && residual >= residuals[it - 1 - STALL_WINDOW];
        if !residual.is_finite() || stalled || it >= CASCADE_MAX_ITERATIONS {
            return Err(Error::Convergence {
                iterations: it,
                residual,
            });
        }
    }
    let phi = v;
    let g = highpass(filter);
    let psi = refine(&g, &phi, step, 2.0);
    let regularity_estimate = estimate_regularity(&phi, r);

    let central = central_difference(&phi, step);
    let (dphi, derivative_method) = match derivative_by_refinement(filter, step, r) {
        Some(d) if regularity_estimate > 1.0 && agrees(&d, &central) => {
            (d, DerivativeMethod::Refinement)
        }
        _ => (central, DerivativeMethod::CentralDifference),
    };
    let dpsi = refine(&g, &dphi, step, 4.0);

    Ok(WaveletSystem {
        moments: filter.len() / 2,
        filter: filter.to_vec(),
        support_length: support,
        grid_resolution: r,
        phi,
        psi,
        dphi,
        dpsi,
        derivative_method,
        regularity_estimate,
        cascade_residuals: residuals,
    })
}

/// `(Tv)(x_m) = factor · Σ_k c_k v(2x_m − k)` on the sample grid.
fn refine(c: &[f64], v: &[f64], step: usize, factor: f64) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0; n];
    for (k, &ck) in c.iter().enumerate() {
        let shift = k * step;
        // indices m with 0 <= 2m - shift < n
        let lo = shift.div_ceil(2);
        let hi = ((n - 1 + shift) / 2).min(n - 1);
        let w = factor * ck;
        for m in lo..=hi {
            out[m] += w * v[2 * m - shift];
        }
    }
    out
}

fn highpass(h: &[f64]) -> Vec<f64> {
    let s = h.len() - 1;
    (0..h.len())
        .map(|k| if k % 2 == 0 { h[s - k] } else { -h[s - k] })
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn central_difference(v: &[f64], step: usize) -> Vec<f64> {
    let n = v.len();
    let h = 1.0 / step as f64;
    (0..n)
        .map(|m| {
            if m == 0 {
                (v[1] - v[0]) / h
            } else if m == n - 1 {
                (v[n - 1] - v[n - 2]) / h
            } else {
                (v[m + 1] - v[m - 1]) / (2.0 * h)
            }
        })
        .collect()
}

fn agrees(a: &[f64], b: &[f64]) -> bool {
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    max_abs_diff(a, b) <= 1e-2 * scale
}

/// Derivative of `Ψ⁰` at every grid point through `φ'(x) = 4 Σ h_k φ'(2x−k)`:
/// integer values are the eigenvector of `M_{ij} = 2h_{2i−j}` for the
/// eigenvalue ½, normalised by `Σ_m m φ'(m) = −1`; finer dyadic levels follow
/// exactly from coarser ones.
fn derivative_by_refinement(h: &[f64], step: usize, r: u32) -> Option<Vec<f64>> {
    let s = h.len() - 1;
    if s < 2 {
        return None;
    }
    let inner = s - 1; // integers 1..s-1
    let coef = |idx: i64| -> f64 {
        if idx >= 0 && (idx as usize) < h.len() {
            h[idx as usize]
        } else {
            0.0
        }
    };
    let mut a = DMatrix::<f64>::zeros(inner + 2, inner);
    for i in 0..inner {
        for j in 0..inner {
            let (ii, jj) = ((i + 1) as i64, (j + 1) as i64);
            a[(i, j)] = 2.0 * coef(2 * ii - jj) - if i == j { 0.5 } else { 0.0 };
        }
    }
    let mut b = DVector::<f64>::zeros(inner + 2);
    for j in 0..inner {
        a[(inner, j)] = (j + 1) as f64;
        a[(inner + 1, j)] = 1.0;
    }
    b[inner] = -1.0;
    let svd = a.svd(true, true);
    let sol = svd.solve(&b, 1e-13).ok()?;
    let n = s * step + 1;
    let mut d = vec![0.0; n];
    for j in 0..inner {
        d[(j + 1) * step] = sol[j];
    }
    for level in 1..=r {
        let stride = step >> level;
        let mut m = stride;
        while m < n {
            if (m / stride) % 2 == 1 {
                let mut acc = 0.0;
                for (k, &hk) in h.iter().enumerate() {
                    let idx = 2 * m as i64 - (k * step) as i64;
                    if idx >= 0 && (idx as usize) < n {
                        acc += hk * d[idx as usize];
                    }
                }
                d[m] = 4.0 * acc;
            }
            m += stride;
        }
    }
    Some(d)
}

/// Hölder exponent from the decay of fourth-order differences, capped at 4.
fn estimate_regularity(phi: &[f64], r: u32) -> f64 {
    let lo = 4.max(r.saturating_sub(8));
    let hi = r.saturating_sub(2).max(lo + 1);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for t in lo..=hi {
        let stride = 1usize << (r - t);
        if 4 * stride >= phi.len() {
            continue;
        }
        let mut worst = 0.0f64;
        for m in 0..phi.len() - 4 * stride {
            let d = phi[m] - 4.0 * phi[m + stride] + 6.0 * phi[m + 2 * stride]
                - 4.0 * phi[m + 3 * stride]
                + phi[m + 4 * stride];
            worst = worst.max(d.abs());
        }
        if worst > 0.0 {
            xs.push(-(t as f64));
            ys.push(worst.log2());
        }
    }
    match fit_line(&xs, &ys) {
        Some(f) => f.slope.clamp(0.0, 4.0),
        None => 4.0,
    }
}

impl WaveletSystem {
    pub fn step(&self) -> usize {
        1usize << self.grid_resolution
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.step() as f64
    }

    fn interp(&self, samples: &[f64], x: f64) -> f64 {
        let t = x * self.step() as f64;
        if !(t >= 0.0) || t >= (samples.len() - 1) as f64 {
            return 0.0;
        }
        let i = t.floor() as usize;
        let f = t - i as f64;
        if f == 0.0 {
            samples[i]
        } else {
            samples[i] * (1.0 - f) + samples[i + 1] * f
        }
    }

    /// `Ψ⁰(x)` by linear interpolation; zero outside `[0, support_length]`.
    pub fn phi_at(&self, x: f64) -> f64 {
        self.interp(&self.phi, x)
    }

    /// `Ψ¹(x)` by linear interpolation; zero outside `[0, support_length]`.
    pub fn psi_at(&self, x: f64) -> f64 {
        self.interp(&self.psi, x)
    }

    /// `Ψ^l(x)` for `l ∈ {0, 1}`.
    pub fn eval(&self, l: u32, x: f64) -> f64 {
        if l == 0 {
            self.phi_at(x)
        } else {
            self.psi_at(x)
        }
    }

    /// Weights of the periodised functions at scale `j`: every `k ∈ Z_j`
    /// with `Σ_n Ψ^l(2^j(a+n) − k) ≠ 0`, paired with `[Ψ⁰-sum, Ψ¹-sum]`.
    pub fn periodized_weights(&self, j: u32, a: f64) -> Vec<(u64, [f64; 2])> {
        let size = 1u64 << j;
        let support = self.support_length as f64;
        let mut out: Vec<(u64, [f64; 2])> = Vec::with_capacity(self.support_length + 1);
        let a = a.rem_euclid(1.0);
        let t = a * size as f64;
        // Arguments t + n·2^j − k ∈ [0, support) with k ∈ [0, 2^j).
        let k_lo = (t - support).floor() as i64 + 1;
        let k_hi = t.floor() as i64;
        for kk in k_lo..=k_hi {
            let arg = t - kk as f64;
            if !(0.0..support).contains(&arg) {
                continue;
            }
            let w = [self.phi_at(arg), self.psi_at(arg)];
            let k = kk.rem_euclid(size as i64) as u64;
            match out.iter_mut().find(|(kk2, _)| *kk2 == k) {
                Some(e) => {
                    e.1[0] += w[0];
                    e.1[1] += w[1];
                }
                None => out.push((k, w)),
            }
        }
        out
    }

    /// `max|Ψ⁰ − T Ψ⁰|` over the grid.
    pub fn refinement_residual(&self) -> f64 {
        max_abs_diff(
            &refine(&self.filter, &self.phi, self.step(), 2.0),
            &self.phi,
        )
    }

    /// Left Riemann sum of `∫ xⁿ Ψ¹(x) dx` on the sample grid.
    pub fn moment(&self, n: u32) -> f64 {
        let h = self.spacing();
        compensated_sum(
            self.psi
                .iter()
                .enumerate()
                .map(|(m, v)| (m as f64 * h).powi(n as i32) * v * h),
        )
    }

    /// Largest vanishing-moment quadrature over `n = 0..moments`.
    pub fn max_vanishing_moment(&self) -> f64 {
        (0..self.moments as u32).fold(0.0, |m, n| m.max(self.moment(n).abs()))
    }

    /// `max_{x∈[0,1)} |Σ_k Ψ⁰(x−k) − 1|` over the grid.
    pub fn partition_of_unity_error(&self) -> f64 {
        let step = self.step();
        (0..step).fold(0.0f64, |worst, m| {
            let s: f64 = (0..self.support_length)
                .map(|n| self.phi[m + n * step])
                .sum();
            worst.max((s - 1.0).abs())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::generate_filter;

    #[test]
    fn haar_is_explicit() {
        let w = cascade_evaluate(&[0.5, 0.5], 6).unwrap();
        let step = w.step();
        for m in 0..step {
            assert_eq!(w.phi[m], 1.0);
            let expect = if m < step / 2 { 1.0 } else { -1.0 };
            assert_eq!(w.psi[m], expect);
        }
        assert_eq!(w.phi[step], 0.0);
        assert_eq!(w.cascade_residuals, vec![0.0]);
    }

    #[test]
    fn refine_matches_naive_loop() {
        let h = generate_filter(2).unwrap();
        let step = 8;
        let n = 3 * step + 1;
        let v: Vec<f64> = (0..n).map(|m| ((m * 7919) % 13) as f64).collect();
        let fast = refine(&h, &v, step, 2.0);
        for (m, &f) in fast.iter().enumerate() {
            let mut acc = 0.0;
            for (k, hk) in h.iter().enumerate() {
                let idx = 2 * m as i64 - (k * step) as i64;
                if idx >= 0 && (idx as usize) < n {
                    acc += 2.0 * hk * v[idx as usize];
                }
            }
            assert!((acc - f).abs() < 1e-12);
        }
    }

    #[test]
    fn small_resolution_rejected() {
        assert!(cascade_evaluate(&[0.5, 0.5], 5).is_err());
    }

    #[test]
    fn non_orthonormal_filter_rejected() {
        assert!(cascade_evaluate(&[0.25, 0.25, 0.25, 0.25], 8).is_err());
    }

    #[test]
    fn db2_regularity_is_below_one() {
        let w = cascade_evaluate(&generate_filter(2).unwrap(), 12).unwrap();
        assert!(w.regularity_estimate > 0.3 && w.regularity_estimate < 0.8);
        assert_eq!(w.derivative_method, DerivativeMethod::CentralDifference);
    }

    #[test]
    fn db8_derivative_uses_refinement() {
        let w = cascade_evaluate(&generate_filter(8).unwrap(), 10).unwrap();
        assert!(w.regularity_estimate > 2.0, "{}", w.regularity_estimate);
        assert_eq!(w.derivative_method, DerivativeMethod::Refinement);
        // Σ_k φ'(x − k) = 0 everywhere.
        let step = w.step();
        for m in (0..step).step_by(37) {
            let s: f64 = (0..w.support_length).map(|n| w.dphi[m + n * step]).sum();
            assert!(s.abs() < 1e-8, "{s}");
        }
    }

    #[test]
    fn periodized_weights_wrap_small_scales() {
        let w = cascade_evaluate(&generate_filter(4).unwrap(), 8).unwrap();
        // At j = 1 every one of the seven shifts folds onto k ∈ {0, 1}.
        let wts = w.periodized_weights(1, 0.3);
        assert!(wts.len() <= 2);
        let total: f64 = wts.iter().map(|(_, v)| v[0]).sum();
        assert!((total - 1.0).abs() < 1e-9, "{total}");
    }
}
