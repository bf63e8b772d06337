use super::system::{DerivativeMethod, WaveletSystem};
use crate::error::{param, Result};

/// Samples of the 1-periodic function `G(t) = Σ_{n∈Z} Ψ¹(t+n)` and of `G'`
/// on `[0,1)` at spacing `2^{-r}`, together with the tensor dimension `d'`
/// used by [`PeriodizedG::eval_tensor`].
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodizedG {
    pub grid_resolution: u32,
    pub g: Vec<f64>,
    pub dg: Vec<f64>,
    pub d_prime: usize,
    /// Vanishing moments of the generating wavelet; `None` for injected samples.
    pub moments: Option<usize>,
    pub derivative_method: DerivativeMethod,
}

/// Periodises `Ψ¹` and `Ψ¹'` of `system`.
pub fn build_g(system: &WaveletSystem, d_prime: usize) -> Result<PeriodizedG> {
    if d_prime == 0 {
        return param("d' must be at least 1");
    }
    let step = system.step();
    let fold = |v: &[f64]| -> Vec<f64> {
        (0..step)
            .map(|m| (0..system.support_length).map(|n| v[m + n * step]).sum())
            .collect()
    };
    Ok(PeriodizedG {
        grid_resolution: system.grid_resolution,
        g: fold(&system.psi),
        dg: fold(&system.dpsi),
        d_prime,
        moments: Some(system.moments),
        derivative_method: system.derivative_method,
    })
}

impl PeriodizedG {
    /// Wraps externally supplied samples (for example an analytic oracle).
    pub fn from_samples(g: Vec<f64>, dg: Vec<f64>, d_prime: usize) -> Result<Self> {
        let n = g.len();
        if n < 64 || !n.is_power_of_two() || dg.len() != n {
            return param("G samples must have equal power-of-two length >= 64");
        }
        if d_prime == 0 {
            return param("d' must be at least 1");
        }
        Ok(Self {
            grid_resolution: n.trailing_zeros(),
            g,
            dg,
            d_prime,
            moments: None,
            derivative_method: DerivativeMethod::Refinement,
        })
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.g.len() as f64
    }

    fn interp(samples: &[f64], t: f64) -> f64 {
        let n = samples.len();
        let u = t.rem_euclid(1.0) * n as f64;
        let i = (u.floor() as usize).min(n - 1);
        let f = u - i as f64;
        if f == 0.0 {
            samples[i]
        } else {
            samples[i] * (1.0 - f) + samples[(i + 1) % n] * f
        }
    }

    /// `G(t)` for any real `t` by periodic linear interpolation.
    pub fn eval(&self, t: f64) -> f64 {
        Self::interp(&self.g, t)
    }

    /// `G'(t)` by periodic linear interpolation.
    pub fn eval_derivative(&self, t: f64) -> f64 {
        Self::interp(&self.dg, t)
    }

    /// `G_{d'}(t) = Π_i G(t_i)`.
    pub fn eval_tensor(&self, t: &[f64]) -> f64 {
        t.iter().map(|&ti| self.eval(ti)).product()
    }

    /// `G_{d'}(2^j a)` with `a ∈ [0,1)^{d'}`.
    pub fn eval_tensor_at_scale(&self, j: u32, a: &[f64]) -> f64 {
        let s = (1u64 << j) as f64;
        a.iter()
            .map(|&ai| self.eval((ai * s).rem_euclid(1.0)))
            .product()
    }

    /// Mean of the samples, which is the exact integral of the interpolant.
    pub fn mean(&self) -> f64 {
        self.g.iter().sum::<f64>() / self.g.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.g.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
