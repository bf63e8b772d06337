//! The saturating function `g`, its probe family and their traces.
//!
//! With `D = d + d'`, `g` carries
//! `e_{(j,(k,k'),(l,l'))} = j^{−(q+2)/(qp)}·2^{(d/p−s)j}·2^{−(d/p)J(k)}` for
//! `l ≠ 0^d`, `l' = 1^{d'}` and every `k'`, where `J(k)` is the irreducible
//! level of `k·2^{−j}`. Member `i` of the family moves each cube of `g` to
//! its `i`-th subcube `J₀` scales finer, so the members have disjoint
//! supports and each trace is `e·G_{d'}(2^j a)`.

mod family;
mod lower_bound;

pub use family::{
    probe_trace_closed_form, write_family, ProbeFamily, ProbeManifest, ProbeMember, ProbeSum,
};
pub use lower_bound::{verify_lower_bound, LowerBoundReport, LowerBoundRow};

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::field::{irreducible_level, BesovParams, CoeffSource};

/// `H(α) = s − d/p + d/(αp)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HAlpha {
    pub s: f64,
    pub p: f64,
    pub d: usize,
    pub alpha: f64,
}

impl HAlpha {
    pub fn new(s: f64, p: f64, d: usize, alpha: f64) -> Result<Self> {
        if !(alpha >= 1.0) {
            return param(format!("α must be at least 1, got {alpha}"));
        }
        Ok(Self { s, p, d, alpha })
    }

    pub fn value(&self) -> f64 {
        let dp = self.d as f64 / self.p;
        self.s - dp + dp / self.alpha
    }
}

/// Smallest `J₀ ≥ 1` with `d − 2^{dJ₀}(γ − H) < 0`.
pub fn choose_j0(d: usize, gamma: f64, h: HAlpha) -> Result<u32> {
    let gap = gamma - h.value();
    if !(gap > 0.0) {
        return param(format!("γ = {gamma} must exceed H(α) = {}", h.value()));
    }
    (1..=(60 / d.max(1)) as u32)
        .find(|&j0| d as f64 - ((d as u32 * j0) as f64).exp2() * gap < 0.0)
        .ok_or_else(|| crate::Error::Parameter(format!("γ − H(α) = {gap} needs J₀ beyond range")))
}

/// The function `g` as a procedural coefficient field on `T^D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeField {
    pub params: BesovParams,
    pub d: usize,
    pub j_max: u32,
}

impl ProbeField {
    pub fn new(params: BesovParams, d: usize, j_max: u32) -> Result<Self> {
        if d == 0 || d >= params.dim {
            return param(format!("need 1 ≤ d < D, got d = {d}, D = {}", params.dim));
        }
        if params.critical_gap() <= 0.0 {
            return param(format!(
                "probe construction needs s − D/p > 0, got {}",
                params.critical_gap()
            ));
        }
        if j_max == 0 || j_max > 60 {
            return param("j_max must be in 1..=60");
        }
        Ok(Self { params, d, j_max })
    }

    pub fn d_prime(&self) -> usize {
        self.params.dim - self.d
    }

    /// `j^{−(q+2)/(qp)}·2^{(d/p−s)j}`, the part of `e` that does not depend on `k`.
    fn amplitude(&self, j: u32) -> f64 {
        let BesovParams { s, p, q, .. } = self.params;
        let jf = j as f64;
        let log_term = if q.is_infinite() {
            1.0 / p
        } else {
            (q + 2.0) / (q * p)
        };
        jf.powf(-log_term) * ((self.d as f64 / p - s) * jf).exp2()
    }

    /// Common value of `e_{(j,(k,k'),(l,1^{d'}))}` for `l ≠ 0^d`; zero at `k = 0`.
    pub fn coefficient(&self, j: u32, k: &[u64]) -> f64 {
        if j == 0 || j > self.j_max {
            return 0.0;
        }
        match irreducible_level(j, k) {
            None => 0.0,
            Some(level) => {
                self.amplitude(j) * (-(self.d as f64 / self.params.p) * level as f64).exp2()
            }
        }
    }

    /// `Σ_{k ≠ 0} |e_{j,k}|^p` over the `d`-dimensional positions only.
    pub(crate) fn position_energy(&self, j: u32, p: f64) -> f64 {
        if j == 0 || j > self.j_max {
            return 0.0;
        }
        // (2^d − 1)·2^{d(J−1)} positions sit at irreducible level J.
        let d = self.d as i32;
        let dp = self.d as f64 / self.params.p;
        let levels: f64 = (1..=j as i32)
            .map(|level| {
                let count = ((1u64 << d) - 1) as f64 * 2f64.powi(d * (level - 1));
                count * (-dp * level as f64 * p).exp2()
            })
            .sum();
        self.amplitude(j).powf(p) * levels
    }

    /// `A_j = 2^{j(sp−D)}·Σ|e_λ|^p`.
    pub fn a_j(&self, j: u32) -> f64 {
        let BesovParams { s, p, dim, .. } = self.params;
        (j as f64 * (s * p - dim as f64)).exp2() * self.energy_at_scale(j, p)
    }

    fn type_ok(&self, l: u32) -> bool {
        let low = (1u32 << self.d) - 1;
        l & low != 0 && l >> self.d == (1u32 << self.d_prime()) - 1
    }
}

impl CoeffSource for ProbeField {
    fn dim(&self) -> usize {
        self.params.dim
    }

    fn j_max(&self) -> u32 {
        self.j_max
    }

    fn params(&self) -> Option<BesovParams> {
        Some(self.params)
    }

    fn coeff(&self, j: u32, k: &[u64], l: u32) -> f64 {
        if !self.type_ok(l) {
            return 0.0;
        }
        self.coefficient(j, &k[..self.d])
    }

    fn for_each_nonzero(&self, j: u32, f: &mut dyn FnMut(&[u64], u32, f64)) {
        if j == 0 || j > self.j_max {
            return;
        }
        let dim = self.params.dim;
        let high = ((1u32 << self.d_prime()) - 1) << self.d;
        let mut k = vec![0u64; dim];
        for pos in 0..1u64 << (j as usize * self.d) {
            let kd = crate::field::decode_position(j, pos, self.d);
            let e = self.coefficient(j, &kd);
            if e == 0.0 {
                continue;
            }
            k[..self.d].copy_from_slice(&kd);
            for pos2 in 0..1u64 << (j as usize * self.d_prime()) {
                let kp = crate::field::decode_position(j, pos2, self.d_prime());
                k[self.d..].copy_from_slice(&kp);
                for l in 1..(1u32 << self.d) {
                    f(&k, l | high, e);
                }
            }
        }
    }

    fn energy_at_scale(&self, j: u32, p: f64) -> f64 {
        let types = ((1u64 << self.d) - 1) as f64;
        let slices = ((j as usize * self.d_prime()) as f64).exp2();
        types * slices * self.position_energy(j, p)
    }
}
