use serde::{Deserialize, Serialize};

use super::source::CoeffSource;
use crate::error::{param, Result};

/// Besov smoothness `s`, integrability `p`, fine index `q` (`∞` allowed) and
/// the dimension of the torus the field lives on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub dim: usize,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, q: f64, dim: usize) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return param(format!("p must be in (0, ∞), got {p}"));
        }
        if !(q > 0.0) {
            return param(format!("q must be in (0, ∞], got {q}"));
        }
        if dim == 0 || !s.is_finite() {
            return param("dimension must be positive and s finite");
        }
        Ok(Self { s, p, q, dim })
    }

    /// `s − dim/p`, the exponent governing continuity of the elements.
    pub fn critical_gap(&self) -> f64 {
        self.s - self.dim as f64 / self.p
    }
}

/// `A_j = 2^{j(sp−dim)} Σ_{k,l} |c_λ|^p` for `j = 1..=j_max`.
pub fn per_scale_energy(field: &dyn CoeffSource, s: f64, p: f64) -> Vec<f64> {
    let dim = field.dim() as f64;
    (1..=field.j_max())
        .map(|j| (j as f64 * (s * p - dim)).exp2() * field.energy_at_scale(j, p))
        .collect()
}

/// `(Σ_j A_j^{q/p})^{1/q}`, or `sup_j A_j^{1/p}` when `q = ∞`.
pub fn quasinorm_from_energies(energies: &[f64], p: f64, q: f64) -> f64 {
    if q.is_infinite() {
        energies.iter().fold(0.0f64, |m, a| m.max(a.powf(1.0 / p)))
    } else {
        energies
            .iter()
            .map(|a| a.powf(q / p))
            .sum::<f64>()
            .powf(1.0 / q)
    }
}

pub fn besov_quasinorm(field: &dyn CoeffSource, params: &BesovParams) -> Result<f64> {
    if field.dim() != params.dim {
        return param(format!(
            "field dimension {} does not match parameter dimension {}",
            field.dim(),
            params.dim
        ));
    }
    Ok(quasinorm_from_energies(
        &per_scale_energy(field, params.s, params.p),
        params.p,
        params.q,
    ))
}

/// Norms compared by the embeddings `B^s_{p,q} ⊂ B^s_{p,q'}` (`q < q'`) and
/// `B^s_{p,q'} ⊂ B^{s−ε}_{p,q}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingCheck {
    pub norm_s_qprime: f64,
    pub norm_s_q: f64,
    pub norm_s_minus_eps_q: f64,
    /// `c·‖f‖_{s,p,q'}` with `c = (Σ_{j≥1} 2^{−εqj})^{1/q}`.
    pub bound_s_minus_eps: f64,
}

impl EmbeddingCheck {
    pub fn holds(&self) -> bool {
        let slack = 1e-12;
        self.norm_s_qprime <= self.norm_s_q * (1.0 + slack)
            && self.norm_s_minus_eps_q <= self.bound_s_minus_eps * (1.0 + slack)
    }
}

pub fn embedding_check(
    field: &dyn CoeffSource,
    s: f64,
    p: f64,
    q: f64,
    q_prime: f64,
    eps: f64,
) -> Result<EmbeddingCheck> {
    if !(q < q_prime) || !(eps > 0.0) {
        return param("embedding check needs q < q' and ε > 0");
    }
    let a = per_scale_energy(field, s, p);
    let a_eps = per_scale_energy(field, s - eps, p);
    let norm_s_qprime = quasinorm_from_energies(&a, p, q_prime);
    let c = if q.is_infinite() {
        1.0
    } else {
        let r = (-eps * q).exp2();
        (r / (1.0 - r)).powf(1.0 / q)
    };
    Ok(EmbeddingCheck {
        norm_s_qprime,
        norm_s_q: quasinorm_from_energies(&a, p, q),
        norm_s_minus_eps_q: quasinorm_from_energies(&a_eps, p, q),
        bound_s_minus_eps: c * norm_s_qprime,
    })
}
