use super::besov::BesovParams;
use super::index::encode_position;
use super::source::CoeffSource;
use super::stored::CoeffField;
use crate::error::{param, Result};
use crate::stats::mix64;

pub const DEFAULT_DELTA: f64 = 0.01;

/// Rademacher field `c_λ = ξ_λ·j^{−(2/q+δ)}·2^{−(s−dim/p)j}·2^{−(dim/p)j}`.
///
/// Signs are a hash of `(seed, j, k, l)`, so the field is evaluated on demand
/// and never stored. `A_j·2^{...}` works out to `(2^dim − 1)·j^{−p(2/q+δ)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomField {
    params: BesovParams,
    j_max: u32,
    seed: u64,
    delta: f64,
    /// Multiplies every coefficient; `−1` flips all signs.
    sign: f64,
    /// `|c_λ|` by scale, index `j`.
    magnitudes: [f64; 41],
}

pub fn synthesize_random_field(params: BesovParams, j_max: u32, seed: u64) -> Result<RandomField> {
    RandomField::new(params, j_max, seed, DEFAULT_DELTA)
}

impl RandomField {
    pub fn new(params: BesovParams, j_max: u32, seed: u64, delta: f64) -> Result<Self> {
        if params.critical_gap() <= 0.0 {
            return param(format!(
                "random field needs s − dim/p > 0, got {}",
                params.critical_gap()
            ));
        }
        if j_max == 0 || j_max > 40 || !(delta >= 0.0) {
            return param("random field needs 1 ≤ j_max ≤ 40 and δ ≥ 0");
        }
        let q_term = if params.q.is_infinite() {
            0.0
        } else {
            2.0 / params.q
        };
        let mut magnitudes = [0.0; 41];
        for (j, m) in magnitudes.iter_mut().enumerate().skip(1) {
            *m = (j as f64).powf(-(q_term + delta)) * (-params.s * j as f64).exp2();
        }
        Ok(Self {
            params,
            j_max,
            seed,
            delta,
            sign: 1.0,
            magnitudes,
        })
    }

    pub fn negated(mut self) -> Self {
        self.sign = -self.sign;
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `|c_λ|` at scale `j`.
    pub fn magnitude(&self, j: u32) -> f64 {
        self.magnitudes.get(j as usize).copied().unwrap_or(0.0)
    }

    #[inline]
    fn sign_bit(&self, j: u32, pos: u64, l: u32) -> bool {
        let h = mix64(self.seed ^ mix64(((j as u64) << 32 | l as u64) ^ mix64(pos)));
        h >> 63 == 1
    }

    pub fn materialize(&self) -> Result<CoeffField> {
        CoeffField::materialize(self, self.params)
    }
}

impl CoeffSource for RandomField {
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
        if j == 0 || j > self.j_max || l == 0 || l >> self.params.dim != 0 {
            return 0.0;
        }
        let m = self.sign * self.magnitudes[j as usize];
        if self.sign_bit(j, encode_position(j, k), l) {
            -m
        } else {
            m
        }
    }

    fn energy_at_scale(&self, j: u32, p: f64) -> f64 {
        if j == 0 || j > self.j_max {
            return 0.0;
        }
        let dim = self.params.dim as i32;
        let count = ((1u64 << dim) - 1) as f64 * 2f64.powi(j as i32 * dim);
        count * self.magnitude(j).powf(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_energy_matches_enumeration() {
        let params = BesovParams::new(1.5, 2.0, 2.0, 2).unwrap();
        let f = synthesize_random_field(params, 5, 7).unwrap();
        for j in 1..=5 {
            let mut direct = 0.0;
            f.for_each_nonzero(j, &mut |_, _, c| direct += c.abs().powf(2.0));
            let closed = f.energy_at_scale(j, 2.0);
            assert!((direct - closed).abs() <= 1e-12 * closed);
        }
    }

    #[test]
    fn signs_are_balanced() {
        let params = BesovParams::new(2.0, 2.0, 2.0, 1).unwrap();
        let f = synthesize_random_field(params, 16, 3).unwrap();
        let mut plus = 0usize;
        f.for_each_nonzero(16, &mut |_, _, c| plus += (c > 0.0) as usize);
        let frac = plus as f64 / 65536.0;
        assert!((frac - 0.5).abs() < 0.01, "{frac}");
    }

    #[test]
    fn rejects_subcritical_smoothness() {
        let params = BesovParams::new(0.5, 2.0, 2.0, 2).unwrap();
        assert!(synthesize_random_field(params, 4, 0).is_err());
    }
}
