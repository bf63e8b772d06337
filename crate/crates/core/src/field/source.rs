use super::besov::BesovParams;
use super::index::decode_position;

/// Read access to a truncated coefficient field `c_λ`, `1 ≤ j ≤ j_max`.
pub trait CoeffSource: Send + Sync {
    fn dim(&self) -> usize;

    fn j_max(&self) -> u32;

    /// Besov parameters the field is attached to, if any.
    fn params(&self) -> Option<BesovParams> {
        None
    }

    /// `c_{(j,k,l)}`; zero for indices the field does not carry.
    fn coeff(&self, j: u32, k: &[u64], l: u32) -> f64;

    /// Calls `f(k, l, c)` for every nonzero coefficient at scale `j`.
    ///
    /// The default enumerates every index, which is only practical for small
    /// `j·dim`; sparse and structured fields override it.
    fn for_each_nonzero(&self, j: u32, f: &mut dyn FnMut(&[u64], u32, f64)) {
        if j == 0 || j > self.j_max() {
            return;
        }
        let dim = self.dim();
        let count = 1u64 << (j as usize * dim);
        for pos in 0..count {
            let k = decode_position(j, pos, dim);
            for l in 1..(1u32 << dim) {
                let c = self.coeff(j, &k, l);
                if c != 0.0 {
                    f(&k, l, c);
                }
            }
        }
    }

    /// `Σ_{k,l} |c_{(j,k,l)}|^p` at scale `j`.
    fn energy_at_scale(&self, j: u32, p: f64) -> f64 {
        let mut acc = 0.0;
        self.for_each_nonzero(j, &mut |_, _, c| acc += c.abs().powf(p));
        acc
    }
}

/// Pointwise linear combination `Σ_i w_i f_i` of fields of equal dimension.
pub struct Combination<'a> {
    terms: Vec<(f64, &'a dyn CoeffSource)>,
    dim: usize,
    j_max: u32,
}

impl<'a> Combination<'a> {
    /// Panics if the terms disagree on dimension or the list is empty.
    pub fn new(terms: Vec<(f64, &'a dyn CoeffSource)>) -> Self {
        assert!(!terms.is_empty(), "combination needs at least one term");
        let dim = terms[0].1.dim();
        assert!(
            terms.iter().all(|(_, f)| f.dim() == dim),
            "combination terms must share a dimension"
        );
        let j_max = terms.iter().map(|(_, f)| f.j_max()).max().unwrap_or(0);
        Self { terms, dim, j_max }
    }
}

impl CoeffSource for Combination<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn j_max(&self) -> u32 {
        self.j_max
    }

    fn params(&self) -> Option<BesovParams> {
        self.terms[0].1.params()
    }

    fn coeff(&self, j: u32, k: &[u64], l: u32) -> f64 {
        self.terms
            .iter()
            .filter(|(_, f)| j <= f.j_max())
            .map(|(w, f)| w * f.coeff(j, k, l))
            .sum()
    }
}
