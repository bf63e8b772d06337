use std::collections::BTreeMap;

use super::besov::BesovParams;
use super::index::{decode_position, encode_position, CoeffIndex};
use super::source::CoeffSource;
use crate::error::{param, Result};

/// Dense storage kicks in above this fill ratio, sparse below half of it.
const DENSE_FILL: f64 = 0.25;

/// Largest number of entries [`CoeffField::materialize`] will copy.
pub const MAX_MATERIALIZED: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq)]
enum Bucket {
    Sparse(BTreeMap<u64, f64>),
    Dense { values: Vec<f64>, nnz: usize },
}

/// Materialised coefficient field with canonical storage: no stored zeros,
/// one bucket per `(j, l)`, dense when more than a quarter filled.
#[derive(Debug, Clone)]
pub struct CoeffField {
    pub params: BesovParams,
    j_max: u32,
    buckets: BTreeMap<(u32, u32), Bucket>,
}

impl CoeffField {
    pub fn new(params: BesovParams, j_max: u32) -> Result<Self> {
        if j_max == 0 || j_max as usize * params.dim > 48 {
            return param(format!(
                "j_max·dim must be in 1..=48, got {}",
                j_max as usize * params.dim
            ));
        }
        Ok(Self {
            params,
            j_max,
            buckets: BTreeMap::new(),
        })
    }

    /// Copies every nonzero coefficient of `source`.
    pub fn materialize(source: &dyn CoeffSource, params: BesovParams) -> Result<Self> {
        if source.dim() != params.dim {
            return param("source dimension does not match parameters");
        }
        let mut out = Self::new(params, source.j_max())?;
        for j in 1..=source.j_max() {
            let mut entries = Vec::new();
            let mut overflow = false;
            source.for_each_nonzero(j, &mut |k, l, c| {
                if out.len() + entries.len() < MAX_MATERIALIZED {
                    entries.push((k.to_vec(), l, c));
                } else {
                    overflow = true;
                }
            });
            if overflow {
                return param(format!(
                    "field has more than {MAX_MATERIALIZED} nonzero coefficients; lower j_max"
                ));
            }
            for (k, l, c) in entries {
                out.insert(j, &k, l, c)?;
            }
        }
        Ok(out)
    }

    fn scale_len(&self, j: u32) -> usize {
        1usize << (j as usize * self.params.dim)
    }

    fn validate(&self, j: u32, k: &[u64], l: u32) -> Result<()> {
        let dim = self.params.dim;
        if j == 0 || j > self.j_max {
            return param(format!("scale {j} outside 1..={}", self.j_max));
        }
        if k.len() != dim || k.iter().any(|&c| c >> j != 0) {
            return param(format!("position {k:?} invalid at scale {j}"));
        }
        if l == 0 || l >> dim != 0 {
            return param(format!("type {l:#b} must be a nonzero {dim}-bit mask"));
        }
        Ok(())
    }

    /// Sets `c_{(j,k,l)} = value`; zero removes the entry.
    pub fn insert(&mut self, j: u32, k: &[u64], l: u32, value: f64) -> Result<()> {
        self.validate(j, k, l)?;
        let pos = encode_position(j, k);
        let len = self.scale_len(j);
        let bucket = self
            .buckets
            .entry((j, l))
            .or_insert_with(|| Bucket::Sparse(BTreeMap::new()));
        match bucket {
            Bucket::Sparse(map) => {
                if value == 0.0 {
                    map.remove(&pos);
                } else {
                    map.insert(pos, value);
                }
                if map.len() as f64 > DENSE_FILL * len as f64 {
                    let mut values = vec![0.0; len];
                    for (&p, &v) in map.iter() {
                        values[p as usize] = v;
                    }
                    let nnz = map.len();
                    *bucket = Bucket::Dense { values, nnz };
                }
            }
            Bucket::Dense { values, nnz } => {
                let old = values[pos as usize];
                values[pos as usize] = value;
                match (old != 0.0, value != 0.0) {
                    (false, true) => *nnz += 1,
                    (true, false) => *nnz -= 1,
                    _ => {}
                }
                if (*nnz as f64) < 0.5 * DENSE_FILL * len as f64 {
                    let map = values
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| **v != 0.0)
                        .map(|(p, v)| (p as u64, *v))
                        .collect();
                    *bucket = Bucket::Sparse(map);
                }
            }
        }
        if let Some(Bucket::Sparse(m)) = self.buckets.get(&(j, l)) {
            if m.is_empty() {
                self.buckets.remove(&(j, l));
            }
        }
        Ok(())
    }

    pub fn get(&self, j: u32, k: &[u64], l: u32) -> f64 {
        match self.buckets.get(&(j, l)) {
            None => 0.0,
            Some(b) => {
                if k.iter().any(|&c| c >> j != 0) {
                    return 0.0;
                }
                let pos = encode_position(j, k);
                match b {
                    Bucket::Sparse(m) => m.get(&pos).copied().unwrap_or(0.0),
                    Bucket::Dense { values, .. } => values[pos as usize],
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.buckets
            .values()
            .map(|b| match b {
                Bucket::Sparse(m) => m.len(),
                Bucket::Dense { nnz, .. } => *nnz,
            })
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether the `(j, l)` bucket is stored densely.
    pub fn is_dense(&self, j: u32, l: u32) -> bool {
        matches!(self.buckets.get(&(j, l)), Some(Bucket::Dense { .. }))
    }

    /// All nonzero entries in `(j, l, position)` order.
    pub fn entries(&self) -> Vec<(CoeffIndex, f64)> {
        let dim = self.params.dim;
        let mut out = Vec::with_capacity(self.len());
        for (&(j, l), b) in &self.buckets {
            let mut push = |pos: u64, v: f64| {
                out.push((
                    CoeffIndex {
                        j,
                        k: decode_position(j, pos, dim),
                        l,
                    },
                    v,
                ))
            };
            match b {
                Bucket::Sparse(m) => m.iter().for_each(|(&p, &v)| push(p, v)),
                Bucket::Dense { values, .. } => values
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .for_each(|(p, &v)| push(p as u64, v)),
            }
        }
        out
    }

    /// `t·field`.
    pub fn scaled(&self, t: f64) -> Self {
        let mut out = Self::new(self.params, self.j_max).expect("same shape");
        if t != 0.0 {
            for (idx, v) in self.entries() {
                out.insert(idx.j, &idx.k, idx.l, t * v)
                    .expect("valid index");
            }
        }
        out
    }
}

impl PartialEq for CoeffField {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
            && self.j_max == other.j_max
            && self.entries() == other.entries()
    }
}

impl CoeffSource for CoeffField {
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
        self.get(j, k, l)
    }

    fn for_each_nonzero(&self, j: u32, f: &mut dyn FnMut(&[u64], u32, f64)) {
        let dim = self.params.dim;
        for (&(jj, l), b) in self.buckets.range((j, 0)..(j + 1, 0)) {
            debug_assert_eq!(jj, j);
            match b {
                Bucket::Sparse(m) => {
                    for (&p, &v) in m {
                        f(&decode_position(j, p, dim), l, v);
                    }
                }
                Bucket::Dense { values, .. } => {
                    for (p, &v) in values.iter().enumerate() {
                        if v != 0.0 {
                            f(&decode_position(j, p as u64, dim), l, v);
                        }
                    }
                }
            }
        }
    }
}
