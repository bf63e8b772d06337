//! Restriction of a `D`-variate field to the slice `x' = a`.
//!
//! With `D = d + d'`, a coefficient `c_{(j,(k,k'),(l,l'))}` contributes
//! `c·Π_i Ψ^{l'_i}(2^j a_i − k'_i)` (periodised) to the trace coefficient at
//! `(j, k, l)`. Types `l ∈ L^d` form the wavelet band; `l = 0^d` collects the
//! `l' ∈ L^{d'}` terms into a scaling band. The two bands are kept side by
//! side rather than re-expanded onto coarser wavelets.

mod io;

pub use io::{read_trace, write_trace};

use rayon::prelude::*;

use crate::error::{param, Error, Result};
use crate::field::{
    decode_position, encode_position, quasinorm_from_energies, reconstruct_at, BesovParams,
    CoeffSource,
};
use crate::wavelet::WaveletSystem;

/// Dense trace coefficients `d_λ(a)` for `1 ≤ j ≤ j_max`, both bands.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceField {
    pub a: Vec<f64>,
    pub d: usize,
    pub j_max: u32,
    /// Parameters of the source field with `dim` replaced by `d`.
    pub params: Option<BesovParams>,
    /// `scales[j−1][pos·2^d + l]`.
    scales: Vec<Vec<f64>>,
}

impl TraceField {
    pub fn zeros(d: usize, j_max: u32, a: Vec<f64>) -> Result<Self> {
        if d == 0 || j_max == 0 || j_max as usize * d > 30 {
            return param(format!(
                "trace field needs d ≥ 1 and 1 ≤ j_max·d ≤ 30, got d = {d}, j_max = {j_max}"
            ));
        }
        let scales = (1..=j_max)
            .map(|j| vec![0.0; (1usize << (j as usize * d)) << d])
            .collect();
        Ok(Self {
            a,
            d,
            j_max,
            params: None,
            scales,
        })
    }

    pub fn bands(&self) -> usize {
        1 << self.d
    }

    #[inline]
    fn slot(&self, j: u32, k: &[u64], l: u32) -> usize {
        ((encode_position(j, k) as usize) << self.d) | l as usize
    }

    /// `d_{(j,k,l)}(a)`; `l = 0` reads the scaling band. Zero out of range.
    pub fn get(&self, j: u32, k: &[u64], l: u32) -> f64 {
        if j == 0 || j > self.j_max || k.iter().any(|&c| c >> j != 0) || l >> self.d != 0 {
            return 0.0;
        }
        self.scales[j as usize - 1][self.slot(j, k, l)]
    }

    pub fn set(&mut self, j: u32, k: &[u64], l: u32, v: f64) -> Result<()> {
        if j == 0 || j > self.j_max || k.len() != self.d || k.iter().any(|&c| c >> j != 0) {
            return param(format!("trace index (j = {j}, k = {k:?}) out of range"));
        }
        if l >> self.d != 0 {
            return param(format!("trace type {l:#b} has more than {} bits", self.d));
        }
        let slot = self.slot(j, k, l);
        self.scales[j as usize - 1][slot] = v;
        Ok(())
    }

    /// Raw values at scale `j`, laid out as `[pos·2^d + l]`.
    pub fn scale(&self, j: u32) -> &[f64] {
        &self.scales[j as usize - 1]
    }

    pub fn scale_mut(&mut self, j: u32) -> &mut [f64] {
        &mut self.scales[j as usize - 1]
    }

    /// `max_l |d_{(j,pos,l)}|` over both bands, per position.
    pub fn magnitudes(&self, j: u32) -> Vec<f64> {
        self.scale(j)
            .chunks(self.bands())
            .map(|c| c.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .collect()
    }

    /// `Σ_{k,l} |d_λ|^p` at scale `j`, optionally without the scaling band.
    pub fn energy_at_scale(&self, j: u32, p: f64, include_scaling: bool) -> f64 {
        let first = if include_scaling { 0 } else { 1 };
        self.scale(j)
            .chunks(self.bands())
            .flat_map(|c| c[first..].iter())
            .map(|v| v.abs().powf(p))
            .sum()
    }

    /// Calls `f(j, k, l, value)` on every nonzero coefficient.
    pub fn for_each_nonzero(&self, mut f: impl FnMut(u32, &[u64], u32, f64)) {
        for j in 1..=self.j_max {
            for (slot, &v) in self.scale(j).iter().enumerate() {
                if v != 0.0 {
                    let k = decode_position(j, (slot >> self.d) as u64, self.d);
                    f(j, &k, (slot & (self.bands() - 1)) as u32, v);
                }
            }
        }
    }

    /// Restriction to scales `1..=j_max`.
    pub fn truncated(&self, j_max: u32) -> Self {
        let j_max = j_max.min(self.j_max);
        Self {
            scales: self.scales[..j_max as usize].to_vec(),
            j_max,
            ..self.clone()
        }
    }
}

/// Trace products `(k', [Π_i Ψ^{l'_i}(2^j a_i − k'_i)]_{l'})` at scale `j`.
fn slice_weights(system: &WaveletSystem, j: u32, a: &[f64]) -> Vec<(Vec<u64>, Vec<f64>)> {
    let per_axis: Vec<_> = a
        .iter()
        .map(|&ai| system.periodized_weights(j, ai))
        .collect();
    let dp = a.len();
    let mut out = vec![(Vec::with_capacity(dp), vec![1.0; 1 << dp])];
    for (i, axis) in per_axis.iter().enumerate() {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for (k, w) in &out {
            for (ki, wi) in axis {
                let mut k2 = k.clone();
                k2.push(*ki);
                let w2 = w
                    .iter()
                    .enumerate()
                    .map(|(lp, v)| v * wi[(lp >> i) & 1])
                    .collect();
                next.push((k2, w2));
            }
        }
        out = next;
    }
    out
}

fn check_request(source: &dyn CoeffSource, a: &[f64], d: usize) -> Result<()> {
    let big_d = source.dim();
    if d == 0 || d >= big_d {
        return param(format!(
            "trace dimension d = {d} must satisfy 1 ≤ d < D = {big_d}"
        ));
    }
    if a.len() != big_d - d {
        return param(format!(
            "offset has {} coordinates, expected {}",
            a.len(),
            big_d - d
        ));
    }
    if a.iter().any(|&ai| !(0.0..1.0).contains(&ai)) {
        return param("offset must lie in [0,1)^{d'}");
    }
    Ok(())
}

/// Both bands of the trace at a single scale, laid out as in [`TraceField`].
pub fn trace_scale(
    source: &dyn CoeffSource,
    system: &WaveletSystem,
    a: &[f64],
    d: usize,
    j: u32,
) -> Result<Vec<f64>> {
    check_request(source, a, d)?;
    if system.psi.is_empty() || system.phi.is_empty() {
        return Err(Error::Dependency(
            "wavelet system carries no samples".into(),
        ));
    }
    let bands = 1usize << d;
    let mut out = vec![0.0; (1usize << (j as usize * d)) << d];
    if j == 0 || j > source.j_max() {
        return Ok(out);
    }
    let weights = slice_weights(system, j, a);
    let mask = (1usize << j) - 1;
    let dim = source.dim();
    out.par_chunks_mut(bands).enumerate().for_each_init(
        || vec![0u64; dim],
        |kk, (pos, chunk)| {
            for (i, c) in kk[..d].iter_mut().enumerate() {
                *c = ((pos >> (j as usize * i)) & mask) as u64;
            }
            for (kp, w) in &weights {
                kk[d..].copy_from_slice(kp);
                for lp in 0..w.len() as u32 {
                    let wt = w[lp as usize];
                    if wt == 0.0 {
                        continue;
                    }
                    for l in 0..bands as u32 {
                        if l == 0 && lp == 0 {
                            continue;
                        }
                        let c = source.coeff(j, kk, l | (lp << d));
                        chunk[l as usize] += c * wt;
                    }
                }
            }
        },
    );
    Ok(out)
}

/// Trace of `source` on the slice `x' = a`, with `a ∈ [0,1)^{D−d}`.
pub fn trace(
    source: &dyn CoeffSource,
    system: &WaveletSystem,
    a: &[f64],
    d: usize,
) -> Result<TraceField> {
    check_request(source, a, d)?;
    let mut tf = TraceField::zeros(d, source.j_max(), a.to_vec())?;
    tf.params = source.params().map(|p| BesovParams { dim: d, ..p });
    for j in 1..=source.j_max() {
        tf.scales[j as usize - 1] = trace_scale(source, system, a, d, j)?;
    }
    Ok(tf)
}

/// `Σ_λ d_λ(a)·Ψ_λ(x)` over both bands.
pub fn reconstruct_trace_at(tf: &TraceField, system: &WaveletSystem, x: &[f64]) -> f64 {
    let d = tf.d;
    assert_eq!(x.len(), d, "point dimension must match the trace");
    let mut total = 0.0;
    for j in 1..=tf.j_max {
        for (k, w) in slice_weights(system, j, x) {
            for l in 0..tf.bands() as u32 {
                let c = tf.get(j, &k, l);
                if c != 0.0 {
                    total += c * w[l as usize];
                }
            }
        }
    }
    total
}

/// `|f(x, a) − f_a(x)|` computed from the two finite series.
pub fn pointwise_consistency(
    source: &dyn CoeffSource,
    system: &WaveletSystem,
    a: &[f64],
    x: &[f64],
) -> Result<f64> {
    let tf = trace(source, system, a, x.len())?;
    Ok(consistency_with(&tf, source, system, x))
}

/// Same as [`pointwise_consistency`] with a precomputed trace.
pub fn consistency_with(
    tf: &TraceField,
    source: &dyn CoeffSource,
    system: &WaveletSystem,
    x: &[f64],
) -> f64 {
    let mut point = x.to_vec();
    point.extend_from_slice(&tf.a);
    (reconstruct_at(source, system, &point) - reconstruct_trace_at(tf, system, x)).abs()
}

/// Per-scale energies `2^{j(sp−d)} Σ |d_λ|^p`, with or without the scaling band.
pub fn trace_energies(tf: &TraceField, s: f64, p: f64, include_scaling: bool) -> Vec<f64> {
    (1..=tf.j_max)
        .map(|j| {
            (j as f64 * (s * p - tf.d as f64)).exp2() * tf.energy_at_scale(j, p, include_scaling)
        })
        .collect()
}

/// Besov quasinorm over both bands (`l ∈ {0,1}^d`).
pub fn mixed_besov_norm(tf: &TraceField, s: f64, p: f64, q: f64) -> f64 {
    quasinorm_from_energies(&trace_energies(tf, s, p, true), p, q)
}

/// Besov quasinorm of the wavelet band alone.
pub fn wavelet_band_norm(tf: &TraceField, s: f64, p: f64, q: f64) -> f64 {
    quasinorm_from_energies(&trace_energies(tf, s, p, false), p, q)
}
