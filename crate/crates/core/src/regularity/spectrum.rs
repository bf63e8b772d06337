use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::TraceField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    /// Number of scales averaged.
    pub window: u32,
    /// Finest scales of the range left out of the window.
    pub exclude_finest: u32,
    pub bin_width: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            window: 5,
            exclude_finest: 2,
            bin_width: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumBin {
    pub h: f64,
    /// Mean of `log2(count_j)/j` over window scales with a nonzero count;
    /// `−∞` when the bin is empty at every scale.
    pub dhat: f64,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    pub d: usize,
    pub scales: Vec<u32>,
    pub bin_width: f64,
    pub bins: Vec<SpectrumBin>,
    /// Coarse exponents `h_λ` per window scale, sorted ascending.
    #[serde(skip)]
    pub exponents: Vec<Vec<f64>>,
}

impl SpectrumEstimate {
    /// Fraction of positions with `h_λ < h`, averaged over the window.
    pub fn mass_below(&self, h: f64) -> f64 {
        let total: f64 = self
            .exponents
            .iter()
            .map(|e| e.partition_point(|&v| v < h) as f64 / e.len() as f64)
            .sum();
        total / self.exponents.len() as f64
    }

    pub fn bin_at(&self, h: f64) -> Option<&SpectrumBin> {
        self.bins
            .iter()
            .find(|b| (b.h - h).abs() < 1e-9 * (1.0 + h.abs()))
    }
}

/// `sup` of `|d_λ'|` over `λ' ⊆ λ` (both bands), scale by scale.
fn subtree_leaders(tf: &TraceField) -> Vec<Vec<f64>> {
    let d = tf.d;
    let mut out: Vec<Vec<f64>> = vec![Vec::new(); tf.j_max as usize];
    out[tf.j_max as usize - 1] = tf.magnitudes(tf.j_max);
    for j in (1..tf.j_max).rev() {
        let mut lead = tf.magnitudes(j);
        let finer = &out[j as usize];
        // Children of k are 2k + e, e ∈ {0,1}^d, spread over the coordinate blocks.
        for (pos, &v) in finer.iter().enumerate() {
            let mut parent = 0usize;
            for i in 0..d {
                let c = (pos >> ((j as usize + 1) * i)) & ((1 << (j + 1)) - 1);
                parent |= (c >> 1) << (j as usize * i);
            }
            if v > lead[parent] {
                lead[parent] = v;
            }
        }
        out[j as usize - 1] = lead;
    }
    out
}

pub fn estimate_spectrum(
    tf: &TraceField,
    scales: std::ops::RangeInclusive<u32>,
    h_grid: &[f64],
) -> Result<SpectrumEstimate> {
    estimate_spectrum_with(tf, scales, h_grid, &SpectrumOptions::default())
}

/// Coarse-grained histogram estimator.
///
/// Per scale, `h_λ = −log2(L_λ)/j` with `L_λ` the subtree leader; each bin
/// `(h − w/2, h + w/2]` gets `log2(count)/j`, averaged over the window of
/// `opts.window` scales ending `opts.exclude_finest` above the finest.
pub fn estimate_spectrum_with(
    tf: &TraceField,
    scales: std::ops::RangeInclusive<u32>,
    h_grid: &[f64],
    opts: &SpectrumOptions,
) -> Result<SpectrumEstimate> {
    let lo = (*scales.start()).max(1);
    let hi = (*scales.end()).min(tf.j_max);
    let usable = (lo..=hi)
        .filter(|&j| tf.scale(j).iter().any(|&v| v != 0.0))
        .count();
    if usable < 6 || hi < lo + opts.exclude_finest + opts.window - 1 {
        return Err(Error::InsufficientData(format!(
            "{usable} usable scales in {lo}..={hi}; the spectrum needs 6 and a full window"
        )));
    }
    let top = hi - opts.exclude_finest;
    let window: Vec<u32> = (top + 1 - opts.window..=top).collect();
    let leaders = subtree_leaders(tf);
    let exponents: Vec<Vec<f64>> = window
        .iter()
        .map(|&j| {
            let mut e: Vec<f64> = leaders[j as usize - 1]
                .iter()
                .map(|&l| {
                    if l > 0.0 {
                        -l.log2() / j as f64
                    } else {
                        f64::INFINITY
                    }
                })
                .collect();
            e.sort_by(f64::total_cmp);
            e
        })
        .collect();
    let half = opts.bin_width / 2.0;
    let bins = h_grid
        .iter()
        .map(|&h| {
            let counts: Vec<u64> = exponents
                .iter()
                .map(|e| {
                    let a = e.partition_point(|&v| v <= h - half);
                    let b = e.partition_point(|&v| v <= h + half);
                    (b - a) as u64
                })
                .collect();
            let terms: Vec<f64> = window
                .iter()
                .zip(&counts)
                .filter(|(_, &c)| c > 0)
                .map(|(&j, &c)| (c as f64).log2() / j as f64)
                .collect();
            let dhat = if terms.is_empty() {
                f64::NEG_INFINITY
            } else {
                terms.iter().sum::<f64>() / terms.len() as f64
            };
            SpectrumBin { h, dhat, counts }
        })
        .collect();
    Ok(SpectrumEstimate {
        d: tf.d,
        scales: window,
        bin_width: opts.bin_width,
        bins,
        exponents,
    })
}

/// `h,dhat` with one row per bin; empty bins print `-inf`.
pub fn write_spectrum_csv<W: Write>(w: &mut W, est: &SpectrumEstimate) -> Result<()> {
    writeln!(w, "h,dhat")?;
    for b in &est.bins {
        writeln!(w, "{},{}", b.h, b.dhat)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leaders_take_descendant_maxima() {
        let mut tf = TraceField::zeros(1, 3, vec![0.5]).unwrap();
        tf.set(3, &[5], 1, -4.0).unwrap();
        tf.set(1, &[0], 0, 1.0).unwrap();
        let l = subtree_leaders(&tf);
        assert_eq!(l[0], vec![1.0, 4.0]);
        assert_eq!(l[1], vec![0.0, 0.0, 4.0, 0.0]);
    }

    #[test]
    fn two_dimensional_parents() {
        let mut tf = TraceField::zeros(2, 2, vec![]).unwrap();
        tf.set(2, &[3, 1], 2, 7.0).unwrap();
        let l = subtree_leaders(&tf);
        // (3,1) at scale 2 has parent (1,0) at scale 1, position 1.
        assert_eq!(l[0], vec![0.0, 7.0, 0.0, 0.0]);
    }
}
