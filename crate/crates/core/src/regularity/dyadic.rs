use serde::{Deserialize, Serialize};

use crate::field::irreducible;
use crate::wavelet::PeriodizedG;

/// One irreducible approximant with `|x − K·2^{−J}| ≤ 2^{−αJ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicHit {
    pub level: u32,
    pub k: Vec<u64>,
    /// Sup-norm torus distance `|x − K·2^{−J}|`.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicWitness {
    pub x: Vec<f64>,
    pub alpha: f64,
    pub j_max: u32,
    /// Distinct irreducible hits, strictly increasing in level.
    pub hits: Vec<DyadicHit>,
    pub required_hits: usize,
    pub accepted: bool,
    /// `x` is itself dyadic at some level `≤ j_max`; α = ∞ by convention.
    pub dyadic: bool,
}

impl DyadicWitness {
    /// `min_n −log2|x − K_n 2^{−J_n}| / J_n`, the rate actually witnessed.
    pub fn witnessed_rate(&self) -> f64 {
        self.hits
            .iter()
            .filter(|h| h.level > 0)
            .map(|h| {
                if h.distance == 0.0 {
                    f64::INFINITY
                } else {
                    -h.distance.log2() / h.level as f64
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn torus_distance(x: &[f64], j: u32, k: &[u64]) -> f64 {
    let scale = (-(j as f64)).exp2();
    x.iter()
        .zip(k)
        .map(|(&xi, &ki)| {
            let t = (xi - ki as f64 * scale).rem_euclid(1.0);
            t.min(1.0 - t)
        })
        .fold(0.0, f64::max)
}

/// Hits needed before `x` counts as a member of `X^α` at depth `j_max`.
///
/// Rate-α witnesses have levels growing at least like `(α+1)^n`, so
/// `log2(j_max)/log2(α+1)` of them is the most a scan to `j_max` can show.
pub fn required_hits(alpha: f64, j_max: u32) -> usize {
    let n = ((j_max.max(2) as f64).log2() / (alpha + 1.0).log2()).ceil();
    (n as usize).max(2)
}

/// Scans `j = 1..=j_max` for dyadic approximants of `x` at rate `α`.
pub fn classify_dyadic(x: &[f64], alpha: f64, j_max: u32) -> DyadicWitness {
    assert!(alpha >= 1.0, "α must be at least 1");
    let mut hits: Vec<DyadicHit> = Vec::new();
    let mut dyadic = false;
    for j in 1..=j_max.min(62) {
        let size = (1u64 << j) as f64;
        let k: Vec<u64> = x
            .iter()
            .map(|&xi| ((xi.rem_euclid(1.0) * size).round() as u64) % (1u64 << j))
            .collect();
        let dist = torus_distance(x, j, &k);
        if dist == 0.0 {
            dyadic = true;
        }
        let irr = irreducible(j, &k);
        // Hits that reduce to a coarser level were already tested there.
        if irr.origin || irr.level != j {
            continue;
        }
        if dist <= (-alpha * j as f64).exp2() {
            hits.push(DyadicHit {
                level: j,
                k: irr.k,
                distance: dist,
            });
        }
    }
    let required = required_hits(alpha, j_max);
    DyadicWitness {
        x: x.to_vec(),
        alpha: if dyadic { f64::INFINITY } else { alpha },
        j_max,
        accepted: dyadic || hits.len() >= required,
        hits,
        required_hits: required,
        dyadic,
    }
}

/// `x = offset + Σ_n 2^{−m_n}` with `m_1 = m_start`, `m_{n+1} = ⌈α·m_n⌉ + 1`,
/// truncated at `2^{−max_level}`. The partial sums witness rate `α`.
pub fn lacunary_point(alpha: f64, m_start: u32, offset: f64, max_level: u32) -> (f64, Vec<u32>) {
    let mut levels = Vec::new();
    let mut m = m_start;
    let mut x = offset;
    while m <= max_level {
        x += (-(m as f64)).exp2();
        levels.push(m);
        m = (alpha * m as f64).ceil() as u32 + 1;
    }
    (x.rem_euclid(1.0), levels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A1Membership {
    pub accepted: bool,
    /// Smallest `j_a` with `|G_{d'}(2^j a)| > j^{−2d'}` on `[j_a, end]`.
    pub j_a: Option<u32>,
    pub failures: Vec<u32>,
    /// `min_{j ≥ j_a} j^{2d'}·|G_{d'}(2^j a)|`.
    pub margin: f64,
}

pub fn a1_membership(
    g: &PeriodizedG,
    a: &[f64],
    scales: std::ops::RangeInclusive<u32>,
) -> A1Membership {
    let dp = a.len() as i32;
    let checks: Vec<(u32, f64)> = scales
        .map(|j| {
            let v = g.eval_tensor_at_scale(j, a).abs() * (j as f64).powi(2 * dp);
            (j, v)
        })
        .collect();
    let failures: Vec<u32> = checks
        .iter()
        .filter(|(_, v)| *v <= 1.0)
        .map(|c| c.0)
        .collect();
    let j_a = match (failures.last(), checks.last()) {
        (_, None) => None,
        (None, Some(_)) => Some(checks[0].0),
        (Some(&f), Some(&(end, _))) if f < end => Some(f + 1),
        _ => None,
    };
    let margin = j_a.map_or(0.0, |ja| {
        checks
            .iter()
            .filter(|(j, _)| *j >= ja)
            .map(|c| c.1)
            .fold(f64::INFINITY, f64::min)
    });
    A1Membership {
        accepted: j_a.is_some(),
        j_a,
        failures,
        margin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_hit_at_boundary() {
        let (j0, k0, alpha) = (5u32, 11u64, 2.0);
        let x = k0 as f64 / 32.0 + (-alpha * j0 as f64).exp2();
        let w = classify_dyadic(&[x], alpha, 12);
        assert!(w.hits.iter().any(|h| h.level == j0 && h.k == vec![k0]));
    }

    #[test]
    fn lacunary_sum_is_witnessed() {
        let (x, levels) = lacunary_point(2.0, 1, 0.0, 48);
        assert_eq!(levels, vec![1, 3, 7, 15, 31]);
        let w = classify_dyadic(&[x], 2.0, 48);
        assert!(w.accepted);
        for m in levels {
            assert!(w.hits.iter().any(|h| h.level == m), "missing level {m}");
        }
        assert!(w.witnessed_rate() >= 2.0);
    }

    #[test]
    fn dyadic_points_are_flagged() {
        let w = classify_dyadic(&[0.375], 3.0, 20);
        assert!(w.dyadic && w.accepted);
        assert!(w.alpha.is_infinite());
    }

    #[test]
    fn thresholds() {
        assert_eq!(required_hits(1.0, 16), 4);
        assert_eq!(required_hits(4.0, 48), 3);
        assert_eq!(required_hits(8.0, 4), 2);
    }
}
