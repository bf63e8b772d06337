use serde::{Deserialize, Serialize};

use super::periodized::PeriodizedG;
use crate::error::{Error, Result};

/// Bisection depth below the sample spacing: brackets end at width `2^{-(r+4)}`.
const BISECTION_STEPS: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HnVerdict {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroBracket {
    pub lo: f64,
    pub hi: f64,
    /// Smallest `|G'|` of the Hermite interpolant over the bracket.
    pub min_abs_derivative: f64,
}

/// Outcome of the simple-zero certification of `G`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HnReport {
    pub grid_resolution: u32,
    pub derivative_floor: f64,
    pub zero_brackets: Vec<ZeroBracket>,
    pub zero_count: usize,
    pub min_derivative_at_zeros: f64,
    /// Intervals where `|G|` dips below the interpolation noise without a
    /// sign change; any entry makes the verdict inconclusive.
    pub unresolved: Vec<(f64, f64)>,
    pub verdict: HnVerdict,
    /// `min_derivative_at_zeros − derivative_floor`.
    pub margin: f64,
}

/// Brackets the zeros of `G` on `[0,1)` and checks that `|G'|` stays above
/// `derivative_floor` on each bracket.
///
/// Zeros are located by sign changes of the samples and refined by bisection
/// on the cubic Hermite interpolant of `(G, G')`. An interval whose interior
/// minimum of `|G|` falls below the local interpolation error without a sign
/// change cannot be resolved at this resolution and yields
/// [`HnVerdict::Inconclusive`], never a false `Holds`.
pub fn check_hypothesis_hn(g: &PeriodizedG, derivative_floor: f64) -> Result<HnReport> {
    if let Some(m) = g.moments {
        if m < 2 {
            return Err(Error::UnsupportedWavelet(format!(
                "wavelet with {m} vanishing moment(s) is not C^1; G' is undefined"
            )));
        }
    }
    let n = g.len();
    let h = g.spacing();
    let scale = g.max_abs().max(1e-300);
    let mut brackets = Vec::new();
    let mut unresolved = Vec::new();

    for m in 0..n {
        let m1 = (m + 1) % n;
        let cubic = Hermite {
            g0: g.g[m],
            g1: g.g[m1],
            d0: g.dg[m] * h,
            d1: g.dg[m1] * h,
        };
        let t0 = m as f64 * h;
        if cubic.g0 == 0.0 {
            brackets.push(ZeroBracket {
                lo: t0,
                hi: t0,
                min_abs_derivative: g.dg[m].abs(),
            });
            continue;
        }
        if cubic.g1 == 0.0 {
            continue;
        }
        if cubic.g0.signum() != cubic.g1.signum() {
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..BISECTION_STEPS {
                let mid = 0.5 * (lo + hi);
                if cubic.value(mid).signum() == cubic.g0.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let ds = [
                cubic.slope(lo),
                cubic.slope(0.5 * (lo + hi)),
                cubic.slope(hi),
            ];
            let min_d = if ds.iter().all(|d| *d > 0.0) || ds.iter().all(|d| *d < 0.0) {
                ds.iter().fold(f64::INFINITY, |a, d| a.min(d.abs())) / h
            } else {
                0.0
            };
            brackets.push(ZeroBracket {
                lo: t0 + lo * h,
                hi: t0 + hi * h,
                min_abs_derivative: min_d,
            });
        } else {
            // No sign change: look for an interior dip of |G| below the
            // interpolation error of this cell.
            let m_prev = (m + n - 1) % n;
            let m2 = (m + 2) % n;
            let curvature = [
                g.dg[m1] - g.dg[m],
                g.dg[m] - g.dg[m_prev],
                g.dg[m2] - g.dg[m1],
            ]
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()))
                / h;
            let tol = 2.0 * h * h * curvature / 8.0 + 1e-12 * scale;
            let (u_min, v_min) = cubic.interior_min_abs(32);
            if u_min > 0.0 && u_min < 1.0 && v_min <= tol {
                unresolved.push((t0, t0 + h));
            }
        }
    }

    let zero_count = brackets.len();
    let min_d = brackets
        .iter()
        .fold(f64::INFINITY, |a, b| a.min(b.min_abs_derivative));
    let verdict = if brackets
        .iter()
        .any(|b| b.min_abs_derivative < derivative_floor)
    {
        HnVerdict::Fails
    } else if !unresolved.is_empty() {
        HnVerdict::Inconclusive
    } else {
        HnVerdict::Holds
    };
    let min_derivative_at_zeros = if zero_count == 0 { 0.0 } else { min_d };
    Ok(HnReport {
        grid_resolution: g.grid_resolution,
        derivative_floor,
        zero_brackets: brackets,
        zero_count,
        min_derivative_at_zeros,
        unresolved,
        verdict,
        margin: if zero_count == 0 {
            f64::INFINITY
        } else {
            min_d - derivative_floor
        },
    })
}

/// Cubic Hermite interpolant on `[0,1]` with end slopes already scaled by `h`.
struct Hermite {
    g0: f64,
    g1: f64,
    d0: f64,
    d1: f64,
}

impl Hermite {
    fn value(&self, u: f64) -> f64 {
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * self.g0
            + (u3 - 2.0 * u2 + u) * self.d0
            + (-2.0 * u3 + 3.0 * u2) * self.g1
            + (u3 - u2) * self.d1
    }

    /// Derivative with respect to `u`.
    fn slope(&self, u: f64) -> f64 {
        let u2 = u * u;
        (6.0 * u2 - 6.0 * u) * self.g0
            + (3.0 * u2 - 4.0 * u + 1.0) * self.d0
            + (-6.0 * u2 + 6.0 * u) * self.g1
            + (3.0 * u2 - 2.0 * u) * self.d1
    }

    /// Location and value of the smallest `|p|` on a uniform probe of `[0,1]`.
    fn interior_min_abs(&self, probes: usize) -> (f64, f64) {
        let mut best = (0.0, self.g0.abs());
        for i in 1..=probes {
            let u = i as f64 / probes as f64;
            let v = self.value(u).abs();
            if v < best.1 {
                best = (u, v);
            }
        }
        best
    }
}
