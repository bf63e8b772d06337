use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Check, Context, Experiment, ExperimentResult, Table};
use crate::error::Result;
use crate::field::{decode_position, irreducible_level};
use crate::probe::{choose_j0, HAlpha, ProbeFamily};
use crate::regularity::scaled_distance;
use crate::stats::{fit_line, kronecker_point};
use crate::trace::{trace, TraceField};

/// Per-member feasible `β_i` intervals for one point `x`, or `None` when some
/// coefficient violates the bound whatever `β` is.
fn feasible_box(
    tf: &TraceField,
    family: &ProbeFamily,
    g_value: f64,
    j1: u32,
    x: &[f64],
    gamma: f64,
    n_const: f64,
) -> Option<Vec<(f64, f64)>> {
    let d = tf.d;
    let bands = tf.bands();
    let mut boxes = vec![(f64::NEG_INFINITY, f64::INFINITY); family.size()];
    let base = n_const * (-gamma * j1 as f64).exp2();
    for (pos, chunk) in tf.scale(j1).chunks(bands).enumerate() {
        let k = decode_position(j1, pos as u64, d);
        let b = base * (1.0 + scaled_distance(j1, x, &k)).powf(gamma);
        if chunk[0].abs() > b {
            return None;
        }
        let i = family.member_of(&k);
        let e = family.coefficient(i, j1, &k) * g_value;
        for &f in &chunk[1..] {
            if e == 0.0 {
                if f.abs() > b {
                    return None;
                }
                continue;
            }
            let (u, v) = ((-b - f) / e, (b - f) / e);
            let bx = &mut boxes[i];
            bx.0 = bx.0.max(u.min(v));
            bx.1 = bx.1.min(u.max(v));
        }
    }
    boxes.iter().all(|b| b.0 <= b.1).then_some(boxes)
}

/// A random `k0` at scale `j0` that is irreducible there.
fn irreducible_cube(rng: &mut ChaCha8Rng, j0: u32, d: usize) -> Vec<u64> {
    loop {
        let k: Vec<u64> = (0..d).map(|_| rng.random_range(0..1u64 << j0)).collect();
        if irreducible_level(j0, &k) == Some(j0) {
            return k;
        }
    }
}

/// Points of the ball `B(k0 2^{−j0}, r)`: a uniform line for `d = 1`, a
/// Kronecker set otherwise.
fn ball_points(center: &[f64], radius: f64, n: usize) -> Vec<Vec<f64>> {
    let d = center.len();
    (0..n)
        .map(|m| {
            let u: Vec<f64> = if d == 1 {
                vec![if n == 1 {
                    0.5
                } else {
                    m as f64 / (n - 1) as f64
                }]
            } else {
                kronecker_point(m as u64, d)
            };
            center
                .iter()
                .zip(&u)
                .map(|(&c, &ui)| (c + (2.0 * ui - 1.0) * radius).rem_euclid(1.0))
                .collect()
        })
        .collect()
}

struct GapRun {
    gap: f64,
    j0: u32,
    exponents: Vec<f64>,
    constant: f64,
}

/// Pinch of the β-set that passes the Hölder candidate test near `k0 2^{−j0}`.
pub fn exp_volume_bound(ctx: &Context) -> Result<ExperimentResult> {
    let c = &ctx.config;
    let params = c.params()?;
    let mut rng = ctx.rng(Experiment::VolumeBound);
    let mut out = ExperimentResult::new("volume-bound");
    let alpha = c.volume_alpha;
    let h = HAlpha::new(c.s, c.p, c.d, alpha)?;
    let (a, margin) = ctx.best_offset(&mut rng, c.spectrum_candidates);
    let random = ctx.random_field()?;
    let tf = trace(&random, &ctx.system, &a, c.d)?;
    let kappa = (c.q + 2.0) / (c.q * c.p);
    let log_exponent = 2.0 * c.d_prime() as f64 + kappa;

    let mut runs = Vec::new();
    let mut table = Table::new("widths", &["gap", "j1", "member", "width"]);
    for (gi, &gap) in c.gamma_gaps.iter().enumerate() {
        let gamma = h.value() + gap;
        let j0f = choose_j0(c.d, gamma, h)?;
        let family = ProbeFamily::new(params, c.d, j0f, c.j_max)?;
        // (j1, raw widths, |G_{d'}(2^{j1} a)|)
        let mut points: Vec<(f64, Vec<f64>, f64)> = Vec::new();
        for j0 in c.volume_j0_min..=c.volume_j0_max {
            let j1 = (alpha * j0 as f64).floor() as u32;
            if j1 > c.j_max || j1 <= j0f {
                continue;
            }
            let g_value = ctx.g.eval_tensor_at_scale(j1, &a);
            let radius = (-alpha * j0 as f64).exp2();
            let mut logs = vec![0.0; family.size()];
            let mut used = 0usize;
            for _ in 0..c.volume_reps {
                let k0 = irreducible_cube(&mut rng, j0, c.d);
                let center: Vec<f64> = k0
                    .iter()
                    .map(|&k| k as f64 * (-(j0 as f64)).exp2())
                    .collect();
                let xs = ball_points(&center, radius, c.volume_points);
                let boxes: Vec<Vec<(f64, f64)>> = xs
                    .par_iter()
                    .filter_map(|x| {
                        feasible_box(&tf, &family, g_value, j1, x, gamma, c.volume_n_const)
                    })
                    .collect();
                if boxes.is_empty() {
                    continue;
                }
                used += 1;
                for (i, l) in logs.iter_mut().enumerate() {
                    let lo = boxes.iter().map(|b| b[i].0).fold(f64::INFINITY, f64::min);
                    let hi = boxes
                        .iter()
                        .map(|b| b[i].1)
                        .fold(f64::NEG_INFINITY, f64::max);
                    *l += (hi - lo).log2();
                }
            }
            if used == 0 {
                out.value(&format!("no_feasible_point_gap{gi}_j1_{j1}"), true);
                continue;
            }
            let widths: Vec<f64> = logs.iter().map(|l| (l / used as f64).exp2()).collect();
            for (i, w) in widths.iter().enumerate() {
                table.push(vec![gap, j1 as f64, i as f64, *w]);
            }
            points.push((j1 as f64, widths, g_value.abs()));
        }
        let mut exponents = Vec::new();
        let mut constant: f64 = 0.0;
        for i in 0..family.size() {
            let (xs, ys): (Vec<f64>, Vec<f64>) = points
                .iter()
                .map(|(j1, w, gv)| (*j1, (w[i] * gv).log2() - kappa * (j1 - j0f as f64).log2()))
                .unzip();
            for (j1, w, _) in &points {
                let shape = (-gap * j1).exp2() * j1.powf(log_exponent);
                constant = constant.max(w[i] / shape);
            }
            match fit_line(&xs, &ys) {
                Some(fit) => {
                    exponents.push(-fit.slope);
                    out.fit(format!("gap {gap}: member {i}"), fit);
                }
                None => exponents.push(f64::NAN),
            }
        }
        runs.push(GapRun {
            gap,
            j0: j0f,
            exponents,
            constant,
        });
    }
    out.tables.push(table);

    let first = &runs[0];
    for (i, &e) in first.exponents.iter().enumerate() {
        let e = if e.is_nan() { f64::NEG_INFINITY } else { e };
        out.check(Check::at_least(
            format!("pinch exponent, member {i}"),
            e,
            first.gap - c.volume_exponent_margin,
        ));
    }
    if let Some(second) = runs.get(1) {
        let mean = |r: &GapRun| r.exponents.iter().sum::<f64>() / r.exponents.len() as f64;
        let ratio = mean(second) / mean(first);
        let expected = second.gap / first.gap;
        out.inform(Check::at_most(
            "|exponent ratio / gap ratio − 1|",
            (ratio / expected - 1.0).abs(),
            c.doubling_tolerance,
        ));
        out.value("exponent_ratio", ratio);
    }
    out.value("offset", &a);
    out.value("offset_margin", margin);
    out.value("h_alpha", h.value());
    out.value(
        "runs",
        runs.iter()
            .map(|r| serde_json::json!({"gap": r.gap, "j0": r.j0, "exponents": r.exponents, "constant": r.constant}))
            .collect::<Vec<_>>(),
    );
    Ok(out)
}
