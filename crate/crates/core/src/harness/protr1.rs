use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Check, Context, Experiment, ExperimentResult, Table};
use crate::error::Result;
use crate::stats::{fit_line, LineFit};
use crate::wavelet::build_g;

/// Fraction of `samples` uniform `a ∈ [0,1)^{d'}` with
/// `|G_{d'}(2^j a)| ≤ j^{−2d'}`, for each `j` in `scales`.
pub fn small_value_fractions(
    g: &crate::wavelet::PeriodizedG,
    d_prime: usize,
    samples: usize,
    scales: std::ops::RangeInclusive<u32>,
    rng: &mut ChaCha8Rng,
) -> Vec<(u32, f64)> {
    let points: Vec<Vec<f64>> = (0..samples)
        .map(|_| (0..d_prime).map(|_| rng.random::<f64>()).collect())
        .collect();
    scales
        .map(|j| {
            let thr = (j as f64).powi(-2 * d_prime as i32);
            let hits = points
                .par_iter()
                .filter(|a| g.eval_tensor_at_scale(j, a).abs() <= thr)
                .count();
            (j, hits as f64 / samples as f64)
        })
        .collect()
}

/// `ln(fraction)` against `ln j` over the nonzero fractions.
fn power_fit(fracs: &[(u32, f64)]) -> Option<LineFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = fracs
        .iter()
        .filter(|(_, f)| *f > 0.0)
        .map(|&(j, f)| ((j as f64).ln(), f.ln()))
        .unzip();
    fit_line(&xs, &ys)
}

/// Measure of `{a : |G(2^j a)| ≤ j^{−2}}` and its power-law decay in `j`.
pub fn exp_protr1(ctx: &Context) -> Result<ExperimentResult> {
    let c = &ctx.config;
    let mut rng = ctx.rng(Experiment::Protr1);
    let mut out = ExperimentResult::new("protr1");
    let scales = c.protr1_j_min..=c.protr1_j_max;
    let dp = c.d_prime();
    let fracs = small_value_fractions(&ctx.g, dp, c.protr1_samples, scales.clone(), &mut rng);
    let mut table = Table::new("fractions", &["j", "fraction"]);
    for &(j, f) in &fracs {
        table.push(vec![j as f64, f]);
    }
    out.tables.push(table);
    out.value(
        "zero_fraction_scales",
        fracs
            .iter()
            .filter(|f| f.1 == 0.0)
            .map(|f| f.0)
            .collect::<Vec<_>>(),
    );
    match power_fit(&fracs) {
        Some(fit) => {
            out.check(Check::at_least(
                "decay exponent",
                -fit.slope,
                c.protr1_min_exponent,
            ));
            out.value("constant", fit.intercept.exp());
            out.fit(format!("ln fraction vs ln j (d' = {dp})"), fit);
        }
        None => out.require("at least two nonzero fractions", false),
    }
    // The tensor version in the next dimension up, against j^{−2d'}.
    let dp2 = dp + 1;
    let g2 = build_g(&ctx.system, dp2)?;
    let fracs2 = small_value_fractions(&g2, dp2, c.protr1_samples, scales, &mut rng);
    let mut table = Table::new(&format!("fractions_d{dp2}"), &["j", "fraction"]);
    for &(j, f) in &fracs2 {
        table.push(vec![j as f64, f]);
    }
    out.tables.push(table);
    if let Some(fit) = power_fit(&fracs2) {
        out.inform(Check::at_least(
            format!("decay exponent (d' = {dp2})"),
            -fit.slope,
            2.0 * dp2 as f64 - 0.2,
        ));
        out.fit(format!("ln fraction vs ln j (d' = {dp2})"), fit);
    }
    Ok(out)
}
