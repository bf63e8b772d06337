use rand::Rng;

use super::{Check, Context, Experiment, ExperimentConfig, ExperimentResult, Table};
use crate::error::Result;
use crate::field::{CoeffSource, Combination};
use crate::probe::{choose_j0, HAlpha, ProbeFamily, ProbeField};
use crate::regularity::{estimate_spectrum_with, SpectrumBin, SpectrumOptions};
use crate::trace::trace;

/// `h ∈ [s − d/p + 0.1, s − 0.1]` at the configured step.
pub fn interior_grid(c: &ExperimentConfig) -> Vec<f64> {
    let lo = c.s - c.d as f64 / c.p + 0.1;
    let hi = c.s - 0.1;
    grid(lo, hi, c.spectrum_h_step)
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    // Rounded so bin centres print cleanly and match across grids.
    (0..=n)
        .map(|i| ((lo + i as f64 * step) * 1e9).round() / 1e9)
        .collect()
}

fn line(c: &ExperimentConfig, h: f64) -> f64 {
    c.d as f64 + (h - c.s) * c.p
}

/// `h ∈ [s − d/p − 0.5, s + 0.5]`, the grid every spectrum is reported on.
pub fn full_grid(c: &ExperimentConfig) -> Vec<f64> {
    grid(c.s - c.d as f64 / c.p - 0.5, c.s + 0.5, c.spectrum_h_step)
}

pub fn spectrum_options(c: &ExperimentConfig) -> SpectrumOptions {
    SpectrumOptions {
        bin_width: c.spectrum_bin_width,
        ..Default::default()
    }
}

/// Spectrum of the trace of a random field plus a random probe combination.
pub fn exp_spectrum_line(ctx: &Context) -> Result<ExperimentResult> {
    let c = &ctx.config;
    let params = c.params()?;
    let mut rng = ctx.rng(Experiment::SpectrumLine);
    let mut out = ExperimentResult::new("spectrum-line");

    let (a, margin) = ctx.best_offset(&mut rng, c.spectrum_candidates);
    let h = HAlpha::new(c.s, c.p, c.d, c.volume_alpha)?;
    let j0 = choose_j0(c.d, h.value() + c.gamma_gaps[0], h)?;
    let family = ProbeFamily::new(params, c.d, j0, c.j_max)?;
    let beta: Vec<f64> = (0..family.size()).map(|_| rng.random::<f64>()).collect();
    let random = ctx.random_field()?;
    let probes = family.combination(beta.clone());
    let f = Combination::new(vec![(1.0, &random as &dyn CoeffSource), (1.0, &probes)]);
    let tf = trace(&f, &ctx.system, &a, c.d)?;

    let interior = interior_grid(c);
    let full = full_grid(c);
    let est = estimate_spectrum_with(&tf, 1..=c.j_max, &full, &spectrum_options(c))?;

    let mut table = Table::new("spectrum", &["h", "dhat"]);
    for b in &est.bins {
        table.push(vec![b.h, b.dhat]);
    }
    out.tables.push(table);

    let deviation = interior
        .iter()
        .map(|&h| {
            est.bin_at(h)
                .map_or(f64::INFINITY, |b| (b.dhat - line(c, h)).abs())
        })
        .fold(0.0, f64::max);
    out.check(Check::at_most(
        "max interior deviation",
        deviation,
        c.spectrum_tolerance,
    ));
    let excess = est
        .bins
        .iter()
        .filter(|b| b.dhat.is_finite())
        .map(|b| b.dhat - line(c, b.h).min(c.d as f64))
        .fold(f64::NEG_INFINITY, f64::max);
    out.check(Check::at_most(
        "max excess over the upper line",
        excess,
        c.spectrum_upper_slack,
    ));
    let low = c.s - c.d as f64 / c.p - c.spectrum_low_margin;
    out.check(Check::at_most(
        format!("mass below h = {low}"),
        est.mass_below(low),
        c.spectrum_low_mass,
    ));

    // Informational: the probe g alone. Its bins are shifted right by the
    // logarithmic factors, so the two points are the first nonempty bin and
    // the peak rather than the interior endpoints.
    let g = ProbeField::new(params, c.d, c.j_max)?;
    let tg = trace(&g, &ctx.system, &a, c.d)?;
    let est_g = estimate_spectrum_with(&tg, 1..=c.j_max, &full, &spectrum_options(c))?;
    let finite: Vec<&SpectrumBin> = est_g.bins.iter().filter(|b| b.dhat.is_finite()).collect();
    let slope = match (
        finite.first(),
        finite.iter().max_by(|x, y| x.dhat.total_cmp(&y.dhat)),
    ) {
        (Some(lo), Some(hi)) if hi.h > lo.h => (hi.dhat - lo.dhat) / (hi.h - lo.h),
        _ => f64::NAN,
    };
    out.inform(Check::at_most(
        "|g slope / p − 1|",
        (slope / c.p - 1.0).abs(),
        0.1,
    ));
    out.value("g_slope", slope);

    out.value("offset", &a);
    out.value("offset_margin", margin);
    out.value("beta", &beta);
    out.value("j0", j0);
    out.value("window", &est.scales);
    out.value(
        "interior",
        interior
            .iter()
            .map(|&h| (h, est.bin_at(h).map(|b| b.dhat), line(c, h)))
            .collect::<Vec<_>>(),
    );
    Ok(out)
}
