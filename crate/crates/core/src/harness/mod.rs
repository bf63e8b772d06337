//! Reproducible experiments: configuration, the individual runs and the
//! JSON/CSV report.
//!
//! Every experiment draws from its own seeded stream, so results do not
//! depend on which other experiments run or in what order.

mod config;
mod decay;
mod energy;
mod holder;
mod lower_bound;
mod protr1;
mod report;
mod spectrum;
mod volume;

pub use config::{parse_override, ExperimentConfig, CONFIG_ENV};
pub use decay::{bad_set_fractions, exp_trace_decay, DecayFractions};
pub use energy::exp_g_energy;
pub use holder::exp_holder_calibration;
pub use lower_bound::exp_lower_bound;
pub use protr1::{exp_protr1, small_value_fractions};
pub use report::{
    Check, Comparison, ExperimentReport, ExperimentResult, NamedFit, Table, Timing, SCHEMA_VERSION,
};
pub use spectrum::{exp_spectrum_line, full_grid, interior_grid, spectrum_options};
pub use volume::exp_volume_bound;

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::RandomField;
use crate::stats::mix64;
use crate::wavelet::{build_g, cascade_evaluate, generate_filter, PeriodizedG, WaveletSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    GEnergy,
    Protr1,
    TraceDecay,
    LowerBound,
    HolderCalibration,
    SpectrumLine,
    VolumeBound,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::GEnergy,
        Experiment::Protr1,
        Experiment::TraceDecay,
        Experiment::LowerBound,
        Experiment::HolderCalibration,
        Experiment::SpectrumLine,
        Experiment::VolumeBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::GEnergy => "g-energy",
            Experiment::Protr1 => "protr1",
            Experiment::TraceDecay => "trace-decay",
            Experiment::LowerBound => "lower-bound",
            Experiment::HolderCalibration => "holder-calibration",
            Experiment::SpectrumLine => "spectrum-line",
            Experiment::VolumeBound => "volume-bound",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    /// Whether the run builds `g`, the probes or the random field on `T^D`.
    fn needs_probe_hypothesis(self) -> bool {
        !matches!(self, Experiment::Protr1 | Experiment::HolderCalibration)
    }

    fn stream(self) -> u64 {
        self as u64 + 1
    }
}

/// Shared, read-only state: the wavelet system and `G_{d'}`.
pub struct Context {
    pub config: ExperimentConfig,
    pub system: WaveletSystem,
    pub g: PeriodizedG,
}

impl Context {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let system = cascade_evaluate(&generate_filter(config.moments)?, config.grid_resolution)?;
        let g = build_g(&system, config.d_prime())?;
        Ok(Self { config, system, g })
    }

    pub fn random_field(&self) -> Result<RandomField> {
        let c = &self.config;
        RandomField::new(c.params()?, c.j_max, c.seed, c.delta)
    }

    /// Independent stream for one experiment.
    pub fn rng(&self, e: Experiment) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(mix64(self.config.seed ^ mix64(e.stream())))
    }

    /// Among `candidates` uniform offsets, the one maximising
    /// `min_{3 ≤ j ≤ j_max} j^{2d'}·|G_{d'}(2^j a)|`; returns it with that margin.
    pub fn best_offset(&self, rng: &mut ChaCha8Rng, candidates: usize) -> (Vec<f64>, f64) {
        let dp = self.config.d_prime();
        let mut best = (vec![0.5; dp], f64::NEG_INFINITY);
        for _ in 0..candidates {
            let a: Vec<f64> = (0..dp).map(|_| rng.random::<f64>()).collect();
            let m = self.offset_margin(&a);
            if m > best.1 {
                best = (a, m);
            }
        }
        best
    }

    pub fn offset_margin(&self, a: &[f64]) -> f64 {
        let dp = a.len() as i32;
        (3..=self.config.j_max)
            .map(|j| (j as f64).powi(2 * dp) * self.g.eval_tensor_at_scale(j, a).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn run_experiment(ctx: &Context, e: Experiment) -> Result<ExperimentResult> {
    ctx.config.validate_for(e)?;
    match e {
        Experiment::GEnergy => exp_g_energy(ctx),
        Experiment::Protr1 => exp_protr1(ctx),
        Experiment::TraceDecay => exp_trace_decay(ctx),
        Experiment::LowerBound => exp_lower_bound(ctx),
        Experiment::HolderCalibration => exp_holder_calibration(ctx),
        Experiment::SpectrumLine => exp_spectrum_line(ctx),
        Experiment::VolumeBound => exp_volume_bound(ctx),
    }
}

/// Runs `which` in a work pool and aggregates the report.
pub fn run(config: &ExperimentConfig, which: &[Experiment]) -> Result<ExperimentReport> {
    config.validate()?;
    for &e in which {
        config.validate_for(e)?;
    }
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64());
    let ctx = Context::new(config.clone())?;
    let outcomes: Vec<(ExperimentResult, f64)> = which
        .par_iter()
        .map(|&e| {
            let t = Instant::now();
            run_experiment(&ctx, e).map(|r| (r, t.elapsed().as_secs_f64()))
        })
        .collect::<Result<_>>()?;
    let mut timing = Timing {
        started_unix_s: started,
        ..Default::default()
    };
    let mut experiments = Vec::new();
    for (r, secs) in outcomes {
        timing.runtimes_s.insert(r.name.clone(), secs);
        experiments.push(r);
    }
    Ok(ExperimentReport {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        passed: experiments.iter().all(|e| e.passed),
        experiments,
        timing,
    })
}

pub fn run_all(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run(config, &Experiment::ALL)
}
