use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use besov_trace::field::{read_field, CoeffField, CoeffSource, Combination};
use besov_trace::harness::{
    full_grid, parse_override, run, spectrum_options, Context, Experiment, ExperimentConfig,
};
use besov_trace::probe::{choose_j0, write_family, HAlpha, ProbeFamily, ProbeField};
use besov_trace::regularity::{estimate_holder, estimate_spectrum_with, write_spectrum_csv};
use besov_trace::trace::{read_trace, trace, trace_energies, write_trace, TraceField};
use besov_trace::wavelet::{check_hypothesis_hn, write_system};
use besov_trace::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

/// Wavelet experiments on traces of Besov functions.
#[derive(Parser)]
#[command(name = "besov-trace", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Configuration: defaults, then `--config` (or `$BESOV_TRACE_CONFIG`), then
/// `--set`, then the named flags.
#[derive(Args)]
struct Common {
    /// TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override any config key, e.g. `--set epsilon=0.3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Vanishing moments N of the Daubechies wavelet.
    #[arg(long, global = true)]
    moments: Option<usize>,
    /// Wavelet grid resolution r.
    #[arg(long, global = true)]
    grid_resolution: Option<u32>,
    /// Ambient dimension D.
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Trace dimension d.
    #[arg(long, global = true)]
    d: Option<usize>,
    #[arg(long, global = true)]
    s: Option<f64>,
    #[arg(long, global = true)]
    p: Option<f64>,
    #[arg(long, global = true)]
    q: Option<f64>,
    #[arg(long, global = true)]
    j_max: Option<u32>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> anyhow::Result<ExperimentConfig> {
        let mut overrides = self
            .set
            .iter()
            .map(|s| parse_override(s))
            .collect::<Result<Vec<_>, _>>()?;
        let mut flag = |key: &str, v: Option<String>| {
            if let Some(v) = v {
                overrides.push((key.to_string(), v));
            }
        };
        flag("moments", self.moments.map(|v| v.to_string()));
        flag(
            "grid_resolution",
            self.grid_resolution.map(|v| v.to_string()),
        );
        flag("dim", self.dim.map(|v| v.to_string()));
        flag("d", self.d.map(|v| v.to_string()));
        flag("s", self.s.map(float));
        flag("p", self.p.map(float));
        flag("q", self.q.map(float));
        flag("j_max", self.j_max.map(|v| v.to_string()));
        flag("seed", self.seed.map(|v| v.to_string()));
        flag(
            "output_dir",
            self.output_dir.as_ref().map(|v| v.display().to_string()),
        );
        let config = ExperimentConfig::resolve(self.config.as_deref(), &overrides)?;
        config.validate()?;
        Ok(config)
    }
}

/// TOML needs a decimal point to read a float.
fn float(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Subcommand)]
enum Command {
    /// Generate a Daubechies system or check hypothesis (H_N).
    #[command(subcommand)]
    Wavelet(WaveletCommand),
    /// Write a coefficient field (BCF1) or the probe family.
    Synthesize {
        kind: FieldKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Trace a field on the slice x' = a and write it as BCF1.
    Trace {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pointwise Hölder exponent of a trace at x.
    Holder {
        #[command(flatten)]
        source: SourceArgs,
        /// Read the trace from a file written by `trace`.
        #[arg(long, conflicts_with = "input")]
        trace: Option<PathBuf>,
        #[arg(long, num_args = 1.., required = true)]
        x: Vec<f64>,
        /// Cone half-width in units of 2^{-j}.
        #[arg(long, default_value_t = 2.0)]
        width: f64,
    },
    /// Singularity spectrum estimate of a trace.
    Spectrum {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, conflicts_with = "input")]
        trace: Option<PathBuf>,
        /// Print `h,dhat` CSV instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Run experiments; exit 0 iff every check passes.
    Verify {
        #[arg(required = true, value_name = "EXPERIMENT|all")]
        experiments: Vec<String>,
    },
}

#[derive(Subcommand)]
enum WaveletCommand {
    /// Compute the system and write it to a file.
    Generate {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify the zeros of the periodized wavelet G.
    CheckHn {
        #[arg(long, default_value_t = 1e-3)]
        derivative_floor: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldKind {
    Random,
    G,
    Probes,
    /// Random field plus a random probe combination.
    Prevalent,
}

#[derive(Args)]
struct SourceArgs {
    /// Field to trace when no file is given.
    #[arg(long, value_enum, default_value = "prevalent")]
    source: FieldKind,
    /// Read the field from a BCF1 file instead.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Slice offset a; defaults to the best seeded A1 candidate.
    #[arg(long, num_args = 1..)]
    offset: Vec<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let parameter = e
                .chain()
                .any(|c| matches!(c.downcast_ref::<Error>(), Some(Error::Parameter(_))));
            ExitCode::from(if parameter { 2 } else { 3 })
        }
    }
}

/// `besov-trace spectrum --csv | head` closes stdout early; not an error.
fn broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let io = c
            .downcast_ref::<io::Error>()
            .or_else(|| match c.downcast_ref::<Error>() {
                Some(Error::Io(io)) => Some(io),
                _ => None,
            });
        io.is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
    })
}

fn execute(cli: &Cli) -> anyhow::Result<bool> {
    let config = cli.common.resolve()?;
    match &cli.command {
        Command::Wavelet(w) => wavelet(&config, w),
        Command::Synthesize { kind, out } => synthesize(&config, *kind, out),
        Command::Trace { source, out } => {
            let tf = traced(&config, source)?;
            let mut w =
                BufWriter::new(File::create(out).with_context(|| out.display().to_string())?);
            write_trace(&mut w, &tf)?;
            w.flush()?;
            print_json(&json!({
                "offset": tf.a,
                "energies": trace_energies(&tf, config.s, config.p, true),
                "out": out,
            }))?;
            Ok(true)
        }
        Command::Holder {
            source,
            trace,
            x,
            width,
        } => {
            let tf = load_or_trace(&config, source, trace.as_deref())?;
            let est = estimate_holder(&tf, x, *width, 1..=tf.j_max)?;
            print_json(&json!({ "x": x, "offset": tf.a, "estimate": est }))?;
            Ok(true)
        }
        Command::Spectrum { source, trace, csv } => {
            let tf = load_or_trace(&config, source, trace.as_deref())?;
            let est = estimate_spectrum_with(
                &tf,
                1..=tf.j_max,
                &full_grid(&config),
                &spectrum_options(&config),
            )?;
            if *csv {
                let mut out = io::stdout().lock();
                write_spectrum_csv(&mut out, &est)?;
                out.flush()?;
            } else {
                print_json(&json!({ "offset": tf.a, "scales": est.scales, "bins": est.bins }))?;
            }
            Ok(true)
        }
        Command::Verify { experiments } => verify(&config, experiments),
    }
}

fn wavelet(config: &ExperimentConfig, cmd: &WaveletCommand) -> anyhow::Result<bool> {
    let ctx = Context::new(config.clone())?;
    let sys = &ctx.system;
    match cmd {
        WaveletCommand::Generate { out } => {
            if let Some(path) = out {
                let mut w = BufWriter::new(File::create(path)?);
                write_system(&mut w, sys)?;
                w.flush()?;
            }
            let moments: Vec<f64> = (0..=sys.moments as u32).map(|n| sys.moment(n)).collect();
            print_json(&json!({
                "moments": sys.moments,
                "grid_resolution": sys.grid_resolution,
                "filter": sys.filter,
                "refinement_residual": sys.refinement_residual(),
                "partition_of_unity_error": sys.partition_of_unity_error(),
                "wavelet_moments": moments,
                "regularity_estimate": sys.regularity_estimate,
                "derivative_method": sys.derivative_method,
            }))?;
            Ok(true)
        }
        WaveletCommand::CheckHn { derivative_floor } => {
            let rep = check_hypothesis_hn(&ctx.g, *derivative_floor)?;
            print_json(&rep)?;
            Ok(rep.verdict == besov_trace::wavelet::HnVerdict::Holds)
        }
    }
}

fn probe_family(config: &ExperimentConfig) -> anyhow::Result<ProbeFamily> {
    let h = HAlpha::new(config.s, config.p, config.d, config.volume_alpha)?;
    let j0 = choose_j0(config.d, h.value() + config.gamma_gaps[0], h)?;
    Ok(ProbeFamily::new(
        config.params()?,
        config.d,
        j0,
        config.j_max,
    )?)
}

fn synthesize(config: &ExperimentConfig, kind: FieldKind, out: &Path) -> anyhow::Result<bool> {
    let params = config.params()?;
    if matches!(
        kind,
        FieldKind::G | FieldKind::Probes | FieldKind::Prevalent
    ) {
        config.validate_probe()?;
    }
    if let FieldKind::Probes = kind {
        let manifest = write_family(out, &probe_family(config)?)?;
        print_json(&manifest)?;
        return Ok(true);
    }
    let ctx = Context::new(config.clone())?;
    let field = match kind {
        FieldKind::Random => CoeffField::materialize(&ctx.random_field()?, params)?,
        FieldKind::G => {
            CoeffField::materialize(&ProbeField::new(params, config.d, config.j_max)?, params)?
        }
        FieldKind::Prevalent => {
            let (random, family, beta) = prevalent_parts(&ctx)?;
            let probes = family.combination(beta);
            let f = Combination::new(vec![(1.0, &random as &dyn CoeffSource), (1.0, &probes)]);
            CoeffField::materialize(&f, params)?
        }
        FieldKind::Probes => unreachable!(),
    };
    let mut w = BufWriter::new(File::create(out)?);
    besov_trace::field::write_field(&mut w, &field)?;
    w.flush()?;
    print_json(&json!({ "out": out, "nonzero": field.len() }))?;
    Ok(true)
}

type Parts = (besov_trace::field::RandomField, ProbeFamily, Vec<f64>);

/// The random field, probe family and seeded β of the spectrum experiment.
fn prevalent_parts(ctx: &Context) -> anyhow::Result<Parts> {
    use rand::Rng;
    let family = probe_family(&ctx.config)?;
    let mut rng = ctx.rng(Experiment::SpectrumLine);
    let beta = (0..family.size()).map(|_| rng.random::<f64>()).collect();
    Ok((ctx.random_field()?, family, beta))
}

fn traced(config: &ExperimentConfig, args: &SourceArgs) -> anyhow::Result<TraceField> {
    let ctx = Context::new(config.clone())?;
    let a = if args.offset.is_empty() {
        let mut rng = ctx.rng(Experiment::SpectrumLine);
        ctx.best_offset(&mut rng, config.spectrum_candidates).0
    } else {
        args.offset.clone()
    };
    if let Some(path) = &args.input {
        let field = read_field(&mut BufReader::new(File::open(path)?))?;
        return Ok(trace(&field, &ctx.system, &a, config.d)?);
    }
    let params = config.params()?;
    let tf = match args.source {
        FieldKind::Random => trace(&ctx.random_field()?, &ctx.system, &a, config.d)?,
        FieldKind::G => {
            config.validate_probe()?;
            trace(
                &ProbeField::new(params, config.d, config.j_max)?,
                &ctx.system,
                &a,
                config.d,
            )?
        }
        FieldKind::Probes | FieldKind::Prevalent => {
            config.validate_probe()?;
            let (random, family, beta) = prevalent_parts(&ctx)?;
            let probes = family.combination(beta);
            let f = if matches!(args.source, FieldKind::Probes) {
                Combination::new(vec![(1.0, &probes as &dyn CoeffSource)])
            } else {
                Combination::new(vec![(1.0, &random as &dyn CoeffSource), (1.0, &probes)])
            };
            trace(&f, &ctx.system, &a, config.d)?
        }
    };
    Ok(tf)
}

fn load_or_trace(
    config: &ExperimentConfig,
    args: &SourceArgs,
    path: Option<&Path>,
) -> anyhow::Result<TraceField> {
    match path {
        Some(p) => Ok(read_trace(&mut BufReader::new(
            File::open(p).with_context(|| p.display().to_string())?,
        ))?),
        None => traced(config, args),
    }
}

fn verify(config: &ExperimentConfig, names: &[String]) -> anyhow::Result<bool> {
    let mut which = Vec::new();
    for n in names {
        if n == "all" {
            which = Experiment::ALL.to_vec();
            break;
        }
        let e = Experiment::from_name(n).ok_or_else(|| {
            let known: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
            Error::Parameter(format!(
                "unknown experiment {n:?}; expected one of {known:?} or all"
            ))
        })?;
        if !which.contains(&e) {
            which.push(e);
        }
    }
    let report = run(config, &which)?;
    report.write_outputs(&config.output_dir)?;
    for e in &report.experiments {
        let secs = report
            .timing
            .runtimes_s
            .get(&e.name)
            .copied()
            .unwrap_or(0.0);
        eprintln!(
            "{} {} ({secs:.1} s)",
            if e.passed { "pass" } else { "FAIL" },
            e.name
        );
        for c in e.checks.iter().filter(|c| !c.passed) {
            eprintln!("  {}: {} vs {}", c.name, c.value, c.threshold);
        }
    }
    eprintln!(
        "report: {}",
        config.output_dir.join("report.json").display()
    );
    print_json(&report)?;
    Ok(report.passed)
}

fn print_json<T: serde::Serialize>(v: &T) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}
