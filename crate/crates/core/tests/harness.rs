use besov_trace::harness::{run, Experiment, ExperimentConfig, ExperimentReport, SCHEMA_VERSION};
use besov_trace::Error;

fn quick() -> ExperimentConfig {
    ExperimentConfig {
        protr1_samples: 20_000,
        ..Default::default()
    }
}

const CHEAP: [Experiment; 4] = [
    Experiment::GEnergy,
    Experiment::Protr1,
    Experiment::LowerBound,
    Experiment::SpectrumLine,
];

#[test]
fn reports_are_deterministic() {
    let a = run(&quick(), &CHEAP).unwrap();
    let b = run(&quick(), &CHEAP).unwrap();
    assert_eq!(a.deterministic_json(), b.deterministic_json());
    assert_eq!(a.schema_version, SCHEMA_VERSION);
    assert_eq!(a.timing.runtimes_s.len(), CHEAP.len());

    let other = run(
        &ExperimentConfig { seed: 2, ..quick() },
        &[Experiment::Protr1],
    )
    .unwrap();
    let p1 = a.experiment("protr1").unwrap();
    let p2 = other.experiment("protr1").unwrap();
    assert_ne!(p1.fits, p2.fits, "the seed must reach the sampler");
}

#[test]
fn outputs_round_trip() {
    let report = run(&quick(), &[Experiment::GEnergy, Experiment::SpectrumLine]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    report.write_outputs(dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let back: ExperimentReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back.deterministic_json(), report.deterministic_json());
    let csv = std::fs::read_to_string(dir.path().join("spectrum-line_spectrum.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("h,dhat"));
    let energy = std::fs::read_to_string(dir.path().join("g-energy_energy.csv")).unwrap();
    assert_eq!(energy.lines().count(), 1 + 14);
}

#[test]
fn invalid_parameters_are_rejected_before_running() {
    for bad in [
        ExperimentConfig { p: 0.5, ..quick() },
        ExperimentConfig { d: 2, ..quick() },
        ExperimentConfig { s: 0.4, ..quick() },
        ExperimentConfig {
            j_max: 30,
            ..quick()
        },
        ExperimentConfig {
            lower_bound_alphas: vec![],
            ..quick()
        },
    ] {
        assert!(matches!(
            run(&bad, &[Experiment::GEnergy]),
            Err(Error::Parameter(_))
        ));
    }
}

#[test]
fn probe_hypothesis_only_gates_probe_experiments() {
    // s − d/p > 0 but s − D/p < 0.
    let c = ExperimentConfig { s: 0.9, ..quick() };
    assert!(run(&c, &[Experiment::HolderCalibration]).is_ok());
    assert!(matches!(
        run(&c, &[Experiment::SpectrumLine]),
        Err(Error::Parameter(_))
    ));
}

#[test]
fn resolve_applies_file_then_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "seed = 7\nepsilon = 0.3\n").unwrap();
    let c = ExperimentConfig::resolve(
        Some(&path),
        &[
            ("seed".into(), "9".into()),
            ("output_dir".into(), "out".into()),
        ],
    )
    .unwrap();
    assert_eq!(
        (c.seed, c.epsilon, c.output_dir.to_str()),
        (9, 0.3, Some("out"))
    );

    std::fs::write(&path, "no_such_key = 1\n").unwrap();
    assert!(matches!(
        ExperimentConfig::resolve(Some(&path), &[]),
        Err(Error::Parameter(_))
    ));
}
