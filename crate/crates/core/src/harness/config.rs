use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Experiment;
use crate::error::{param, Error, Result};
use crate::field::BesovParams;

/// Environment variable naming the config file; it overrides the path only.
pub const CONFIG_ENV: &str = "BESOV_TRACE_CONFIG";

/// Every knob of the experiments, including the pass/fail thresholds.
///
/// Files use `key = value` lines (TOML); list values are `[a, b, c]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub moments: usize,
    pub grid_resolution: u32,
    pub dim: usize,
    pub d: usize,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub j_max: u32,
    pub seed: u64,
    /// Extra logarithmic decay of the random field, `j^{−(2/q+δ)}`.
    pub delta: f64,
    pub output_dir: PathBuf,

    pub protr1_samples: usize,
    pub protr1_j_min: u32,
    pub protr1_j_max: u32,
    pub protr1_min_exponent: f64,

    pub epsilon: f64,
    pub decay_grid_points: usize,
    pub decay_j_min: u32,
    pub decay_j_max: u32,
    pub markov_slack: f64,
    /// The fitted decay exponent must reach `εp − decay_exponent_margin`.
    pub decay_exponent_margin: f64,

    pub lower_bound_triples: usize,
    pub lower_bound_alphas: Vec<f64>,
    pub lower_bound_j_max: Vec<u32>,
    pub lower_bound_stability: f64,

    pub spectrum_candidates: usize,
    pub spectrum_tolerance: f64,
    pub spectrum_upper_slack: f64,
    pub spectrum_h_step: f64,
    pub spectrum_bin_width: f64,
    /// Bin mass allowed below `s − d/p − spectrum_low_margin`.
    pub spectrum_low_mass: f64,
    pub spectrum_low_margin: f64,

    pub holder_exponents: Vec<f64>,
    pub holder_tolerance: f64,
    pub alpha_grid: Vec<f64>,
    pub h_alpha_slack: f64,

    pub volume_alpha: f64,
    /// `γ − H(α)` values; the first is the acceptance configuration, the
    /// second (if present) its doubling.
    pub gamma_gaps: Vec<f64>,
    pub volume_n_const: f64,
    pub volume_j0_min: u32,
    pub volume_j0_max: u32,
    pub volume_points: usize,
    pub volume_reps: usize,
    pub volume_exponent_margin: f64,
    pub doubling_tolerance: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            moments: 8,
            grid_resolution: 14,
            dim: 2,
            d: 1,
            s: 2.0,
            p: 2.0,
            q: 2.0,
            j_max: 14,
            seed: 1,
            delta: crate::field::DEFAULT_DELTA,
            output_dir: PathBuf::from("results"),

            protr1_samples: 100_000,
            protr1_j_min: 6,
            protr1_j_max: 14,
            protr1_min_exponent: 1.8,

            epsilon: 0.2,
            decay_grid_points: 1 << 12,
            decay_j_min: 6,
            decay_j_max: 12,
            markov_slack: 4.0,
            decay_exponent_margin: 0.1,

            lower_bound_triples: 20,
            lower_bound_alphas: vec![1.5, 2.0, 3.0, 4.0],
            lower_bound_j_max: vec![10, 12, 14],
            lower_bound_stability: 2.0,

            spectrum_candidates: 100,
            spectrum_tolerance: 0.15,
            spectrum_upper_slack: 0.1,
            spectrum_h_step: 0.05,
            spectrum_bin_width: 0.1,
            spectrum_low_mass: 0.01,
            spectrum_low_margin: 0.2,

            holder_exponents: vec![0.5, 1.0, 1.5, 2.5],
            holder_tolerance: 0.05,
            alpha_grid: vec![1.0, 1.25, 1.5, 2.0, 3.0, 4.0],
            h_alpha_slack: 0.1,

            volume_alpha: 2.0,
            gamma_gaps: vec![0.3, 0.6],
            volume_n_const: 8.0,
            volume_j0_min: 3,
            volume_j0_max: 7,
            volume_points: 129,
            volume_reps: 8,
            volume_exponent_margin: 0.1,
            doubling_tolerance: 0.25,
        }
    }
}

impl ExperimentConfig {
    /// Parses `key = value` text on top of the defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Parameter(format!("config: {e}")))?;
        Self::from_table(table)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Parameter(format!("config: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Defaults, then the config file (explicit path, else `$BESOV_TRACE_CONFIG`),
    /// then `key=value` overrides in order.
    pub fn resolve(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let env_path = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
        let mut table = match path.map(Path::to_path_buf).or(env_path) {
            Some(p) => std::fs::read_to_string(&p)?
                .parse::<toml::Table>()
                .map_err(|e| Error::Parameter(format!("config {}: {e}", p.display())))?,
            None => toml::Table::new(),
        };
        for (key, raw) in overrides {
            table.insert(key.clone(), parse_value(raw));
        }
        Self::from_table(table)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn params(&self) -> Result<BesovParams> {
        BesovParams::new(self.s, self.p, self.q, self.dim)
    }

    pub fn d_prime(&self) -> usize {
        self.dim - self.d
    }

    /// Checks shared by every experiment: parameter ranges and counts.
    pub fn validate(&self) -> Result<()> {
        if self.moments < 2 {
            return param(format!("moments = {} but G' needs N ≥ 2", self.moments));
        }
        if !(8..=20).contains(&self.grid_resolution) {
            return param(format!(
                "grid_resolution = {} outside 8..=20",
                self.grid_resolution
            ));
        }
        if self.d == 0 || self.d >= self.dim {
            return param(format!(
                "need 1 ≤ d < D, got d = {}, D = {}",
                self.d, self.dim
            ));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) || !(self.q > 0.0) {
            return param(format!(
                "need 1 ≤ p < ∞ and q > 0, got p = {}, q = {}",
                self.p, self.q
            ));
        }
        if !(self.s - self.d as f64 / self.p > 0.0) {
            return param(format!(
                "trace experiments need s − d/p > 0, got s = {}, d = {}, p = {}",
                self.s, self.d, self.p
            ));
        }
        if self.j_max < 8 || self.j_max as usize * self.dim > 40 {
            return param(format!(
                "j_max = {} outside 8 ≤ j_max, j_max·D ≤ 40",
                self.j_max
            ));
        }
        let counts = [
            ("protr1_samples", self.protr1_samples),
            ("decay_grid_points", self.decay_grid_points),
            ("lower_bound_triples", self.lower_bound_triples),
            ("spectrum_candidates", self.spectrum_candidates),
            ("volume_points", self.volume_points),
            ("volume_reps", self.volume_reps),
        ];
        if let Some((name, _)) = counts.iter().find(|c| c.1 == 0) {
            return param(format!("{name} must be at least 1"));
        }
        let lists = [
            ("lower_bound_alphas", self.lower_bound_alphas.len()),
            ("lower_bound_j_max", self.lower_bound_j_max.len()),
            ("holder_exponents", self.holder_exponents.len()),
            ("alpha_grid", self.alpha_grid.len()),
            ("gamma_gaps", self.gamma_gaps.len()),
        ];
        if let Some((name, _)) = lists.iter().find(|c| c.1 == 0) {
            return param(format!("{name} must not be empty"));
        }
        let alphas = self.alpha_grid.iter().chain(&self.lower_bound_alphas);
        if let Some(a) = alphas.chain([&self.volume_alpha]).find(|&&a| !(a >= 1.0)) {
            return param(format!("α = {a} must be at least 1"));
        }
        if let Some(g) = self.gamma_gaps.iter().find(|&&g| !(g > 0.0)) {
            return param(format!("γ − H(α) = {g} must be positive"));
        }
        if !(self.epsilon > 0.0) {
            return param("epsilon must be positive");
        }
        let ranges = [
            ("protr1", self.protr1_j_min, self.protr1_j_max),
            ("decay", self.decay_j_min, self.decay_j_max),
            ("volume_j0", self.volume_j0_min, self.volume_j0_max),
        ];
        for (name, lo, hi) in ranges {
            if lo == 0 || hi <= lo {
                return param(format!("{name} scale range {lo}..={hi} is empty"));
            }
        }
        Ok(())
    }

    /// [`validate`](Self::validate) plus the hypotheses and scale windows of
    /// one experiment.
    pub fn validate_for(&self, e: Experiment) -> Result<()> {
        if e.needs_probe_hypothesis() {
            self.validate_probe()?;
        } else {
            self.validate()?;
        }
        match e {
            Experiment::TraceDecay if self.decay_j_max > self.j_max => {
                param("decay_j_max exceeds j_max")
            }
            Experiment::VolumeBound
                if (self.volume_alpha * self.volume_j0_max as f64).floor() as u32 > self.j_max =>
            {
                param("⌊α·volume_j0_max⌋ exceeds j_max")
            }
            Experiment::LowerBound
                if self
                    .lower_bound_j_max
                    .iter()
                    .any(|&j| j > self.j_max || j < 6) =>
            {
                param("lower_bound_j_max entries must lie in 6..=j_max")
            }
            _ => Ok(()),
        }
    }

    /// Additional hypothesis of the probe experiments: `g ∈ B^s_{p,q}(T^D)`
    /// needs `s − D/p > 0`.
    pub fn validate_probe(&self) -> Result<()> {
        self.validate()?;
        if !(self.s - self.dim as f64 / self.p > 0.0) {
            return param(format!(
                "probe experiments need s − D/p > 0, got s = {}, D = {}, p = {}",
                self.s, self.dim, self.p
            ));
        }
        Ok(())
    }
}

/// Reads a flag value as TOML, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Splits `key=value`.
pub fn parse_override(arg: &str) -> Result<(String, String)> {
    match arg.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => param(format!("override `{arg}` is not key=value")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_only_gate_their_experiment() {
        let c = ExperimentConfig {
            j_max: 10,
            ..Default::default()
        };
        c.validate_for(Experiment::SpectrumLine).unwrap();
        assert!(matches!(
            c.validate_for(Experiment::LowerBound),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            c.validate_for(Experiment::VolumeBound),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn defaults_validate() {
        let c = ExperimentConfig::default();
        c.validate_probe().unwrap();
        assert_eq!(c.d_prime(), 1);
    }

    #[test]
    fn text_round_trip() {
        let c = ExperimentConfig {
            seed: 9,
            alpha_grid: vec![1.0, 2.5],
            ..Default::default()
        };
        let back = ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn overrides_are_typed() {
        let ov = vec![
            parse_override("s=0.4").unwrap(),
            parse_override("alpha_grid = [1, 2]").unwrap(),
            parse_override("output_dir=out/run").unwrap(),
        ];
        let c = ExperimentConfig::resolve(None, &ov).unwrap();
        assert_eq!(c.s, 0.4);
        assert_eq!(c.alpha_grid, vec![1.0, 2.0]);
        assert_eq!(c.output_dir, PathBuf::from("out/run"));
        assert!(matches!(c.validate(), Err(Error::Parameter(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ExperimentConfig::from_toml_str("smoothness = 2").unwrap_err();
        assert!(matches!(e, Error::Parameter(_)));
    }

    #[test]
    fn probe_hypothesis() {
        // s = 1 satisfies s > d/p but not s > D/p.
        let c = ExperimentConfig {
            s: 1.0,
            ..Default::default()
        };
        c.validate().unwrap();
        assert!(c.validate_probe().is_err());
    }
}
