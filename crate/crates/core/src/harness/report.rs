use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::Result;
use crate::stats::LineFit;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtMost,
    AtLeast,
}

/// A measured value against its threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "float")]
    pub value: f64,
    #[serde(with = "float")]
    pub threshold: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            comparison: Comparison::AtMost,
            passed: value <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            comparison: Comparison::AtLeast,
            passed: value >= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    pub name: String,
    #[serde(flatten)]
    pub fit: LineFit,
}

/// A CSV table; `NaN` and infinities print as `nan`, `inf`, `-inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    #[serde(with = "float_rows")]
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_cell(*v)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

fn format_cell(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v}")
    }
}

/// JSON has no NaN or infinity; those are written as the CSV spellings.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Float {
    Finite(f64),
    Special(String),
}

impl From<f64> for Float {
    fn from(v: f64) -> Self {
        if v.is_finite() {
            Float::Finite(v)
        } else {
            Float::Special(format_cell(v))
        }
    }
}

impl TryFrom<Float> for f64 {
    type Error = String;

    fn try_from(v: Float) -> std::result::Result<f64, String> {
        match v {
            Float::Finite(x) => Ok(x),
            Float::Special(s) => match s.as_str() {
                "nan" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(format!("not a number: {s:?}")),
            },
        }
    }
}

mod float {
    use super::Float;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        Float::from(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        f64::try_from(Float::deserialize(d)?).map_err(D::Error::custom)
    }
}

mod float_rows {
    use super::Float;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(rows: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Float>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| Float::from(v)).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        Vec::<Vec<Float>>::deserialize(d)?
            .into_iter()
            .map(|r| r.into_iter().map(f64::try_from).collect())
            .collect::<Result<_, _>>()
            .map_err(D::Error::custom)
    }
}

/// Outcome of one experiment. `passed` is the conjunction of `checks`;
/// `informational` entries are reported but never gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub informational: Vec<Check>,
    pub fits: Vec<NamedFit>,
    pub values: BTreeMap<String, serde_json::Value>,
    pub tables: Vec<Table>,
}

impl ExperimentResult {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            passed: true,
            checks: Vec::new(),
            informational: Vec::new(),
            fits: Vec::new(),
            values: BTreeMap::new(),
            tables: Vec::new(),
        }
    }

    pub fn check(&mut self, c: Check) {
        self.passed &= c.passed;
        self.checks.push(c);
    }

    /// A gate that has no numeric value, such as "every row in the cone".
    pub fn require(&mut self, name: &str, ok: bool) {
        self.check(Check::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0));
    }

    pub fn inform(&mut self, c: Check) {
        self.informational.push(c);
    }

    pub fn fit(&mut self, name: impl Into<String>, fit: LineFit) {
        self.fits.push(NamedFit {
            name: name.into(),
            fit,
        });
    }

    pub fn value(&mut self, key: &str, v: impl Serialize) {
        let v = serde_json::to_value(v).expect("experiment values serialise");
        self.values.insert(key.to_string(), v);
    }

    pub fn check_by_name(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Wall-clock data, kept apart so the rest of the report is reproducible.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_s: f64,
    pub runtimes_s: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub passed: bool,
    pub experiments: Vec<ExperimentResult>,
    pub timing: Timing,
}

impl ExperimentReport {
    pub fn experiment(&self, name: &str) -> Option<&ExperimentResult> {
        self.experiments.iter().find(|e| e.name == name)
    }

    /// The report without `timing`, as compared for determinism.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serialises");
        v.as_object_mut().expect("object").remove("timing");
        serde_json::to_string_pretty(&v).expect("report serialises")
    }

    /// Writes `report.json` and one `<experiment>_<table>.csv` per table.
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut w = BufWriter::new(File::create(dir.join("report.json"))?);
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        w.flush()?;
        for e in &self.experiments {
            for t in &e.tables {
                let path = dir.join(format!("{}_{}.csv", e.name, t.name));
                let mut w = BufWriter::new(File::create(path)?);
                t.write_csv(&mut w)?;
                w.flush()?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_gate_the_result() {
        let mut r = ExperimentResult::new("x");
        r.check(Check::at_most("a", 1.0, 2.0));
        r.inform(Check::at_least("b", 0.0, 1.0));
        assert!(r.passed);
        r.require("c", false);
        assert!(!r.passed);
    }

    #[test]
    fn csv_cells() {
        let mut t = Table::new("t", &["h", "dhat"]);
        t.push(vec![1.5, f64::NEG_INFINITY]);
        t.push(vec![1.6, 0.25]);
        let mut out = Vec::new();
        t.write_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "h,dhat\n1.5,-inf\n1.6,0.25\n"
        );
    }
}
