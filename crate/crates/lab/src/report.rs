//! Experiment reports and their JSON / CSV renderings.
//!
//! Both renderings print every number through [`format_f64`], so the two
//! files carry the same decimal strings. Non-finite values become the strings
//! `"inf"`, `"-inf"` and `"nan"`.

use std::io::Write;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::formats::format_f64;

pub const SCHEMA_VERSION: u32 = 1;

/// An `f64` that serializes as a JSON number when finite and as a string otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&format_f64(self.0))
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(f64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(v) => Ok(Num(v)),
            Raw::S(s) => match s.as_str() {
                "inf" => Ok(Num(f64::INFINITY)),
                "-inf" => Ok(Num(f64::NEG_INFINITY)),
                "nan" => Ok(Num(f64::NAN)),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "==")]
    Equal,
}

impl Comparison {
    pub fn symbol(self) -> &'static str {
        match self {
            Self::AtMost => "<=",
            Self::AtLeast => ">=",
            Self::Equal => "==",
        }
    }

    pub fn holds(self, measured: f64, threshold: f64) -> bool {
        match self {
            Self::AtMost => measured <= threshold,
            Self::AtLeast => measured >= threshold,
            Self::Equal => measured == threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub name: String,
    pub measured: Num,
    pub threshold: Num,
    pub comparison: Comparison,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Measurement {
    pub name: String,
    pub value: Num,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    pub crate_version: String,
    /// Unix seconds; the only field allowed to differ between identical runs.
    pub timestamp: u64,
}

impl Environment {
    pub fn now() -> Self {
        let timestamp =
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self { crate_version: env!("CARGO_PKG_VERSION").to_string(), timestamp }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub experiment: String,
    pub seed: u64,
    pub passed: bool,
    pub environment: Environment,
    pub checks: Vec<Check>,
    pub measurements: Vec<Measurement>,
}

impl Report {
    pub fn new(experiment: &str, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            seed,
            passed: true,
            environment: Environment::now(),
            checks: Vec::new(),
            measurements: Vec::new(),
        }
    }

    /// Adds a check; NaN measurements fail every comparison.
    pub fn check(&mut self, name: impl Into<String>, measured: f64, comparison: Comparison, threshold: f64) -> bool {
        let passed = comparison.holds(measured, threshold);
        self.passed &= passed;
        self.checks.push(Check { name: name.into(), measured: Num(measured), threshold: Num(threshold), comparison, passed });
        passed
    }

    pub fn measure(&mut self, name: impl Into<String>, value: f64) {
        self.measurements.push(Measurement { name: name.into(), value: Num(value) });
    }

    /// Records min, median, 90th percentile and max of `values` under `prefix`.
    pub fn distribution(&mut self, prefix: &str, values: &[f64]) {
        if values.is_empty() {
            return;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let at = |q: f64| v[((v.len() - 1) as f64 * q).round() as usize];
        self.measure(format!("{prefix}/min"), at(0.0));
        self.measure(format!("{prefix}/median"), at(0.5));
        self.measure(format!("{prefix}/p90"), at(0.9));
        self.measure(format!("{prefix}/max"), at(1.0));
    }

    /// Exit status: 0 if every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    /// The report with the timestamp zeroed, for comparisons between runs.
    pub fn without_timestamp(&self) -> Self {
        let mut r = self.clone();
        r.environment.timestamp = 0;
        r
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n")
    }

    /// One record per row: `meta`, `check` and `measurement` rows share the
    /// columns `record,name,value,threshold,comparison,passed`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["record", "name", "value", "threshold", "comparison", "passed"])?;
        let meta = [
            ("schema_version", self.schema_version.to_string()),
            ("experiment", self.experiment.clone()),
            ("seed", self.seed.to_string()),
            ("passed", self.passed.to_string()),
            ("crate_version", self.environment.crate_version.clone()),
            ("timestamp", self.environment.timestamp.to_string()),
        ];
        for (name, value) in meta {
            w.write_record(["meta", name, &value, "", "", ""])?;
        }
        for c in &self.checks {
            w.write_record([
                "check",
                &c.name,
                &format_f64(c.measured.0),
                &format_f64(c.threshold.0),
                c.comparison.symbol(),
                &c.passed.to_string(),
            ])?;
        }
        for m in &self.measurements {
            w.write_record(["measurement", &m.name, &format_f64(m.value.0), "", "", ""])?;
        }
        w.flush()?;
        Ok(())
    }

    /// One line per check, for terminals.
    pub fn summary(&self) -> String {
        let mut s = format!("{} (seed {}): {}\n", self.experiment, self.seed, if self.passed { "PASS" } else { "FAIL" });
        for c in &self.checks {
            s.push_str(&format!(
                "  [{}] {}: {} {} {}\n",
                if c.passed { "pass" } else { "FAIL" },
                c.name,
                format_f64(c.measured.0),
                c.comparison.symbol(),
                format_f64(c.threshold.0)
            ));
        }
        s
    }
}
