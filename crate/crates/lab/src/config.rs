//! Experiment configuration (TOML) and its resolution into run settings.

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use twoweight_core::{DyadicGrid, ExponentPair, MaximalKind};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config does not match the schema: {0}")]
    Schema(#[from] toml::de::Error),
    #[error("unknown experiment `{0}` (expected one of: {list})", list = Case::NAMES.join(", "))]
    UnknownExperiment(String),
    #[error("{0}")]
    Invalid(#[from] twoweight_core::Error),
    #[error("{0}")]
    Unsupported(String),
}

/// The reproduction cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Case {
    AmConstant,
    ExamplePair,
    HilbertShift,
    SparseDomination,
    TestingVsNorm,
    WeakType,
}

impl Case {
    pub const ALL: [Case; 6] =
        [Case::AmConstant, Case::ExamplePair, Case::HilbertShift, Case::SparseDomination, Case::TestingVsNorm, Case::WeakType];
    pub const NAMES: [&'static str; 6] =
        ["am-constant", "example-pair", "hilbert-shift", "sparse-domination", "testing-vs-norm", "weak-type"];

    pub fn name(self) -> &'static str {
        Self::NAMES[Self::ALL.iter().position(|c| *c == self).unwrap()]
    }

    pub fn default_trials(self) -> usize {
        match self {
            Case::AmConstant => 200,
            Case::ExamplePair => 1,
            Case::HilbertShift => 50,
            Case::SparseDomination => 100,
            Case::TestingVsNorm => 100,
            Case::WeakType => 100,
        }
    }

    /// `(dim, top, bottom)` of the default window.
    pub fn default_window(self) -> (usize, i32, i32) {
        match self {
            Case::AmConstant => (1, 3, -7),
            Case::ExamplePair | Case::HilbertShift | Case::SparseDomination => (1, 3, -10),
            Case::TestingVsNorm | Case::WeakType => (1, 3, -3),
        }
    }
}

impl FromStr for Case {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::NAMES.iter().position(|n| *n == s).map(|i| Self::ALL[i]).ok_or_else(|| ConfigError::UnknownExperiment(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MaximalChoice {
    #[default]
    HardyLittlewood,
    Dyadic,
}

impl From<MaximalChoice> for MaximalKind {
    fn from(m: MaximalChoice) -> Self {
        match m {
            MaximalChoice::HardyLittlewood => MaximalKind::HardyLittlewood,
            MaximalChoice::Dyadic => MaximalKind::Dyadic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub top: i32,
    pub bottom: i32,
    #[serde(default)]
    pub shift: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentConfig {
    pub p: f64,
    pub q: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

/// The on-disk experiment description. Every field except `experiment` is optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    pub trials: Option<usize>,
    pub resolution: Option<usize>,
    #[serde(default = "yes")]
    pub parallel: bool,
    #[serde(default)]
    pub maximal: MaximalChoice,
    pub grid: Option<GridConfig>,
    pub exponents: Option<ExponentConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn yes() -> bool {
    true
}

impl ExperimentConfig {
    pub fn for_case(case: Case) -> Self {
        Self {
            experiment: case.name().to_string(),
            seed: 0,
            trials: None,
            resolution: None,
            parallel: true,
            maximal: MaximalChoice::default(),
            grid: None,
            exponents: None,
            output: OutputConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    /// Validates the config and fills in the defaults of its case.
    pub fn settings(&self) -> Result<Settings, ConfigError> {
        let case: Case = self.experiment.parse()?;
        let (dim, top, bottom) = match &self.grid {
            Some(g) => (g.dim, g.top, g.bottom),
            None => case.default_window(),
        };
        let shift = self.grid.as_ref().and_then(|g| g.shift.clone()).unwrap_or_else(|| vec![0.0; dim]);
        let grid = DyadicGrid::new(dim, &shift, top, bottom)?;
        let e = self.exponents.unwrap_or(ExponentConfig { p: 2.0, q: 3.0 });
        let exponents = ExponentPair::new(e.p, e.q)?;
        let resolution = self.resolution.unwrap_or(16);
        if resolution == 0 {
            return Err(twoweight_core::Error::InvalidParameter("quadrature resolution must be positive").into());
        }
        Ok(Settings {
            case,
            seed: self.seed,
            trials: self.trials.unwrap_or(case.default_trials()),
            resolution,
            parallel: self.parallel,
            maximal: self.maximal.into(),
            grid,
            grid_overridden: self.grid.is_some(),
            exponents,
        })
    }
}

/// A validated, fully defaulted run.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub case: Case,
    pub seed: u64,
    pub trials: usize,
    pub resolution: usize,
    pub parallel: bool,
    pub maximal: MaximalKind,
    pub grid: DyadicGrid,
    /// `false` when `grid` is the case default.
    pub grid_overridden: bool,
    pub exponents: ExponentPair,
}

impl Settings {
    pub fn for_case(case: Case) -> Self {
        ExperimentConfig::for_case(case).settings().expect("defaults are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_config_parses() {
        let text = r#"
            experiment = "example-pair"
            seed = 11
            trials = 3
            resolution = 32
            parallel = false
            maximal = "dyadic"
            [grid]
            dim = 1
            top = 2
            bottom = -4
            [exponents]
            p = 1.5
            q = 4.0
            [output]
            path = "out.csv"
            format = "csv"
        "#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        let s = cfg.settings().unwrap();
        assert_eq!(s.case, Case::ExamplePair);
        assert_eq!((s.seed, s.trials, s.resolution, s.parallel), (11, 3, 32, false));
        assert_eq!(s.maximal, MaximalKind::Dyadic);
        assert_eq!((s.grid.top(), s.grid.bottom()), (2, -4));
        assert_eq!(cfg.output.format, OutputFormat::Csv);
        assert!(s.grid_overridden);
    }

    #[test]
    fn defaults_follow_the_case() {
        let s = ExperimentConfig::from_toml("experiment = \"am-constant\"").unwrap().settings().unwrap();
        assert_eq!(s.trials, 200);
        assert_eq!(s.grid.cell_count(), 1 << 10);
        assert_eq!((s.exponents.p(), s.exponents.q()), (2.0, 3.0));
        for case in Case::ALL {
            assert_eq!(case.name().parse::<Case>().unwrap(), case);
        }
    }

    #[test]
    fn usage_errors() {
        assert!(matches!(
            ExperimentConfig::from_toml("experiment = \"nope\"").unwrap().settings(),
            Err(ConfigError::UnknownExperiment(_))
        ));
        assert!(matches!(ExperimentConfig::from_toml("experiment = \"weak-type\"\ncolour = 1"), Err(ConfigError::Schema(_))));
        let bad = ExperimentConfig::from_toml("experiment = \"weak-type\"\n[exponents]\np = 3.0\nq = 2.0").unwrap();
        let msg = bad.settings().unwrap_err().to_string();
        assert!(msg.contains("1 < p < q"), "{msg}");
    }
}
