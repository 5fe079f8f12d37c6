//! Run configuration: everything needed to reproduce a run.

use abcf::{ParamError, Params, Scalar};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Svg,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    A,
    B,
}

/// Named surd parameter pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `a = (1-sqrt5)/2`, `b = (sqrt5-1)/2`.
    Golden,
    /// `a = (sqrt5-3)/2`, `b = (sqrt5-1)/2`, on the line `b = a + 1`.
    GoldenEdge,
}

impl Preset {
    pub fn values(self) -> (&'static str, &'static str) {
        match self {
            Preset::Golden => ("(1-sqrt(5))/2", "(-1+sqrt(5))/2"),
            Preset::GoldenEdge => ("(-3+sqrt(5))/2", "(-1+sqrt(5))/2"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    Expand { x: String, max_digits: usize },
    Cycle { which: Which, cap: usize },
    Attractor { cap: usize },
    Oracle { burn_in: usize, points: usize, min_inside: f64, max_gap: f64 },
    Verify { cap: usize, scan_grid: usize, scan_cap: usize },
    Exceptional { plan: String, target: f64, finiteness_cap: usize, check_triangles: bool },
    Measures { points: usize, tol: f64, ks_max: f64 },
    Plot { cap: usize, burn_in: usize, points: usize },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Expand { .. } => "expand",
            Command::Cycle { .. } => "cycle",
            Command::Attractor { .. } => "attractor",
            Command::Oracle { .. } => "oracle",
            Command::Verify { .. } => "verify",
            Command::Exceptional { .. } => "exceptional",
            Command::Measures { .. } => "measures",
            Command::Plot { .. } => "plot",
        }
    }

    fn needs_params(&self) -> bool {
        !matches!(self, Command::Exceptional { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    pub a: Option<String>,
    pub b: Option<String>,
    pub preset: Option<Preset>,
    pub mode: Mode,
    pub seed: u64,
    pub format: Format,
    /// `[x0, x1, y0, y1]` for SVG output.
    pub window: [f64; 4],
    pub out: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("missing parameters: give --a and --b, or --preset")]
    MissingParams,
    #[error("--preset cannot be combined with --a/--b")]
    PresetAndValues,
    #[error("presets are surds and need --mode exact")]
    PresetNeedsExact,
    #[error("cannot parse {0:?} as a float")]
    BadFloat(String),
    #[error("invalid parameters: {0}")]
    Params(#[from] ParamError),
}

impl RunConfig {
    pub fn params(&self) -> Result<Params, ConfigError> {
        let (a, b) = match (&self.preset, &self.a, &self.b) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => return Err(ConfigError::PresetAndValues),
            (Some(p), None, None) => {
                if self.mode != Mode::Exact {
                    return Err(ConfigError::PresetNeedsExact);
                }
                let (a, b) = p.values();
                (a.to_string(), b.to_string())
            }
            (None, Some(a), Some(b)) => (a.clone(), b.clone()),
            _ => return Err(ConfigError::MissingParams),
        };
        match self.mode {
            Mode::Exact => Ok(Params::exact(&a, &b)?),
            Mode::Float => Ok(Params::float(parse_float(&a)?, parse_float(&b)?)?),
        }
    }

    /// Checks the parameters up front so that usage errors are reported
    /// before any work starts.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.command.needs_params() {
            self.params()?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Accepts `p/q` as well as plain decimals.
pub fn parse_float(s: &str) -> Result<f64, ConfigError> {
    let bad = || ConfigError::BadFloat(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n: f64 = n.trim().parse().map_err(|_| bad())?;
        let d: f64 = d.trim().parse().map_err(|_| bad())?;
        return Ok(n / d);
    }
    s.trim().parse().map_err(|_| bad())
}

/// Parses a scalar in the run's mode.
pub fn parse_scalar(s: &str, mode: Mode) -> Result<Scalar, ConfigError> {
    match mode {
        Mode::Exact => Scalar::parse_exact(s).map_err(|e| ConfigError::Params(e.into())),
        Mode::Float => Ok(Scalar::float(parse_float(s)?)),
    }
}
