//! Run configuration: a strict JSON schema, validated at parse time.
//!
//! ```json
//! {
//!   "symbol": [[1.0]],
//!   "grid": { "n": 1, "N": 64, "R": 3.141592653589793 },
//!   "time": { "t0": 0.0, "T": 1.0, "Nt": 100 },
//!   "multipoint": [ { "alpha_re": 0.5, "alpha_im": 0.0, "lambda": 1.0 } ],
//!   "initial": { "kind": "gaussian", "amplitude": 1.0, "width": 1.0, "center": [0.0] },
//!   "forcing": null,
//!   "nonlinearity": { "lambda": -1.0, "p": 2.0 },
//!   "s": 0.0,
//!   "tolerances": { "eps_res": 1e-8, "tol_fp": 1e-10, "max_iter": 50 },
//!   "outputs": { "report_path": "out", "fields_path": null }
//! }
//! ```

use std::fmt;
use std::path::PathBuf;

use mpnls::grid::{sample_profile, Profile};
use mpnls::linear::{MultipointTerm, DEFAULT_EPS_RES};
use mpnls::nonlinear::{DEFAULT_MAX_ITER, DEFAULT_TOL_FP};
use mpnls::norms::is_admissible;
use mpnls::{EllipticSymbol, Field, MultipointSpec, PowerNonlinearity, SpectralGrid};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown key: {0}")]
    UnknownKey(String),
    #[error("validation failure: {0}")]
    ValidationFailure(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::ValidationFailure(msg.into())
}

/// Exponent in `[1, ∞]`; `∞` is written as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            ser.serialize_str("inf")
        } else {
            ser.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Number(x) => Ok(Exponent(x)),
            Raw::Text(s) => parse_exponent(&s).map(Exponent).map_err(serde::de::Error::custom),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Parses a number or `inf`/`infinity`.
pub fn parse_exponent(text: &str) -> Result<f64, String> {
    match text.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
        other => other.parse::<f64>().map_err(|_| format!("not an exponent: {text:?}")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(rename = "R")]
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t0: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(rename = "Nt")]
    pub nt: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultipointEntry {
    pub alpha_re: f64,
    #[serde(default)]
    pub alpha_im: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    Gaussian {
        amplitude: f64,
        width: f64,
        /// Empty means the origin.
        #[serde(default)]
        center: Vec<f64>,
    },
    PlaneWave {
        amplitude: f64,
        modes: Vec<f64>,
    },
    FromFile {
        path: PathBuf,
    },
}

impl ProfileConfig {
    pub fn to_profile(&self, dim: usize) -> Profile {
        match self {
            ProfileConfig::Gaussian { amplitude, width, center } => Profile::Gaussian {
                amplitude: *amplitude,
                width: *width,
                center: if center.is_empty() { vec![0.0; dim] } else { center.clone() },
            },
            ProfileConfig::PlaneWave { amplitude, modes } => {
                Profile::PlaneWave { amplitude: *amplitude, modes: modes.clone() }
            }
            ProfileConfig::FromFile { path } => Profile::FromFile { path: path.clone() },
        }
    }
}

/// Separable forcing `F(t, x) = f(x) e^{-i ω (t - t0)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingConfig {
    pub profile: ProfileConfig,
    #[serde(default)]
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityConfig {
    pub lambda: f64,
    pub p: f64,
}

fn default_eps_res() -> f64 {
    DEFAULT_EPS_RES
}
fn default_tol_fp() -> f64 {
    DEFAULT_TOL_FP
}
fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_eps_res")]
    pub eps_res: f64,
    #[serde(default = "default_tol_fp")]
    pub tol_fp: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { eps_res: DEFAULT_EPS_RES, tol_fp: DEFAULT_TOL_FP, max_iter: DEFAULT_MAX_ITER }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory receiving `timeseries.csv`, `summary.json` and verification tables.
    pub report_path: PathBuf,
    /// Directory for binary field snapshots, or none.
    #[serde(default)]
    pub fields_path: Option<PathBuf>,
    /// Frame indices to snapshot; defaults to the first and last frame.
    #[serde(default)]
    pub frames: Option<Vec<usize>>,
}

fn default_exponent_inf() -> Exponent {
    Exponent(f64::INFINITY)
}
fn default_samples() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Sample times for the dispersive check.
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default = "default_exponent_inf")]
    pub p: Exponent,
    /// Number of random data for the Strichartz check.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { times: Vec::new(), p: default_exponent_inf(), samples: default_samples(), seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub symbol: Vec<Vec<f64>>,
    pub grid: GridConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub multipoint: Vec<MultipointEntry>,
    pub initial: ProfileConfig,
    #[serde(default)]
    pub forcing: Option<ForcingConfig>,
    #[serde(default)]
    pub nonlinearity: Option<NonlinearityConfig>,
    #[serde(default)]
    pub s: f64,
    /// Spatial exponent of the smallness indicator; defaults to the metric exponent.
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub outputs: OutputConfig,
    #[serde(default)]
    pub verify: Option<VerifyConfig>,
}

fn classify_serde_error(err: serde_json::Error) -> ConfigError {
    let msg = err.to_string();
    if msg.starts_with("unknown field") || msg.starts_with("unknown variant") {
        ConfigError::UnknownKey(msg)
    } else if err.is_syntax() || err.is_eof() {
        ConfigError::Syntax(msg)
    } else {
        ConfigError::ValidationFailure(msg)
    }
}

/// Parses and validates a configuration, applying tolerance defaults.
pub fn parse_config(text: &str) -> Result<SolveConfig, ConfigError> {
    let config: SolveConfig = serde_json::from_str(text).map_err(classify_serde_error)?;
    config.validate()?;
    Ok(config)
}

pub fn to_json(config: &SolveConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serializes")
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let symbol = self.symbol()?;
        let grid = self.spectral_grid()?;
        if symbol.dim() != grid.dim() {
            return Err(invalid(format!(
                "symbol is {0}x{0} but grid dimension is {1}",
                symbol.dim(),
                grid.dim()
            )));
        }
        if self.time.nt == 0 {
            return Err(invalid("Nt must be a positive integer"));
        }
        let mp = self.multipoint_spec()?;
        mp.frame_indices(self.time.nt)
            .map_err(|e| invalid(format!("{e} (t0 = {}, T = {}, Nt = {})", self.time.t0, self.time.t_end, self.time.nt)))?;
        self.check_profile(&self.initial, "initial")?;
        if let Some(forcing) = &self.forcing {
            self.check_profile(&forcing.profile, "forcing.profile")?;
            if !forcing.omega.is_finite() {
                return Err(invalid("forcing.omega must be finite"));
            }
        }
        if let Some(nl) = &self.nonlinearity {
            PowerNonlinearity::new(nl.lambda, nl.p).map_err(|e| invalid(format!("nonlinearity: {e}")))?;
            if !(0.0..=1.0).contains(&self.s) {
                return Err(invalid(format!("s = {} must lie in [0, 1] for nonlinear runs", self.s)));
            }
        }
        if !(0.0..=2.0).contains(&self.s) {
            return Err(invalid(format!("s = {} must lie in [0, 2]", self.s)));
        }
        if let Some(sigma) = self.sigma {
            if !(sigma >= 1.0) {
                return Err(invalid(format!("sigma = {sigma} must lie in [1, inf]")));
            }
        }
        let tol = &self.tolerances;
        if !(tol.eps_res > 0.0 && tol.eps_res.is_finite()) {
            return Err(invalid("eps_res must be positive"));
        }
        if !(tol.tol_fp > 0.0 && tol.tol_fp.is_finite()) {
            return Err(invalid("tol_fp must be positive"));
        }
        if tol.max_iter == 0 {
            return Err(invalid("max_iter must be positive"));
        }
        if let Some(frames) = &self.outputs.frames {
            if let Some(bad) = frames.iter().find(|&&m| m > self.time.nt) {
                return Err(invalid(format!("snapshot frame {bad} exceeds Nt = {}", self.time.nt)));
            }
        }
        if let Some(verify) = &self.verify {
            if verify.times.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
                return Err(invalid("verify.times must be positive"));
            }
            if verify.times.windows(2).any(|w| w[1] <= w[0]) {
                return Err(invalid("verify.times must be strictly increasing"));
            }
            if !(verify.p.0 >= 2.0) {
                return Err(invalid(format!("verify.p = {} must lie in [2, inf]", verify.p)));
            }
        }
        Ok(())
    }

    fn check_profile(&self, profile: &ProfileConfig, name: &str) -> Result<(), ConfigError> {
        let n = self.grid.n;
        match profile {
            ProfileConfig::Gaussian { amplitude, width, center } => {
                if !amplitude.is_finite() || !(*width > 0.0 && width.is_finite()) {
                    return Err(invalid(format!("{name}: gaussian needs finite amplitude and positive width")));
                }
                if !center.is_empty() && center.len() != n {
                    return Err(invalid(format!("{name}: center has {} entries, expected {n}", center.len())));
                }
            }
            ProfileConfig::PlaneWave { amplitude, modes } => {
                if !amplitude.is_finite() {
                    return Err(invalid(format!("{name}: amplitude must be finite")));
                }
                if modes.len() != n {
                    return Err(invalid(format!("{name}: modes has {} entries, expected {n}", modes.len())));
                }
                if let Some(j) = modes.iter().find(|j| j.fract() != 0.0) {
                    return Err(invalid(format!("{name}: mode {j} is not on the lattice")));
                }
            }
            // Existence and grid agreement are checked when the file is read.
            ProfileConfig::FromFile { .. } => {}
        }
        Ok(())
    }

    pub fn symbol(&self) -> Result<EllipticSymbol, ConfigError> {
        EllipticSymbol::new(&self.symbol).map_err(|e| invalid(format!("symbol: {e}")))
    }

    pub fn spectral_grid(&self) -> Result<SpectralGrid, ConfigError> {
        SpectralGrid::new(self.grid.n, self.grid.points, self.grid.half_width)
            .map_err(|e| invalid(format!("grid: {e}")))
    }

    pub fn multipoint_spec(&self) -> Result<MultipointSpec, ConfigError> {
        let terms = self
            .multipoint
            .iter()
            .map(|e| MultipointTerm { alpha: Complex64::new(e.alpha_re, e.alpha_im), lambda: e.lambda })
            .collect();
        MultipointSpec::new(self.time.t0, self.time.t_end, terms).map_err(|e| match e {
            mpnls::Error::InvalidMultipoint(msg) => invalid(msg),
            other => invalid(other.to_string()),
        })
    }

    pub fn nonlinearity(&self) -> Option<PowerNonlinearity> {
        self.nonlinearity.as_ref().and_then(|nl| PowerNonlinearity::new(nl.lambda, nl.p).ok())
    }

    pub fn initial_field(&self, grid: &SpectralGrid) -> mpnls::Result<Field> {
        sample_profile(grid, &self.initial.to_profile(grid.dim()))
    }

    pub fn verify(&self) -> VerifyConfig {
        self.verify.clone().unwrap_or_default()
    }
}

/// Validates exponents given on the command line.
pub fn check_pair_arguments(n: usize, q: f64, r: f64) -> Result<(), ConfigError> {
    is_admissible(n, q, r).map(|_| ()).map_err(|e| invalid(e.to_string()))
}
