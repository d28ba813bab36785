//! Run configuration: a flat TOML file, overridden key by key from the
//! command line.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use meissner_core::analysis::PhysicalParams;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    SolveField,
    Eigensolve,
    SelfConsistent,
    Sweep,
    Verify,
    Phase,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::SolveField => "solve-field",
            Mode::Eigensolve => "eigensolve",
            Mode::SelfConsistent => "self-consistent",
            Mode::Sweep => "sweep",
            Mode::Verify => "verify",
            Mode::Phase => "phase",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Outer edge of the grid, fixed or sized to the Gaussian tail of the field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RhoMax {
    #[default]
    Auto,
    Value(f64),
}

impl FromStr for RhoMax {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(RhoMax::Auto);
        }
        s.parse::<f64>().map(RhoMax::Value).map_err(|_| format!("expected a number or \"auto\", got {s:?}"))
    }
}

impl fmt::Display for RhoMax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhoMax::Auto => f.write_str("auto"),
            RhoMax::Value(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for RhoMax {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            RhoMax::Auto => s.serialize_str("auto"),
            RhoMax::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for RhoMax {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(RhoMax::Value(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Material parameters in SI units; omitted keys take the electron-pair
/// defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Physical {
    pub particle_mass: f64,
    pub charge: f64,
    pub density: f64,
    pub radius: f64,
    pub mu0: f64,
    pub eps0: f64,
    pub light_speed: f64,
}

impl Default for Physical {
    fn default() -> Self {
        PhysicalParams::default().into()
    }
}

impl From<PhysicalParams> for Physical {
    fn from(p: PhysicalParams) -> Self {
        Self {
            particle_mass: p.particle_mass,
            charge: p.charge,
            density: p.density,
            radius: p.radius,
            mu0: p.mu0,
            eps0: p.eps0,
            light_speed: p.light_speed,
        }
    }
}

impl From<Physical> for PhysicalParams {
    fn from(p: Physical) -> Self {
        Self {
            particle_mass: p.particle_mass,
            charge: p.charge,
            density: p.density,
            radius: p.radius,
            mu0: p.mu0,
            eps0: p.eps0,
            light_speed: p.light_speed,
        }
    }
}

/// Configuration as read from a file: every key optional, unknown keys
/// rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub mode: Option<Mode>,
    pub kappa: Option<f64>,
    pub boundary_b: Option<f64>,
    pub grid_n: Option<usize>,
    pub rho_max: Option<RhoMax>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub mixing: Option<f64>,
    pub step_delta: Option<f64>,
    pub output_path: Option<PathBuf>,
    pub output_format: Option<Format>,
    pub density: Option<f64>,
    pub density_file: Option<PathBuf>,
    pub b_values: Option<Vec<f64>>,
    pub applied_h: Option<f64>,
    pub tau: Option<f64>,
    pub physical: Option<Physical>,
}

impl FileConfig {
    /// Keys set in `other` replace those in `self`.
    pub fn merge(self, other: FileConfig) -> FileConfig {
        FileConfig {
            mode: other.mode.or(self.mode),
            kappa: other.kappa.or(self.kappa),
            boundary_b: other.boundary_b.or(self.boundary_b),
            grid_n: other.grid_n.or(self.grid_n),
            rho_max: other.rho_max.or(self.rho_max),
            tol: other.tol.or(self.tol),
            max_iter: other.max_iter.or(self.max_iter),
            mixing: other.mixing.or(self.mixing),
            step_delta: other.step_delta.or(self.step_delta),
            output_path: other.output_path.or(self.output_path),
            output_format: other.output_format.or(self.output_format),
            density: other.density.or(self.density),
            density_file: other.density_file.or(self.density_file),
            b_values: other.b_values.or(self.b_values),
            applied_h: other.applied_h.or(self.applied_h),
            tau: other.tau.or(self.tau),
            physical: other.physical.or(self.physical),
        }
    }
}

pub const DEFAULT_GRID_N: usize = 2001;
pub const DEFAULT_BOUNDARY_B: f64 = 0.9;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 500;
pub const DEFAULT_MIXING: f64 = 0.5;
pub const DEFAULT_B_VALUES: [f64; 11] = [0.02, 0.04, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Fully resolved, validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub kappa: Option<f64>,
    pub boundary_b: f64,
    pub grid_n: usize,
    pub rho_max: RhoMax,
    pub tol: f64,
    pub max_iter: usize,
    pub mixing: f64,
    pub step_delta: Option<f64>,
    pub output_path: Option<PathBuf>,
    pub output_format: Format,
    pub density: Option<f64>,
    pub density_file: Option<PathBuf>,
    pub b_values: Vec<f64>,
    pub applied_h: Option<f64>,
    pub tau: Option<f64>,
    pub physical: Physical,
}

fn invalid(key: &str, why: impl fmt::Display) -> CliError {
    CliError::Config(format!("invalid value for `{key}`: {why}"))
}

impl RunConfig {
    pub fn resolve(raw: FileConfig) -> Result<Self, CliError> {
        let mode = raw.mode.ok_or_else(|| CliError::Config("missing required key `mode`".into()))?;
        let cfg = RunConfig {
            mode,
            kappa: raw.kappa,
            boundary_b: raw.boundary_b.unwrap_or(DEFAULT_BOUNDARY_B),
            grid_n: raw.grid_n.unwrap_or(DEFAULT_GRID_N),
            rho_max: raw.rho_max.unwrap_or_default(),
            tol: raw.tol.unwrap_or(DEFAULT_TOL),
            max_iter: raw.max_iter.unwrap_or(DEFAULT_MAX_ITER),
            mixing: raw.mixing.unwrap_or(DEFAULT_MIXING),
            step_delta: raw.step_delta,
            output_path: raw.output_path,
            output_format: raw.output_format.unwrap_or_default(),
            density: raw.density,
            density_file: raw.density_file,
            b_values: raw.b_values.unwrap_or_else(|| DEFAULT_B_VALUES.to_vec()),
            applied_h: raw.applied_h,
            tau: raw.tau,
            physical: raw.physical.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(k) = self.kappa {
            if !(k.is_finite() && k >= 0.0) {
                return Err(invalid("kappa", format!("must be finite and >= 0, got {k}")));
            }
        }
        if matches!(self.mode, Mode::Sweep | Mode::SelfConsistent | Mode::SolveField) && self.kappa.is_none() {
            return Err(CliError::Config(format!("mode {} requires `kappa`", self.mode.as_str())));
        }
        if !(self.boundary_b.is_finite() && self.boundary_b > 0.0) {
            return Err(invalid("boundary_b", format!("must be > 0, got {}", self.boundary_b)));
        }
        if self.grid_n < 101 {
            return Err(invalid("grid_n", format!("must be >= 101, got {}", self.grid_n)));
        }
        if let RhoMax::Value(r) = self.rho_max {
            if !(r.is_finite() && r >= 1.0) {
                return Err(invalid("rho_max", format!("must be >= 1 or \"auto\", got {r}")));
            }
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(invalid("tol", format!("must be > 0, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be >= 1"));
        }
        if !(self.mixing > 0.0 && self.mixing <= 1.0) {
            return Err(invalid("mixing", format!("must lie in (0, 1], got {}", self.mixing)));
        }
        if let Some(d) = self.step_delta {
            if !(d > 0.0 && d < 1.0) {
                return Err(invalid("step_delta", format!("must lie in (0, 1), got {d}")));
            }
        }
        if let Some(s) = self.density {
            if !(s.is_finite() && s >= 0.0) {
                return Err(invalid("density", format!("must be >= 0, got {s}")));
            }
        }
        if self.density.is_some() && self.density_file.is_some() {
            return Err(CliError::Config("`density` and `density_file` are mutually exclusive".into()));
        }
        if let Some(b) = self.b_values.iter().find(|b| !(**b > 0.0 && **b < 1.0)) {
            return Err(invalid("b_values", format!("every entry must lie in (0, 1), got {b}")));
        }
        if let Some(t) = self.tau {
            if !(t.is_finite() && t >= 0.0) {
                return Err(invalid("tau", format!("must be >= 0, got {t}")));
            }
        }
        PhysicalParams::from(self.physical)
            .validate()
            .map_err(|e| invalid("physical", e))?;
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<FileConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    RunConfig::resolve(parse_config(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg = RunConfig::resolve(parse_config("mode = \"verify\"").unwrap()).unwrap();
        assert_eq!(cfg.mode, Mode::Verify);
        assert_eq!(cfg.grid_n, DEFAULT_GRID_N);
        assert_eq!(cfg.tol, DEFAULT_TOL);
        assert_eq!(cfg.max_iter, DEFAULT_MAX_ITER);
        assert_eq!(cfg.mixing, DEFAULT_MIXING);
        assert_eq!(cfg.rho_max, RhoMax::Auto);
        assert_eq!(cfg.output_format, Format::Csv);
        assert_eq!(cfg.physical, Physical::default());
    }

    #[test]
    fn validation_names_the_key() {
        let err = RunConfig::resolve(parse_config("mode = \"verify\"\ntol = -1.0").unwrap()).unwrap_err();
        assert!(err.to_string().contains("`tol`"), "{err}");
        let err = RunConfig::resolve(parse_config("mode = \"sweep\"").unwrap()).unwrap_err();
        assert!(err.to_string().contains("`kappa`"), "{err}");
        let err = RunConfig::resolve(parse_config("mode = \"verify\"\ngrid_n = 50").unwrap()).unwrap_err();
        assert!(err.to_string().contains("`grid_n`"), "{err}");
        let err = RunConfig::resolve(FileConfig::default()).unwrap_err();
        assert!(err.to_string().contains("`mode`"), "{err}");
    }

    #[test]
    fn unknown_keys_and_bad_types_are_rejected() {
        assert!(parse_config("mode = \"verify\"\nkapa = 1.0").is_err());
        assert!(parse_config("mode = \"verify\"\ngrid_n = \"many\"").is_err());
        assert!(parse_config("mode = \"relax\"").is_err());
        assert!(parse_config("mode = \"verify\"\n[physical]\nmass = 1.0").is_err());
    }

    #[test]
    fn rho_max_accepts_number_or_auto() {
        let c = parse_config("mode = \"verify\"\nrho_max = 4.5").unwrap();
        assert_eq!(c.rho_max, Some(RhoMax::Value(4.5)));
        let c = parse_config("mode = \"verify\"\nrho_max = \"auto\"").unwrap();
        assert_eq!(c.rho_max, Some(RhoMax::Auto));
        assert!(parse_config("mode = \"verify\"\nrho_max = \"far\"").is_err());
        assert_eq!("3".parse::<RhoMax>().unwrap(), RhoMax::Value(3.0));
    }

    #[test]
    fn later_layer_wins() {
        let file = parse_config("mode = \"verify\"\nkappa = 2.0\ntol = 1e-6").unwrap();
        let flags = FileConfig { kappa: Some(5.0), ..Default::default() };
        let cfg = RunConfig::resolve(file.merge(flags)).unwrap();
        assert_eq!(cfg.kappa, Some(5.0));
        assert_eq!(cfg.tol, 1e-6);
    }

    #[test]
    fn partial_physical_table_keeps_other_defaults() {
        let cfg = RunConfig::resolve(parse_config("mode = \"phase\"\n[physical]\nradius = 2e-6").unwrap()).unwrap();
        assert_eq!(cfg.physical.radius, 2e-6);
        assert_eq!(cfg.physical.density, Physical::default().density);
    }
}
