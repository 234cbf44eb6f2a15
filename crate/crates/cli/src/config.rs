//! Run configuration: JSON file, command-line flags, environment fallback.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub const OUTPUT_DIR_ENV: &str = "TGFIELD_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "tgfield-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Solve the profile ODE and check its curvature identities.
    SolveAlpha,
    /// Evaluate the closed-form second fundamental form on a grid.
    VerifyTg,
    /// Shoot random Sasaki geodesics tangent to the field's graph.
    Shoot,
    /// Integrate one trajectory and track its first integral.
    Trace,
    /// Trajectories of the round sphere with their circles and stereographic images.
    SphereDemo,
    /// Realize the metric as a surface of revolution.
    Immerse,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.to_possible_value().expect("no skipped variants");
        f.write_str(name.get_name())
    }
}

/// A rejected configuration, naming the offending key.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Every setting, all optional. Used both for the JSON file and for flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Pipeline to run; the subcommand takes precedence.
    #[arg(skip)]
    pub command: Option<Command>,
    /// Angular speed of the field.
    #[arg(long = "a", global = true, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Phase of the field.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega0: Option<f64>,
    /// Initial point of the profile.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub u0: Option<f64>,
    /// Initial value of alpha at u0.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha0: Option<f64>,
    /// Lower end of the requested profile span.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub u_min: Option<f64>,
    /// Upper end of the requested profile span.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub u_max: Option<f64>,
    /// Tolerance of the profile solver and of quadratures.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Lower `u` of the residual grid (default: inside the validity interval).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub grid_u_min: Option<f64>,
    /// Upper `u` of the residual grid.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub grid_u_max: Option<f64>,
    /// Lower `v` of the residual grid.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub v_min: Option<f64>,
    /// Upper `v` of the residual grid.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub v_max: Option<f64>,
    /// Grid points along `u`.
    #[arg(long, global = true)]
    pub n_u: Option<usize>,
    /// Grid points along `v`.
    #[arg(long, global = true)]
    pub n_v: Option<usize>,
    /// Differentiate the field numerically instead of in closed form.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub fd: Option<bool>,
    /// Added to the angular speed of the field.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub perturb_a: Option<f64>,
    /// Amplitude of an added `sin v` term in the field angle.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub perturb_sin: Option<f64>,
    /// Integration step.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub step: Option<f64>,
    /// Arc length to integrate.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub length: Option<f64>,
    /// Number of random shots.
    #[arg(long, global = true)]
    pub shots: Option<usize>,
    /// Seed of the tangent sampler.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Base point of the shots (default: middle of the validity interval).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub base_u: Option<f64>,
    /// `v` of the shots' base point.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub base_v: Option<f64>,
    /// Start of the traced trajectory (default: u0).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub start_u: Option<f64>,
    /// `v` of the traced trajectory's start.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub start_v: Option<f64>,
    /// First meridian parameter of the immersion.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha_min: Option<f64>,
    /// Last meridian parameter of the immersion.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha_max: Option<f64>,
    /// Meridian samples of the immersion.
    #[arg(long, global = true)]
    pub n_alpha: Option<usize>,
    /// Points per parallel of the immersion mesh.
    #[arg(long, global = true)]
    pub n_rev: Option<usize>,
    /// Directory receiving the artifacts.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
}

macro_rules! overlay {
    ($flags:expr, $file:expr, $($field:ident),+ $(,)?) => {
        Settings { $($field: $flags.$field.or($file.$field)),+ }
    };
}

impl Settings {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        let settings =
            serde_json::from_str(&text).map_err(|e| ConfigError(format!("config {}: {e}", path.display())))?;
        Ok(settings)
    }

    /// `self` wins wherever it is set.
    pub fn over(self, file: Settings) -> Settings {
        overlay!(
            self,
            file,
            command,
            a,
            omega0,
            u0,
            alpha0,
            u_min,
            u_max,
            tol,
            grid_u_min,
            grid_u_max,
            v_min,
            v_max,
            n_u,
            n_v,
            fd,
            perturb_a,
            perturb_sin,
            step,
            length,
            shots,
            seed,
            base_u,
            base_v,
            start_u,
            start_v,
            alpha_min,
            alpha_max,
            n_alpha,
            n_rev,
            output_dir,
        )
    }
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub a: f64,
    pub omega0: f64,
    pub u0: f64,
    pub alpha0: f64,
    pub u_span: [f64; 2],
    pub tol: f64,
    pub grid_u: Option<[f64; 2]>,
    pub grid_v: [f64; 2],
    pub n_u: usize,
    pub n_v: usize,
    pub fd: bool,
    pub perturb_a: f64,
    pub perturb_sin: f64,
    pub step: f64,
    pub length: f64,
    pub shots: usize,
    pub seed: u64,
    pub base_u: Option<f64>,
    pub base_v: f64,
    pub start: [f64; 2],
    pub alpha_range: [f64; 2],
    pub n_alpha: usize,
    pub n_rev: usize,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

fn reject(key: &str, why: impl fmt::Display) -> ConfigError {
    ConfigError(format!("invalid `{key}`: {why}"))
}

fn finite(key: &str, x: f64) -> Result<f64, ConfigError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(reject(key, format!("must be finite, got {x}")))
    }
}

fn positive(key: &str, x: f64) -> Result<f64, ConfigError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(reject(key, format!("must be positive, got {x}")))
    }
}

fn at_least(key: &str, n: usize, min: usize) -> Result<usize, ConfigError> {
    if n >= min {
        Ok(n)
    } else {
        Err(reject(key, format!("must be at least {min}, got {n}")))
    }
}

fn ordered(lo_key: &str, lo: f64, hi_key: &str, hi: f64) -> Result<[f64; 2], ConfigError> {
    let (lo, hi) = (finite(lo_key, lo)?, finite(hi_key, hi)?);
    if lo < hi {
        Ok([lo, hi])
    } else {
        Err(reject(hi_key, format!("must exceed `{lo_key}` = {lo}, got {hi}")))
    }
}

impl RunConfig {
    /// Applies defaults and checks every value. `env_output_dir` is the
    /// fallback for an unset `output_dir`.
    pub fn resolve(s: Settings, env_output_dir: Option<PathBuf>) -> Result<Self, ConfigError> {
        let command = s
            .command
            .ok_or_else(|| ConfigError("no command given (flag or `command` key)".into()))?;
        let length_default = match command {
            Command::Trace => 5.0,
            Command::SphereDemo => 3.0,
            _ => 1.0,
        };
        let u0 = finite("u0", s.u0.unwrap_or(0.0))?;
        let grid_u = match (s.grid_u_min, s.grid_u_max) {
            (None, None) => None,
            (Some(lo), Some(hi)) => Some(ordered("grid_u_min", lo, "grid_u_max", hi)?),
            (None, Some(_)) => return Err(reject("grid_u_min", "must be set together with `grid_u_max`")),
            (Some(_), None) => return Err(reject("grid_u_max", "must be set together with `grid_u_min`")),
        };
        Ok(RunConfig {
            command,
            a: finite("a", s.a.unwrap_or(-0.5))?,
            omega0: finite("omega0", s.omega0.unwrap_or(0.3))?,
            u0,
            alpha0: finite("alpha0", s.alpha0.unwrap_or(1.3))?,
            u_span: ordered("u_min", s.u_min.unwrap_or(-3.0), "u_max", s.u_max.unwrap_or(3.0))?,
            tol: positive("tol", s.tol.unwrap_or(1e-10))?,
            grid_u,
            grid_v: ordered(
                "v_min",
                s.v_min.unwrap_or(0.0),
                "v_max",
                s.v_max.unwrap_or(std::f64::consts::TAU),
            )?,
            n_u: at_least("n_u", s.n_u.unwrap_or(50), 1)?,
            n_v: at_least("n_v", s.n_v.unwrap_or(50), 1)?,
            fd: s.fd.unwrap_or(false),
            perturb_a: finite("perturb_a", s.perturb_a.unwrap_or(0.0))?,
            perturb_sin: finite("perturb_sin", s.perturb_sin.unwrap_or(0.0))?,
            step: positive("step", s.step.unwrap_or(1e-3))?,
            length: positive("length", s.length.unwrap_or(length_default))?,
            shots: at_least("shots", s.shots.unwrap_or(20), 1)?,
            seed: s.seed.unwrap_or(42),
            base_u: s.base_u.map(|u| finite("base_u", u)).transpose()?,
            base_v: finite("base_v", s.base_v.unwrap_or(0.0))?,
            start: [
                finite("start_u", s.start_u.unwrap_or(u0))?,
                finite("start_v", s.start_v.unwrap_or(0.0))?,
            ],
            alpha_range: ordered(
                "alpha_min",
                s.alpha_min.unwrap_or(1.2),
                "alpha_max",
                s.alpha_max.unwrap_or(1.8),
            )?,
            n_alpha: at_least("n_alpha", s.n_alpha.unwrap_or(200), 2)?,
            n_rev: at_least("n_rev", s.n_rev.unwrap_or(64), 3)?,
            output_dir: s
                .output_dir
                .or(env_output_dir)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(json: &str) -> Result<Settings, serde_json::Error> {
        serde_json::from_str(json)
    }

    #[test]
    fn flags_override_file() {
        let from_file = file(r#"{"a": 0.25, "omega0": 1.0, "command": "trace"}"#).unwrap();
        let flags = Settings {
            a: Some(-1.0),
            ..Settings::default()
        };
        let cfg = RunConfig::resolve(flags.over(from_file), None).unwrap();
        assert_eq!((cfg.a, cfg.omega0, cfg.command), (-1.0, 1.0, Command::Trace));
        assert_eq!(cfg.length, 5.0);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = file(r#"{"a": 0.25, "speed": 2}"#).unwrap_err().to_string();
        assert!(err.contains("speed"), "{err}");
    }

    #[test]
    fn zero_step_is_rejected() {
        let s = file(r#"{"command": "shoot", "step": 0}"#).unwrap();
        let err = RunConfig::resolve(s, None).unwrap_err().to_string();
        assert!(err.contains("`step`"), "{err}");
    }

    #[test]
    fn output_dir_precedence() {
        let base = Settings {
            command: Some(Command::Immerse),
            ..Settings::default()
        };
        let env = Some(PathBuf::from("from-env"));
        assert_eq!(
            RunConfig::resolve(base.clone(), env.clone()).unwrap().output_dir,
            PathBuf::from("from-env")
        );
        let set = Settings {
            output_dir: Some("explicit".into()),
            ..base.clone()
        };
        assert_eq!(
            RunConfig::resolve(set, env).unwrap().output_dir,
            PathBuf::from("explicit")
        );
        assert_eq!(
            RunConfig::resolve(base, None).unwrap().output_dir,
            PathBuf::from(DEFAULT_OUTPUT_DIR)
        );
    }

    #[test]
    fn half_specified_grid_is_rejected() {
        let s = Settings {
            command: Some(Command::VerifyTg),
            grid_u_min: Some(0.0),
            ..Settings::default()
        };
        assert!(RunConfig::resolve(s, None)
            .unwrap_err()
            .to_string()
            .contains("grid_u_max"));
    }
}
