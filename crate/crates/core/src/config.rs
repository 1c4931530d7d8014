//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are
//! rejected. Values given later (for example from command-line flags via
//! [`ExperimentConfig::set`]) override earlier ones.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::potentials::{make_potential, Potential};

pub const KEYS: &[&str] = &[
    "potential",
    "gamma",
    "R",
    "R_list",
    "re_min",
    "re_max",
    "im_min",
    "im_max",
    "tol",
    "rtol",
    "propagator",
    "out",
    "seed",
    "threads",
    "c2_grid",
    "shift",
    "hpm_samples",
    "gronwall_trials",
    "jensen_trials",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub potential: String,
    pub gamma: f64,
    pub r: Option<f64>,
    pub r_list: Vec<f64>,
    pub re_min: Option<f64>,
    pub re_max: Option<f64>,
    pub im_min: Option<f64>,
    pub im_max: Option<f64>,
    /// Newton step tolerance, and the largest residual an emitted eigenvalue may carry.
    pub tol: f64,
    /// Relative tolerance of the ODE integrators.
    pub rtol: f64,
    pub propagator: String,
    pub out: PathBuf,
    pub seed: u64,
    /// `None` uses every available core.
    pub threads: Option<usize>,
    /// Side of the grid used for the empirical `C₂`.
    pub c2_grid: usize,
    /// The shift `a` of the half-disc demonstration.
    pub shift: f64,
    pub hpm_samples: usize,
    pub gronwall_trials: usize,
    pub jensen_trials: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            potential: "zero".into(),
            gamma: 1.0,
            r: None,
            r_list: Vec::new(),
            re_min: None,
            re_max: None,
            im_min: None,
            im_max: None,
            tol: 1e-8,
            rtol: 1e-10,
            propagator: "magnus".into(),
            out: PathBuf::from("out"),
            seed: 42,
            threads: None,
            c2_grid: 8,
            shift: 1.0,
            hpm_samples: 100_000,
            gronwall_trials: 1000,
            jensen_trials: 50,
        }
    }
}

fn number(key: &str, value: &str) -> Result<f64> {
    let v: f64 = value.parse().map_err(|_| Error::Config(format!("`{key}` expects a number, got `{value}`")))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("`{key}` must be finite")));
    }
    Ok(v)
}

fn count(key: &str, value: &str) -> Result<usize> {
    value.parse().map_err(|_| Error::Config(format!("`{key}` expects a non-negative integer, got `{value}`")))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", lineno + 1, strip_prefix(e))))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "potential" => self.potential = value.to_string(),
            "gamma" => self.gamma = number(key, value)?,
            "R" => self.r = Some(number(key, value)?),
            "R_list" => {
                self.r_list = value.split(',').map(|s| number(key, s.trim())).collect::<Result<Vec<_>>>()?;
            }
            "re_min" => self.re_min = Some(number(key, value)?),
            "re_max" => self.re_max = Some(number(key, value)?),
            "im_min" => self.im_min = Some(number(key, value)?),
            "im_max" => self.im_max = Some(number(key, value)?),
            "tol" => self.tol = number(key, value)?,
            "rtol" => self.rtol = number(key, value)?,
            "propagator" => self.propagator = value.to_string(),
            "out" => self.out = PathBuf::from(value),
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| Error::Config(format!("`seed` expects an unsigned integer, got `{value}`")))?
            }
            "threads" => {
                let n = count(key, value)?;
                self.threads = if n == 0 { None } else { Some(n) };
            }
            "c2_grid" => self.c2_grid = count(key, value)?,
            "shift" => self.shift = number(key, value)?,
            "hpm_samples" => self.hpm_samples = count(key, value)?,
            "gronwall_trials" => self.gronwall_trials = count(key, value)?,
            "jensen_trials" => self.jensen_trials = count(key, value)?,
            other => {
                return Err(Error::Config(format!("unknown key `{other}` (known: {})", KEYS.join(", "))));
            }
        }
        Ok(())
    }

    pub fn build_potential(&self) -> Result<Potential> {
        make_potential(&self.potential)
    }

    /// The single `R` for commands that need one: `R`, else the only entry of `R_list`.
    pub fn single_r(&self) -> Result<f64> {
        match (self.r, self.r_list.as_slice()) {
            (Some(r), _) => Ok(r),
            (None, [r]) => Ok(*r),
            _ => Err(Error::Config("this command needs `R` (or an `R_list` with one entry)".into())),
        }
    }

    /// `R_list`, else `[R]`.
    pub fn r_values(&self) -> Result<Vec<f64>> {
        if !self.r_list.is_empty() {
            return Ok(self.r_list.clone());
        }
        self.r.map(|r| vec![r]).ok_or_else(|| Error::Config("this command needs `R_list` or `R`".into()))
    }

    /// Checks everything that does not depend on the command.
    pub fn validate(&self) -> Result<()> {
        self.build_potential()?;
        if !(self.gamma > 0.0) {
            return Err(Error::Config(format!("`gamma` must be > 0, got {}", self.gamma)));
        }
        for r in self.r.iter().chain(&self.r_list) {
            if !(*r > 1.0) {
                return Err(Error::Config(format!("every R must be > 1, got {r}")));
            }
        }
        if !(self.tol > 0.0) || !(self.rtol > 0.0) {
            return Err(Error::Config("`tol` and `rtol` must be > 0".into()));
        }
        if let Some(v) = self.im_min {
            if !(v > 0.0) {
                return Err(Error::Config(format!("`im_min` must be > 0, got {v}")));
            }
        }
        if self.c2_grid < 2 {
            return Err(Error::Config("`c2_grid` must be at least 2".into()));
        }
        if !(self.shift > 0.0) {
            return Err(Error::Config(format!("`shift` must be > 0, got {}", self.shift)));
        }
        Ok(())
    }
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::Config(msg) => msg,
        other => other.to_string(),
    }
}
