//! Line-oriented `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys and
//! repeated keys are errors.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::cases::CaseName;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected 'key = value', got '{text}'")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key '{key}' given twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: invalid value '{value}' for '{key}': {reason}")]
    Value {
        line: usize,
        key: String,
        value: String,
        reason: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceScheme {
    Cg,
    Dg,
}

impl SpaceScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            SpaceScheme::Cg => "cg",
            SpaceScheme::Dg => "dg",
        }
    }
}

impl FromStr for SpaceScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cg" => Ok(SpaceScheme::Cg),
            "dg" => Ok(SpaceScheme::Dg),
            _ => Err("expected cg or dg".into()),
        }
    }
}

/// Splits the text into `(line number, key, value)` triples.
fn entries(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax { line: i + 1, text: line.into() });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1, text: line.into() });
        }
        if !seen.insert(k.to_string()) {
            return Err(ConfigError::Duplicate { line: i + 1, key: k.into() });
        }
        out.push((i + 1, k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn value<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| ConfigError::Value {
        line,
        key: key.into(),
        value: v.into(),
        reason: e.to_string(),
    })
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

/// Configuration of a manufactured-solution run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: CaseName,
    pub mesh_n: usize,
    pub space_scheme: SpaceScheme,
    pub space_degree: usize,
    /// `0` means `time_steps = mesh_n`.
    pub time_steps: usize,
    pub time_degree: usize,
    pub t_final: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: u32,
    pub nu: f64,
    pub eta: f64,
    pub sigma: f64,
    /// `0` selects the classical time derivative.
    pub caputo_mu: f64,
    pub penalty: f64,
    pub newton_abs_tol: f64,
    pub newton_rel_tol: f64,
    pub newton_max_iter: usize,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            case: CaseName::Sol1,
            mesh_n: 8,
            space_scheme: SpaceScheme::Cg,
            space_degree: 1,
            time_steps: 0,
            time_degree: 0,
            t_final: 1.0,
            alpha: 1.0,
            beta: 1.0,
            gamma: 0.5,
            delta: 1,
            nu: 1.0,
            eta: 0.0,
            sigma: 0.5,
            caputo_mu: 0.0,
            penalty: 10.0,
            newton_abs_tol: 1e-10,
            newton_rel_tol: 1e-10,
            newton_max_iter: 25,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = RunConfig::default();
        for (line, k, v) in entries(text)? {
            match k.as_str() {
                "case" => c.case = value(line, &k, &v)?,
                "mesh_n" => c.mesh_n = value(line, &k, &v)?,
                "space_scheme" => c.space_scheme = value(line, &k, &v)?,
                "space_degree" => c.space_degree = value(line, &k, &v)?,
                "time_steps" => c.time_steps = value(line, &k, &v)?,
                "time_degree" => c.time_degree = value(line, &k, &v)?,
                "t_final" => c.t_final = value(line, &k, &v)?,
                "alpha" => c.alpha = value(line, &k, &v)?,
                "beta" => c.beta = value(line, &k, &v)?,
                "gamma" => c.gamma = value(line, &k, &v)?,
                "delta" => c.delta = value(line, &k, &v)?,
                "nu" => c.nu = value(line, &k, &v)?,
                "eta" => c.eta = value(line, &k, &v)?,
                "sigma" => c.sigma = value(line, &k, &v)?,
                "caputo_mu" => c.caputo_mu = value(line, &k, &v)?,
                "penalty" => c.penalty = value(line, &k, &v)?,
                "newton_abs_tol" => c.newton_abs_tol = value(line, &k, &v)?,
                "newton_rel_tol" => c.newton_rel_tol = value(line, &k, &v)?,
                "newton_max_iter" => c.newton_max_iter = value(line, &k, &v)?,
                "output" => c.output = (!v.is_empty()).then(|| PathBuf::from(&v)),
                _ => return Err(ConfigError::UnknownKey { line, key: k }),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(&read(path)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.mesh_n == 0 {
            return bad("mesh_n must be positive".into());
        }
        if !(1..=3).contains(&self.space_degree) {
            return bad(format!("space_degree must be 1, 2 or 3, got {}", self.space_degree));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be positive, got {}", self.t_final));
        }
        if !(self.nu > 0.0) {
            return bad(format!("nu must be positive, got {}", self.nu));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if !(1..=2).contains(&self.delta) {
            return bad(format!("delta must be 1 or 2, got {}", self.delta));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return bad(format!("sigma must lie in (0, 1), got {}", self.sigma));
        }
        // the manufactured forcings only have closed forms for these values
        if self.eta != 0.0 && self.sigma != 0.5 && self.case != CaseName::Zero {
            return bad("manufactured memory forcing requires sigma = 0.5".into());
        }
        if self.caputo_mu != 0.0 && self.caputo_mu != 0.5 {
            return bad(format!("caputo_mu must be 0 or 0.5, got {}", self.caputo_mu));
        }
        if !(self.penalty > 0.0) {
            return bad(format!("penalty must be positive, got {}", self.penalty));
        }
        if !(self.newton_abs_tol > 0.0 && self.newton_rel_tol > 0.0) || self.newton_max_iter == 0 {
            return bad("Newton tolerances and iteration cap must be positive".into());
        }
        Ok(())
    }

    pub fn effective_time_steps(&self) -> usize {
        if self.time_steps == 0 {
            self.mesh_n
        } else {
            self.time_steps
        }
    }

    /// Text that [`RunConfig::parse`] maps back to `self`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "case = {}", self.case);
        let _ = writeln!(s, "mesh_n = {}", self.mesh_n);
        let _ = writeln!(s, "space_scheme = {}", self.space_scheme.as_str());
        let _ = writeln!(s, "space_degree = {}", self.space_degree);
        let _ = writeln!(s, "time_steps = {}", self.time_steps);
        let _ = writeln!(s, "time_degree = {}", self.time_degree);
        let _ = writeln!(s, "t_final = {:?}", self.t_final);
        let _ = writeln!(s, "alpha = {:?}", self.alpha);
        let _ = writeln!(s, "beta = {:?}", self.beta);
        let _ = writeln!(s, "gamma = {:?}", self.gamma);
        let _ = writeln!(s, "delta = {}", self.delta);
        let _ = writeln!(s, "nu = {:?}", self.nu);
        let _ = writeln!(s, "eta = {:?}", self.eta);
        let _ = writeln!(s, "sigma = {:?}", self.sigma);
        let _ = writeln!(s, "caputo_mu = {:?}", self.caputo_mu);
        let _ = writeln!(s, "penalty = {:?}", self.penalty);
        let _ = writeln!(s, "newton_abs_tol = {:?}", self.newton_abs_tol);
        let _ = writeln!(s, "newton_rel_tol = {:?}", self.newton_rel_tol);
        let _ = writeln!(s, "newton_max_iter = {}", self.newton_max_iter);
        if let Some(p) = &self.output {
            let _ = writeln!(s, "output = {}", p.display());
        }
        s
    }
}

/// Configuration of the prey-predator application.
#[derive(Debug, Clone, PartialEq)]
pub struct PredatorConfig {
    pub mesh_n: usize,
    pub length: f64,
    pub t_final: f64,
    pub step: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub p: f64,
    pub q: f64,
    pub a: f64,
    pub b: f64,
    pub half_width: f64,
    pub eta: f64,
    pub sigma: f64,
    /// Restricts the memory term to the prey equation.
    pub memory_prey_only: bool,
    /// Lumped mass and nodal reaction; keeps both densities nonnegative.
    pub lumped: bool,
    /// Snapshot every this many steps; `0` writes only the first and last.
    pub snapshot_every: usize,
    pub newton_abs_tol: f64,
    pub newton_rel_tol: f64,
    pub newton_max_iter: usize,
}

impl Default for PredatorConfig {
    fn default() -> Self {
        Self {
            mesh_n: 64,
            length: 200.0,
            t_final: 90.0,
            step: 0.1,
            epsilon: 1.0,
            alpha: 0.2,
            beta: 0.1,
            gamma: 1.0,
            delta: 0.37,
            p: 1.0,
            q: 0.5,
            a: 5.0,
            b: 30.0,
            half_width: 20.0,
            eta: 0.0,
            sigma: 0.5,
            memory_prey_only: false,
            lumped: true,
            snapshot_every: 100,
            newton_abs_tol: 1e-10,
            newton_rel_tol: 1e-10,
            newton_max_iter: 25,
        }
    }
}

impl PredatorConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = PredatorConfig::default();
        for (line, k, v) in entries(text)? {
            match k.as_str() {
                "mesh_n" => c.mesh_n = value(line, &k, &v)?,
                "length" => c.length = value(line, &k, &v)?,
                "t_final" => c.t_final = value(line, &k, &v)?,
                "step" => c.step = value(line, &k, &v)?,
                "epsilon" => c.epsilon = value(line, &k, &v)?,
                "alpha" => c.alpha = value(line, &k, &v)?,
                "beta" => c.beta = value(line, &k, &v)?,
                "gamma" => c.gamma = value(line, &k, &v)?,
                "delta" => c.delta = value(line, &k, &v)?,
                "p" => c.p = value(line, &k, &v)?,
                "q" => c.q = value(line, &k, &v)?,
                "a" => c.a = value(line, &k, &v)?,
                "b" => c.b = value(line, &k, &v)?,
                "half_width" => c.half_width = value(line, &k, &v)?,
                "eta" => c.eta = value(line, &k, &v)?,
                "sigma" => c.sigma = value(line, &k, &v)?,
                "memory_prey_only" => c.memory_prey_only = value(line, &k, &v)?,
                "lumped" => c.lumped = value(line, &k, &v)?,
                "snapshot_every" => c.snapshot_every = value(line, &k, &v)?,
                "newton_abs_tol" => c.newton_abs_tol = value(line, &k, &v)?,
                "newton_rel_tol" => c.newton_rel_tol = value(line, &k, &v)?,
                "newton_max_iter" => c.newton_max_iter = value(line, &k, &v)?,
                _ => return Err(ConfigError::UnknownKey { line, key: k }),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(&read(path)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.into()));
        if self.mesh_n == 0 {
            return bad("mesh_n must be positive");
        }
        if !(self.length > 0.0 && self.t_final > 0.0 && self.step > 0.0) {
            return bad("length, t_final and step must be positive");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return bad("sigma must lie in (0, 1)");
        }
        if self.eta < 0.0 {
            return bad("eta must be nonnegative");
        }
        if !(self.newton_abs_tol > 0.0 && self.newton_rel_tol > 0.0) || self.newton_max_iter == 0 {
            return bad("Newton tolerances and iteration cap must be positive");
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.step).round().max(1.0) as usize
    }

    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mesh_n = {}", self.mesh_n);
        for (k, v) in [
            ("length", self.length),
            ("t_final", self.t_final),
            ("step", self.step),
            ("epsilon", self.epsilon),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("p", self.p),
            ("q", self.q),
            ("a", self.a),
            ("b", self.b),
            ("half_width", self.half_width),
            ("eta", self.eta),
            ("sigma", self.sigma),
        ] {
            let _ = writeln!(s, "{k} = {v:?}");
        }
        let _ = writeln!(s, "memory_prey_only = {}", self.memory_prey_only);
        let _ = writeln!(s, "lumped = {}", self.lumped);
        let _ = writeln!(s, "snapshot_every = {}", self.snapshot_every);
        let _ = writeln!(s, "newton_abs_tol = {:?}", self.newton_abs_tol);
        let _ = writeln!(s, "newton_rel_tol = {:?}", self.newton_rel_tol);
        let _ = writeln!(s, "newton_max_iter = {}", self.newton_max_iter);
        s
    }
}

/// Parses a comma-separated list of mesh sizes such as `8,16,32`.
pub fn parse_mesh_list(s: &str) -> Result<Vec<usize>, ConfigError> {
    let out: Result<Vec<usize>, _> = s.split(',').map(|t| t.trim().parse::<usize>()).collect();
    match out {
        Ok(v) if !v.is_empty() && v.iter().all(|&n| n > 0) => Ok(v),
        _ => Err(ConfigError::Invalid(format!("bad mesh list '{s}'"))),
    }
}
