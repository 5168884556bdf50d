//! Problem configurations, the benchmark registry and the key-value
//! override format.
//!
//! The override format is one `key = value` pair per line; `#` starts a
//! comment. Keys are the field names listed in [`ProblemConfig::set`].

use std::fmt;
use std::str::FromStr;

use embedded_contact::assembly::{plane_strain_stiffness, Integration, Material};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemId {
    HorizontalCrack,
    InclinedCrack,
    TwoBlocks,
    Inclusion,
}

impl ProblemId {
    pub const ALL: [ProblemId; 4] = [
        ProblemId::HorizontalCrack,
        ProblemId::InclinedCrack,
        ProblemId::TwoBlocks,
        ProblemId::Inclusion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::HorizontalCrack => "horizontal_crack",
            ProblemId::InclinedCrack => "inclined_crack",
            ProblemId::TwoBlocks => "two_blocks",
            ProblemId::Inclusion => "inclusion",
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemId {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self> {
        ProblemId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| BenchError::Config(format!("unknown problem '{s}'")))
    }
}

/// Interface treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Barrier,
    Penalty,
    /// Barrier normal law with the penalty tangential law.
    Hybrid,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Barrier => "barrier",
            Method::Penalty => "penalty",
            Method::Hybrid => "hybrid",
        }
    }
}

impl FromStr for Method {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "barrier" => Ok(Method::Barrier),
            "penalty" => Ok(Method::Penalty),
            "hybrid" => Ok(Method::Hybrid),
            _ => Err(BenchError::Config(format!("unknown method '{s}'"))),
        }
    }
}

pub fn parse_integration(s: &str) -> Result<Integration> {
    match s {
        "standard" => Ok(Integration::Standard),
        "averaged" => Ok(Integration::Averaged),
        _ => Err(BenchError::Config(format!("unknown integration scheme '{s}'"))),
    }
}

pub fn integration_name(i: Integration) -> &'static str {
    match i {
        Integration::Standard => "standard",
        Integration::Averaged => "averaged",
    }
}

/// Parses `NXxNY`, e.g. `25x25`.
pub fn parse_mesh(s: &str) -> Result<(usize, usize)> {
    let bad = || BenchError::Config(format!("mesh must look like 40x41, got '{s}'"));
    let (a, b) = s.split_once('x').ok_or_else(bad)?;
    let nx = a.trim().parse().map_err(|_| bad())?;
    let ny = b.trim().parse().map_err(|_| bad())?;
    Ok((nx, ny))
}

/// Everything needed to set up and run one benchmark.
///
/// Load fields are interpreted per problem: the crack problems prescribe
/// the top displacement `(ux, uy)`; the two-block problem applies
/// `pressure` on top and `shear` on the left side of the upper block; the
/// inclusion problem applies compressive `pressure` vertically and tensile
/// `shear` horizontally, optionally swept to `shear_final`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub problem: ProblemId,
    pub nx: usize,
    pub ny: usize,
    pub width: f64,
    pub height: f64,
    /// Young's modulus of the bulk, the soft block, or the matrix (Pa).
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    /// Modulus of the hard block or the inclusion relative to `youngs_modulus`.
    pub stiffness_ratio: f64,
    pub mu: f64,
    pub method: Method,
    pub integration: Integration,
    /// Initial pressure estimate seeding κ (Pa).
    pub p_opt: f64,
    /// Barrier thickness; `None` uses 10⁻⁴ of the domain size.
    pub d_hat: Option<f64>,
    /// Normal penalty (Pa/m); `None` uses 1000 times the stiffest modulus.
    pub alpha_n: Option<f64>,
    /// Tangential penalty (Pa/m); `None` uses 1000 times the stiffest modulus.
    pub alpha_t: Option<f64>,
    pub steps: usize,
    pub ux: f64,
    pub uy: f64,
    pub pressure: f64,
    pub shear: f64,
    pub shear_final: Option<f64>,
    /// Crack slope `tan θ` of the inclined crack.
    pub slope: f64,
    pub radius: f64,
    pub max_iterations: usize,
}

impl ProblemConfig {
    /// Registry defaults of each benchmark.
    pub fn registry(problem: ProblemId) -> ProblemConfig {
        let base = ProblemConfig {
            problem,
            nx: 1,
            ny: 1,
            width: 1.0,
            height: 1.0,
            youngs_modulus: 1.0,
            poisson_ratio: 0.3,
            stiffness_ratio: 1.0,
            mu: 0.0,
            method: Method::Barrier,
            integration: Integration::Standard,
            p_opt: 1.0,
            d_hat: None,
            alpha_n: None,
            alpha_t: None,
            steps: 1,
            ux: 0.0,
            uy: 0.0,
            pressure: 0.0,
            shear: 0.0,
            shear_final: None,
            slope: 0.0,
            radius: 1.0,
            max_iterations: 50,
        };
        match problem {
            ProblemId::HorizontalCrack => ProblemConfig {
                nx: 25,
                ny: 25,
                youngs_modulus: 10e9,
                mu: 0.3,
                p_opt: 0.55e9,
                ux: 0.1,
                uy: -0.04,
                ..base
            },
            ProblemId::InclinedCrack => {
                let e = 1e9;
                let d22 = plane_strain_stiffness(&Material {
                    youngs_modulus: e,
                    poisson_ratio: 0.3,
                })
                .expect("valid material")[(1, 1)];
                let steps = 10;
                // a horizontal crack would carry 10 MPa after the first step
                let p_horizontal = 10e6;
                ProblemConfig {
                    nx: 160,
                    ny: 160,
                    youngs_modulus: e,
                    mu: 0.19,
                    p_opt: p_horizontal,
                    steps,
                    uy: -p_horizontal * steps as f64 / d22,
                    slope: 0.2,
                    ..base
                }
            }
            ProblemId::TwoBlocks => ProblemConfig {
                nx: 40,
                ny: 41,
                width: 4.0,
                height: 4.1,
                youngs_modulus: 1e6,
                stiffness_ratio: 1e7,
                mu: 0.5,
                p_opt: 2e5,
                pressure: 2e5,
                shear: 1e5,
                ..base
            },
            ProblemId::Inclusion => ProblemConfig {
                nx: 160,
                ny: 160,
                width: 8.0,
                height: 8.0,
                youngs_modulus: 1e6,
                poisson_ratio: 0.0,
                integration: Integration::Averaged,
                p_opt: 1e4,
                pressure: 1e4,
                shear: 1e4,
                ..base
            },
        }
    }

    pub fn h(&self) -> f64 {
        self.width / self.nx as f64
    }

    /// Characteristic domain size used for the default barrier thickness.
    pub fn domain_size(&self) -> f64 {
        self.width.max(self.height)
    }

    /// Sets the element size, keeping the domain.
    pub fn with_element_size(mut self, h: f64) -> Result<Self> {
        let nx = (self.width / h).round();
        let ny = (self.height / h).round();
        if nx < 1.0 || ((nx * h - self.width) / self.width).abs() > 1e-9 || ((ny * h - self.height) / self.height).abs() > 1e-9 {
            return Err(BenchError::Config(format!(
                "element size {h} does not divide the {} x {} domain",
                self.width, self.height
            )));
        }
        self.nx = nx as usize;
        self.ny = ny as usize;
        Ok(self)
    }

    /// Applies one `key = value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| BenchError::Config(format!("'{key}' needs a number, got '{v}'")))
        };
        let count = |v: &str| -> Result<usize> {
            v.parse::<usize>()
                .map_err(|_| BenchError::Config(format!("'{key}' needs a non-negative integer, got '{v}'")))
        };
        match key {
            "problem" => self.problem = value.parse()?,
            "mesh" => (self.nx, self.ny) = parse_mesh(value)?,
            "width" => self.width = num(value)?,
            "height" => self.height = num(value)?,
            "E" | "youngs_modulus" => self.youngs_modulus = num(value)?,
            "nu" | "poisson_ratio" => self.poisson_ratio = num(value)?,
            "stiffness_ratio" => self.stiffness_ratio = num(value)?,
            "mu" => self.mu = num(value)?,
            "method" => self.method = value.parse()?,
            "integration" => self.integration = parse_integration(value)?,
            "p_opt" => self.p_opt = num(value)?,
            "dhat" | "d_hat" => self.d_hat = Some(num(value)?),
            "alpha_n" => self.alpha_n = Some(num(value)?),
            "alpha_t" => self.alpha_t = Some(num(value)?),
            "steps" => self.steps = count(value)?,
            "ux" => self.ux = num(value)?,
            "uy" => self.uy = num(value)?,
            "pressure" => self.pressure = num(value)?,
            "shear" => self.shear = num(value)?,
            "shear_final" => self.shear_final = Some(num(value)?),
            "slope" => self.slope = num(value)?,
            "radius" => self.radius = num(value)?,
            "max_iterations" => self.max_iterations = count(value)?,
            _ => return Err(BenchError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Applies every override of a key-value text.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| BenchError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| BenchError::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(BenchError::Config(m));
        if self.nx == 0 || self.ny == 0 {
            return err("mesh must have at least one element per direction".into());
        }
        if ((self.width / self.nx as f64 - self.height / self.ny as f64) / self.h()).abs() > 1e-9 {
            return err(format!(
                "mesh {}x{} does not give square elements on {} x {}",
                self.nx, self.ny, self.width, self.height
            ));
        }
        if self.steps == 0 {
            return err("steps must be at least 1".into());
        }
        if !(self.p_opt > 0.0) {
            return err("p_opt must be positive".into());
        }
        if !(self.stiffness_ratio > 0.0) {
            return err("stiffness_ratio must be positive".into());
        }
        if self.mu < 0.0 {
            return err("mu must be non-negative".into());
        }
        if self.d_hat.is_some_and(|d| !(d > 0.0)) {
            return err("dhat must be positive".into());
        }
        if self.problem == ProblemId::Inclusion && !(self.radius > 0.0 && 2.0 * self.radius < self.width.min(self.height)) {
            return err("inclusion radius must fit inside the domain".into());
        }
        Material::new(self.youngs_modulus, self.poisson_ratio)?;
        Ok(())
    }

    /// The key-value text reproducing this configuration.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put("problem", self.problem.to_string());
        put("mesh", format!("{}x{}", self.nx, self.ny));
        put("width", self.width.to_string());
        put("height", self.height.to_string());
        put("E", self.youngs_modulus.to_string());
        put("nu", self.poisson_ratio.to_string());
        put("stiffness_ratio", self.stiffness_ratio.to_string());
        put("mu", self.mu.to_string());
        put("method", self.method.name().into());
        put("integration", integration_name(self.integration).into());
        put("p_opt", self.p_opt.to_string());
        if let Some(d) = self.d_hat {
            put("dhat", d.to_string());
        }
        if let Some(a) = self.alpha_n {
            put("alpha_n", a.to_string());
        }
        if let Some(a) = self.alpha_t {
            put("alpha_t", a.to_string());
        }
        put("steps", self.steps.to_string());
        put("ux", self.ux.to_string());
        put("uy", self.uy.to_string());
        put("pressure", self.pressure.to_string());
        put("shear", self.shear.to_string());
        if let Some(s) = self.shear_final {
            put("shear_final", s.to_string());
        }
        put("slope", self.slope.to_string());
        put("radius", self.radius.to_string());
        put("max_iterations", self.max_iterations.to_string());
        out
    }
}
