//! Interface profiles and the files written by a run.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use embedded_contact::assembly::Model;
use embedded_contact::contact::TractionState;
use embedded_contact::mesh::InterfaceGeometry;
use embedded_contact::solver::NewtonReport;

use crate::error::{BenchError, Result};

/// One sample per surface integration point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    /// Arc length along a line interface (m), or polar angle in degrees
    /// in `[0, 360)` on a circle.
    pub s: f64,
    pub x: f64,
    pub y: f64,
    /// Length of interface represented by the sample (m).
    pub weight: f64,
    pub u_n: f64,
    /// Signed slip along the interface tangent.
    pub u_t: f64,
    pub p_n: f64,
    /// Signed shear traction along the interface tangent.
    pub tau: f64,
    pub contact: bool,
}

/// Samples sorted by `s`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InterfaceProfile {
    pub samples: Vec<ProfileSample>,
}

impl InterfaceProfile {
    /// Builds the profile of a converged state. The tangent is `(n_y, −n_x)`,
    /// i.e. the line direction, or counter-clockwise on a circle.
    pub fn from_states(model: &Model, states: &[TractionState]) -> InterfaceProfile {
        let mut samples = Vec::with_capacity(states.len());
        for (k, cell) in model.surface().iter().enumerate() {
            for (q, point) in cell.points.iter().enumerate() {
                let Some(st) = states.get(2 * k + q) else { continue };
                let n = cell.normal;
                let t = embedded_contact::Vec2::new(n.y, -n.x);
                let s = match model.geometry {
                    InterfaceGeometry::Line { point: p0, direction } => (point.x - p0).dot(&direction),
                    InterfaceGeometry::Circle { center, .. } => {
                        let d = point.x - center;
                        d.y.atan2(d.x).to_degrees().rem_euclid(360.0)
                    }
                };
                // circle normals point outwards, so (n_y, -n_x) is clockwise
                let sign = match model.geometry {
                    InterfaceGeometry::Line { .. } => 1.0,
                    InterfaceGeometry::Circle { .. } => -1.0,
                };
                samples.push(ProfileSample {
                    s,
                    x: point.x.x,
                    y: point.x.y,
                    weight: point.area,
                    u_n: st.gap,
                    u_t: sign * st.jump.dot(&t),
                    p_n: st.pressure,
                    tau: sign * st.tangential.dot(&t),
                    contact: st.pressure > 0.0,
                });
            }
        }
        samples.sort_by(|a, b| a.s.total_cmp(&b.s));
        InterfaceProfile { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn s(&self) -> Vec<f64> {
        self.samples.iter().map(|p| p.s).collect()
    }

    pub fn field(&self, f: impl Fn(&ProfileSample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }

    pub fn max_gap(&self) -> f64 {
        self.samples.iter().map(|p| p.u_n).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_gap(&self) -> f64 {
        self.samples.iter().map(|p| p.u_n).fold(f64::INFINITY, f64::min)
    }

    /// Largest gap over contacting samples; `None` without contact.
    pub fn max_contact_gap(&self) -> Option<f64> {
        self.samples.iter().filter(|p| p.contact).map(|p| p.u_n).reduce(f64::max)
    }

    pub fn max_slip(&self) -> f64 {
        self.samples.iter().map(|p| p.u_t.abs()).fold(0.0, f64::max)
    }

    pub fn max_pressure(&self) -> f64 {
        self.samples.iter().map(|p| p.p_n).fold(0.0, f64::max)
    }

    /// Interface length in contact.
    pub fn contact_length(&self) -> f64 {
        self.samples.iter().filter(|p| p.contact).map(|p| p.weight).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,uN,uT,pN,tau,status\n");
        for p in &self.samples {
            let status = if p.contact { "contact" } else { "open" };
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{status}",
                p.s, p.u_n, p.u_t, p.p_n, p.tau
            );
        }
        out
    }
}

/// Convergence log: one row per recorded residual norm.
pub fn convergence_csv(report: &NewtonReport) -> String {
    let mut out = String::from("step,iter,residual_norm\n");
    for step in &report.steps {
        for (i, r) in step.residual_norms.iter().enumerate() {
            let _ = writeln!(out, "{},{},{:.16e}", step.step, i, r);
        }
    }
    out
}

/// Flat `key=value` summary.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn put(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| BenchError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}
