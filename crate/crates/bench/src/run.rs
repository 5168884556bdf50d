//! Running one benchmark and writing its outputs.

use std::path::Path;

use embedded_contact::solver::{run_load_steps, NewtonOptions, NewtonReport};

use crate::config::{integration_name, ProblemConfig};
use crate::error::{BenchError, Result};
use crate::metrics::{profile_oscillation, separation_angle, tail_order_above};
use crate::problems::{build, Problem};
use crate::profile::{convergence_csv, write_file, InterfaceProfile, Summary};

/// Result of a benchmark run. Profiles and solutions cover the converged
/// steps only.
#[derive(Debug)]
pub struct RunOutcome {
    pub problem: Problem,
    pub profiles: Vec<InterfaceProfile>,
    pub solutions: Vec<Vec<f64>>,
    pub report: NewtonReport,
}

impl RunOutcome {
    pub fn converged(&self) -> bool {
        self.report.converged() && self.report.steps.len() == self.problem.schedule.len()
    }

    pub fn final_profile(&self) -> Option<&InterfaceProfile> {
        self.profiles.last()
    }

    pub fn final_solution(&self) -> Option<&[f64]> {
        self.solutions.last().map(Vec::as_slice)
    }

    /// Standard (non-enriched) DOFs of the final solution.
    pub fn final_standard_dofs(&self) -> Option<&[f64]> {
        let n = self.problem.model.dofs.n_std();
        self.final_solution().map(|x| &x[..n])
    }

    /// Observed order of the last converged step, ignoring norms at the
    /// round-off level.
    pub fn tail_order(&self) -> Option<f64> {
        self.report
            .steps
            .iter()
            .rev()
            .find(|s| s.converged())
            .and_then(|s| tail_order_above(&s.residual_norms, s.noise_floor))
    }

    /// Smallest observed order over all converged steps with at least three
    /// recorded norms.
    pub fn min_tail_order(&self) -> Option<f64> {
        self.report
            .steps
            .iter()
            .filter(|s| s.converged())
            .filter_map(|s| tail_order_above(&s.residual_norms, s.noise_floor))
            .reduce(f64::min)
    }

    pub fn summary(&self) -> Summary {
        let cfg = &self.problem.config;
        let mut s = Summary::default();
        s.put("problem", cfg.problem);
        s.put("method", cfg.method.name());
        s.put("integration", integration_name(cfg.integration));
        s.put("mesh", format!("{}x{}", cfg.nx, cfg.ny));
        if let Some(b) = self.problem.barrier() {
            s.put("d_hat", b.d_hat);
            s.put("kappa", b.kappa);
        }
        s.put("converged", self.converged());
        s.put("steps_planned", self.problem.schedule.len());
        s.put("steps_converged", self.profiles.len());
        s.put("total_iterations", self.report.total_iterations());
        s.put(
            "iterations_per_step",
            self.report
                .steps
                .iter()
                .map(|r| r.iterations().to_string())
                .collect::<Vec<_>>()
                .join(" "),
        );
        s.put(
            "stop_reasons",
            self.report
                .steps
                .iter()
                .map(|r| r.reason.as_str())
                .collect::<Vec<_>>()
                .join(" "),
        );
        if let Some(p) = self.tail_order() {
            s.put("tail_order", p);
        }
        if let Some(p) = self.final_profile() {
            s.put("samples", p.len());
            s.put("max_uN", p.max_gap());
            s.put("min_uN", p.min_gap());
            s.put("max_uT", p.max_slip());
            s.put("max_pN", p.max_pressure());
            s.put("contact_length", p.contact_length());
            s.put("oscillation_pN", profile_oscillation(p, |x| x.p_n));
            s.put("oscillation_tau", profile_oscillation(p, |x| x.tau));
            if matches!(
                self.problem.model.geometry,
                embedded_contact::mesh::InterfaceGeometry::Circle { .. }
            ) {
                if let Some(a) = separation_angle(p) {
                    s.put("separation_angle_deg", a);
                }
            }
        }
        s
    }

    /// Writes `profile.csv` (final step), `profile_step_NNN.csv` for
    /// multi-step runs, `convergence.csv`, `summary.txt` and `config.txt`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        if let Some(p) = self.final_profile() {
            write_file(&dir.join("profile.csv"), &p.to_csv())?;
        }
        if self.problem.schedule.len() > 1 {
            for (k, p) in self.profiles.iter().enumerate() {
                write_file(&dir.join(format!("profile_step_{:03}.csv", k + 1)), &p.to_csv())?;
            }
        }
        write_file(&dir.join("convergence.csv"), &convergence_csv(&self.report))?;
        write_file(&dir.join("config.txt"), &self.problem.config.to_text())?;
        // no wall time, so identical runs give identical files
        write_file(&dir.join("summary.txt"), &self.summary().to_text())?;
        Ok(())
    }

    /// Error for a non-converged run, naming the first failing step.
    pub fn require_converged(&self) -> Result<()> {
        if self.converged() {
            return Ok(());
        }
        let detail = match self.report.steps.iter().find(|s| !s.converged()) {
            Some(s) => format!(
                "{} step {} stopped after {} iterations ({})",
                self.problem.config.problem,
                s.step + 1,
                s.iterations(),
                s.reason.as_str()
            ),
            None => format!("{} did not finish its schedule", self.problem.config.problem),
        };
        Err(BenchError::NotConverged(detail))
    }
}

pub fn newton_options(cfg: &ProblemConfig) -> NewtonOptions {
    NewtonOptions {
        max_iterations: cfg.max_iterations,
        ..NewtonOptions::default()
    }
}

/// Builds and solves a benchmark. Non-convergence is reported in the
/// outcome, not as an error; a run with `continue_on_failure` keeps going
/// past failed steps.
pub fn run(cfg: &ProblemConfig, continue_on_failure: bool) -> Result<RunOutcome> {
    let problem = build(cfg)?;
    let path = run_load_steps(&problem.model, &problem.schedule, &newton_options(cfg), continue_on_failure)?;
    let profiles = path
        .states
        .iter()
        .map(|st| InterfaceProfile::from_states(&problem.model, st))
        .collect();
    Ok(RunOutcome {
        problem,
        profiles,
        solutions: path.solutions,
        report: path.report,
    })
}
