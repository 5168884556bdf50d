//! Mesh refinement, barrier stiffness and barrier thickness studies.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::ProblemConfig;
use crate::error::{BenchError, Result};
use crate::metrics::{l2_difference, max_relative_difference};
use crate::profile::{write_file, ProfileSample};
use crate::run::{run, RunOutcome};

/// The four profile fields, in CSV column order.
pub const FIELDS: [(&str, fn(&ProfileSample) -> f64); 4] = [
    ("uN", |p| p.u_n),
    ("uT", |p| p.u_t),
    ("pN", |p| p.p_n),
    ("tau", |p| p.tau),
];

fn converged_run(cfg: &ProblemConfig) -> Result<RunOutcome> {
    let out = run(cfg, false)?;
    out.require_converged()?;
    Ok(out)
}

/// L2 profile difference of one field between two runs.
pub fn profile_difference(a: &RunOutcome, b: &RunOutcome, field: fn(&ProfileSample) -> f64) -> Result<f64> {
    let (Some(pa), Some(pb)) = (a.final_profile(), b.final_profile()) else {
        return Err(BenchError::NotConverged("a study run produced no profile".into()));
    };
    Ok(l2_difference(&pa.s(), &pa.field(field), &pb.s(), &pb.field(field)))
}

#[derive(Debug)]
pub struct MeshStudy {
    pub runs: Vec<RunOutcome>,
    /// `differences[k][f]`: L2 difference of field `f` between meshes `k`
    /// and `k + 1`.
    pub differences: Vec<[f64; 4]>,
}

impl MeshStudy {
    pub fn field_differences(&self, f: usize) -> Vec<f64> {
        self.differences.iter().map(|d| d[f]).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("coarse,fine,uN,uT,pN,tau\n");
        for (k, d) in self.differences.iter().enumerate() {
            let name = |r: &RunOutcome| format!("{}x{}", r.problem.config.nx, r.problem.config.ny);
            let _ = writeln!(
                out,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                name(&self.runs[k]),
                name(&self.runs[k + 1]),
                d[0],
                d[1],
                d[2],
                d[3]
            );
        }
        out
    }
}

/// Runs `base` on every mesh `(nx, ny)` and compares successive profiles.
pub fn mesh_study(base: &ProblemConfig, meshes: &[(usize, usize)]) -> Result<MeshStudy> {
    if meshes.len() < 2 {
        return Err(BenchError::Config("a mesh study needs at least two meshes".into()));
    }
    let runs = meshes
        .iter()
        .map(|&(nx, ny)| converged_run(&ProblemConfig { nx, ny, ..base.clone() }))
        .collect::<Result<Vec<_>>>()?;
    let differences = runs
        .windows(2)
        .map(|w| {
            let mut d = [0.0; 4];
            for (k, (_, f)) in FIELDS.iter().enumerate() {
                d[k] = profile_difference(&w[0], &w[1], *f)?;
            }
            Ok(d)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MeshStudy { runs, differences })
}

#[derive(Debug)]
pub struct KappaStudy {
    pub reference: RunOutcome,
    pub variant: RunOutcome,
    /// `max |Δu| / max |u|` over the standard DOFs.
    pub displacement_difference: f64,
    /// `max |Δp_N| / max p_N` over the interface samples.
    pub pressure_difference: f64,
}

impl KappaStudy {
    pub fn to_text(&self) -> String {
        format!(
            "p_opt_reference={}\np_opt_variant={}\ndisplacement_difference={:.16e}\npressure_difference={:.16e}\n",
            self.reference.problem.config.p_opt,
            self.variant.problem.config.p_opt,
            self.displacement_difference,
            self.pressure_difference
        )
    }
}

/// Compares the runs with κ seeded by `p_opt` and by `factor · p_opt`.
pub fn kappa_study(base: &ProblemConfig, factor: f64) -> Result<KappaStudy> {
    if !(factor > 0.0) {
        return Err(BenchError::Config("the kappa factor must be positive".into()));
    }
    let reference = converged_run(base)?;
    let variant = converged_run(&ProblemConfig {
        p_opt: factor * base.p_opt,
        ..base.clone()
    })?;
    let ua = reference.final_standard_dofs().unwrap_or_default();
    let ub = variant.final_standard_dofs().unwrap_or_default();
    let pa = reference.final_profile().map(|p| p.field(|s| s.p_n)).unwrap_or_default();
    let pb = variant.final_profile().map(|p| p.field(|s| s.p_n)).unwrap_or_default();
    let displacement_difference = max_relative_difference(ua, ub);
    let pressure_difference = max_relative_difference(&pa, &pb);
    Ok(KappaStudy {
        reference,
        variant,
        displacement_difference,
        pressure_difference,
    })
}

#[derive(Debug)]
pub struct DhatStudy {
    pub runs: Vec<RunOutcome>,
}

impl DhatStudy {
    pub fn d_hats(&self) -> Vec<f64> {
        self.runs.iter().filter_map(|r| r.problem.barrier().map(|b| b.d_hat)).collect()
    }

    /// `max |ΔuT| / max |uT|` between the first run and each other run,
    /// sample by sample (same mesh, so the samples coincide).
    pub fn slip_differences(&self) -> Vec<f64> {
        let slip = |r: &RunOutcome| r.final_profile().map(|p| p.field(|s| s.u_t)).unwrap_or_default();
        let first = slip(&self.runs[0]);
        self.runs[1..].iter().map(|r| max_relative_difference(&first, &slip(r))).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("d_hat,max_uN,max_contact_uN,min_uN,max_uT,slip_difference\n");
        let diffs = self.slip_differences();
        for (k, r) in self.runs.iter().enumerate() {
            let p = r.final_profile().cloned().unwrap_or_default();
            let d_hat = r.problem.barrier().map_or(f64::NAN, |b| b.d_hat);
            let diff = if k == 0 { 0.0 } else { diffs[k - 1] };
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                d_hat,
                p.max_gap(),
                p.max_contact_gap().unwrap_or(f64::NAN),
                p.min_gap(),
                p.max_slip(),
                diff
            );
        }
        out
    }
}

pub fn dhat_study(base: &ProblemConfig, d_hats: &[f64]) -> Result<DhatStudy> {
    if d_hats.len() < 2 {
        return Err(BenchError::Config("a d_hat study needs at least two values".into()));
    }
    let runs = d_hats
        .iter()
        .map(|&d| {
            converged_run(&ProblemConfig {
                d_hat: Some(d),
                ..base.clone()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DhatStudy { runs })
}

pub fn write_study(dir: &Path, name: &str, contents: &str, runs: &[&RunOutcome]) -> Result<()> {
    write_file(&dir.join(name), contents)?;
    for (k, r) in runs.iter().enumerate() {
        r.write(&dir.join(format!("run_{k}")))?;
    }
    Ok(())
}
