//! Builds models and load schedules for the four benchmarks.
//!
//! Geometry reconstructions (the original figures are not tabulated):
//!
//! * `horizontal_crack`: unit square cut by a full-width crack at mid
//!   height. Bottom fixed, top displaced by `(ux, uy)`.
//! * `inclined_crack`: unit square cut by a full-width crack through the
//!   centre with slope `slope`. Bottom fixed, top displaced by `(0, uy)`.
//! * `two_blocks`: a soft block resting on a hard block, interface at mid
//!   height. Bottom fixed, pressure on top, shear traction on the left side
//!   of the upper block only.
//! * `inclusion`: square matrix centred on a circular inclusion, vertical
//!   compression (group 0) and horizontal tension (group 1). Rigid motions
//!   are removed with constraints that hold exactly by symmetry.

use embedded_contact::assembly::{BoundaryConditions, Material, Materials, Model, ModelSetup};
use embedded_contact::contact::{parameterize, BarrierParams, ContactLaw, PenaltyParams};
use embedded_contact::mesh::{Boundary, InterfaceGeometry, Mesh, Side};
use embedded_contact::solver::linear_ramp;
use embedded_contact::Vec2;

use crate::config::{Method, ProblemConfig, ProblemId};
use crate::error::{BenchError, Result};

/// Default penalty is this multiple of the stiffest modulus (Pa/m).
pub const PENALTY_FACTOR: f64 = 1000.0;

/// Increment of the horizontal load factor in an inclusion sweep.
pub const SWEEP_INCREMENT: f64 = 0.5;

/// A ready-to-solve benchmark instance.
#[derive(Debug)]
pub struct Problem {
    pub config: ProblemConfig,
    pub model: Model,
    /// Load factors per group for every step.
    pub schedule: Vec<Vec<f64>>,
}

impl Problem {
    pub fn barrier(&self) -> Option<&BarrierParams> {
        self.model.law.barrier()
    }
}

pub fn barrier_params(cfg: &ProblemConfig) -> Result<BarrierParams> {
    Ok(parameterize(cfg.domain_size(), cfg.p_opt, cfg.d_hat)?.with_friction(cfg.mu)?)
}

fn stiffest(cfg: &ProblemConfig) -> f64 {
    cfg.youngs_modulus * cfg.stiffness_ratio.max(1.0)
}

pub fn contact_law(cfg: &ProblemConfig) -> Result<ContactLaw> {
    let alpha_n = cfg.alpha_n.unwrap_or(PENALTY_FACTOR * stiffest(cfg));
    let alpha_t = cfg.alpha_t.or(cfg.alpha_n).unwrap_or(PENALTY_FACTOR * stiffest(cfg));
    let law = match cfg.method {
        Method::Barrier => ContactLaw::Barrier(barrier_params(cfg)?),
        Method::Penalty => ContactLaw::Penalty(PenaltyParams {
            alpha_n,
            alpha_t,
            mu: cfg.mu,
        }),
        Method::Hybrid => ContactLaw::Hybrid {
            barrier: barrier_params(cfg)?,
            alpha_t,
        },
    };
    law.validate()?;
    Ok(law)
}

/// Load factors of every step.
pub fn schedule(cfg: &ProblemConfig, n_groups: usize) -> Result<Vec<Vec<f64>>> {
    let mut steps = linear_ramp(cfg.steps, n_groups);
    if let Some(last) = cfg.shear_final {
        if cfg.problem != ProblemId::Inclusion {
            return Err(BenchError::Config("shear_final only applies to the inclusion problem".into()));
        }
        if !(cfg.shear > 0.0) || last < cfg.shear {
            return Err(BenchError::Config("shear_final must be at least shear > 0".into()));
        }
        let end = last / cfg.shear;
        let mut k = 1;
        loop {
            let f = 1.0 + SWEEP_INCREMENT * k as f64;
            if f > end + 1e-12 {
                break;
            }
            steps.push(vec![1.0, f]);
            k += 1;
        }
        if steps.last().is_some_and(|s| (s[1] - end).abs() > 1e-12) {
            steps.push(vec![1.0, end]);
        }
    }
    Ok(steps)
}

pub fn build(cfg: &ProblemConfig) -> Result<Problem> {
    cfg.validate()?;
    let law = contact_law(cfg)?;
    let base = Material::new(cfg.youngs_modulus, cfg.poisson_ratio)?;
    let other = Material::new(cfg.youngs_modulus * cfg.stiffness_ratio, cfg.poisson_ratio)?;
    let mut bcs = BoundaryConditions::new();

    let (mesh, geometry, materials) = match cfg.problem {
        ProblemId::HorizontalCrack | ProblemId::InclinedCrack => {
            let mesh = Mesh::structured(cfg.nx, cfg.ny, cfg.width, cfg.height)?;
            let centre = Vec2::new(0.5 * cfg.width, 0.5 * cfg.height);
            let geometry = InterfaceGeometry::line(centre, Vec2::new(1.0, cfg.slope))?;
            let bottom = mesh.boundary_nodes(Boundary::Bottom);
            let top = mesh.boundary_nodes(Boundary::Top);
            bcs.fix_nodes(&bottom, 0, 0.0, 0)
                .fix_nodes(&bottom, 1, 0.0, 0)
                .fix_nodes(&top, 0, cfg.ux, 0)
                .fix_nodes(&top, 1, cfg.uy, 0);
            (mesh, geometry, Materials::uniform(base))
        }
        ProblemId::TwoBlocks => {
            let mesh = Mesh::structured(cfg.nx, cfg.ny, cfg.width, cfg.height)?;
            let geometry = InterfaceGeometry::horizontal(0.5 * cfg.height);
            let bottom = mesh.boundary_nodes(Boundary::Bottom);
            bcs.fix_nodes(&bottom, 0, 0.0, 0).fix_nodes(&bottom, 1, 0.0, 0);
            bcs.load_edges(
                &mesh.boundary_edges(Boundary::Top),
                Vec2::new(0.0, -cfg.pressure),
                0,
                None,
            );
            bcs.load_edges(
                &mesh.boundary_edges(Boundary::Left),
                Vec2::new(cfg.shear, 0.0),
                0,
                Some(Side::Positive),
            );
            // upper block soft (positive side), lower block hard
            let materials = Materials {
                positive: base,
                negative: other,
            };
            (mesh, geometry, materials)
        }
        ProblemId::Inclusion => {
            let origin = Vec2::new(-0.5 * cfg.width, -0.5 * cfg.height);
            let mesh = Mesh::structured_with_origin(cfg.nx, cfg.ny, cfg.width, cfg.height, origin)?;
            let geometry = InterfaceGeometry::circle(Vec2::zeros(), cfg.radius)?;
            let (t_v, t_h) = (cfg.pressure, cfg.shear);
            bcs.load_edges(&mesh.boundary_edges(Boundary::Top), Vec2::new(0.0, -t_v), 0, None)
                .load_edges(&mesh.boundary_edges(Boundary::Bottom), Vec2::new(0.0, t_v), 0, None)
                .load_edges(&mesh.boundary_edges(Boundary::Right), Vec2::new(t_h, 0.0), 1, None)
                .load_edges(&mesh.boundary_edges(Boundary::Left), Vec2::new(-t_h, 0.0), 1, None);
            let h = mesh.h();
            let at = |x: f64, y: f64| -> Result<usize> {
                let n = mesh.nearest_node(Vec2::new(x, y));
                if (mesh.node(n) - Vec2::new(x, y)).norm() > 1e-9 * h {
                    return Err(BenchError::Config(format!(
                        "the inclusion problem needs a mesh node at ({x}, {y}); use an even element count"
                    )));
                }
                Ok(n)
            };
            let centre = at(0.0, 0.0)?;
            bcs.fix(centre, 0, 0.0, 0).fix(centre, 1, 0.0, 0);
            // inclusion: no rotation about the centre
            bcs.fix(at(h, 0.0)?, 1, 0.0, 0).fix(at(-h, 0.0)?, 1, 0.0, 0);
            bcs.fix(at(0.0, h)?, 0, 0.0, 0).fix(at(0.0, -h)?, 0, 0.0, 0);
            // matrix: no rigid rotation or horizontal translation
            let half = 0.5 * cfg.height;
            bcs.fix(at(0.0, half)?, 0, 0.0, 0).fix(at(0.0, -half)?, 0, 0.0, 0);
            // matrix positive (outside), inclusion negative
            let materials = Materials {
                positive: base,
                negative: other,
            };
            (mesh, geometry, materials)
        }
    };

    let model = Model::new(ModelSetup {
        mesh,
        geometry,
        materials,
        law,
        integration: cfg.integration,
        bcs,
    })?;
    let n_groups = match cfg.problem {
        ProblemId::Inclusion => 2,
        _ => 1,
    };
    let schedule = schedule(cfg, n_groups)?;
    Ok(Problem {
        config: cfg.clone(),
        model,
        schedule,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ProblemId;

    #[test]
    fn sweep_schedule() {
        let mut cfg = ProblemConfig::registry(ProblemId::Inclusion);
        cfg.steps = 2;
        cfg.shear_final = Some(5.0 * cfg.shear);
        let s = schedule(&cfg, 2).unwrap();
        assert_eq!(s.len(), 2 + 8);
        assert_eq!(s[0], vec![0.5, 0.5]);
        assert_eq!(s[1], vec![1.0, 1.0]);
        assert_eq!(s[2], vec![1.0, 1.5]);
        assert_eq!(s.last().unwrap(), &vec![1.0, 5.0]);
        cfg.problem = ProblemId::TwoBlocks;
        assert!(schedule(&cfg, 1).is_err());
    }

    #[test]
    fn barrier_thickness_follows_domain() {
        let p = barrier_params(&ProblemConfig::registry(ProblemId::TwoBlocks)).unwrap();
        assert!((p.d_hat - 4.1e-4).abs() < 1e-15);
        assert_eq!(p.mu, 0.5);
    }

    #[test]
    fn small_instances_build() {
        for id in ProblemId::ALL {
            let mut cfg = ProblemConfig::registry(id);
            match id {
                ProblemId::TwoBlocks => {}
                ProblemId::Inclusion => (cfg.nx, cfg.ny) = (20, 20),
                _ => (cfg.nx, cfg.ny) = (11, 11),
            }
            let p = build(&cfg).unwrap();
            assert!(p.model.n_surface_points() > 0, "{id}");
        }
        let mut cfg = ProblemConfig::registry(ProblemId::Inclusion);
        cfg.nx = 21;
        cfg.ny = 21;
        assert!(matches!(build(&cfg), Err(BenchError::Config(_))));
    }
}
