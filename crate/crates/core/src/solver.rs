//! Sparse direct solves and Newton's method with load stepping.

use std::time::{Duration, Instant};

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMat};
use faer::Mat;

use crate::assembly::{CscPattern, Model, Reduction};
use crate::contact::{PointHistory, TractionState};
use crate::{Error, Result};

/// Refinement sweeps allowed after the direct solve.
pub const REFINEMENT_STEPS: usize = 3;

/// Normwise backward error `‖Ax − b‖ / (‖A‖ ‖x‖ + ‖b‖)` accepted from the
/// direct solver.
pub const BACKWARD_ERROR_LIMIT: f64 = 1e-10;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Sparse LU solver whose symbolic analysis is reused across numeric
/// factorizations with the same pattern.
pub struct LinearSolver {
    pattern: CscPattern,
    symbolic: SymbolicSparseColMat<usize>,
    lu_symbolic: SymbolicLu<usize>,
}

impl std::fmt::Debug for LinearSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearSolver")
            .field("n", &self.pattern.n)
            .field("nnz", &self.pattern.nnz())
            .finish()
    }
}

impl LinearSolver {
    pub fn new(pattern: &CscPattern) -> Result<Self> {
        let symbolic = SymbolicSparseColMat::new_checked(
            pattern.n,
            pattern.n,
            pattern.col_ptr.clone(),
            None,
            pattern.row_idx.clone(),
        );
        let lu_symbolic = SymbolicLu::try_new(symbolic.as_ref())
            .map_err(|e| Error::SingularSystem(format!("symbolic analysis failed: {e:?}")))?;
        Ok(LinearSolver {
            pattern: pattern.clone(),
            symbolic,
            lu_symbolic,
        })
    }

    /// Solves `A x = rhs` with `A` given by its values in pattern order.
    pub fn solve(&self, values: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.pattern.n;
        if values.len() != self.pattern.nnz() || rhs.len() != n {
            return Err(Error::InvalidConfig("linear system sizes do not match the pattern".into()));
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        // symmetric diagonal equilibration: factor D A D with D = |diag A|^(-1/2)
        let scale: Vec<f64> = (0..n)
            .map(|c| match self.pattern.position(c, c).map(|k| values[k].abs()) {
                Some(d) if d > 0.0 && d.is_finite() => 1.0 / d.sqrt(),
                _ => 1.0,
            })
            .collect();
        let mut scaled = values.to_vec();
        for c in 0..n {
            for k in self.pattern.col_ptr[c]..self.pattern.col_ptr[c + 1] {
                scaled[k] *= scale[self.pattern.row_idx[k]] * scale[c];
            }
        }
        let a = SparseColMatRef::new(self.symbolic.as_ref(), &scaled);
        let lu = Lu::try_new_with_symbolic(self.lu_symbolic.clone(), a)
            .map_err(|e| Error::SingularSystem(format!("numeric factorization failed: {e:?}")))?;
        let apply_inverse = |b: &[f64]| -> Vec<f64> {
            let mut y = Mat::<f64>::from_fn(n, 1, |i, _| scale[i] * b[i]);
            lu.solve_in_place(y.as_mut());
            (0..n).map(|i| scale[i] * y[(i, 0)]).collect()
        };
        let mut x = apply_inverse(rhs);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem("solution has non-finite entries".into()));
        }

        let mut row_sums = vec![0.0; n];
        for (k, &row) in self.pattern.row_idx.iter().enumerate() {
            row_sums[row] += values[k].abs();
        }
        let a_norm = row_sums.iter().copied().fold(0.0, f64::max);
        let b_norm = inf_norm(rhs);
        let residual = |x: &[f64]| {
            let mut r: Vec<f64> = rhs.iter().map(|v| -v).collect();
            self.pattern.mul_add(values, x, &mut r);
            r
        };
        // normwise backward error ‖r‖ / (‖A‖ ‖x‖ + ‖b‖), infinity norms
        let backward_error = |x: &[f64], r: &[f64]| {
            let denom = a_norm * inf_norm(x) + b_norm;
            if denom > 0.0 {
                inf_norm(r) / denom
            } else {
                inf_norm(r)
            }
        };
        let mut r = residual(&x);
        let mut backward = backward_error(&x, &r);
        // iterative refinement for badly scaled systems
        for _ in 0..REFINEMENT_STEPS {
            if backward < 1e-3 * BACKWARD_ERROR_LIMIT {
                break;
            }
            let d = apply_inverse(&r);
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - b).collect();
            let rt = residual(&trial);
            let bt = backward_error(&trial, &rt);
            if !(bt < backward) {
                break;
            }
            x = trial;
            r = rt;
            backward = bt;
        }
        if !(backward < BACKWARD_ERROR_LIMIT) {
            let diag_max = (0..n)
                .filter_map(|c| self.pattern.position(c, c).map(|k| values[k].abs()))
                .fold(0.0f64, f64::max);
            let diag_min = (0..n)
                .map(|c| self.pattern.position(c, c).map_or(0.0, |k| values[k].abs()))
                .fold(f64::INFINITY, f64::min);
            return Err(Error::SingularSystem(format!(
                "backward error {backward:.3e} exceeds {BACKWARD_ERROR_LIMIT:.0e} (diagonal range {diag_min:.3e} .. {diag_max:.3e})"
            )));
        }
        Ok(x)
    }
}

/// One-shot sparse solve.
pub fn linear_solve(pattern: &CscPattern, values: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    LinearSolver::new(pattern)?.solve(values, rhs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol_rel: f64,
    pub tol_abs: f64,
    pub max_iterations: usize,
    /// Scaling of every Newton update. 1 means a full step.
    pub damping: f64,
    /// Step halvings allowed when an update would close a barrier gap.
    pub max_backtracks: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol_rel: 1e-8,
            tol_abs: 1e-10,
            max_iterations: 50,
            damping: 1.0,
            max_backtracks: 30,
        }
    }
}

/// Which test ended a Newton solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Relative,
    Absolute,
    MaxIterations,
    /// Residual or update not finite.
    Diverged,
    /// The barrier gap could not be kept positive by step halving.
    Infeasible,
    /// Linear solver failure.
    Singular,
}

impl StopReason {
    pub fn converged(self) -> bool {
        matches!(self, StopReason::Relative | StopReason::Absolute)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Relative => "relative",
            StopReason::Absolute => "absolute",
            StopReason::MaxIterations => "max_iterations",
            StopReason::Diverged => "diverged",
            StopReason::Infeasible => "infeasible",
            StopReason::Singular => "singular",
        }
    }
}

/// Convergence history of one load step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub step: usize,
    /// Residual norms in the order they were tested; the first is the
    /// norm of the initial right-hand side.
    pub residual_norms: Vec<f64>,
    pub reason: StopReason,
    /// Step halvings forced by barrier feasibility.
    pub backtracks: usize,
    /// Round-off level of the residual at the final iterate,
    /// `ε ‖J‖ ‖x‖` in infinity norms. Norms below it carry no information.
    pub noise_floor: f64,
    pub wall_time: Duration,
}

impl StepReport {
    pub fn converged(&self) -> bool {
        self.reason.converged()
    }

    /// Number of linear solves performed.
    pub fn iterations(&self) -> usize {
        self.residual_norms.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NewtonReport {
    pub steps: Vec<StepReport>,
}

impl NewtonReport {
    pub fn converged(&self) -> bool {
        !self.steps.is_empty() && self.steps.iter().all(StepReport::converged)
    }

    pub fn total_iterations(&self) -> usize {
        self.steps.iter().map(StepReport::iterations).sum()
    }

    pub fn wall_time(&self) -> Duration {
        self.steps.iter().map(|s| s.wall_time).sum()
    }
}

/// Evolving solution of a model: displacement vector and committed
/// interface history.
#[derive(Debug)]
pub struct Simulation<'m> {
    model: &'m Model,
    reduction: Reduction,
    solver: LinearSolver,
    x: Vec<f64>,
    history: Vec<PointHistory>,
    loads: Vec<f64>,
    steps_taken: usize,
}

impl<'m> Simulation<'m> {
    pub fn new(model: &'m Model) -> Result<Self> {
        let reduction = Reduction::new(model);
        let solver = LinearSolver::new(&reduction.pattern)?;
        Ok(Simulation {
            model,
            reduction,
            solver,
            x: vec![0.0; model.dofs.n_total()],
            history: model.initial_history(),
            loads: vec![0.0; model.n_groups()],
            steps_taken: 0,
        })
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    pub fn solution(&self) -> &[f64] {
        &self.x
    }

    pub fn history(&self) -> &[PointHistory] {
        &self.history
    }

    pub fn loads(&self) -> &[f64] {
        &self.loads
    }

    /// Interface states at the current solution.
    pub fn states(&self) -> Result<Vec<TractionState>> {
        Ok(self.model.evaluate(&self.x, &self.history, &self.loads)?.states)
    }

    /// Full residual at the current solution; entries at constrained DOFs
    /// are the reactions.
    pub fn residual(&self) -> Result<Vec<f64>> {
        Ok(self.model.evaluate(&self.x, &self.history, &self.loads)?.residual)
    }

    /// Solves for equilibrium at load scaling `loads`, starting from the
    /// current state. On success the interface history is committed; on
    /// failure the previous state is kept.
    ///
    /// In the first iteration the constrained DOFs take their full
    /// increments and their coupling enters the right-hand side; afterwards
    /// their increments are zero.
    pub fn solve_step(&mut self, loads: &[f64], opts: &NewtonOptions) -> Result<StepReport> {
        let start = Instant::now();
        let step = self.steps_taken;
        self.steps_taken += 1;
        let model = self.model;
        let targets = model.prescribed(loads);

        let mut x = self.x.clone();
        let mut norms = Vec::new();
        let mut backtracks = 0;
        let mut ev = model.evaluate(&x, &self.history, loads)?;
        let lift = |x: &[f64]| -> Vec<(usize, f64)> { targets.iter().map(|&(d, v)| (d, v - x[d])).collect() };
        let mut delta_c = lift(&x);
        let mut rhs = self.reduction.rhs(model.pattern(), &ev.jacobian, &ev.residual, &delta_c);
        let r0 = norm(&rhs);
        norms.push(r0);

        let finish = |reason: StopReason, norms: Vec<f64>, backtracks: usize, noise_floor: f64| StepReport {
            step,
            residual_norms: norms,
            reason,
            backtracks,
            noise_floor,
            wall_time: start.elapsed(),
        };

        let mut reason = if !r0.is_finite() {
            Some(StopReason::Diverged)
        } else if r0 <= opts.tol_abs && delta_c.iter().all(|&(_, d)| d == 0.0) {
            Some(StopReason::Absolute)
        } else {
            None
        };

        let mut iterations = 0;
        while reason.is_none() {
            if iterations == opts.max_iterations {
                reason = Some(StopReason::MaxIterations);
                break;
            }
            iterations += 1;
            let dx = match self.solver.solve(&self.reduction.matrix(&ev.jacobian), &rhs) {
                Ok(dx) => dx,
                Err(Error::SingularSystem(_)) => {
                    reason = Some(StopReason::Singular);
                    break;
                }
                Err(e) => return Err(e),
            };

            let mut scale = opts.damping;
            let mut accepted = None;
            for attempt in 0..=opts.max_backtracks {
                let mut trial = x.clone();
                for (r, &full) in self.reduction.free.iter().enumerate() {
                    trial[full] += scale * dx[r];
                }
                for (&(d, dc), &(_, target)) in delta_c.iter().zip(&targets) {
                    trial[d] = if scale == 1.0 { target } else { trial[d] + scale * dc };
                }
                match model.evaluate(&trial, &self.history, loads) {
                    Ok(next) => {
                        accepted = Some((trial, next));
                        break;
                    }
                    Err(Error::Penetration { .. }) if attempt < opts.max_backtracks => {
                        backtracks += 1;
                        scale *= 0.5;
                    }
                    Err(Error::Penetration { .. }) => break,
                    Err(e) => return Err(e),
                }
            }
            let Some((trial, next)) = accepted else {
                reason = Some(StopReason::Infeasible);
                break;
            };
            x = trial;
            ev = next;
            delta_c = lift(&x);
            rhs = self.reduction.rhs(model.pattern(), &ev.jacobian, &ev.residual, &delta_c);
            let r = norm(&rhs);
            norms.push(r);
            let constraints_met = delta_c.iter().all(|&(_, d)| d == 0.0);
            if !r.is_finite() {
                reason = Some(StopReason::Diverged);
            } else if constraints_met && r <= opts.tol_rel * r0 {
                reason = Some(StopReason::Relative);
            } else if constraints_met && r <= opts.tol_abs {
                reason = Some(StopReason::Absolute);
            }
        }

        let reason = reason.expect("loop ends with a reason");
        let mut row_sums = vec![0.0; x.len()];
        for (k, &row) in model.pattern().row_idx.iter().enumerate() {
            row_sums[row] += ev.jacobian[k].abs();
        }
        let noise_floor = f64::EPSILON * inf_norm(&row_sums) * inf_norm(&x);
        if reason.converged() {
            for (h, (s, slip)) in self.history.iter_mut().zip(ev.states.iter().zip(&ev.plastic_slip)) {
                h.jump = s.jump;
                h.plastic_slip = *slip;
            }
            self.x = x;
            self.loads = loads.to_vec();
        }
        Ok(finish(reason, norms, backtracks, noise_floor))
    }
}

/// Load factors `k/n` for every group at steps `k = 1..=n`.
pub fn linear_ramp(n_steps: usize, n_groups: usize) -> Vec<Vec<f64>> {
    (1..=n_steps)
        .map(|k| vec![k as f64 / n_steps as f64; n_groups])
        .collect()
}

/// Result of a load-stepping run.
#[derive(Debug, Clone)]
pub struct LoadPath {
    /// Converged solution after every converged step.
    pub solutions: Vec<Vec<f64>>,
    /// Interface states after every converged step.
    pub states: Vec<Vec<TractionState>>,
    pub report: NewtonReport,
}

/// Solves the steps of `schedule` in order, warm-starting each from the
/// previous converged state. Without `continue_on_failure` the run stops
/// at the first non-converged step.
pub fn run_load_steps(
    model: &Model,
    schedule: &[Vec<f64>],
    opts: &NewtonOptions,
    continue_on_failure: bool,
) -> Result<LoadPath> {
    let mut sim = Simulation::new(model)?;
    let mut path = LoadPath {
        solutions: Vec::new(),
        states: Vec::new(),
        report: NewtonReport::default(),
    };
    for loads in schedule {
        let report = sim.solve_step(loads, opts)?;
        let converged = report.converged();
        path.report.steps.push(report);
        if converged {
            path.solutions.push(sim.solution().to_vec());
            path.states.push(sim.states()?);
        } else if !continue_on_failure {
            break;
        }
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_pattern(n: usize) -> CscPattern {
        CscPattern {
            n,
            col_ptr: (0..=n).map(|c| c * n).collect(),
            row_idx: (0..n * n).map(|k| k % n).collect(),
        }
    }

    #[test]
    fn identity_and_diagonal() {
        let p = CscPattern {
            n: 3,
            col_ptr: vec![0, 1, 2, 3],
            row_idx: vec![0, 1, 2],
        };
        let rhs = [1.0, -2.0, 3.5];
        assert_eq!(linear_solve(&p, &[1.0; 3], &rhs).unwrap(), rhs.to_vec());
        let p2 = CscPattern {
            n: 2,
            col_ptr: vec![0, 1, 2],
            row_idx: vec![0, 1],
        };
        let x = linear_solve(&p2, &[2.0, 4.0], &[2.0, 4.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_spd_backward_error() {
        let n = 100;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // A = BᵀB + n I, column-major
        let mut a = vec![0.0; n * n];
        for c in 0..n {
            for r in 0..n {
                let dot: f64 = (0..n).map(|k| b[k * n + r] * b[k * n + c]).sum();
                a[c * n + r] = dot + if r == c { n as f64 } else { 0.0 };
            }
        }
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p = dense_pattern(n);
        let x = linear_solve(&p, &a, &rhs).unwrap();
        let mut r: Vec<f64> = rhs.iter().map(|v| -v).collect();
        p.mul_add(&a, &x, &mut r);
        assert!(norm(&r) / norm(&rhs) < 1e-10);
    }

    #[test]
    fn badly_scaled_chain_is_solved() {
        // springs in series whose stiffness jumps by 1e7 halfway along
        let n: usize = 40;
        let k: Vec<f64> = (0..=n).map(|i| if i < n / 2 { 1e13 } else { 1e6 }).collect();
        let mut col_ptr = vec![0];
        let (mut row_idx, mut vals) = (Vec::new(), Vec::new());
        for c in 0..n {
            for r in c.saturating_sub(1)..(c + 2).min(n) {
                row_idx.push(r);
                vals.push(if r == c { k[c] + k[c + 1] } else { -k[r.max(c)] });
            }
            col_ptr.push(row_idx.len());
        }
        let p = CscPattern { n, col_ptr, row_idx };
        let mut rhs = vec![0.0; n];
        rhs[n - 1] = 1.0;
        let x = linear_solve(&p, &vals, &rhs).unwrap();
        let mut r: Vec<f64> = rhs.iter().map(|v| -v).collect();
        p.mul_add(&vals, &x, &mut r);
        let a_inf = (0..n).map(|i| 2.0 * (k[i] + k[i + 1])).fold(0.0, f64::max);
        assert!(inf_norm(&r) / (a_inf * inf_norm(&x) + 1.0) < 1e-14);
        // the soft half carries all the stretch
        assert!(x[n / 2 - 1] < 1e-6 * x[n - 1]);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let p = dense_pattern(2);
        let err = linear_solve(&p, &[1.0, 1.0, 1.0, 1.0], &[1.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::SingularSystem(_)));
    }

    #[test]
    fn ramp_factors() {
        let r = linear_ramp(10, 2);
        assert_eq!(r.len(), 10);
        assert!((r[0][0] - 0.1).abs() < 1e-15);
        assert_eq!(r[9], vec![1.0, 1.0]);
    }
}
