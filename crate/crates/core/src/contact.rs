//! Interface constitutive laws.
//!
//! The barrier energy `B(u_N) = −κ (u_N − d̂)² ln(u_N / d̂)` is truncated at
//! the barrier thickness `d̂` and is C² there. The contact pressure and the
//! normal stiffness are its first and second derivatives (with sign). The
//! tangential traction follows a smoothed Coulomb law
//! `t_T = m(u_T) μ p_N m̂` in which `m` ramps from 0 to 1 over the maximum
//! microslip `ŝ`.
//!
//! Embedded interfaces start closed, so the working gap carries an initial
//! offset: `u_N = d₀ + ⟦u⟧·n`.

use crate::{Error, Mat2, Result, Vec2};

/// Ratio `d₀ / d̂` that minimizes the conditioning function `g`.
pub const INITIAL_GAP_RATIO: f64 = 0.376;

/// Recommended barrier thickness as a fraction of the domain size.
pub const DEFAULT_THICKNESS_RATIO: f64 = 1e-4;

/// Parameters of the barrier treatment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierParams {
    /// Barrier thickness d̂ (m).
    pub d_hat: f64,
    /// Maximum microslip ŝ (m).
    pub s_hat: f64,
    /// Initial gap d₀ of a closed interface (m).
    pub d0: f64,
    /// Barrier stiffness κ (Pa/m).
    pub kappa: f64,
    /// Estimate of the initial contact pressure used to seed κ (Pa).
    pub p_opt: f64,
    /// Friction coefficient.
    pub mu: f64,
}

impl BarrierParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.d0 > 0.0
            && self.d0 < self.d_hat
            && self.s_hat > 0.0
            && self.kappa > 0.0
            && self.mu >= 0.0
            && [self.d_hat, self.s_hat, self.d0, self.kappa, self.mu]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "barrier parameters violate 0 < d0 < d_hat, s_hat > 0, kappa > 0, mu >= 0: {self:?}"
            )))
        }
    }

    pub fn with_friction(mut self, mu: f64) -> Result<Self> {
        self.mu = mu;
        self.validate()?;
        Ok(self)
    }
}

/// Builds the recommended parameter set: `d̂ = 10⁻⁴ L` unless overridden,
/// `ŝ = d̂`, `d₀ = 0.376 d̂`, and `κ` such that the pressure at `d₀` equals
/// `p_opt` exactly. Friction is zero; see [`BarrierParams::with_friction`].
pub fn parameterize(domain_size: f64, p_opt: f64, d_hat_override: Option<f64>) -> Result<BarrierParams> {
    if !(domain_size > 0.0) || !(p_opt > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "domain size and p_opt must be positive, got {domain_size} and {p_opt}"
        )));
    }
    let d_hat = match d_hat_override {
        Some(d) if d > 0.0 => d,
        Some(d) => return Err(Error::InvalidConfig(format!("d_hat must be positive, got {d}"))),
        None => DEFAULT_THICKNESS_RATIO * domain_size,
    };
    let d0 = INITIAL_GAP_RATIO * d_hat;
    let params = BarrierParams {
        d_hat,
        s_hat: d_hat,
        d0,
        kappa: p_opt / (pressure_shape(INITIAL_GAP_RATIO) * d_hat),
        p_opt,
        mu: 0.0,
    };
    params.validate()?;
    Ok(params)
}

/// `(r − 1)(2 ln r − 1/r + 1)`: the contact pressure at `u_N = r d̂` per unit
/// `κ d̂`. Evaluates to ≈2.256 at `r = 0.376`.
pub fn pressure_shape(r: f64) -> f64 {
    (r - 1.0) * (2.0 * r.ln() - 1.0 / r + 1.0)
}

fn check_gap(u_n: f64) -> Result<()> {
    if u_n > 0.0 {
        Ok(())
    } else {
        Err(Error::Penetration { gap: u_n })
    }
}

/// Barrier energy density (J/m²).
pub fn barrier_energy(u_n: f64, p: &BarrierParams) -> Result<f64> {
    check_gap(u_n)?;
    if u_n >= p.d_hat {
        return Ok(0.0);
    }
    let d = u_n - p.d_hat;
    Ok(-p.kappa * d * d * (u_n / p.d_hat).ln())
}

/// Contact pressure `p_N = −∂B/∂u_N` (Pa).
pub fn contact_pressure(u_n: f64, p: &BarrierParams) -> Result<f64> {
    check_gap(u_n)?;
    if u_n >= p.d_hat {
        return Ok(0.0);
    }
    Ok(p.kappa * (u_n - p.d_hat) * (2.0 * (u_n / p.d_hat).ln() - p.d_hat / u_n + 1.0))
}

/// Normal stiffness `k_N = −∂p_N/∂u_N` (Pa/m).
pub fn normal_stiffness(u_n: f64, p: &BarrierParams) -> Result<f64> {
    check_gap(u_n)?;
    if u_n >= p.d_hat {
        return Ok(0.0);
    }
    Ok(-2.0 * p.kappa * (u_n / p.d_hat).ln()
        - p.kappa * (u_n - p.d_hat) * (3.0 * u_n + p.d_hat) / (u_n * u_n))
}

/// Friction smoothing `m(u_T)` and its derivative for a slip magnitude
/// `u_T ≥ 0`.
pub fn friction_smoothing(u_t: f64, s_hat: f64) -> (f64, f64) {
    let u = u_t.abs();
    if u < s_hat {
        let r = u / s_hat;
        (-r * r + 2.0 * r, (2.0 - 2.0 * r) / s_hat)
    } else {
        (1.0, 0.0)
    }
}

/// Interface state at one surface integration point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TractionState {
    /// Total displacement jump ⟦u⟧ (m).
    pub jump: Vec2,
    /// Gap u_N (m); includes the initial offset for barrier laws.
    pub gap: f64,
    /// Slip magnitude u_T (m).
    pub slip: f64,
    /// Unit slip direction, or zero without slip.
    pub slip_direction: Vec2,
    /// Contact pressure p_N (Pa).
    pub pressure: f64,
    /// Tangential traction t_T (Pa).
    pub tangential: Vec2,
    /// Traction t = −p_N n + t_T (Pa).
    pub traction: Vec2,
    /// ∂t/∂⟦u⟧ (Pa/m).
    pub tangent: Mat2,
}

impl TractionState {
    /// Resolved shear stress τ = ‖t_T‖.
    pub fn shear(&self) -> f64 {
        self.tangential.norm()
    }
}

fn split_slip(jump: Vec2, n: Vec2) -> (Vec2, f64, Vec2) {
    let slip_vec = jump - n * jump.dot(&n);
    let slip = slip_vec.norm();
    let dir = if slip > 0.0 { slip_vec / slip } else { Vec2::zeros() };
    (slip_vec, slip, dir)
}

fn in_plane_tangent(n: Vec2) -> Vec2 {
    Vec2::new(-n.y, n.x)
}

/// Traction update of the barrier-treated interface.
///
/// `jump_prev` is the jump at the last converged step and `delta` the
/// increment since then; the friction law is total-form so only their sum
/// matters.
///
/// Without slip the slip direction is zero, so the traction has no
/// tangential part. The tangent still carries the limit
/// `μ p_N m′(0) (s ⊗ s)` of the friction term, `s` being the in-plane
/// tangent; that is the derivative of `t_T` at zero slip.
pub fn update_traction(
    delta: Vec2,
    jump_prev: Vec2,
    n: Vec2,
    params: &BarrierParams,
) -> Result<TractionState> {
    let jump = jump_prev + delta;
    let gap = params.d0 + jump.dot(&n);
    let pressure = contact_pressure(gap, params)?;
    let k_n = normal_stiffness(gap, params)?;
    let (_, slip, dir) = split_slip(jump, n);
    let (m, dm) = friction_smoothing(slip, params.s_hat);
    let mu = params.mu;

    let tangential = dir * (m * mu * pressure);
    let traction = -n * pressure + tangential;
    let slip_axis = if slip > 0.0 { dir } else { in_plane_tangent(n) };
    let tangent = n * n.transpose() * k_n - dir * n.transpose() * (mu * k_n * m)
        + slip_axis * slip_axis.transpose() * (mu * pressure * dm);

    Ok(TractionState {
        jump,
        gap,
        slip,
        slip_direction: dir,
        pressure,
        tangential,
        traction,
        tangent,
    })
}

/// `g(r)` relating the initial normal stiffness to the initial pressure:
/// `g = k_N d̂ / p_N` at `u_N = r d̂`.
pub fn g_function(r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("g is defined on (0, 1), got {r}")));
    }
    let inv = 1.0 / r;
    Ok((-2.0 * r.ln() - (1.0 - inv) * (3.0 + inv)) / ((r - 1.0) * (2.0 * r.ln() - inv + 1.0)))
}

/// Minimizes `g` on `[lo, hi] ⊂ (0, 1)` by golden-section search.
/// Returns `(argmin, min)`.
pub fn minimize_g(lo: f64, hi: f64) -> Result<(f64, f64)> {
    g_function(lo)?;
    g_function(hi)?;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g_function(c)?, g_function(d)?);
    while b - a > 1e-12 {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g_function(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g_function(d)?;
        }
    }
    let r = 0.5 * (a + b);
    Ok((r, g_function(r)?))
}

/// Initial normal stiffness that balances the bulk and interface blocks of
/// the Jacobian: `E / h`.
pub fn optimal_initial_stiffness(youngs_modulus: f64, h: f64) -> f64 {
    youngs_modulus / h
}

/// Penalty comparator parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyParams {
    /// Normal penalty α_N (Pa/m).
    pub alpha_n: f64,
    /// Tangential penalty α_T (Pa/m).
    pub alpha_t: f64,
    pub mu: f64,
}

impl PenaltyParams {
    pub fn validate(&self) -> Result<()> {
        if self.alpha_n > 0.0 && self.alpha_t > 0.0 && self.mu >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "penalty parameters must satisfy alpha_n, alpha_t > 0, mu >= 0: {self:?}"
            )))
        }
    }
}

/// Committed state of a surface point at the last converged step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PointHistory {
    /// Jump ⟦u⟧_n.
    pub jump: Vec2,
    /// Plastic slip of the penalty return mapping.
    pub plastic_slip: Vec2,
}

/// Coulomb return mapping with a tangential spring. Returns the tangential
/// traction, its tangent w.r.t. the jump (excluding the pressure
/// dependence), the unit direction, and the updated plastic slip.
fn tangential_return_map(
    jump: Vec2,
    n: Vec2,
    alpha_t: f64,
    mu: f64,
    pressure: f64,
    history: &PointHistory,
) -> (Vec2, Mat2, Vec2, bool, Vec2) {
    let (slip_vec, _, _) = split_slip(jump, n);
    let trial = (slip_vec - history.plastic_slip) * alpha_t;
    let limit = mu * pressure;
    let trial_norm = trial.norm();
    if trial_norm <= limit {
        let s = in_plane_tangent(n);
        let dir = if trial_norm > 0.0 { trial / trial_norm } else { Vec2::zeros() };
        (trial, s * s.transpose() * alpha_t, dir, true, history.plastic_slip)
    } else {
        let dir = trial / trial_norm;
        let t_t = dir * limit;
        let plastic = slip_vec - t_t / alpha_t;
        // in 2D the direction cannot rotate, so only the pressure varies
        (t_t, Mat2::zeros(), dir, false, plastic)
    }
}

/// Outcome of a penalty-type update: the traction state and the plastic
/// slip to commit if the step converges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyUpdate {
    pub state: TractionState,
    pub plastic_slip: Vec2,
    pub sticking: bool,
}

/// Penalty traction: `p_N = α_N max(−u_N, 0)` with `u_N = ⟦u⟧·n` and an
/// elastic-predictor / radial-return tangential law.
pub fn penalty_traction(jump: Vec2, n: Vec2, params: &PenaltyParams, history: &PointHistory) -> PenaltyUpdate {
    let gap = jump.dot(&n);
    // the closed branch includes u_N = 0 so an untouched interface is stiff
    let (pressure, k_n) = if gap <= 0.0 {
        (-params.alpha_n * gap, params.alpha_n)
    } else {
        (0.0, 0.0)
    };
    let (tangential, tt_tangent, dir, sticking, plastic_slip) =
        tangential_return_map(jump, n, params.alpha_t, params.mu, pressure, history);
    let (_, slip, _) = split_slip(jump, n);
    let mut tangent = n * n.transpose() * k_n + tt_tangent;
    if !sticking {
        tangent -= dir * n.transpose() * (params.mu * k_n);
    }
    PenaltyUpdate {
        state: TractionState {
            jump,
            gap,
            slip,
            slip_direction: dir,
            pressure,
            tangential,
            traction: -n * pressure + tangential,
            tangent,
        },
        plastic_slip,
        sticking,
    }
}

/// Barrier normal law combined with the penalty tangential law.
pub fn hybrid_traction(
    jump: Vec2,
    n: Vec2,
    barrier: &BarrierParams,
    alpha_t: f64,
    history: &PointHistory,
) -> Result<PenaltyUpdate> {
    let gap = barrier.d0 + jump.dot(&n);
    let pressure = contact_pressure(gap, barrier)?;
    let k_n = normal_stiffness(gap, barrier)?;
    let (tangential, tt_tangent, dir, sticking, plastic_slip) =
        tangential_return_map(jump, n, alpha_t, barrier.mu, pressure, history);
    let (_, slip, _) = split_slip(jump, n);
    let mut tangent = n * n.transpose() * k_n + tt_tangent;
    if !sticking {
        tangent -= dir * n.transpose() * (barrier.mu * k_n);
    }
    Ok(PenaltyUpdate {
        state: TractionState {
            jump,
            gap,
            slip,
            slip_direction: dir,
            pressure,
            tangential,
            traction: -n * pressure + tangential,
            tangent,
        },
        plastic_slip,
        sticking,
    })
}

/// Contact treatment applied at every surface integration point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContactLaw {
    Barrier(BarrierParams),
    Penalty(PenaltyParams),
    /// Barrier in the normal direction, penalty return mapping tangentially.
    Hybrid { barrier: BarrierParams, alpha_t: f64 },
}

impl ContactLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            ContactLaw::Barrier(b) => b.validate(),
            ContactLaw::Penalty(p) => p.validate(),
            ContactLaw::Hybrid { barrier, alpha_t } => {
                barrier.validate()?;
                if *alpha_t > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig("alpha_t must be positive".into()))
                }
            }
        }
    }

    pub fn friction(&self) -> f64 {
        match self {
            ContactLaw::Barrier(b) | ContactLaw::Hybrid { barrier: b, .. } => b.mu,
            ContactLaw::Penalty(p) => p.mu,
        }
    }

    pub fn barrier(&self) -> Option<&BarrierParams> {
        match self {
            ContactLaw::Barrier(b) | ContactLaw::Hybrid { barrier: b, .. } => Some(b),
            ContactLaw::Penalty(_) => None,
        }
    }

    /// Evaluates the traction at total jump `jump`. The returned plastic
    /// slip is the value to commit at convergence.
    pub fn evaluate(&self, jump: Vec2, n: Vec2, history: &PointHistory) -> Result<(TractionState, Vec2)> {
        match self {
            ContactLaw::Barrier(b) => {
                let s = update_traction(jump - history.jump, history.jump, n, b)?;
                Ok((s, history.plastic_slip))
            }
            ContactLaw::Penalty(p) => {
                let u = penalty_traction(jump, n, p, history);
                Ok((u.state, u.plastic_slip))
            }
            ContactLaw::Hybrid { barrier, alpha_t } => {
                let u = hybrid_traction(jump, n, barrier, *alpha_t, history)?;
                Ok((u.state, u.plastic_slip))
            }
        }
    }
}
