//! Time evolution of states and subspaces, angle trajectories, and
//! first-crossing times.
//!
//! A subspace with projector `P0` evolves under `H` as
//! `P(t) = U(t) P0 U(t)*` with `U(t) = exp(-i H t)`; equivalently `P(t)`
//! solves `i dP/dt = [P, H]` with `P(0) = P0`. The maximal angle between
//! `P(t)` and `P0` grows at most linearly in `t`, with rate given by the
//! off-diagonal speed `||P0 H (I - P0)||`; that Lipschitz constant is what
//! lets the crossing search prune whole time intervals with certainty.

use serde::{Deserialize, Serialize};

use crate::bounds::off_diagonal_speed;
use crate::error::{QslError, Result};
use crate::geometry::projector_distance;
use crate::operators::{
    self, spectral_decomposition, Frame, HermitianOperator, Projector, SpectralDecomposition,
    StateVector,
};
use crate::{CMatrix, C64};

/// A subspace whose off-diagonal speed falls at or below this threshold is
/// declared invariant: its angle to the initial subspace never moves.
pub const INVARIANT_SPEED_THRESHOLD: f64 = 1e-14;

/// `exp(-i H t) psi0`.
pub fn evolve_state(h: &HermitianOperator, psi0: &StateVector, t: f64) -> Result<StateVector> {
    if h.dim() != psi0.dim() {
        return Err(QslError::DimensionMismatch {
            left: h.dim(),
            right: psi0.dim(),
        });
    }
    let spec = spectral_decomposition(h)?;
    let col = CMatrix::from_columns(&[psi0.entries().clone()]);
    let evolved = spec.apply_propagator(t, &col);
    StateVector::with_tol(evolved.column(0).into_owned(), 1e-10)
}

/// `exp(-i H t) P0 exp(i H t)`, the evolved projector.
pub fn evolve_projector(h: &HermitianOperator, p0: &Projector, t: f64) -> Result<Projector> {
    if h.dim() != p0.dim() {
        return Err(QslError::DimensionMismatch {
            left: h.dim(),
            right: p0.dim(),
        });
    }
    let spec = spectral_decomposition(h)?;
    let u = spec.propagator(t);
    Projector::try_new(&u * p0.entries() * u.adjoint(), operators::PROJECTOR_TOL)
}

/// Sampled angle curve `t -> theta(t)` together with the two linear bounds
/// it must stay under.
///
/// `times` is a uniform grid from 0 to the requested endpoint inclusive;
/// `norm_diff[i] = ||P(t_i) - P0||`, `theta[i] = arcsin(norm_diff[i])`,
/// `v_bound[i] = v * t_i`, and `dispersion_bound[i] = de * t_i`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AngleTrajectory {
    pub times: Vec<f64>,
    pub norm_diff: Vec<f64>,
    pub theta: Vec<f64>,
    pub v_bound: Vec<f64>,
    pub dispersion_bound: Vec<f64>,
}

/// Samples the angle between `P(t)` and `P0` on a uniform grid of
/// `num_points` points over `[0, t_max]`, endpoints included.
///
/// `v` and `de` are the off-diagonal speed and subspace energy dispersion,
/// precomputed by the caller; they only parameterize the comparison lines.
pub fn angle_trajectory(
    h: &HermitianOperator,
    p0: &Projector,
    t_max: f64,
    num_points: usize,
    v: f64,
    de: f64,
) -> Result<AngleTrajectory> {
    if h.dim() != p0.dim() {
        return Err(QslError::DimensionMismatch {
            left: h.dim(),
            right: p0.dim(),
        });
    }
    if t_max <= 0.0 {
        return Err(QslError::NonpositiveHorizon { horizon: t_max });
    }
    if num_points < 2 {
        return Err(QslError::GridTooSmall { points: num_points });
    }
    let spec = spectral_decomposition(h)?;
    let mut out = AngleTrajectory {
        times: Vec::with_capacity(num_points),
        norm_diff: Vec::with_capacity(num_points),
        theta: Vec::with_capacity(num_points),
        v_bound: Vec::with_capacity(num_points),
        dispersion_bound: Vec::with_capacity(num_points),
    };
    for i in 0..num_points {
        let t = t_max * i as f64 / (num_points - 1) as f64;
        let u = spec.propagator(t);
        let pt = Projector::try_new(&u * p0.entries() * u.adjoint(), operators::PROJECTOR_TOL)?;
        let nd = projector_distance(&pt, p0)?;
        out.times.push(t);
        out.norm_diff.push(nd);
        out.theta.push(nd.asin());
        out.v_bound.push(v * t);
        out.dispersion_bound.push(de * t);
    }
    Ok(out)
}

/// Outcome of a first-crossing search over `[0, horizon]`.
///
/// When `attained` is true, `t_theta` holds the earliest located time at
/// which the angle reaches `theta_target` within the crossing tolerance, and
/// no sampled time before it saw the angle at or past the target.
/// When false, the search certified (via the Lipschitz bound on the angle)
/// that the angle stays short of the target on the whole window;
/// `sup_angle_observed` reports the largest sampled angle either way.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossingResult {
    pub attained: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_theta: Option<f64>,
    pub theta_target: f64,
    pub sup_angle_observed: f64,
    pub horizon: f64,
}

/// Earliest time in `[0, horizon]` at which the maximal angle between the
/// evolved and the initial subspace reaches `theta_target`.
///
/// The search maintains the invariant that the angle is Lipschitz in time
/// with constant equal to the off-diagonal speed: subintervals whose
/// endpoint angles sit too far below the target to be bridged at that rate
/// are discarded whole, and the remainder is split left-first until either a
/// sample reaches the target (then bisection sharpens the bracket) or every
/// candidate is exhausted. Tangential approaches, where the angle only
/// touches the target, are caught by probing the apex of the local Lipschitz
/// envelope once intervals are fine enough.
///
/// A speed at or below [`INVARIANT_SPEED_THRESHOLD`] means the subspace
/// never moves; the scan is skipped and the result reports not attained.
pub fn first_crossing_time(
    h: &HermitianOperator,
    p0: &Projector,
    theta_target: f64,
    horizon: f64,
    crossing_tol: f64,
) -> Result<CrossingResult> {
    if theta_target.is_nan() || theta_target <= 0.0 || theta_target > std::f64::consts::FRAC_PI_2 {
        return Err(QslError::InvalidTheta {
            theta: theta_target,
        });
    }
    if horizon.is_nan() || horizon <= 0.0 {
        return Err(QslError::NonpositiveHorizon { horizon });
    }
    if crossing_tol.is_nan() || crossing_tol <= 0.0 {
        return Err(QslError::NonpositiveTolerance { tol: crossing_tol });
    }
    if h.dim() != p0.dim() {
        return Err(QslError::DimensionMismatch {
            left: h.dim(),
            right: p0.dim(),
        });
    }

    let v = off_diagonal_speed(h, p0)?;
    if v <= INVARIANT_SPEED_THRESHOLD {
        return Ok(CrossingResult {
            attained: false,
            t_theta: None,
            theta_target,
            sup_angle_observed: 0.0,
            horizon,
        });
    }

    let spec = spectral_decomposition(h)?;
    let frame = p0.range_frame()?;
    let mut search = CrossingSearch::new(p0, &spec, &frame, theta_target, crossing_tol, v);

    let theta_0 = search.eval(0.0)?;
    debug_assert!(
        !search.hit(theta_0),
        "angle at t = 0 is zero, below any valid target"
    );
    let theta_h = search.eval(horizon)?;
    let hit_h = search.hit(theta_h);
    let found = search.run(0.0, theta_0, horizon, theta_h, hit_h)?;

    Ok(CrossingResult {
        attained: found.is_some(),
        t_theta: found,
        theta_target,
        sup_angle_observed: search.sup_angle,
        horizon,
    })
}

/// State for one crossing search: the angle evaluator plus the derived
/// tolerances.
struct CrossingSearch<'a> {
    p0: &'a Projector,
    spec: &'a SpectralDecomposition,
    /// `V* F0`: the initial frame expressed in the eigenbasis.
    w: CMatrix,
    theta_eff: f64,
    /// Lipschitz constant for the angle, inflated by a hair for safe pruning.
    v_lip: f64,
    /// Interval width at which apex probing replaces midpoint splitting.
    w_apex: f64,
    /// Bracket width down to which a located crossing is refined.
    w_refine: f64,
    /// Width below which an undecided interval is certified a miss.
    w_floor: f64,
    sup_angle: f64,
}

impl<'a> CrossingSearch<'a> {
    fn new(
        p0: &'a Projector,
        spec: &'a SpectralDecomposition,
        frame: &Frame,
        theta_target: f64,
        crossing_tol: f64,
        v: f64,
    ) -> Self {
        let w = spec.eigenvectors().adjoint() * frame.columns();
        // Slightly sub-target hit threshold: absorbs evaluation noise at a
        // tangential touch without disturbing transversal crossings.
        let theta_eff = theta_target - (1e-11f64).min(theta_target * 0.5);
        let v_lip = v * (1.0 + 1e-10);
        let w_apex = crossing_tol / v_lip;
        let w_refine = crossing_tol / v_lip.max(1.0);
        let w_floor = (w_apex * 1e-9).max(8.0 * f64::EPSILON);
        CrossingSearch {
            p0,
            spec,
            w,
            theta_eff,
            v_lip,
            w_apex,
            w_refine,
            w_floor,
            sup_angle: 0.0,
        }
    }

    fn hit(&self, theta: f64) -> bool {
        theta >= self.theta_eff
    }

    /// The maximal angle between `P(t)` and `P0`, routed through whichever
    /// of two computations is well-conditioned at the current angle.
    ///
    /// For equal-rank subspaces the cosine of the maximal angle equals the
    /// smallest singular value of the `k x k` frame overlap `F0* U(t) F0`;
    /// near `pi/2` that cosine crosses zero transversally, so the arccosine
    /// route resolves touches of `pi/2` to machine precision where the norm
    /// `||P(t) - P0||` only grazes 1 quadratically. Away from `pi/2` the
    /// norm route is the well-conditioned one and the two agree to rounding.
    fn eval(&mut self, t: f64) -> Result<f64> {
        let phases: Vec<C64> = self
            .spec
            .eigenvalues()
            .iter()
            .map(|&e| C64::from_polar(1.0, -e * t))
            .collect();
        let mut rotated = self.w.clone();
        for (i, &ph) in phases.iter().enumerate() {
            for z in rotated.row_mut(i).iter_mut() {
                *z *= ph;
            }
        }
        let overlap = self.w.adjoint() * rotated;
        let svd = overlap
            .clone()
            .try_svd(false, false, f64::EPSILON, 100_000)
            .ok_or(QslError::SvdFailure {
                rows: overlap.nrows(),
                cols: overlap.ncols(),
            })?;
        let sigma_min = svd
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let c = sigma_min.clamp(0.0, 1.0);

        let theta = if c <= 0.75 {
            c.acos()
        } else {
            let u = self.spec.propagator(t);
            let diff = &u * self.p0.entries() * u.adjoint() - self.p0.entries();
            let norm = crate::operators::operator_norm(&diff)?;
            norm.clamp(0.0, 1.0).asin()
        };
        if theta > self.sup_angle {
            self.sup_angle = theta;
        }
        Ok(theta)
    }

    /// Left-to-right search over `[a, b]`; `hit_b` says whether `b` already
    /// reached the target. Precondition: `a` did not.
    fn run(
        &mut self,
        a: f64,
        theta_a: f64,
        b: f64,
        theta_b: f64,
        hit_b: bool,
    ) -> Result<Option<f64>> {
        let width = b - a;
        if hit_b {
            // Bisection step toward the leftmost reach inside (a, b].
            if width <= self.w_refine {
                return Ok(Some(b));
            }
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                return Ok(Some(b));
            }
            let theta_m = self.eval(m)?;
            if self.hit(theta_m) {
                return self.run(a, theta_a, m, theta_m, true);
            }
            if let Some(t) = self.run(a, theta_a, m, theta_m, false)? {
                return Ok(Some(t));
            }
            return self.run(m, theta_m, b, theta_b, true);
        }

        // Neither endpoint reached the target: prune if the Lipschitz tent
        // over the interval stays below it.
        if 0.5 * (theta_a + theta_b) + 0.5 * self.v_lip * width < self.theta_eff {
            return Ok(None);
        }
        if width <= self.w_floor {
            return Ok(None);
        }
        let m = if width <= self.w_apex {
            // Probe where the tent peaks; a tangential touch hides there.
            let apex = 0.5 * (a + b) + (theta_b - theta_a) / (2.0 * self.v_lip);
            apex.clamp(a + 0.25 * width, b - 0.25 * width)
        } else {
            0.5 * (a + b)
        };
        if m <= a || m >= b {
            return Ok(None);
        }
        let theta_m = self.eval(m)?;
        if self.hit(theta_m) {
            return self.run(a, theta_a, m, theta_m, true);
        }
        if let Some(t) = self.run(a, theta_a, m, theta_m, false)? {
            return Ok(Some(t));
        }
        self.run(m, theta_m, b, theta_b, false)
    }
}

/// Operator-norm residual of the projector equation of motion at time `t`,
/// discretized by a central difference of half-width `step`:
/// `|| (P(t+step) - P(t-step)) / (2 step) - i [P(t), H] ||`.
///
/// With `U(t) = exp(-iHt)` the path `P(t) = U(t) P0 U(t)^*` satisfies
/// `dP/dt = i [P, H]` where `[P, H] = PH - HP`, so the residual shrinks
/// as `step^2`.
pub fn projector_derivative_residual(
    h: &HermitianOperator,
    p0: &Projector,
    t: f64,
    step: f64,
) -> Result<f64> {
    if step.is_nan() || step <= 0.0 {
        return Err(QslError::NonpositiveTolerance { tol: step });
    }
    if h.dim() != p0.dim() {
        return Err(QslError::DimensionMismatch {
            left: h.dim(),
            right: p0.dim(),
        });
    }
    let spec = spectral_decomposition(h)?;
    let sandwich = |tt: f64| -> CMatrix {
        let u = spec.propagator(tt);
        &u * p0.entries() * u.adjoint()
    };
    let plus = sandwich(t + step);
    let minus = sandwich(t - step);
    let center = sandwich(t);
    let derivative = (plus - minus).map(|z| z / (2.0 * step));
    let comm = operators::commutator(&center, h.entries())?;
    let residual = derivative - comm.map(|z| z * C64::i());
    operators::operator_norm(&residual)
}

/// Length of the projector path up to time `t`: the angle speed is constant
/// in time, so the length is `||[P0, H]|| * t`.
pub fn path_length(h: &HermitianOperator, p0: &Projector, t: f64) -> Result<f64> {
    debug_assert!(t >= 0.0);
    if h.dim() != p0.dim() {
        return Err(QslError::DimensionMismatch {
            left: h.dim(),
            right: p0.dim(),
        });
    }
    let comm = operators::commutator(p0.entries(), h.entries())?;
    Ok(operators::operator_norm(&comm)? * t)
}
