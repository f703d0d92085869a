//! Distances and angles between subspaces of a finite-dimensional space.
//!
//! The central quantity is the operator-norm distance `||P1 - P2||` between
//! orthogonal projectors, which always lies in `[0, 1]`. Its arcsine, the
//! maximal angle, is a metric on the set of all subspaces, of any pair of
//! dimensions. The directed variant, the relative maximal angle from one
//! subspace to another, measures how far a unit vector of the first can sit
//! from the second; it is not symmetric when the dimensions differ.

use crate::error::{QslError, Result};
use crate::operators::{operator_norm, Frame, Projector, StateVector};

/// Largest excess over an exact bound that is attributed to rounding and
/// clamped silently. Anything bigger is reported as an inconsistency.
pub const CLAMP_SLACK: f64 = 1e-9;

/// Clamps `x` into `[lo, hi]`, tolerating overshoot up to [`CLAMP_SLACK`].
fn clamp_checked(x: f64, lo: f64, hi: f64, context: &'static str) -> Result<f64> {
    if x > hi + CLAMP_SLACK || x < lo - CLAMP_SLACK {
        let magnitude = if x > hi { x - hi } else { lo - x };
        return Err(QslError::NumericalInconsistency {
            context,
            magnitude,
            limit: CLAMP_SLACK,
        });
    }
    Ok(x.clamp(lo, hi))
}

fn check_same_dim(p1: &Projector, p2: &Projector) -> Result<()> {
    if p1.dim() != p2.dim() {
        return Err(QslError::DimensionMismatch {
            left: p1.dim(),
            right: p2.dim(),
        });
    }
    Ok(())
}

fn check_nonzero(p: &Projector) -> Result<()> {
    let trace = p.entries().trace().re;
    if trace < 0.5 {
        return Err(QslError::ZeroSubspace { trace });
    }
    Ok(())
}

/// `||P1 - P2||`, clamped into `[0, 1]`.
///
/// For projectors the operator norm of the difference never exceeds 1; any
/// rounding excess up to [`CLAMP_SLACK`] is absorbed, larger excess is an
/// error.
pub fn projector_distance(p1: &Projector, p2: &Projector) -> Result<f64> {
    check_same_dim(p1, p2)?;
    let norm = operator_norm(&(p1.entries() - p2.entries()))?;
    clamp_checked(norm, 0.0, 1.0, "projector distance")
}

/// Sine magnitude above which angles are recovered from the cosine instead.
///
/// The arcsine of a computed sine loses half its digits near a right angle
/// (the derivative of `asin` blows up at 1), while the arccosine of the
/// smallest overlap singular value is perfectly conditioned there, and vice
/// versa near zero. Switching at `1/sqrt(2)` keeps the derivative of the
/// active branch at most `sqrt(2)`, so angles are accurate to a few ulps
/// over the whole range.
const SINE_ROUTE_LIMIT: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Directed angle from `ran P1` to `ran P2` through whichever of its sine
/// or cosine is well-conditioned at that angle.
///
/// The sine is `||(I - P2) P1||`; the cosine is the smallest singular value
/// of the frame overlap `F2* F1`, which is zero outright when the first
/// subspace is too large to embed in the second. Callers guarantee `P1` is
/// nonzero.
fn directed_angle(p1: &Projector, p2: &Projector) -> Result<f64> {
    let m = p2.complement();
    let norm = operator_norm(&(m.entries() * p1.entries()))?;
    let s = clamp_checked(norm, 0.0, 1.0, "directed angle sine")?;
    if s < SINE_ROUTE_LIMIT {
        return Ok(s.asin());
    }
    let c = if p1.rank() > p2.rank() {
        0.0
    } else {
        let overlap = p2.range_frame()?.columns().adjoint() * p1.range_frame()?.columns();
        let svd = overlap
            .clone()
            .try_svd(false, false, f64::EPSILON, 100_000)
            .ok_or(QslError::SvdFailure {
                rows: overlap.nrows(),
                cols: overlap.ncols(),
            })?;
        let smallest = svd
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        clamp_checked(smallest, 0.0, 1.0, "directed angle cosine")?
    };
    Ok(c.acos())
}

/// The maximal angle `arcsin ||P1 - P2||`, a metric on subspaces of any
/// dimensions (the zero subspace included). Range `[0, pi/2]`.
///
/// Equal to the larger of the two directed angles, which is how it is
/// computed: each directed angle takes a numerically stable route, so
/// values near `pi/2` carry absolute error of a few ulps instead of the
/// square-root-of-epsilon noise `asin` would inject there.
pub fn maximal_angle(p1: &Projector, p2: &Projector) -> Result<f64> {
    check_same_dim(p1, p2)?;
    match (p1.rank() == 0, p2.rank() == 0) {
        (true, true) => Ok(0.0),
        (true, false) | (false, true) => Ok(std::f64::consts::FRAC_PI_2),
        (false, false) => Ok(directed_angle(p1, p2)?.max(directed_angle(p2, p1)?)),
    }
}

/// The relative maximal angle from `ran P1` to `ran P2`: the arcsine of
/// `||(I - P2) P1||`, the largest distance of a unit vector of the first
/// subspace from the second. Requires the first subspace to be nonzero.
pub fn relative_maximal_angle(p1: &Projector, p2: &Projector) -> Result<f64> {
    check_same_dim(p1, p2)?;
    check_nonzero(p1)?;
    directed_angle(p1, p2)
}

/// Both relative maximal angles together with the symmetric maximal angle.
///
/// `theta` always equals the larger of the two directed angles; the two
/// directed angles agree with each other (and with `theta`) whenever
/// `||P1 - P2|| < 1`, in particular whenever the subspaces have equal
/// dimension and are not orthogonal in any direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnglePair {
    /// Directed angle from the first subspace to the second.
    pub phi_12: f64,
    /// Directed angle from the second subspace to the first.
    pub phi_21: f64,
    /// Symmetric maximal angle `arcsin ||P1 - P2||`.
    pub theta: f64,
}

/// Computes both directed angles and the maximal angle, cross-checking the
/// sine of the result against the independently computed norm distance.
///
/// Requires both subspaces to be nonzero.
pub fn angle_pair(p1: &Projector, p2: &Projector) -> Result<AnglePair> {
    check_same_dim(p1, p2)?;
    check_nonzero(p1)?;
    check_nonzero(p2)?;
    let phi_12 = relative_maximal_angle(p1, p2)?;
    let phi_21 = relative_maximal_angle(p2, p1)?;
    let theta = phi_12.max(phi_21);
    // The angles come from complement products and overlap singular values;
    // the distance comes from the difference of the projectors. Their
    // disagreement measures accumulated rounding across both routes.
    let defect = (theta.sin() - projector_distance(p1, p2)?).abs();
    if defect > 1e-10 {
        return Err(QslError::NumericalInconsistency {
            context: "directed angles vs projector distance",
            magnitude: defect,
            limit: 1e-10,
        });
    }
    Ok(AnglePair {
        phi_12,
        phi_21,
        theta,
    })
}

/// Principal angles between the spans of two frames, ascending, one angle
/// per dimension of the smaller subspace.
///
/// These are the arccosines of the singular values of `F1* F2`.
pub fn principal_angles(f1: &Frame, f2: &Frame) -> Result<Vec<f64>> {
    if f1.ambient_dim() != f2.ambient_dim() {
        return Err(QslError::DimensionMismatch {
            left: f1.ambient_dim(),
            right: f2.ambient_dim(),
        });
    }
    let overlap = f1.columns().adjoint() * f2.columns();
    let svd = overlap
        .clone()
        .try_svd(false, false, f64::EPSILON, 100_000)
        .ok_or(QslError::SvdFailure {
            rows: overlap.nrows(),
            cols: overlap.ncols(),
        })?;
    let mut sigmas: Vec<f64> = svd.singular_values.iter().cloned().collect();
    // Descending singular values give ascending angles.
    sigmas.sort_by(|a, b| b.total_cmp(a));
    sigmas
        .into_iter()
        .map(|s| Ok(clamp_checked(s, 0.0, 1.0, "principal angle cosine")?.acos()))
        .collect()
}

/// The minimum over unit vectors `x` in `ran P1` of the transition
/// probability `||P2 x||^2`, equal to `cos^2` of the directed maximal angle
/// from the first subspace to the second.
///
/// Requires both subspaces to be nonzero.
pub fn min_transition_probability(p1: &Projector, p2: &Projector) -> Result<f64> {
    check_nonzero(p2)?;
    let phi = relative_maximal_angle(p1, p2)?;
    let c = phi.cos();
    Ok(c * c)
}

/// The angle `arccos |<psi1, psi2>|` between the rays of two unit states:
/// the rank-one case of the maximal angle. Range `[0, pi/2]`.
///
/// For nearly parallel states the arccosine of the computed overlap loses
/// half the working precision, so small angles are instead read from the
/// norm of the component of `psi2` orthogonal to `psi1`, which is accurate
/// to a few ulps absolutely.
pub fn state_angle(psi1: &StateVector, psi2: &StateVector) -> Result<f64> {
    if psi1.dim() != psi2.dim() {
        return Err(QslError::DimensionMismatch {
            left: psi1.dim(),
            right: psi2.dim(),
        });
    }
    let overlap = psi1.inner(psi2);
    let c = clamp_checked(overlap.norm(), 0.0, 1.0, "state overlap")?;
    if c < SINE_ROUTE_LIMIT {
        return Ok(c.acos());
    }
    let residual = psi2.entries() - psi1.entries() * overlap;
    let s = clamp_checked(residual.norm(), 0.0, 1.0, "state angle sine")?;
    Ok(s.asin())
}
