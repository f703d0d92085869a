//! Validated operators, frames, projectors, and propagators.
//!
//! Everything downstream (angles, trajectories, bounds) assumes its inputs
//! are exactly what they claim to be: Hermitian matrices, orthonormal frames,
//! genuine orthogonal projectors, unit states. The constructors here are the
//! only way to build those types, and each one measures its defect in the
//! operator norm and rejects inputs outside a documented tolerance.

use nalgebra::DVector;

use crate::error::{QslError, Result};
use crate::rng::SplitMix64;
use crate::{CMatrix, CVector, C64};

/// Eigendecomposition residual allowance per matrix dimension, relative to
/// the operator norm.
pub const SPECTRAL_TOL_PER_DIM: f64 = 1e-12;
/// Orthonormality defect allowed in a frame, `||F* F - I||`.
pub const FRAME_TOL: f64 = 1e-10;
/// Hermiticity, idempotency, and trace defect allowed in a projector.
pub const PROJECTOR_TOL: f64 = 1e-10;
/// Normalization defect allowed in a state vector.
pub const STATE_TOL: f64 = 1e-12;
/// Default hermiticity tolerance, relative to `max(1, ||M||)`.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Default threshold under which a column is declared linearly dependent.
pub const RANK_TOL: f64 = 1e-8;

/// Largest singular value of an arbitrary complex matrix.
pub fn operator_norm(m: &CMatrix) -> Result<f64> {
    let svd = m
        .clone()
        .try_svd(false, false, f64::EPSILON, 100_000)
        .ok_or(QslError::SvdFailure {
            rows: m.nrows(),
            cols: m.ncols(),
        })?;
    Ok(svd.singular_values.iter().cloned().fold(0.0, f64::max))
}

/// `A B - B A` for square matrices of equal dimension.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(QslError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if !b.is_square() {
        return Err(QslError::NotSquare {
            rows: b.nrows(),
            cols: b.ncols(),
        });
    }
    if a.nrows() != b.nrows() {
        return Err(QslError::DimensionMismatch {
            left: a.nrows(),
            right: b.nrows(),
        });
    }
    Ok(a * b - b * a)
}

/// A square matrix certified Hermitian within a stated tolerance.
///
/// Construction measures `||M - M*||` in the operator norm against
/// `tol * max(1, ||M||)` and stores the exactly Hermitian part
/// `(M + M*) / 2`, so every consumer sees a matrix that equals its own
/// adjoint to the last bit of the representation.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    entries: CMatrix,
    hermiticity_tol: f64,
}

/// Checks Hermiticity of `m` and wraps its Hermitian part.
pub fn validate_hermitian(m: &CMatrix, tol: f64) -> Result<HermitianOperator> {
    if !m.is_square() {
        return Err(QslError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let asymmetry = operator_norm(&(m - m.adjoint()))?;
    let scale = operator_norm(m)?.max(1.0);
    if asymmetry > tol * scale {
        return Err(QslError::NotHermitian {
            asymmetry,
            tol: tol * scale,
        });
    }
    let sym = (m + m.adjoint()).map(|z| z * 0.5);
    Ok(HermitianOperator {
        entries: sym,
        hermiticity_tol: tol,
    })
}

impl HermitianOperator {
    /// Validating constructor; see [`validate_hermitian`].
    pub fn new(m: CMatrix, tol: f64) -> Result<Self> {
        validate_hermitian(&m, tol)
    }

    /// Diagonal operator with the given real entries.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let d = CMatrix::from_diagonal(&DVector::from_iterator(
            diag.len(),
            diag.iter().map(|&x| C64::new(x, 0.0)),
        ));
        HermitianOperator {
            entries: d,
            hermiticity_tol: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn hermiticity_tol(&self) -> f64 {
        self.hermiticity_tol
    }

    /// Operator norm `||H||`.
    pub fn norm(&self) -> Result<f64> {
        operator_norm(&self.entries)
    }

    /// Convenience alias for [`spectral_decomposition`].
    pub fn spectral(&self) -> Result<SpectralDecomposition> {
        spectral_decomposition(self)
    }
}

/// Eigenvalues and an orthonormal eigenbasis of a Hermitian operator.
///
/// Eigenvalues are sorted ascending and the columns of `eigenvectors` are
/// permuted to match. Construction verifies both the reconstruction residual
/// `||V diag(E) V* - H||` and the basis defect `||V* V - I||` against
/// `1e-12 * dim` (the former scaled by `||H||`), rejecting a decomposition
/// the solver failed to nail down.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: DVector<f64>,
    eigenvectors: CMatrix,
}

/// Full eigendecomposition of `h`, validated and sorted.
pub fn spectral_decomposition(h: &HermitianOperator) -> Result<SpectralDecomposition> {
    let n = h.dim();
    let eig = nalgebra::linalg::SymmetricEigen::try_new(h.entries.clone(), f64::EPSILON, 100_000)
        .ok_or(QslError::EigensolverFailure { dim: n })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }

    let tol = SPECTRAL_TOL_PER_DIM * n as f64;
    let basis_defect =
        operator_norm(&(eigenvectors.adjoint() * &eigenvectors - CMatrix::identity(n, n)))?;
    if basis_defect > tol {
        return Err(QslError::EigensolverFailure { dim: n });
    }
    let lambda = CMatrix::from_diagonal(&eigenvalues.map(|x| C64::new(x, 0.0)));
    let residual = operator_norm(&(&eigenvectors * lambda * eigenvectors.adjoint() - &h.entries))?;
    let h_norm = eigenvalues.iter().fold(0.0f64, |acc, &e| acc.max(e.abs()));
    if residual > tol * h_norm.max(1e-300) && residual > tol {
        return Err(QslError::EigensolverFailure { dim: n });
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors, column `i` belonging to eigenvalue `i`.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn e_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn e_max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Spectral width `e_max - e_min`.
    pub fn width(&self) -> f64 {
        self.e_max() - self.e_min()
    }

    /// The unitary `exp(-i H t)` assembled as `V exp(-i E t) V*`.
    ///
    /// Each phase is produced with unit modulus, so the result is unitary to
    /// rounding regardless of `t`.
    pub fn propagator(&self, t: f64) -> CMatrix {
        let phases = self.phase_diagonal(t);
        let scaled = scale_columns(&self.eigenvectors, &phases);
        scaled * self.eigenvectors.adjoint()
    }

    /// Applies `exp(-i H t)` to the columns of `x` without forming the
    /// propagator matrix.
    pub fn apply_propagator(&self, t: f64, x: &CMatrix) -> CMatrix {
        let w = self.eigenvectors.adjoint() * x;
        let phases = self.phase_diagonal(t);
        let scaled = scale_rows(&w, &phases);
        &self.eigenvectors * scaled
    }

    fn phase_diagonal(&self, t: f64) -> Vec<C64> {
        self.eigenvalues
            .iter()
            .map(|&e| C64::from_polar(1.0, -e * t))
            .collect()
    }
}

fn scale_columns(m: &CMatrix, factors: &[C64]) -> CMatrix {
    let mut out = m.clone();
    for (j, &f) in factors.iter().enumerate() {
        for v in out.column_mut(j).iter_mut() {
            *v *= f;
        }
    }
    out
}

fn scale_rows(m: &CMatrix, factors: &[C64]) -> CMatrix {
    let mut out = m.clone();
    for (i, &f) in factors.iter().enumerate() {
        for v in out.row_mut(i).iter_mut() {
            *v *= f;
        }
    }
    out
}

/// The unitary `exp(-i H t)`, computed through the spectral decomposition.
pub fn propagator(h: &HermitianOperator, t: f64) -> Result<CMatrix> {
    Ok(spectral_decomposition(h)?.propagator(t))
}

/// An `n x k` matrix with orthonormal columns spanning a `k`-dimensional
/// subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    columns: CMatrix,
}

impl Frame {
    /// Accepts `columns` when `||F* F - I|| <= FRAME_TOL`.
    pub fn try_new(columns: CMatrix) -> Result<Self> {
        let k = columns.ncols();
        if columns.nrows() < k || k == 0 {
            return Err(QslError::DimensionMismatch {
                left: columns.nrows(),
                right: k,
            });
        }
        let defect = operator_norm(&(columns.adjoint() * &columns - CMatrix::identity(k, k)))?;
        if defect > FRAME_TOL {
            return Err(QslError::NotOrthonormal {
                defect,
                tol: FRAME_TOL,
            });
        }
        Ok(Frame { columns })
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn rank(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &CMatrix {
        &self.columns
    }

    pub fn column(&self, i: usize) -> CVector {
        self.columns.column(i).into_owned()
    }

    /// The orthogonal projector `F F*` onto the span of the columns.
    pub fn projector(&self) -> Projector {
        projector_from_frame(self)
    }
}

/// Orthonormalizes the columns of `vectors` by modified Gram-Schmidt with a
/// second correction pass per column.
///
/// A column whose residual after projection falls below `rank_tol` times its
/// original norm is declared linearly dependent on its predecessors.
/// Already orthonormal input is returned unchanged up to rounding.
pub fn orthonormalize(vectors: &CMatrix, rank_tol: f64) -> Result<Frame> {
    let (n, k) = (vectors.nrows(), vectors.ncols());
    if n < k || k == 0 {
        return Err(QslError::DimensionMismatch { left: n, right: k });
    }
    let mut q = CMatrix::zeros(n, k);
    for j in 0..k {
        let original = vectors.column(j).into_owned();
        let mut v = original.clone();
        // Two projection passes keep orthogonality at working precision even
        // for nearly dependent inputs.
        for _ in 0..2 {
            for i in 0..j {
                let qi = q.column(i);
                let overlap = qi.dotc(&v);
                v -= qi.into_owned() * overlap;
            }
        }
        let residual = v.norm();
        let threshold = rank_tol * original.norm();
        if residual <= threshold || residual == 0.0 {
            return Err(QslError::RankDeficient {
                column: j,
                residual,
                threshold,
            });
        }
        v /= C64::new(residual, 0.0);
        q.set_column(j, &v);
    }
    Frame::try_new(q)
}

/// An orthogonal projector: Hermitian, idempotent, integer trace.
///
/// The zero projector (rank 0) is admitted; angle functions that require a
/// nonzero subspace check for it explicitly.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    entries: CMatrix,
}

impl Projector {
    /// Accepts `m` when `||M - M*||`, `||M^2 - M||`, and the distance of
    /// `tr M` from the nearest integer all fall within `tol` (trace scaled
    /// by dimension).
    pub fn try_new(m: CMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(QslError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let n = m.nrows();
        let herm_defect = operator_norm(&(&m - m.adjoint()))?;
        if herm_defect > tol {
            return Err(QslError::NotHermitian {
                asymmetry: herm_defect,
                tol,
            });
        }
        let idem_defect = operator_norm(&(&m * &m - &m))?;
        if idem_defect > tol {
            return Err(QslError::NotIdempotent {
                defect: idem_defect,
                tol,
            });
        }
        let trace = m.trace();
        let trace_tol = tol * n as f64;
        if (trace.re - trace.re.round()).abs() > trace_tol || trace.im.abs() > trace_tol {
            return Err(QslError::NonIntegerTrace {
                trace: trace.re,
                tol: trace_tol,
            });
        }
        Ok(Projector { entries: m })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Rank read off the trace.
    pub fn rank(&self) -> usize {
        self.entries.trace().re.round() as usize
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// `I - P`, the projector onto the orthogonal complement.
    pub fn complement(&self) -> Projector {
        complement_projector(self)
    }

    /// An orthonormal basis of the range, recovered from the eigenvectors
    /// with eigenvalue near 1.
    pub fn range_frame(&self) -> Result<Frame> {
        let h = HermitianOperator {
            entries: self.entries.clone(),
            hermiticity_tol: 0.0,
        };
        let spec = spectral_decomposition(&h)?;
        let k = self.rank();
        if k == 0 {
            return Err(QslError::ZeroSubspace {
                trace: self.entries.trace().re,
            });
        }
        let n = self.dim();
        let mut cols = CMatrix::zeros(n, k);
        let mut found = 0;
        for i in 0..n {
            if spec.eigenvalues()[i] > 0.5 {
                if found == k {
                    return Err(QslError::NonIntegerTrace {
                        trace: self.entries.trace().re,
                        tol: PROJECTOR_TOL * n as f64,
                    });
                }
                cols.set_column(found, &spec.eigenvectors().column(i));
                found += 1;
            }
        }
        if found != k {
            return Err(QslError::NonIntegerTrace {
                trace: self.entries.trace().re,
                tol: PROJECTOR_TOL * n as f64,
            });
        }
        Frame::try_new(cols)
    }
}

/// `F F*` for an orthonormal frame; the invariants hold by construction.
pub fn projector_from_frame(f: &Frame) -> Projector {
    let p = f.columns() * f.columns().adjoint();
    // P equals its own adjoint exactly: entry (i,j) and entry (j,i) are
    // elementwise conjugate sums of identical products.
    Projector { entries: p }
}

/// `I - P`.
pub fn complement_projector(p: &Projector) -> Projector {
    let n = p.dim();
    Projector {
        entries: CMatrix::identity(n, n) - &p.entries,
    }
}

/// A unit vector in the ambient space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    entries: CVector,
}

impl StateVector {
    /// Accepts `v` when its norm is 1 within `STATE_TOL`.
    pub fn try_new(v: CVector) -> Result<Self> {
        Self::with_tol(v, STATE_TOL)
    }

    /// Accepts `v` when its norm is 1 within `tol`.
    pub fn with_tol(v: CVector, tol: f64) -> Result<Self> {
        let norm = v.norm();
        if (norm - 1.0).abs() > tol {
            return Err(QslError::NotUnit { norm, tol });
        }
        Ok(StateVector { entries: v })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &CVector {
        &self.entries
    }

    /// `<self, other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.entries.dotc(&other.entries)
    }

    /// The rank-1 frame holding this state as its single column.
    pub fn as_frame(&self) -> Frame {
        Frame {
            columns: CMatrix::from_columns(std::slice::from_ref(&self.entries)),
        }
    }
}

/// Matrix with independent standard complex Gaussian entries, filled row by
/// row, each entry consuming one Box-Muller pair.
pub(crate) fn gaussian_matrix(n: usize, k: usize, rng: &mut SplitMix64) -> CMatrix {
    let mut m = CMatrix::zeros(n, k);
    for i in 0..n {
        for j in 0..k {
            m[(i, j)] = rng.next_complex_gaussian();
        }
    }
    m
}

/// Draws `(G + G*) / 2` for a square standard complex Gaussian matrix `G`.
///
/// Deterministic in `seed`: the same seed yields the same operator on every
/// platform (see [`crate::rng`] for the pinned generator).
pub fn random_hermitian(n: usize, seed: u64) -> HermitianOperator {
    let mut rng = SplitMix64::new(seed);
    let g = gaussian_matrix(n, n, &mut rng);
    let sym = (&g + g.adjoint()).map(|z| z * 0.5);
    HermitianOperator {
        entries: sym,
        hermiticity_tol: 0.0,
    }
}

/// Orthonormalizes a random Gaussian `n x k` matrix into a frame.
///
/// Deterministic in `seed`. If a draw comes out rank-deficient (probability
/// zero in exact arithmetic, vanishingly small in floating point), up to
/// three retries run with sub-seeds `seed ^ (attempt * 0x9E3779B97F4A7C15)`.
pub fn random_frame(n: usize, k: usize, seed: u64) -> Result<Frame> {
    let mut last_err = None;
    for attempt in 0u64..4 {
        let sub_seed = seed ^ attempt.wrapping_mul(0x9E3779B97F4A7C15);
        let mut rng = SplitMix64::new(sub_seed);
        let g = gaussian_matrix(n, k, &mut rng);
        match orthonormalize(&g, RANK_TOL) {
            Ok(f) => return Ok(f),
            Err(e @ QslError::RankDeficient { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt ran"))
}

/// A random unit vector: first column of a rank-1 random frame.
pub fn random_state(n: usize, seed: u64) -> Result<StateVector> {
    let f = random_frame(n, 1, seed)?;
    StateVector::try_new(f.column(0))
}

#[cfg(test)]
mod tests {
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use nalgebra::Complex;

    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        Complex::new(re, im)
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    #[test]
    fn real_symmetric_accepted_unchanged() {
        let h = validate_hermitian(&pauli_x(), HERMITICITY_TOL).unwrap();
        assert_eq!(h.entries(), &pauli_x());
    }

    #[test]
    fn anti_hermitian_off_diagonal_rejected() {
        let m =
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        match validate_hermitian(&m, HERMITICITY_TOL) {
            Err(QslError::NotHermitian { asymmetry, .. }) => {
                assert_relative_eq!(asymmetry, 2.0, max_relative = 1e-12);
            }
            other => panic!("expected NotHermitian, got {other:?}"),
        }
    }

    #[test]
    fn round_off_asymmetry_is_symmetrized() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(1e-14, 0.0), c(0.0, 0.0), c(2.0, 0.0)],
        );
        let h = validate_hermitian(&m, HERMITICITY_TOL).unwrap();
        assert_eq!(h.entries()[(0, 1)], c(0.5e-14, 0.0));
        assert_eq!(h.entries()[(1, 0)], c(0.5e-14, 0.0));
        let defect = operator_norm(&(h.entries() - h.entries().adjoint())).unwrap();
        assert!(defect == 0.0);
    }

    #[test]
    fn rejects_non_square_input() {
        let m = CMatrix::zeros(2, 3);
        assert!(matches!(
            validate_hermitian(&m, HERMITICITY_TOL),
            Err(QslError::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn diagonal_eigenvalues_come_back_sorted() {
        let h = HermitianOperator::from_diagonal(&[2.0, -1.0, 0.0]);
        let spec = spectral_decomposition(&h).unwrap();
        let eigs: Vec<f64> = spec.eigenvalues().iter().cloned().collect();
        assert_abs_diff_eq!(eigs[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eigs[1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eigs[2], 2.0, epsilon = 1e-14);
        assert_eq!(spec.e_min(), eigs[0]);
        assert_eq!(spec.e_max(), eigs[2]);
    }

    #[test]
    fn exchange_matrix_eigenvalues() {
        let h = HermitianOperator::new(pauli_x(), HERMITICITY_TOL).unwrap();
        let spec = spectral_decomposition(&h).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues()[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(spec.eigenvalues()[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(spec.width(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn eigendecomposition_reconstructs_random_matrix() {
        let h = random_hermitian(6, 7);
        let spec = spectral_decomposition(&h).unwrap();
        let lambda = CMatrix::from_fn(6, 6, |i, j| {
            if i == j {
                c(spec.eigenvalues()[i], 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let rebuilt = spec.eigenvectors() * lambda * spec.eigenvectors().adjoint();
        let residual = operator_norm(&(rebuilt - h.entries())).unwrap();
        assert!(
            residual <= 1e-12 * h.norm().unwrap().max(1.0),
            "residual {residual}"
        );
    }

    #[test]
    fn propagator_at_zero_is_identity() {
        let h = random_hermitian(5, 3);
        let u = propagator(&h, 0.0).unwrap();
        let defect = operator_norm(&(u - CMatrix::identity(5, 5))).unwrap();
        assert!(defect <= 1e-13);
    }

    #[test]
    fn diagonal_propagator_is_phases() {
        let h = HermitianOperator::from_diagonal(&[0.3, -1.2]);
        let t = 0.77;
        let u = propagator(&h, t).unwrap();
        let expected = CMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                let e = if i == 0 { 0.3 } else { -1.2 };
                c(0.0, -e * t).exp()
            } else {
                c(0.0, 0.0)
            }
        });
        assert!(operator_norm(&(u - expected)).unwrap() <= 1e-14);
    }

    #[test]
    fn exchange_propagator_quarter_period() {
        // U(t) = cos(t) I - i sin(t) X, so U(pi/2) = -i X.
        let h = HermitianOperator::new(pauli_x(), HERMITICITY_TOL).unwrap();
        let u = propagator(&h, std::f64::consts::FRAC_PI_2).unwrap();
        let expected = pauli_x().map(|z| z * c(0.0, -1.0));
        assert!(operator_norm(&(u - expected)).unwrap() <= 1e-12);
    }

    #[test]
    fn propagator_group_law_and_unitarity() {
        let h = random_hermitian(6, 21);
        let spec = spectral_decomposition(&h).unwrap();
        let (t, s) = (1.3, -2.6);
        let u_t = spec.propagator(t);
        let u_s = spec.propagator(s);
        let u_ts = spec.propagator(t + s);
        let group = operator_norm(&(&u_t * &u_s - u_ts)).unwrap();
        let budget = 1e-10 * (1.0 + h.norm().unwrap() * (t.abs() + s.abs()));
        assert!(group <= budget, "group law defect {group} over {budget}");
        let unit = operator_norm(&(u_t.adjoint() * &u_t - CMatrix::identity(6, 6))).unwrap();
        assert!(unit <= 1e-10, "unitarity defect {unit}");
    }

    #[test]
    fn apply_propagator_matches_materialized_unitary() {
        let h = random_hermitian(5, 33);
        let spec = spectral_decomposition(&h).unwrap();
        let f = random_frame(5, 2, 34).unwrap();
        let direct = spec.propagator(0.9) * f.columns();
        let applied = spec.apply_propagator(0.9, f.columns());
        assert!(operator_norm(&(direct - applied)).unwrap() <= 1e-13);
    }

    #[test]
    fn norm_of_zero_matrix() {
        assert_eq!(operator_norm(&CMatrix::zeros(3, 4)).unwrap(), 0.0);
    }

    #[test]
    fn norm_of_outer_product_of_unit_vectors() {
        let u = random_state(4, 5).unwrap();
        let v = random_state(4, 6).unwrap();
        let m = CMatrix::from_fn(4, 4, |i, j| u.entries()[i] * v.entries()[j].conj());
        assert_relative_eq!(operator_norm(&m).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn norm_squares_to_gram_top_eigenvalue() {
        let mut rng = SplitMix64::new(3);
        let m = gaussian_matrix(5, 3, &mut rng);
        let gram = HermitianOperator::new(m.adjoint() * &m, 1e-9).unwrap();
        let top = spectral_decomposition(&gram).unwrap().e_max();
        assert_relative_eq!(operator_norm(&m).unwrap(), top.sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn identity_commutes_with_everything() {
        let b = random_hermitian(4, 8);
        let comm = commutator(&CMatrix::identity(4, 4), b.entries()).unwrap();
        assert_eq!(operator_norm(&comm).unwrap(), 0.0);
    }

    #[test]
    fn commutator_direct_arithmetic() {
        let a =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        let expected =
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(commutator(&a, &pauli_x()).unwrap(), expected);
    }

    #[test]
    fn two_level_commutator_in_superposition_basis() {
        // H = diag(e1, e2) rewritten in the basis of the equal superposition
        // and its orthogonal partner; the projector onto the superposition
        // is then diag(1, 0) and the commutator is purely off-diagonal with
        // norm |e1 - e2| / 2.
        let (e1, e2) = (0.0, 1.0);
        let mean = 0.5 * (e1 + e2);
        let half_gap = 0.5 * (e1 - e2);
        let h_rot = CMatrix::from_row_slice(
            2,
            2,
            &[
                c(mean, 0.0),
                c(half_gap, 0.0),
                c(half_gap, 0.0),
                c(mean, 0.0),
            ],
        );
        let p =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let comm = commutator(&p, &h_rot).unwrap();
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[
                c(0.0, 0.0),
                c(half_gap, 0.0),
                c(-half_gap, 0.0),
                c(0.0, 0.0),
            ],
        );
        assert_eq!(comm, expected);
        assert_relative_eq!(
            operator_norm(&comm).unwrap(),
            0.5 * (e1 - e2).abs(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn orthonormal_columns_pass_through() {
        let f0 = CMatrix::from_row_slice(
            3,
            2,
            &[
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
            ],
        );
        let f = orthonormalize(&f0, RANK_TOL).unwrap();
        assert!(operator_norm(&(f.columns() - &f0)).unwrap() <= 1e-15);
    }

    #[test]
    fn proportional_columns_are_rank_deficient() {
        let cols =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        assert!(matches!(
            orthonormalize(&cols, RANK_TOL),
            Err(QslError::RankDeficient { column: 1, .. })
        ));
    }

    #[test]
    fn oblique_pair_spans_the_plane() {
        let cols =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let f = orthonormalize(&cols, RANK_TOL).unwrap();
        let gram = f.columns().adjoint() * f.columns();
        assert!(operator_norm(&(gram - CMatrix::identity(2, 2))).unwrap() <= 1e-12);
        // Spanning all of C^2 means the induced projector is the identity.
        let p = projector_from_frame(&f);
        assert!(operator_norm(&(p.entries() - CMatrix::identity(2, 2))).unwrap() <= 1e-12);
    }

    #[test]
    fn standard_basis_frame_projector_is_diagonal() {
        let cols = CMatrix::from_fn(4, 2, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let p = projector_from_frame(&Frame::try_new(cols).unwrap());
        let expected = CMatrix::from_fn(4, 4, |i, j| {
            if i == j && i < 2 {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        assert_eq!(p.entries(), &expected);
        assert_eq!(p.rank(), 2);
    }

    #[test]
    fn equal_superposition_projector_entries() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let cols = CMatrix::from_row_slice(2, 1, &[c(s, 0.0), c(s, 0.0)]);
        let p = projector_from_frame(&Frame::try_new(cols).unwrap());
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(p.entries()[(i, j)].re, 0.5, max_relative = 1e-15);
                assert_eq!(p.entries()[(i, j)].im, 0.0);
            }
        }
    }

    #[test]
    fn random_frame_projector_invariants() {
        let f = random_frame(6, 3, 11).unwrap();
        let p = projector_from_frame(&f);
        let m = p.entries();
        let idem = operator_norm(&(m * m - m)).unwrap();
        assert!(idem <= 1e-12, "idempotency defect {idem}");
        let trace: C64 = m.trace();
        assert_abs_diff_eq!(trace.re, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(trace.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn complement_swaps_zero_and_identity() {
        let zero = Projector::try_new(CMatrix::zeros(3, 3), PROJECTOR_TOL).unwrap();
        assert_eq!(zero.rank(), 0);
        let full = zero.complement();
        assert_eq!(full.rank(), 3);
        assert_eq!(full.entries(), &CMatrix::identity(3, 3));
        assert_eq!(complement_projector(&full).entries(), &CMatrix::zeros(3, 3));
    }

    #[test]
    fn complement_of_superposition_span() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = Frame::try_new(CMatrix::from_row_slice(2, 1, &[c(s, 0.0), c(s, 0.0)])).unwrap();
        let minus = CVector::from_vec(vec![c(s, 0.0), c(-s, 0.0)]);
        let q = projector_from_frame(&plus).complement();
        let back = q.entries() * &minus;
        assert!((back - &minus).norm() <= 1e-14);
    }

    #[test]
    fn projector_validation_rejects_non_idempotent() {
        let half = CMatrix::from_fn(2, 2, |i, j| if i == j { c(0.5, 0.0) } else { c(0.0, 0.0) });
        assert!(matches!(
            Projector::try_new(half, PROJECTOR_TOL),
            Err(QslError::NotIdempotent { .. })
        ));
    }

    #[test]
    fn state_vector_rejects_non_unit() {
        let v = CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(
            StateVector::try_new(v),
            Err(QslError::NotUnit { .. })
        ));
    }

    #[test]
    fn random_hermitian_is_deterministic_per_seed() {
        let a = random_hermitian(4, 42);
        let b = random_hermitian(4, 42);
        assert_eq!(a.entries(), b.entries());
        let other = random_hermitian(4, 43);
        assert_ne!(a.entries(), other.entries());
    }

    #[test]
    fn random_hermitian_1x1_is_real() {
        let h = random_hermitian(1, 9);
        assert_eq!(h.entries()[(0, 0)].im, 0.0);
    }

    #[test]
    fn square_random_frame_is_unitary() {
        let f = random_frame(4, 4, 2).unwrap();
        let m = f.columns();
        assert!(operator_norm(&(m.adjoint() * m - CMatrix::identity(4, 4))).unwrap() <= 1e-12);
        assert!(operator_norm(&(m * m.adjoint() - CMatrix::identity(4, 4))).unwrap() <= 1e-12);
    }

    #[test]
    fn single_column_frame_is_unit_vector() {
        let f = random_frame(5, 1, 1).unwrap();
        assert_relative_eq!(f.column(0).norm(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn random_frame_orthonormality_defect() {
        let f = random_frame(5, 2, 9).unwrap();
        let gram = f.columns().adjoint() * f.columns();
        assert!(operator_norm(&(gram - CMatrix::identity(2, 2))).unwrap() <= 1e-12);
    }

    #[test]
    fn range_frame_rebuilds_projector() {
        let p = projector_from_frame(&random_frame(6, 2, 17).unwrap());
        let f = p.range_frame().unwrap();
        assert_eq!(f.rank(), 2);
        let rebuilt = projector_from_frame(&f);
        assert!(operator_norm(&(rebuilt.entries() - p.entries())).unwrap() <= 1e-12);
    }
}
