//! Independent oracles for the integration suites.
//!
//! Nothing here calls the library's eigensolver, SVD, or optimizer: the
//! eigenvalue route is a from-scratch cyclic Jacobi iteration on a plain
//! row-major buffer, and the extremal quantities are brute-forced by
//! sampling. Agreement between these and the production paths is the
//! anti-regression evidence the rest of the tests lean on.

#![allow(dead_code)]

use subspace_qsl::operators::Frame;
use subspace_qsl::rng::SplitMix64;
use subspace_qsl::{CMatrix, CVector, C64};

/// Eigenvalues (ascending) of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
///
/// Each rotation annihilates one off-diagonal entry: the 2x2 subproblem is
/// reduced to a real symmetric one by factoring out the phase of the entry,
/// then rotated by the classical angle choice. Sweeps repeat until the
/// off-diagonal Frobenius mass falls below `tol` relative to the whole.
pub fn jacobi_eigenvalues(m: &CMatrix, tol: f64) -> Vec<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "square input required");
    let mut a: Vec<C64> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            a.push(m[(i, j)]);
        }
    }
    let idx = |i: usize, j: usize| i * n + j;
    let off = |a: &[C64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[idx(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    for _sweep in 0..100 {
        if off(&a) <= tol * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let app = a[idx(p, p)].re;
                let aqq = a[idx(q, q)].re;
                let phase = apq / C64::new(r, 0.0);
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // Plane unitary on coordinates (p, q); the second column
                // carries the conjugate phase so the rotated entry is real.
                let upp = C64::new(c, 0.0);
                let upq = C64::new(s, 0.0);
                let uqp = -phase.conj() * s;
                let uqq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = akp * upp + akq * uqp;
                    a[idx(k, q)] = akp * upq + akq * uqq;
                }
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
                    a[idx(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[idx(i, i)].re).collect();
    eigs.sort_by(f64::total_cmp);
    eigs
}

/// A random unit vector in `C^n` from the documented generator.
pub fn sampled_unit_vector(n: usize, rng: &mut SplitMix64) -> CVector {
    loop {
        let v = CVector::from_fn(n, |_, _| rng.next_complex_gaussian());
        let norm = v.norm();
        if norm > 1e-12 {
            return v.map(|z| z / norm);
        }
    }
}

/// Largest `||M x||` over `samples` random unit vectors: a lower bound on
/// the operator norm that tightens with the sample count.
pub fn sampled_max_norm(m: &CMatrix, samples: usize, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let n = m.ncols();
    let mut best = 0.0_f64;
    for _ in 0..samples {
        let x = sampled_unit_vector(n, &mut rng);
        best = best.max((m * x).norm());
    }
    best
}

/// Energy dispersion of the unit state `x`, evaluated in the centered form
/// `||(H - <H>) x||` that stays accurate near zero.
pub fn dispersion_of(h: &CMatrix, x: &CVector) -> f64 {
    let hx = h * x;
    let mean = x.dotc(&hx).re;
    (hx - x * C64::new(mean, 0.0)).norm()
}

/// Largest dispersion over `samples` random unit states of the subspace
/// spanned by `f`: the brute-force floor under the ascent optimizer.
pub fn sampled_max_dispersion(h: &CMatrix, f: &Frame, samples: usize, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let k = f.rank();
    let mut best = 0.0_f64;
    for _ in 0..samples {
        let c = sampled_unit_vector(k, &mut rng);
        let x = f.columns() * c;
        let norm = x.norm();
        let x = x.map(|z| z / norm);
        best = best.max(dispersion_of(h, &x));
    }
    best
}

/// Smallest `||P2 x||^2` over `samples` random unit states of the subspace
/// spanned by `f1`: the sampled side of the minimum-transition-probability
/// identity.
pub fn sampled_min_transition(p2: &CMatrix, f1: &Frame, samples: usize, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let k = f1.rank();
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let c = sampled_unit_vector(k, &mut rng);
        let x = f1.columns() * c;
        let norm = x.norm();
        let x = x.map(|z| z / norm);
        worst = worst.min((p2 * x).norm_squared());
    }
    worst
}
