//! Symmetric eigendecomposition and convergence metrics.
//!
//! The eigensolver is a cyclic Jacobi iteration: sweeps of plane rotations,
//! each annihilating one off-diagonal element, until the off-diagonal mass is
//! negligible. Later rotations disturb earlier zeros, but the off-diagonal
//! Frobenius norm shrinks at least quadratically per sweep, and for symmetric
//! input the method cannot fail. All networks here have a few dozen vertices,
//! so the O(n^3)-per-sweep cost is irrelevant and robustness wins.
//!
//! Two metrics are derived from the spectrum of a consensus matrix `P`:
//!
//! * the asymptotic convergence factor `rho`, the spectral radius of
//!   `P - (1/M) 11^T` (for symmetric stochastic `P` this is
//!   `max(lambda_2, -lambda_M)`), and
//! * the convergence time `tau = 1 / ln(1/rho)`, the number of mixing steps
//!   per e-fold of error decay.

use alloc::vec::Vec;
use core::fmt;

use crate::matrix::Matrix;
use crate::{Error, Result};

/// Maximum allowed asymmetry in eigensolver input (absolute).
const SYMMETRY_TOL: f64 = 1e-12;
/// Maximum allowed row-sum deviation when computing convergence factors.
const STOCHASTIC_TOL: f64 = 1e-9;
/// Jacobi stops when the off-diagonal Frobenius norm drops below this
/// fraction of the input norm.
const JACOBI_REL_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues (descending) and, optionally, an aligned orthonormal basis.
#[derive(Debug, Clone)]
pub struct Spectrum {
    values: Vec<f64>,
    vectors: Option<Matrix>,
}

impl Spectrum {
    /// Eigenvalues sorted descending: `values()[0]` is the largest.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvector matrix with column `k` corresponding to `values()[k]`.
    pub fn vectors(&self) -> Option<&Matrix> {
        self.vectors.as_ref()
    }

    pub fn largest(&self) -> f64 {
        self.values[0]
    }

    pub fn smallest(&self) -> f64 {
        *self.values.last().expect("spectrum of empty matrix")
    }

    /// Column `k` of the eigenvector matrix.
    pub fn vector(&self, k: usize) -> Option<Vec<f64>> {
        let v = self.vectors.as_ref()?;
        Some((0..v.rows()).map(|i| v[(i, k)]).collect())
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Rejects input whose asymmetry exceeds `1e-12`; smaller asymmetry is
/// folded away by working on `(S + S^T)/2`.
pub fn sym_eigs(s: &Matrix, want_vectors: bool) -> Result<Spectrum> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            got: alloc::format!("{}x{}", s.rows(), s.cols()),
        });
    }
    let dev = s.symmetry_deviation();
    if dev > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { max_deviation: dev });
    }
    let n = s.rows();
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "s",
            message: "empty matrix".into(),
        });
    }

    let mut a = Matrix::from_fn(n, n, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    let mut v = want_vectors.then(|| Matrix::identity(n));
    let norm = s.frobenius_norm();
    let stop = JACOBI_REL_TOL * norm;

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * a[(i, j)] * a[(i, j)];
            }
        }
        if libm::sqrt(off) <= stop {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                // Rotation angle choosing the smaller root for stability.
                let theta = 0.5 * (a[(q, q)] - a[(p, p)]) / apq;
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s_ = t * c;
                let tau = s_ / (1.0 + c);
                let h = t * apq;
                a[(p, p)] -= h;
                a[(q, q)] += h;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    let new_rp = arp - s_ * (arq + tau * arp);
                    let new_rq = arq + s_ * (arp - tau * arq);
                    a[(r, p)] = new_rp;
                    a[(p, r)] = new_rp;
                    a[(r, q)] = new_rq;
                    a[(q, r)] = new_rq;
                }
                if let Some(v) = v.as_mut() {
                    for r in 0..n {
                        let vrp = v[(r, p)];
                        let vrq = v[(r, q)];
                        v[(r, p)] = vrp - s_ * (vrq + tau * vrp);
                        v[(r, q)] = vrq + s_ * (vrp - tau * vrq);
                    }
                }
            }
        }
    }

    // Stable descending sort keeps the Jacobi diagonal order among ties,
    // which makes tie-breaking downstream deterministic.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).expect("NaN eigenvalue"));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = v.map(|v| Matrix::from_fn(n, n, |r, k| v[(r, order[k])]));
    Ok(Spectrum { values, vectors })
}

/// Asymptotic convergence factor of a consensus matrix.
///
/// `rho = max_i |lambda_i(P - (1/M) 11^T)|`. Requires `P` symmetric with unit
/// row sums (within `1e-9`); `rho < 1` iff repeated averaging by `P`
/// converges to the uniform average.
pub fn convergence_factor(p: &Matrix) -> Result<f64> {
    let dev = p.symmetry_deviation();
    if dev > STOCHASTIC_TOL {
        return Err(Error::NotSymmetric { max_deviation: dev });
    }
    let row_dev = p.row_sum_deviation();
    if row_dev > STOCHASTIC_TOL {
        return Err(Error::NotStochastic { max_deviation: row_dev });
    }
    let n = p.rows();
    let deviation = p.sub(&Matrix::average_projector(n));
    // The deviation matrix inherits tiny asymmetry from P itself; symmetrize
    // by construction before the eigensolver's strict check.
    let sym = Matrix::from_fn(n, n, |i, j| 0.5 * (deviation[(i, j)] + deviation[(j, i)]));
    let spectrum = sym_eigs(&sym, false)?;
    Ok(libm::fabs(spectrum.largest()).max(libm::fabs(spectrum.smallest())))
}

/// Convergence time associated with a convergence factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvergenceTime {
    /// `tau = 1 / ln(1/rho)` for `rho` in `(0, 1)`; `0` at `rho = 0` by
    /// convention.
    Finite(f64),
    /// `rho >= 1`: the iteration does not converge.
    Infinite,
}

impl ConvergenceTime {
    pub fn value(self) -> Option<f64> {
        match self {
            ConvergenceTime::Finite(t) => Some(t),
            ConvergenceTime::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ConvergenceTime::Finite(_))
    }
}

impl fmt::Display for ConvergenceTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvergenceTime::Finite(t) => write!(f, "{t}"),
            ConvergenceTime::Infinite => write!(f, "inf"),
        }
    }
}

/// Number of averaging steps per e-fold of error decay.
pub fn convergence_time(rho: f64) -> ConvergenceTime {
    if rho >= 1.0 {
        ConvergenceTime::Infinite
    } else if rho <= 0.0 {
        ConvergenceTime::Finite(0.0)
    } else {
        ConvergenceTime::Finite(1.0 / libm::log(1.0 / rho))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use approx::assert_relative_eq;

    fn reconstruct(spectrum: &Spectrum) -> Matrix {
        let v = spectrum.vectors().unwrap();
        let n = v.rows();
        let mut lambda = Matrix::zeros(n, n);
        for (k, &val) in spectrum.values().iter().enumerate() {
            lambda[(k, k)] = val;
        }
        v.mat_mul(&lambda).mat_mul(&v.transpose())
    }

    #[test]
    fn identity_spectrum() {
        let s = sym_eigs(&Matrix::identity(3), false).unwrap();
        assert_eq!(s.values(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_is_sorted() {
        let mut d = Matrix::zeros(3, 3);
        d[(0, 0)] = 3.0;
        d[(1, 1)] = 1.0;
        d[(2, 2)] = 2.0;
        let s = sym_eigs(&d, false).unwrap();
        assert_eq!(s.values(), &[3.0, 2.0, 1.0]);
    }

    #[test]
    fn complete_graph_laplacian_spectrum() {
        // Characteristic polynomial of the K5 Laplacian is -x (x - 5)^4.
        let l = Graph::complete(5).unwrap().laplacian();
        let s = sym_eigs(&l, true).unwrap();
        let expected = [5.0, 5.0, 5.0, 5.0, 0.0];
        for (got, want) in s.values().iter().zip(expected) {
            assert_relative_eq!(*got, want, epsilon = 1e-10);
        }
        let recon = reconstruct(&s);
        assert!(recon.sub(&l).max_abs() <= 1e-10 * l.max_abs());
    }

    #[test]
    fn vectors_are_orthonormal() {
        let l = Graph::star(6).unwrap().laplacian();
        let s = sym_eigs(&l, true).unwrap();
        let v = s.vectors().unwrap();
        let gram = v.transpose().mat_mul(v);
        assert!(gram.sub(&Matrix::identity(6)).max_abs() < 1e-10);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let mut a = Matrix::identity(2);
        a[(0, 1)] = 1e-6;
        assert!(matches!(sym_eigs(&a, false), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn eigenvalue_sum_matches_trace() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(2..=6);
            let mut a = Matrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let x: f64 = rng.gen_range(-2.0..2.0);
                    a[(i, j)] = x;
                    a[(j, i)] = x;
                }
            }
            let s = sym_eigs(&a, false).unwrap();
            let trace: f64 = (0..n).map(|i| a[(i, i)]).sum();
            let sum: f64 = s.values().iter().sum();
            assert!((sum - trace).abs() <= 1e-9 * n as f64);
        }
    }

    #[test]
    fn convergence_factor_of_perfect_averaging_is_zero() {
        let j = Matrix::average_projector(4);
        assert!(convergence_factor(&j).unwrap() < 1e-14);
    }

    #[test]
    fn convergence_factor_rejects_bad_input() {
        let mut a = Matrix::identity(3);
        a[(0, 1)] = 0.5; // asymmetric
        assert!(convergence_factor(&a).is_err());
        let b = Matrix::from_fn(2, 2, |_, _| 1.0); // rows sum to 2
        assert!(matches!(convergence_factor(&b), Err(Error::NotStochastic { .. })));
    }

    #[test]
    fn convergence_time_values() {
        // Printed (rho, tau) pairs: 0.250 -> 0.721, 0.975 -> 39.498,
        // 0.667 -> 2.466.
        let tau = convergence_time(0.25).value().unwrap();
        assert!((tau - 0.721).abs() < 1e-3);
        let tau = convergence_time(0.975).value().unwrap();
        assert!((tau - 39.498).abs() / 39.498 < 5e-3);
        let tau = convergence_time(0.667).value().unwrap();
        assert!((tau - 2.466).abs() / 2.466 < 5e-3);
        assert_eq!(convergence_time(0.0), ConvergenceTime::Finite(0.0));
        assert_eq!(convergence_time(1.0), ConvergenceTime::Infinite);
        assert_eq!(convergence_time(1.5), ConvergenceTime::Infinite);
    }

    #[test]
    fn convergence_time_is_monotone() {
        let mut last = 0.0;
        for k in 1..99 {
            let rho = k as f64 / 100.0;
            let tau = convergence_time(rho).value().unwrap();
            assert!(tau > last);
            last = tau;
        }
    }
}
