//! Small dense linear algebra over any [`Real`] scalar.
//!
//! Hand rolled rather than delegated: the matrices here carry jet scalars
//! (metric tensors evaluated on seeded inputs), which general-purpose linear
//! algebra crates cannot hold without a full numeric-trait bridge. Sizes are
//! tiny (n = 2 or 3), so Gauss-Jordan and cyclic Jacobi are entirely adequate.

use crate::autodiff::Real;
use crate::error::{Error, Result};

/// Invert a row-major `n x n` matrix by Gauss-Jordan elimination with
/// partial pivoting on the primal part.
pub fn invert<S: Real>(n: usize, a: &[S]) -> Result<Vec<S>> {
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut inv: Vec<S> = (0..n * n)
        .map(|i| {
            if i / n == i % n {
                S::one()
            } else {
                S::zero()
            }
        })
        .collect();

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| {
                let v1 = m[r1 * n + col].re().abs();
                let v2 = m[r2 * n + col].re().abs();
                v1.partial_cmp(&v2).unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("nonempty pivot range");
        if m[pivot_row * n + col].re().abs() < 1e-300 {
            return Err(Error::Degenerate(format!(
                "matrix is singular at pivot column {col}"
            )));
        }
        if pivot_row != col {
            for k in 0..n {
                m.swap(col * n + k, pivot_row * n + k);
                inv.swap(col * n + k, pivot_row * n + k);
            }
        }
        let pivot_inv = m[col * n + col].clone().recip();
        for k in 0..n {
            m[col * n + k] = m[col * n + k].clone() * pivot_inv.clone();
            inv[col * n + k] = inv[col * n + k].clone() * pivot_inv.clone();
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            // No zero-test shortcut here: jet coefficients can be nonzero
            // even when the primal part of the entry is exactly zero.
            let factor = m[row * n + col].clone();
            for k in 0..n {
                m[row * n + k] =
                    m[row * n + k].clone() - factor.clone() * m[col * n + k].clone();
                inv[row * n + k] =
                    inv[row * n + k].clone() - factor.clone() * inv[col * n + k].clone();
            }
        }
    }
    Ok(inv)
}

/// Smallest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
pub fn sym_eigen_min(n: usize, a: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p * n + q] * m[p * n + q];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + frobenius(n, &m)) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n)
        .map(|i| m[i * n + i])
        .fold(f64::INFINITY, f64::min)
}

fn frobenius(n: usize, m: &[f64]) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt() / (n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn inverse_of_known_matrix() {
        let a = vec![4.0, 7.0, 2.0, 6.0];
        let inv = invert(2, &a).unwrap();
        let expect = [0.6, -0.7, -0.2, 0.4];
        for (got, want) in inv.iter().zip(expect) {
            assert_relative_eq!(got, &want, epsilon = 1e-12);
        }
    }

    #[test]
    fn inverse_times_matrix_is_identity_3x3() {
        let a = vec![2.0, -1.0, 0.3, -1.0, 3.0, 0.5, 0.3, 0.5, 1.8];
        let inv = invert(3, &a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += a[i * 3 + k] * inv[k * 3 + j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(acc, want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = vec![1.0, 2.0, 2.0, 4.0];
        assert!(invert(2, &a).is_err());
    }

    #[test]
    fn jacobi_min_eigenvalue() {
        // Eigenvalues of [[2,1],[1,2]] are 1 and 3.
        let a = vec![2.0, 1.0, 1.0, 2.0];
        assert_relative_eq!(sym_eigen_min(2, &a), 1.0, epsilon = 1e-10);
        // diag(5, 0.25, 1.5) rotated is harder to read off; use diagonal directly.
        let d = vec![5.0, 0.0, 0.0, 0.0, 0.25, 0.0, 0.0, 0.0, 1.5];
        assert_relative_eq!(sym_eigen_min(3, &d), 0.25, epsilon = 1e-12);
    }
}
