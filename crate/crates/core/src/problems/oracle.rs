//! Brute-force eigendecomposition by cyclic Jacobi rotations.
//!
//! Used as an independent reference for the iterative solvers: it shares no
//! code with the filter or power drivers and only needs the operator's action
//! on unit vectors.

use crate::error::{Error, Result};
use crate::operators::{materialize, DenseOperator, LinearOperator};

/// Largest materialized dimension accepted by [`brute_force_spectrum`].
pub const BRUTE_FORCE_CAP: usize = 5000;

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Unit Euclidean norm.
    pub vector: Vec<f64>,
}

/// Full eigendecomposition of a symmetric operator, eigenvalues ascending.
pub fn brute_force_spectrum<O: LinearOperator + ?Sized>(op: &O) -> Result<Vec<EigenPair>> {
    let n = op.dim();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::TooLarge { n, cap: BRUTE_FORCE_CAP });
    }
    Ok(jacobi_eigen(&materialize(op)))
}

/// Eigenvalues only, ascending.
pub fn brute_force_eigenvalues<O: LinearOperator + ?Sized>(op: &O) -> Result<Vec<f64>> {
    Ok(brute_force_spectrum(op)?.into_iter().map(|p| p.value).collect())
}

/// Cyclic Jacobi on the (shifted) entries of `matrix`. Sweeps until the
/// off-diagonal Frobenius norm falls to rounding level, well below
/// `1e-12 ||A||_F`.
pub fn jacobi_eigen(matrix: &DenseOperator) -> Vec<EigenPair> {
    let n = matrix.dim();
    let mut a: Vec<f64> = (0..n * n).map(|k| matrix.get(k / n, k % n)).collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = 4.0 * f64::EPSILON * frob;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a, n) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (a[p * n + p], a[q * n + q]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for r in 0..n {
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    a[r * n + p] = c * arp - s * arq;
                    a[r * n + q] = s * arp + c * arq;
                }
                for r in 0..n {
                    let apr = a[p * n + r];
                    let aqr = a[q * n + r];
                    a[p * n + r] = c * apr - s * aqr;
                    a[q * n + r] = s * apr + c * aqr;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                for r in 0..n {
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = c * vrp - s * vrq;
                    v[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
    }

    let mut pairs: Vec<EigenPair> = (0..n)
        .map(|j| EigenPair { value: a[j * n + j], vector: (0..n).map(|r| v[r * n + j]).collect() })
        .collect();
    pairs.sort_by(|x, y| x.value.total_cmp(&y.value));
    pairs
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}
