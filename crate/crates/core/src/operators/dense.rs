use serde::Serialize;

use super::{check_len, LinearOperator};
use crate::error::{Error, Result};

/// Explicit real symmetric `n x n` matrix, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenseOperator {
    n: usize,
    entries: Vec<f64>,
    shift: f64,
}

impl DenseOperator {
    /// Builds an operator from rows, rejecting ragged or non-symmetric input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidConfig("matrix must have at least one row".into()));
        }
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            check_len(n, row.len())?;
            entries.extend_from_slice(row);
        }
        Self::new(n, entries)
    }

    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("matrix must have at least one row".into()));
        }
        check_len(n * n, entries.len())?;
        if let Some(bad) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "matrix entry ({}, {}) is not finite",
                bad / n,
                bad % n
            )));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (entries[i * n + j], entries[j * n + i]);
                let diff = (a - b).abs();
                if diff > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::NotSymmetric { row: i, col: j, diff });
                }
            }
        }
        Ok(Self::from_raw_unchecked(n, entries))
    }

    pub(crate) fn from_raw_unchecked(n: usize, entries: Vec<f64>) -> Self {
        Self { n, entries, shift: 0.0 }
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let n = values.len();
        let mut entries = vec![0.0; n * n];
        for (i, v) in values.iter().enumerate() {
            entries[i * n + i] = *v;
        }
        Self::new(n, entries)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::diagonal(&vec![1.0; n])
    }

    /// Returns a copy whose application subtracts a further `sigma * v`.
    pub fn shifted(&self, sigma: f64) -> Self {
        Self { shift: self.shift + sigma, ..self.clone() }
    }

    /// Entry of the effective (shifted) matrix.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let a = self.entries[row * self.n + col];
        if row == col {
            a - self.shift
        } else {
            a
        }
    }

    /// Rows of the effective (shifted) matrix.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }
}

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.entries[i * self.n..(i + 1) * self.n];
            *o = row.iter().zip(v).map(|(a, x)| a * x).sum::<f64>() - self.shift * v[i];
        }
    }

    fn shift(&self) -> f64 {
        self.shift
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::apply_dense;

    fn sample_matrix() -> DenseOperator {
        DenseOperator::from_rows(&[
            vec![2.0, 0.0, 0.0],
            vec![0.0, 2.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ])
        .unwrap()
    }

    #[test]
    fn identity_is_identity() {
        let id = DenseOperator::identity(3).unwrap();
        assert_eq!(apply_dense(&id, &[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn known_eigenpairs_of_the_three_by_three() {
        let h = sample_matrix();
        assert_eq!(apply_dense(&h, &[0.0, 1.0, 1.0]).unwrap(), vec![0.0, 3.0, 3.0]);
        assert_eq!(apply_dense(&h, &[0.0, 1.0, -1.0]).unwrap(), vec![0.0, 1.0, -1.0]);
        assert_eq!(apply_dense(&h, &[1.0, 0.0, 0.0]).unwrap(), vec![2.0, 0.0, 0.0]);
    }

    #[test]
    fn input_is_left_untouched() {
        let h = sample_matrix();
        let v = vec![0.7, 0.8, 0.4];
        let _ = apply_dense(&h, &v).unwrap();
        assert_eq!(v, vec![0.7, 0.8, 0.4]);
    }

    #[test]
    fn dimension_mismatch_reports_sizes() {
        let err = apply_dense(&sample_matrix(), &[1.0, 2.0]).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 3, found: 2 });
        assert!(err.to_string().contains("3") && err.to_string().contains("2"));
    }

    #[test]
    fn rejects_asymmetric_and_ragged() {
        assert!(matches!(
            DenseOperator::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]),
            Err(Error::NotSymmetric { row: 0, col: 1, .. })
        ));
        assert!(DenseOperator::from_rows(&[vec![1.0, 2.0], vec![2.0]]).is_err());
        assert!(DenseOperator::from_rows(&[]).is_err());
    }

    #[test]
    fn shift_of_zero_is_a_no_op() {
        let h = sample_matrix();
        let v = [0.3, -0.2, 0.9];
        assert_eq!(h.shifted(0.0).apply(&v).unwrap(), h.apply(&v).unwrap());
    }

    #[test]
    fn diagonal_shift_lowers_eigenvalues() {
        let d = DenseOperator::diagonal(&[1.0, 2.0, 3.0]).unwrap().shifted(0.5);
        assert_eq!(d.apply(&[1.0, 1.0, 1.0]).unwrap(), vec![0.5, 1.5, 2.5]);
        assert_eq!(d.trace(), 4.5);
    }
}
