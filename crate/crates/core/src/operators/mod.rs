//! Real symmetric operators applied matrix-free.
//!
//! Two concrete kinds are provided: [`DenseOperator`] for small explicit
//! matrices and [`GridOperator`] for finite-difference Hamiltonians
//! `-1/2 Laplacian + V - sigma` on uniform 1D or 3D grids. Both are immutable
//! after construction and can be shared between threads.

mod dense;
mod grid;

pub use dense::DenseOperator;
pub use grid::{apply_laplacian_1d, Boundary, GridOperator, GridSpec};

use serde::Serialize;

use crate::error::{Error, Result};

/// A linear operator that can be applied to vectors without materializing it.
pub trait LinearOperator: Sync {
    /// Number of values the operator acts on.
    fn dim(&self) -> usize;

    /// Writes `H v` into `out`. Both slices must have length [`dim`](Self::dim).
    fn apply_into(&self, v: &[f64], out: &mut [f64]);

    /// Volume element of the discrete inner product (1 for plain vectors).
    fn volume_element(&self) -> f64 {
        1.0
    }

    /// Spectral shift already folded into the operator.
    fn shift(&self) -> f64 {
        0.0
    }

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), v.len())?;
        let mut out = vec![0.0; v.len()];
        self.apply_into(v, &mut out);
        Ok(out)
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Either operator kind, for code that handles both (problem catalog, CLI).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Operator {
    Dense(DenseOperator),
    Grid(GridOperator),
}

impl Operator {
    /// Returns a copy whose application subtracts a further `sigma * v`.
    pub fn shifted(&self, sigma: f64) -> Operator {
        match self {
            Operator::Dense(op) => Operator::Dense(op.shifted(sigma)),
            Operator::Grid(op) => Operator::Grid(op.shifted(sigma)),
        }
    }

    pub fn as_grid(&self) -> Option<&GridOperator> {
        match self {
            Operator::Grid(op) => Some(op),
            Operator::Dense(_) => None,
        }
    }
}

impl LinearOperator for Operator {
    fn dim(&self) -> usize {
        match self {
            Operator::Dense(op) => op.dim(),
            Operator::Grid(op) => op.dim(),
        }
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        match self {
            Operator::Dense(op) => op.apply_into(v, out),
            Operator::Grid(op) => op.apply_into(v, out),
        }
    }

    fn volume_element(&self) -> f64 {
        match self {
            Operator::Dense(op) => op.volume_element(),
            Operator::Grid(op) => op.volume_element(),
        }
    }

    fn shift(&self) -> f64 {
        match self {
            Operator::Dense(op) => LinearOperator::shift(op),
            Operator::Grid(op) => LinearOperator::shift(op),
        }
    }
}

/// Standard matrix-vector product for a dense operator.
pub fn apply_dense(op: &DenseOperator, v: &[f64]) -> Result<Vec<f64>> {
    op.apply(v)
}

/// `(-1/2 Laplacian + V - sigma) v` for a grid operator.
pub fn apply_hamiltonian(op: &GridOperator, v: &[f64]) -> Result<Vec<f64>> {
    op.apply(v)
}

/// Builds the explicit matrix of any operator by applying it to unit vectors.
pub fn materialize<O: LinearOperator + ?Sized>(op: &O) -> DenseOperator {
    let n = op.dim();
    let mut entries = vec![0.0; n * n];
    let mut unit = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        unit[j] = 1.0;
        op.apply_into(&unit, &mut col);
        unit[j] = 0.0;
        for i in 0..n {
            entries[i * n + j] = col[i];
        }
    }
    DenseOperator::from_raw_unchecked(n, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::dot;
    use proptest::prelude::*;

    fn sample_matrix() -> DenseOperator {
        DenseOperator::from_rows(&[
            vec![2.0, 0.0, 0.0],
            vec![0.0, 2.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ])
        .unwrap()
    }

    fn sample_operators() -> Vec<Operator> {
        let box1d = GridSpec::line(0.0, 1.0, 0.05, Boundary::Dirichlet).unwrap();
        let ring = GridSpec::line(0.0, 1.0, 0.05, Boundary::Periodic).unwrap();
        let cube = GridSpec::cube([0.0; 3], 1.0, 0.2, Boundary::Dirichlet).unwrap();
        let pcube = GridSpec::cube([0.0; 3], 1.0, 0.25, Boundary::Periodic).unwrap();
        let xs = box1d.axis_coordinates(0);
        let pot: Vec<f64> = xs.iter().map(|x| 0.5 * x * x).collect();
        vec![
            Operator::Dense(sample_matrix()),
            Operator::Grid(GridOperator::new(box1d, pot).unwrap().shifted(0.3)),
            Operator::Grid(GridOperator::free(ring)),
            Operator::Grid(GridOperator::free(cube)),
            Operator::Grid(GridOperator::free(pcube)),
        ]
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    proptest! {
        #[test]
        fn operators_are_symmetric(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for op in sample_operators() {
                let n = op.dim();
                let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let hu = op.apply(&u).unwrap();
                let hv = op.apply(&v).unwrap();
                prop_assert!(rel_close(dot(&u, &hv), dot(&hu, &v), 1e-12));
            }
        }

        #[test]
        fn operators_are_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for op in sample_operators() {
                let n = op.dim();
                let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let mix: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
                let lhs = op.apply(&mix).unwrap();
                let hu = op.apply(&u).unwrap();
                let hv = op.apply(&v).unwrap();
                let scale = lhs.iter().fold(1.0f64, |m, x| m.max(x.abs()));
                for i in 0..n {
                    prop_assert!((lhs[i] - (a * hu[i] + b * hv[i])).abs() <= 1e-12 * scale);
                }
            }
        }
    }

    #[test]
    fn materialized_grid_operator_is_symmetric() {
        for op in sample_operators() {
            let m = materialize(&op);
            assert!(DenseOperator::from_rows(&m.rows()).is_ok());
        }
    }

    #[test]
    fn shift_moves_rayleigh_quotient_by_sigma() {
        let op = Operator::Dense(sample_matrix());
        let shifted = op.shifted(-1.0);
        let v = [0.0, 1.0, 1.0];
        let a = op.apply(&v).unwrap();
        let b = shifted.apply(&v).unwrap();
        for i in 0..3 {
            assert!((b[i] - (a[i] + v[i])).abs() < 1e-15);
        }
        assert_eq!(shifted.shift(), -1.0);
    }
}
