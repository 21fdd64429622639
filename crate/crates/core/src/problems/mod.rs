//! Catalog of validation problems with continuum and discrete reference spectra.

mod oracle;

pub use oracle::{brute_force_eigenvalues, brute_force_spectrum, jacobi_eigen, EigenPair, BRUTE_FORCE_CAP};

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

use crate::analysis::distinct_eigenvalues;
use crate::error::{Error, Result};
use crate::filter::SubstepRule;
use crate::operators::{Boundary, DenseOperator, GridOperator, GridSpec, LinearOperator, Operator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    SimpleMatrix,
    Box1d,
    Ring,
    Harmonic,
    CubicBox,
    /// 1D Dirichlet grid with a tabulated potential.
    Tabulated,
}

/// One continuum eigenstate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Level {
    pub quantum_numbers: Vec<i64>,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct BenchmarkProblem {
    pub name: String,
    pub kind: ProblemKind,
    pub operator: Operator,
    /// Continuum eigenstates, ascending by energy. Degenerate states are listed separately.
    pub exact_spectrum: Vec<Level>,
    /// Default substep rule for targeted solves.
    pub substep_rule: SubstepRule,
    discrete: OnceLock<Result<Vec<f64>>>,
}

/// Catalog names accepted by [`BenchmarkProblem::by_name`].
pub const CATALOG: &[&str] = &["simple-matrix", "box1d", "ring", "harmonic", "cubic"];

/// Paper-style default time step `dx^2 / 10`.
pub fn default_dtau(dx: f64) -> f64 {
    dx * dx / 10.0
}

/// `(1/dx^2)(1 - cos(k dx))`: eigenvalue of `-1/2` times the three-point
/// second difference for a mode of wavenumber `k`.
fn stencil_eigenvalue(k: f64, dx: f64) -> f64 {
    (1.0 - (k * dx).cos()) / (dx * dx)
}

impl BenchmarkProblem {
    fn new(name: &str, kind: ProblemKind, operator: Operator, exact: Vec<Level>, rule: SubstepRule) -> Self {
        let mut exact_spectrum = exact;
        exact_spectrum.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        Self {
            name: name.to_string(),
            kind,
            operator,
            exact_spectrum,
            substep_rule: rule,
            discrete: OnceLock::new(),
        }
    }

    /// Looks up a catalog problem with its default discretization.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "simple-matrix" => Some(simple_matrix()),
            "box1d" => box_1d(0.02).ok(),
            "ring" => ring(0.01).ok(),
            "harmonic" => harmonic(0.1, 10.0).ok(),
            "cubic" => cubic_box(0.05).ok(),
            _ => None,
        }
    }

    pub fn grid(&self) -> Option<&GridSpec> {
        self.operator.as_grid().map(|g| g.grid())
    }

    /// Eigenvalues of the discretized operator (before any shift), ascending.
    ///
    /// Closed-form stencil eigenvalues for the zero-potential grids, brute
    /// force otherwise. Computed on first use.
    pub fn discrete_spectrum(&self) -> Result<&[f64]> {
        self.discrete
            .get_or_init(|| self.compute_discrete())
            .as_ref()
            .map(|v| v.as_slice())
            .map_err(Clone::clone)
    }

    /// Discrete spectrum when available, else the continuum energies.
    pub fn reference_spectrum(&self) -> Vec<f64> {
        match self.discrete_spectrum() {
            Ok(d) => d.to_vec(),
            Err(_) => self.exact_spectrum.iter().map(|l| l.energy).collect(),
        }
    }

    fn compute_discrete(&self) -> Result<Vec<f64>> {
        let unshifted = self.operator.shifted(-self.operator.shift());
        let mut values = match (self.kind, self.grid()) {
            (ProblemKind::Box1d, Some(g)) => {
                let (n, l, dx) = (g.len(), g.lengths()[0], g.dx());
                (1..=n).map(|k| stencil_eigenvalue(k as f64 * PI / l, dx)).collect()
            }
            (ProblemKind::Ring, Some(g)) => {
                let (n, l, dx) = (g.len(), g.lengths()[0], g.dx());
                (0..n).map(|k| stencil_eigenvalue(2.0 * PI * k as f64 / l, dx)).collect()
            }
            (ProblemKind::CubicBox, Some(g)) => {
                let (n, l, dx) = (g.shape()[0], g.lengths()[0], g.dx());
                let axis: Vec<f64> = (1..=n).map(|k| stencil_eigenvalue(k as f64 * PI / l, dx)).collect();
                let mut all = Vec::with_capacity(n * n * n);
                for &a in &axis {
                    for &b in &axis {
                        for &c in &axis {
                            all.push(a + b + c);
                        }
                    }
                }
                all
            }
            _ => brute_force_eigenvalues(&unshifted)?,
        };
        values.sort_by(f64::total_cmp);
        Ok(values)
    }

    /// Distinct continuum energies with their multiplicities.
    pub fn exact_levels(&self) -> Vec<(f64, usize)> {
        let energies: Vec<f64> = self.exact_spectrum.iter().map(|l| l.energy).collect();
        distinct_eigenvalues(&energies)
            .into_iter()
            .map(|e| {
                let count = energies.iter().filter(|&&x| (x - e).abs() <= 1e-9 * e.abs().max(1.0)).count();
                (e, count)
            })
            .collect()
    }

    /// Continuum energy of the state with these quantum numbers.
    pub fn exact_energy(&self, quantum_numbers: &[i64]) -> Option<f64> {
        self.exact_spectrum.iter().find(|l| l.quantum_numbers == quantum_numbers).map(|l| l.energy)
    }

    /// Eigenvalue of the discretized operator for the state with these
    /// quantum numbers, i.e. the value a converged solve should return.
    pub fn discrete_energy(&self, quantum_numbers: &[i64]) -> Option<f64> {
        self.exact_energy(quantum_numbers)?;
        let by_index = |i: usize| self.discrete_spectrum().ok().and_then(|d| d.get(i).copied());
        match (self.kind, quantum_numbers) {
            (ProblemKind::SimpleMatrix, &[n]) => by_index(n as usize - 1),
            (ProblemKind::Harmonic, &[n]) => by_index(n as usize),
            (ProblemKind::Box1d, &[n]) => {
                let g = self.grid()?;
                Some(stencil_eigenvalue(n as f64 * PI / g.lengths()[0], g.dx()))
            }
            (ProblemKind::Ring, &[n]) => {
                let g = self.grid()?;
                Some(stencil_eigenvalue(2.0 * PI * n as f64 / g.lengths()[0], g.dx()))
            }
            (ProblemKind::CubicBox, &[nx, ny, nz]) => {
                let g = self.grid()?;
                let axis = |n: i64| stencil_eigenvalue(n as f64 * PI / g.lengths()[0], g.dx());
                Some(axis(nx) + axis(ny) + axis(nz))
            }
            _ => None,
        }
    }

    /// Analytic eigenfunction sampled on the grid (or the exact eigenvector of
    /// the matrix), unit norm under the operator's inner product.
    pub fn exact_eigenfunction(&self, quantum_numbers: &[i64]) -> Option<Vec<f64>> {
        match self.kind {
            ProblemKind::SimpleMatrix => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                match quantum_numbers {
                    [1] => Some(vec![0.0, s, -s]),
                    [2] => Some(vec![1.0, 0.0, 0.0]),
                    [3] => Some(vec![0.0, s, s]),
                    _ => None,
                }
            }
            ProblemKind::Box1d => {
                let g = self.grid()?;
                let &[n] = quantum_numbers else { return None };
                (n >= 1).then(|| {
                    let (x0, l) = (g.origin()[0], g.lengths()[0]);
                    g.sample(|p| (2.0 / l).sqrt() * (n as f64 * PI * (p[0] - x0) / l).sin())
                })
            }
            ProblemKind::Ring => {
                let g = self.grid()?;
                let &[n] = quantum_numbers else { return None };
                let (x0, l) = (g.origin()[0], g.lengths()[0]);
                let k = 2.0 * PI * n.unsigned_abs() as f64 / l;
                Some(g.sample(|p| {
                    let x = p[0] - x0;
                    match n.signum() {
                        0 => 1.0 / l.sqrt(),
                        1 => (2.0 / l).sqrt() * (k * x).cos(),
                        _ => (2.0 / l).sqrt() * (k * x).sin(),
                    }
                }))
            }
            ProblemKind::Harmonic => {
                let g = self.grid()?;
                let &[n] = quantum_numbers else { return None };
                (n >= 0).then(|| g.sample(|p| hermite_function(n as usize, p[0])))
            }
            ProblemKind::CubicBox => {
                let g = self.grid()?;
                let &[nx, ny, nz] = quantum_numbers else { return None };
                if nx < 1 || ny < 1 || nz < 1 {
                    return None;
                }
                let (o, l) = (g.origin().to_vec(), g.lengths()[0]);
                Some(g.sample(|p| {
                    (8.0 / l.powi(3)).sqrt()
                        * (nx as f64 * PI * (p[0] - o[0]) / l).sin()
                        * (ny as f64 * PI * (p[1] - o[1]) / l).sin()
                        * (nz as f64 * PI * (p[2] - o[2]) / l).sin()
                }))
            }
            ProblemKind::Tabulated => None,
        }
    }
}

/// Normalized harmonic-oscillator eigenfunction
/// `pi^(-1/4) (2^n n!)^(-1/2) h_n(x) exp(-x^2/2)`.
///
/// Evaluated through the recurrence for the normalized functions,
/// `psi_{n+1} = sqrt(2/(n+1)) x psi_n - sqrt(n/(n+1)) psi_{n-1}`, which is
/// equivalent to `h_{n+1} = 2x h_n - 2n h_{n-1}` but does not overflow.
pub fn hermite_function(n: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * x * x).exp();
    for k in 0..n {
        let next = (2.0 / (k as f64 + 1.0)).sqrt() * x * cur - (k as f64 / (k as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Physicists' Hermite polynomial by `h_{n+1} = 2x h_n - 2n h_{n-1}`.
pub fn hermite_polynomial(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// The 3x3 matrix `[[2,0,0],[0,2,1],[0,1,2]]` with eigenvalues 1, 2, 3.
pub fn simple_matrix() -> BenchmarkProblem {
    let op = DenseOperator::from_rows(&[
        vec![2.0, 0.0, 0.0],
        vec![0.0, 2.0, 1.0],
        vec![0.0, 1.0, 2.0],
    ])
    .expect("matrix is symmetric");
    let exact = (1..=3).map(|n| Level { quantum_numbers: vec![n], energy: n as f64 }).collect();
    BenchmarkProblem::new("simple-matrix", ProblemKind::SimpleMatrix, Operator::Dense(op), exact, SubstepRule::Fixed(100))
}

/// Particle in the box `[0, 1]` with Dirichlet walls; `E_n = n^2 pi^2 / 2`.
pub fn box_1d(dx: f64) -> Result<BenchmarkProblem> {
    let grid = GridSpec::line(0.0, 1.0, dx, Boundary::Dirichlet)?;
    let exact = (1..=grid.len() as i64)
        .map(|n| Level { quantum_numbers: vec![n], energy: (n * n) as f64 * PI * PI / 2.0 })
        .collect();
    Ok(BenchmarkProblem::new(
        "box1d",
        ProblemKind::Box1d,
        Operator::Grid(GridOperator::free(grid)),
        exact,
        SubstepRule::TimeStep(default_dtau(dx)),
    ))
}

/// Particle on a ring of circumference 1; `E_n = 2 pi^2 n^2`, doubly degenerate for `n != 0`.
pub fn ring(dx: f64) -> Result<BenchmarkProblem> {
    let grid = GridSpec::line(0.0, 1.0, dx, Boundary::Periodic)?;
    let half = grid.len() as i64 / 2;
    let mut exact = vec![Level { quantum_numbers: vec![0], energy: 0.0 }];
    for n in 1..=half {
        let energy = 2.0 * PI * PI * (n * n) as f64;
        exact.push(Level { quantum_numbers: vec![n], energy });
        exact.push(Level { quantum_numbers: vec![-n], energy });
    }
    Ok(BenchmarkProblem::new(
        "ring",
        ProblemKind::Ring,
        Operator::Grid(GridOperator::free(grid)),
        exact,
        SubstepRule::TimeStep(default_dtau(dx)),
    ))
}

/// Harmonic oscillator `V = x^2/2` on `[-half_width, half_width]`; `E_n = n + 1/2`.
pub fn harmonic(dx: f64, half_width: f64) -> Result<BenchmarkProblem> {
    if !(half_width > 0.0) {
        return Err(Error::InvalidGrid(format!("half width must be positive, got {half_width}")));
    }
    let grid = GridSpec::line(-half_width, 2.0 * half_width, dx, Boundary::Dirichlet)?;
    let potential = grid.sample(|p| 0.5 * p[0] * p[0]);
    let exact = (0..grid.len() as i64)
        .map(|n| Level { quantum_numbers: vec![n], energy: n as f64 + 0.5 })
        .collect();
    Ok(BenchmarkProblem::new(
        "harmonic",
        ProblemKind::Harmonic,
        Operator::Grid(GridOperator::new(grid, potential)?),
        exact,
        SubstepRule::TimeStep(default_dtau(dx)),
    ))
}

/// Particle in the unit cube with Dirichlet walls;
/// `E = (pi^2/2)(nx^2 + ny^2 + nz^2)`.
pub fn cubic_box(dx: f64) -> Result<BenchmarkProblem> {
    let grid = GridSpec::cube([0.0; 3], 1.0, dx, Boundary::Dirichlet)?;
    let n = grid.shape()[0] as i64;
    let mut exact = Vec::with_capacity((n * n * n) as usize);
    for nx in 1..=n {
        for ny in 1..=n {
            for nz in 1..=n {
                let energy = PI * PI / 2.0 * (nx * nx + ny * ny + nz * nz) as f64;
                exact.push(Level { quantum_numbers: vec![nx, ny, nz], energy });
            }
        }
    }
    Ok(BenchmarkProblem::new(
        "cubic",
        ProblemKind::CubicBox,
        Operator::Grid(GridOperator::free(grid)),
        exact,
        SubstepRule::TimeStep(default_dtau(dx)),
    ))
}

/// 1D Dirichlet problem with a potential tabulated at the interior grid points.
///
/// `xs` must be uniformly spaced with spacing `dx`; the walls sit one spacing
/// beyond the first and last point.
pub fn tabulated(name: &str, xs: &[f64], potential: Vec<f64>, dx: f64) -> Result<BenchmarkProblem> {
    if xs.len() != potential.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), found: potential.len() });
    }
    if xs.is_empty() {
        return Err(Error::InvalidGrid("potential table is empty".into()));
    }
    for (i, w) in xs.windows(2).enumerate() {
        if ((w[1] - w[0]) - dx).abs() > 1e-9 * dx.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "table spacing {} at row {} does not match dx = {dx}",
                w[1] - w[0],
                i + 1
            )));
        }
    }
    let origin = xs[0] - dx;
    let length = (xs.len() + 1) as f64 * dx;
    let grid = GridSpec::line(origin, length, dx, Boundary::Dirichlet)?;
    Ok(BenchmarkProblem::new(
        name,
        ProblemKind::Tabulated,
        Operator::Grid(GridOperator::new(grid, potential)?),
        Vec::new(),
        SubstepRule::TimeStep(default_dtau(dx)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::inner;
    use approx::assert_relative_eq;

    #[test]
    fn simple_matrix_facts() {
        let p = simple_matrix();
        let d = p.discrete_spectrum().unwrap();
        for (v, e) in d.iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - e).abs() < 1e-14);
        }
        let phi2 = p.exact_eigenfunction(&[2]).unwrap();
        assert_eq!(p.operator.apply(&phi2).unwrap(), vec![2.0, 0.0, 0.0]);
        let Operator::Dense(m) = &p.operator else { panic!() };
        assert_eq!(m.trace(), 6.0);
    }

    #[test]
    fn box_spectra() {
        let p = box_1d(0.02).unwrap();
        assert_relative_eq!(p.exact_energy(&[1]).unwrap(), 4.934802, epsilon = 1e-6);
        assert_relative_eq!(p.exact_energy(&[5]).unwrap(), 123.370055, epsilon = 1e-6);
        let d = p.discrete_spectrum().unwrap();
        assert_eq!(d.len(), 49);
        assert!((d[0] - 4.933179).abs() < 1e-6);
    }

    #[test]
    fn ring_spectra() {
        let p = ring(0.01).unwrap();
        let levels = p.exact_levels();
        assert_eq!(levels[0], (0.0, 1));
        assert_eq!(levels[1].1, 2);
        assert_relative_eq!(levels[1].0, 19.739208, epsilon = 1e-6);
        let d = p.discrete_spectrum().unwrap();
        assert_eq!(d[0].abs() < 1e-12, true);
        assert!((d[1] - 19.732716).abs() < 1e-6);
        assert_relative_eq!(d[1], d[2], max_relative = 1e-12);
    }

    #[test]
    fn harmonic_facts() {
        let p = harmonic(0.1, 10.0).unwrap();
        assert_eq!(p.exact_energy(&[0]), Some(0.5));
        let d = p.discrete_spectrum().unwrap();
        assert!((d[6] - 6.473401).abs() / 6.473401 < 1e-4);
        let phi3 = p.exact_eigenfunction(&[3]).unwrap();
        let nonzero: Vec<f64> = phi3.into_iter().filter(|v| v.abs() > 1e-8).collect();
        let signs = nonzero.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
        assert_eq!(signs, 3);
    }

    #[test]
    fn hermite_recurrences_agree() {
        let mut fact = 1.0;
        for n in 0..12usize {
            if n > 0 {
                fact *= n as f64;
            }
            for x in [-3.0, -0.7, 0.0, 0.4, 2.5] {
                let direct = PI.powf(-0.25) / (2f64.powi(n as i32) * fact).sqrt()
                    * hermite_polynomial(n, x)
                    * (-0.5 * x * x).exp();
                assert!((hermite_function(n, x) - direct).abs() < 1e-12);
            }
        }
        assert_eq!(hermite_polynomial(3, 1.0), -4.0);
    }

    #[test]
    fn cubic_facts() {
        let p = cubic_box(0.05).unwrap();
        assert_relative_eq!(p.exact_energy(&[1, 1, 1]).unwrap(), 14.804407, epsilon = 1e-6);
        let e = p.exact_energy(&[1, 1, 2]).unwrap();
        assert_eq!(p.exact_energy(&[1, 2, 1]), Some(e));
        assert_eq!(p.exact_energy(&[2, 1, 1]), Some(e));
        assert_relative_eq!(e, 29.608813, epsilon = 1e-6);
        let d = p.discrete_spectrum().unwrap();
        assert_eq!(d.len(), 6859);
        assert!((d[0] - 14.773991).abs() < 1e-6);
        let e222 = d.iter().find(|&&x| (x - 58.732179).abs() < 1e-5);
        assert!(e222.is_some());
    }

    #[test]
    fn oracles_agree_on_1d_problems() {
        for p in [box_1d(0.02).unwrap(), ring(0.02).unwrap(), box_1d(0.05).unwrap(), ring(0.1).unwrap()] {
            let closed = p.discrete_spectrum().unwrap();
            let brute = brute_force_eigenvalues(&p.operator).unwrap();
            for (a, b) in closed.iter().zip(&brute) {
                assert!((a - b).abs() < 1e-10, "{}: {a} vs {b}", p.name);
            }
        }
    }

    #[test]
    fn discretization_error_grows_with_n() {
        let p = box_1d(0.02).unwrap();
        let d = p.discrete_spectrum().unwrap();
        let rel: Vec<f64> = (0..10)
            .map(|i| {
                let exact = p.exact_spectrum[i].energy;
                (d[i] - exact).abs() / exact
            })
            .collect();
        assert!(rel.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn analytic_eigenfunctions_are_orthonormal() {
        for (p, states) in [
            (box_1d(0.02).unwrap(), vec![vec![1], vec![2], vec![3]]),
            (ring(0.02).unwrap(), vec![vec![0], vec![1], vec![-1], vec![2]]),
            (harmonic(0.1, 10.0).unwrap(), vec![vec![0], vec![1], vec![2], vec![3]]),
            (cubic_box(0.1).unwrap(), vec![vec![1, 1, 1], vec![1, 1, 2], vec![2, 1, 1]]),
        ] {
            let dv = p.operator.volume_element();
            let f: Vec<Vec<f64>> = states.iter().map(|s| p.exact_eigenfunction(s).unwrap()).collect();
            for i in 0..f.len() {
                for j in 0..f.len() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    let got = inner(&f[i], &f[j], dv);
                    assert!((got - expect).abs() < 1e-2, "{} {i} {j}: {got}", p.name);
                }
            }
        }
    }

    #[test]
    fn discrete_energies_by_state() {
        let b = box_1d(0.02).unwrap();
        assert!((b.discrete_energy(&[3]).unwrap() - 44.281873).abs() < 1e-6);
        assert_eq!(b.discrete_energy(&[0]), None);
        let r = ring(0.01).unwrap();
        assert!((r.discrete_energy(&[-2]).unwrap() - 78.852987).abs() < 1e-5);
        let h = harmonic(0.1, 10.0).unwrap();
        assert!((h.discrete_energy(&[3]).unwrap() - 3.492170).abs() < 1e-5);
        let c = cubic_box(0.05).unwrap();
        assert!((c.discrete_energy(&[1, 2, 3]).unwrap() - 68.099448).abs() < 1e-5);
        assert_eq!(simple_matrix().discrete_energy(&[2]).map(|e| (e - 2.0).abs() < 1e-12), Some(true));
    }

    #[test]
    fn catalog_lookup() {
        for name in CATALOG {
            assert!(BenchmarkProblem::by_name(name).is_some(), "{name}");
        }
        assert!(BenchmarkProblem::by_name("nope").is_none());
    }

    #[test]
    fn tabulated_problem() {
        let xs: Vec<f64> = (1..10).map(|i| i as f64 * 0.1).collect();
        let p = tabulated("t", &xs, vec![0.0; 9], 0.1).unwrap();
        let b = box_1d(0.1).unwrap();
        let a = p.discrete_spectrum().unwrap();
        for (x, y) in a.iter().zip(b.discrete_spectrum().unwrap()) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!(tabulated("t", &xs, vec![0.0; 9], 0.2).is_err());
        assert!(tabulated("t", &xs, vec![0.0; 8], 0.1).is_err());
    }
}
