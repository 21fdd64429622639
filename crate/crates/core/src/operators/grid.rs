use serde::Serialize;

use super::{check_len, LinearOperator};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Wavefunction pinned to zero on the domain edge. Only interior points are stored.
    Dirichlet,
    /// The point at `L` is identified with the point at 0; one point per period is stored.
    Periodic,
}

/// Uniform grid in 1 or 3 dimensions with the same spacing on every axis.
///
/// 3D values are flattened row-major with x fastest:
/// `index = ix + nx * (iy + ny * iz)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    origin: Vec<f64>,
    lengths: Vec<f64>,
    dx: f64,
    bc: Boundary,
    shape: Vec<usize>,
}

impl GridSpec {
    pub fn new(origin: Vec<f64>, lengths: Vec<f64>, dx: f64, bc: Boundary) -> Result<Self> {
        let dim = lengths.len();
        if dim != 1 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 3, got {dim}")));
        }
        if origin.len() != dim {
            return Err(Error::InvalidGrid("origin and lengths differ in dimension".into()));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {dx}")));
        }
        let mut shape = Vec::with_capacity(dim);
        for &len in &lengths {
            let cells = len / dx;
            let rounded = cells.round();
            if !(len > 0.0) || rounded < 1.0 || (cells - rounded).abs() > 1e-9 * rounded.max(1.0) {
                return Err(Error::InvalidGrid(format!(
                    "length {len} is not a positive integer multiple of dx = {dx}"
                )));
            }
            let cells = rounded as usize;
            let points = match bc {
                Boundary::Dirichlet => cells - 1,
                Boundary::Periodic => cells,
            };
            if points == 0 {
                return Err(Error::InvalidGrid(format!(
                    "length {len} with dx = {dx} leaves no interior points"
                )));
            }
            shape.push(points);
        }
        Ok(Self { origin, lengths, dx, bc, shape })
    }

    pub fn line(origin: f64, length: f64, dx: f64, bc: Boundary) -> Result<Self> {
        Self::new(vec![origin], vec![length], dx, bc)
    }

    pub fn cube(origin: [f64; 3], length: f64, dx: f64, bc: Boundary) -> Result<Self> {
        Self::new(origin.to_vec(), vec![length; 3], dx, bc)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn boundary(&self) -> Boundary {
        self.bc
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    /// Stored points per axis.
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Total number of stored points.
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Volume element `dx^dim`.
    pub fn dv(&self) -> f64 {
        self.dx.powi(self.dim() as i32)
    }

    /// Coordinates of the stored points along one axis.
    pub fn axis_coordinates(&self, axis: usize) -> Vec<f64> {
        let offset = match self.bc {
            Boundary::Dirichlet => 1.0,
            Boundary::Periodic => 0.0,
        };
        (0..self.shape[axis])
            .map(|i| self.origin[axis] + (i as f64 + offset) * self.dx)
            .collect()
    }

    /// Evaluates `f` at every stored point in flattening order.
    pub fn sample<F: Fn(&[f64]) -> f64>(&self, f: F) -> Vec<f64> {
        let axes: Vec<Vec<f64>> = (0..self.dim()).map(|a| self.axis_coordinates(a)).collect();
        match self.dim() {
            1 => axes[0].iter().map(|&x| f(&[x])).collect(),
            _ => {
                let mut out = Vec::with_capacity(self.len());
                for &z in &axes[2] {
                    for &y in &axes[1] {
                        for &x in &axes[0] {
                            out.push(f(&[x, y, z]));
                        }
                    }
                }
                out
            }
        }
    }

    /// Writes the three-point second difference (summed over axes) of `v` into `out`.
    pub fn laplacian_into(&self, v: &[f64], out: &mut [f64]) {
        let inv = 1.0 / (self.dx * self.dx);
        let periodic = self.bc == Boundary::Periodic;
        match self.shape[..] {
            [n] => {
                for i in 0..n {
                    let s = axis_neighbors(v, i, i, n, 1, periodic);
                    out[i] = (s - 2.0 * v[i]) * inv;
                }
            }
            [nx, ny, nz] => {
                let (sy, sz) = (nx, nx * ny);
                for iz in 0..nz {
                    for iy in 0..ny {
                        let base = sy * iy + sz * iz;
                        for ix in 0..nx {
                            let i = base + ix;
                            let s = axis_neighbors(v, i, ix, nx, 1, periodic)
                                + axis_neighbors(v, i, iy, ny, sy, periodic)
                                + axis_neighbors(v, i, iz, nz, sz, periodic);
                            out[i] = (s - 6.0 * v[i]) * inv;
                        }
                    }
                }
            }
            _ => unreachable!("grid dimension is validated at construction"),
        }
    }
}

/// Sum of the two neighbors of flat index `i` along one axis, where `c` is the
/// coordinate along that axis, `n` its point count and `stride` its flat stride.
#[inline(always)]
fn axis_neighbors(v: &[f64], i: usize, c: usize, n: usize, stride: usize, periodic: bool) -> f64 {
    let lo = if c > 0 {
        v[i - stride]
    } else if periodic {
        v[i + (n - 1) * stride]
    } else {
        0.0
    };
    let hi = if c + 1 < n {
        v[i + stride]
    } else if periodic {
        v[i - (n - 1) * stride]
    } else {
        0.0
    };
    lo + hi
}

/// Three-point second difference on a 1D grid.
pub fn apply_laplacian_1d(grid: &GridSpec, v: &[f64]) -> Result<Vec<f64>> {
    if grid.dim() != 1 {
        return Err(Error::InvalidGrid(format!("expected a 1D grid, got {}D", grid.dim())));
    }
    check_len(grid.len(), v.len())?;
    let mut out = vec![0.0; v.len()];
    grid.laplacian_into(v, &mut out);
    Ok(out)
}

/// Finite-difference Hamiltonian `-1/2 Laplacian + V - sigma` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridOperator {
    grid: GridSpec,
    potential: Vec<f64>,
    shift: f64,
}

impl GridOperator {
    pub fn new(grid: GridSpec, potential: Vec<f64>) -> Result<Self> {
        check_len(grid.len(), potential.len())?;
        if let Some(i) = potential.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig(format!("potential at point {i} is not finite")));
        }
        Ok(Self { grid, potential, shift: 0.0 })
    }

    /// Zero potential.
    pub fn free(grid: GridSpec) -> Self {
        let potential = vec![0.0; grid.len()];
        Self { grid, potential, shift: 0.0 }
    }

    pub fn shifted(&self, sigma: f64) -> Self {
        Self { shift: self.shift + sigma, ..self.clone() }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Potential as stored, without the shift.
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// `V - sigma` at each point.
    pub fn effective_potential(&self) -> Vec<f64> {
        self.potential.iter().map(|v| v - self.shift).collect()
    }

    /// Writes `-1/2 Laplacian v` into `out`.
    pub fn kinetic_into(&self, v: &[f64], out: &mut [f64]) {
        self.grid.laplacian_into(v, out);
        for o in out.iter_mut() {
            *o *= -0.5;
        }
    }
}

impl LinearOperator for GridOperator {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        self.kinetic_into(v, out);
        for ((o, x), p) in out.iter_mut().zip(v).zip(&self.potential) {
            *o += (p - self.shift) * x;
        }
    }

    fn volume_element(&self) -> f64 {
        self.grid.dv()
    }

    fn shift(&self) -> f64 {
        self.shift
    }
}
