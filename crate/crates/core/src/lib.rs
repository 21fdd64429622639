//! Filtered power iteration for real symmetric eigenvalue problems.
//!
//! Classic power iteration converges to the eigenvalue of largest magnitude.
//! Iterating with `F = H exp(-tau H)` instead amplifies each eigencomponent by
//! `f(E) = E exp(-E/E_p)`, which peaks at `E_p = 1/tau`, so the iteration
//! converges to the eigenvalue nearest (in the sense of `f`) to a chosen
//! target. Any eigenvalue can be reached by moving `E_p`, using only
//! operator-vector products and no deflation.
//!
//! The crate is organized as:
//!
//! * [`operators`]: dense matrices and finite-difference grid Hamiltonians.
//! * [`filter`]: the gain function and short-time approximations of `F`.
//! * [`power`]: the iteration drivers and their reports.
//! * [`analysis`]: convergence ratios, turning points, error-decay fits, `E_p` scans.
//! * [`problems`]: validation problems with reference spectra and a Jacobi oracle.
//!
//! ```
//! use fpower_core::{filtered_power_solve, problems, FilterConfig, IterationSettings};
//!
//! let problem = problems::simple_matrix();
//! let cfg = FilterConfig::new(1.6, 100).unwrap();
//! let settings = IterationSettings { init: Some(vec![0.7, 0.8, 0.4]), ..Default::default() };
//! let report = filtered_power_solve(&problem.operator, &cfg, &settings).unwrap();
//! assert!((report.eigenvalue - 2.0).abs() < 1e-8);
//! ```

pub mod analysis;
pub mod error;
pub mod filter;
pub mod operators;
pub mod power;
pub mod problems;
pub mod vector;

pub use analysis::{
    convergence_ratio, fit_error_decay, predicted_iterations, scan_ep, turning_point, ConvergenceModel,
    ErrorDecayFit, RowStatus, ScanResult, ScanRow,
};
pub use error::{Error, Result};
pub use filter::{FilterConfig, Scheme, SubstepRule};
pub use operators::{Boundary, DenseOperator, GridOperator, GridSpec, LinearOperator, Operator};
pub use power::{
    exponential_power_solve, filtered_power_solve, power_solve, IterationReport, IterationSettings, Status,
};
pub use problems::BenchmarkProblem;
