//! Spectral filter `F = H exp(-tau H)` and its short-time approximations.
//!
//! The exponential is split into `M` substeps of length `dtau = tau / M`,
//! each approximated to first order. Two substep kinds are available:
//!
//! * [`Scheme::Polynomial`]: `v <- v - dtau H v`. The resulting filter is the
//!   polynomial `g(H) = H (1 - dtau H)^M`, so it has exactly the eigenvectors
//!   of `H` and amplifies eigenvalue `E` by `g(E) = E (1 - E/(M E_p))^M`.
//! * [`Scheme::Split`]: the potential is treated semi-implicitly,
//!   `v <- a v - dtau b T v` with `T = -1/2 Laplacian`,
//!   `a = (1 - V dtau/2)/(1 + V dtau/2)` and `b = 1/(1 + V dtau/2)`.
//!   It is stable for large potentials but is not a polynomial in `H`, so its
//!   fixed point is an eigenvector of `H` only up to `O(dtau)`.
//!
//! In both cases `H` is applied once after the substeps.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{check_len, GridOperator, GridSpec, LinearOperator};
use crate::vector::{all_finite, axpy};

/// Substep kind used to approximate `exp(-tau H)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Polynomial,
    Split,
}

/// Filter parameters. `tau = alpha / e_p` and `dtau = tau / m` are derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterConfig {
    e_p: f64,
    alpha: f64,
    m: usize,
}

impl FilterConfig {
    /// Peak at `e_p` with `alpha = 1` and `m` substeps.
    pub fn new(e_p: f64, m: usize) -> Result<Self> {
        Self::with_alpha(e_p, 1.0, m)
    }

    pub fn with_alpha(e_p: f64, alpha: f64, m: usize) -> Result<Self> {
        if !(e_p > 0.0 && e_p.is_finite()) {
            return Err(Error::InvalidConfig(format!("E_p must be positive, got {e_p}")));
        }
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha must be >= 1, got {alpha}")));
        }
        if m == 0 {
            return Err(Error::InvalidConfig("M must be at least 1".into()));
        }
        Ok(Self { e_p, alpha, m })
    }

    /// Picks `M = round(tau / dtau)` so the substep matches a target time step.
    pub fn from_time_step(e_p: f64, dtau: f64) -> Result<Self> {
        if !(dtau > 0.0 && dtau.is_finite()) {
            return Err(Error::InvalidConfig(format!("dtau must be positive, got {dtau}")));
        }
        if !(e_p > 0.0 && e_p.is_finite()) {
            return Err(Error::InvalidConfig(format!("E_p must be positive, got {e_p}")));
        }
        let m = (1.0 / (e_p * dtau)).round().max(1.0);
        if m > u32::MAX as f64 {
            return Err(Error::InvalidConfig(format!(
                "E_p = {e_p} with dtau = {dtau} needs {m:e} substeps"
            )));
        }
        Self::new(e_p, m as usize)
    }

    pub fn e_p(&self) -> f64 {
        self.e_p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn tau(&self) -> f64 {
        self.alpha / self.e_p
    }

    pub fn dtau(&self) -> f64 {
        self.tau() / self.m as f64
    }

    fn require_unit_alpha(&self) -> Result<()> {
        if self.alpha == 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "filter application supports alpha = 1 only, got {}",
                self.alpha
            )))
        }
    }
}

/// How the substep count is chosen when the peak varies (scans, tables).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubstepRule {
    /// Same `M` for every peak.
    Fixed(usize),
    /// `M = round(1 / (E_p dtau))`.
    TimeStep(f64),
}

impl SubstepRule {
    pub fn config(&self, e_p: f64) -> Result<FilterConfig> {
        match *self {
            SubstepRule::Fixed(m) => FilterConfig::new(e_p, m),
            SubstepRule::TimeStep(dtau) => FilterConfig::from_time_step(e_p, dtau),
        }
    }
}

/// `f(E) = E^alpha exp(-tau E)`.
pub fn f_of_e(e: f64, cfg: &FilterConfig) -> f64 {
    e.powf(cfg.alpha) * (-cfg.tau() * e).exp()
}

/// Amplification of eigenvalue `E` by the polynomial filter,
/// `E^alpha (1 - dtau E)^M`.
pub fn polynomial_gain(e: f64, cfg: &FilterConfig) -> f64 {
    e.powf(cfg.alpha) * (1.0 - cfg.dtau() * e).powi(cfg.m as i32)
}

fn check_input<O: LinearOperator + ?Sized>(op: &O, v: &[f64]) -> Result<()> {
    check_len(op.dim(), v.len())?;
    if v.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(())
}

/// Applies `(1 - dtau H)^M` in place, checking finiteness after every substep.
fn evolve_polynomial<O: LinearOperator + ?Sized>(op: &O, v: &mut [f64], cfg: &FilterConfig) -> Result<()> {
    let dtau = cfg.dtau();
    let mut hv = vec![0.0; v.len()];
    for substep in 1..=cfg.m {
        op.apply_into(v, &mut hv);
        axpy(-dtau, &hv, v);
        if !all_finite(v) {
            return Err(Error::NonFinite { substep });
        }
    }
    Ok(())
}

fn apply_prefactor<O: LinearOperator + ?Sized>(op: &O, v: &[f64], substep: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; v.len()];
    op.apply_into(v, &mut out);
    if all_finite(&out) {
        Ok(out)
    } else {
        Err(Error::NonFinite { substep })
    }
}

/// `H (1 - H/(M E_p))^M v`: exactly `M + 1` operator applications.
pub fn apply_filter_polynomial<O: LinearOperator + ?Sized>(
    op: &O,
    v: &[f64],
    cfg: &FilterConfig,
) -> Result<Vec<f64>> {
    cfg.require_unit_alpha()?;
    check_input(op, v)?;
    let mut w = v.to_vec();
    evolve_polynomial(op, &mut w, cfg)?;
    apply_prefactor(op, &w, cfg.m + 1)
}

/// `(1 - dtau H)^M v`, the short-time approximation of `exp(-tau H) v`.
pub fn apply_evolution_polynomial<O: LinearOperator + ?Sized>(
    op: &O,
    v: &[f64],
    cfg: &FilterConfig,
) -> Result<Vec<f64>> {
    check_input(op, v)?;
    let mut w = v.to_vec();
    evolve_polynomial(op, &mut w, cfg)?;
    Ok(w)
}

/// Per-point coefficients of the split substep.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitCoefficients {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl SplitCoefficients {
    /// Coefficients for potential values `potential` and time step `dtau`.
    pub fn new(potential: &[f64], dtau: f64) -> Self {
        let (a, b) = potential
            .iter()
            .map(|&v| {
                let half = 0.5 * v * dtau;
                ((1.0 - half) / (1.0 + half), 1.0 / (1.0 + half))
            })
            .unzip();
        Self { a, b }
    }

    /// Coefficients for an operator, using its shifted potential `V - sigma`.
    pub fn for_operator(op: &GridOperator, dtau: f64) -> Self {
        Self::new(&op.effective_potential(), dtau)
    }
}

/// Outcome of [`stability_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stability {
    pub pass: bool,
    /// How many times smaller the time step is than the largest stable one.
    pub margin: f64,
}

/// Time-step stability of the substep scheme on a grid.
///
/// * Split: passes iff `dim * max b * dtau < dx^2`.
/// * Polynomial: passes iff `dtau * lambda_max <= 2`, where
///   `lambda_max = 2 dim / dx^2 + max V` bounds the spectrum; for `V = 0` in
///   1D this is `dtau <= dx^2`.
pub fn stability_check(grid: &GridSpec, potential: &[f64], dtau: f64, scheme: Scheme) -> Stability {
    let dim = grid.dim() as f64;
    let dx2 = grid.dx() * grid.dx();
    match scheme {
        Scheme::Split => {
            let mut max_b: f64 = 0.0;
            for &v in potential {
                let denom = 1.0 + 0.5 * v * dtau;
                if !(denom > 0.0) {
                    return Stability { pass: false, margin: 0.0 };
                }
                max_b = max_b.max(1.0 / denom);
            }
            if potential.is_empty() {
                max_b = 1.0;
            }
            let margin = dx2 / (dim * max_b * dtau);
            Stability { pass: margin > 1.0, margin }
        }
        Scheme::Polynomial => {
            let vmax = potential.iter().copied().fold(0.0f64, f64::max);
            let lambda_max = 2.0 * dim / dx2 + vmax;
            let margin = 2.0 / (dtau * lambda_max);
            Stability { pass: margin >= 1.0, margin }
        }
    }
}

fn evolve_split(op: &GridOperator, v: &mut [f64], cfg: &FilterConfig) -> Result<()> {
    let dtau = cfg.dtau();
    let eff = op.effective_potential();
    let stab = stability_check(op.grid(), &eff, dtau, Scheme::Split);
    if !stab.pass {
        return Err(Error::Unstable { margin: stab.margin });
    }
    let SplitCoefficients { a, b } = SplitCoefficients::new(&eff, dtau);
    let mut tv = vec![0.0; v.len()];
    for substep in 1..=cfg.m {
        op.kinetic_into(v, &mut tv);
        for i in 0..v.len() {
            v[i] = a[i] * v[i] - dtau * b[i] * tv[i];
        }
        if !all_finite(v) {
            return Err(Error::NonFinite { substep });
        }
    }
    Ok(())
}

/// `M` split substeps followed by one application of `H`.
pub fn apply_filter_split(op: &GridOperator, v: &[f64], cfg: &FilterConfig) -> Result<Vec<f64>> {
    cfg.require_unit_alpha()?;
    check_input(op, v)?;
    let mut w = v.to_vec();
    evolve_split(op, &mut w, cfg)?;
    apply_prefactor(op, &w, cfg.m + 1)
}

/// `M` split substeps without the `H` prefactor.
pub fn apply_evolution_split(op: &GridOperator, v: &[f64], cfg: &FilterConfig) -> Result<Vec<f64>> {
    check_input(op, v)?;
    let mut w = v.to_vec();
    evolve_split(op, &mut w, cfg)?;
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{Boundary, DenseOperator};
    use approx::assert_relative_eq;

    fn sample_matrix() -> DenseOperator {
        DenseOperator::from_rows(&[
            vec![2.0, 0.0, 0.0],
            vec![0.0, 2.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ])
        .unwrap()
    }

    #[test]
    fn config_derivations() {
        let c = FilterConfig::new(1.6, 100).unwrap();
        assert_eq!(c.tau(), 1.0 / 1.6);
        assert_eq!(c.dtau(), (1.0 / 1.6) / 100.0);
        let g = FilterConfig::from_time_step(45.0, 4e-5).unwrap();
        assert_eq!(g.m(), 556);
        assert!(FilterConfig::new(0.0, 10).is_err());
        assert!(FilterConfig::new(-2.0, 10).is_err());
        assert!(FilterConfig::new(1.0, 0).is_err());
        assert!(FilterConfig::with_alpha(1.0, 0.5, 10).is_err());
    }

    #[test]
    fn f_of_e_values() {
        let c = FilterConfig::new(1.0, 1).unwrap();
        assert_eq!(f_of_e(0.0, &c), 0.0);
        assert_relative_eq!(f_of_e(1.0, &c), 0.3678794, epsilon = 1e-7);
        let c = FilterConfig::new(2.0, 1).unwrap();
        // Independent evaluation: E * exp(-E / 2).
        let oracle = |e: f64| e * (-e / 2.0).exp();
        for (e, printed) in [(1.0, 0.6065307), (2.0, 0.7357589), (3.0, 0.6693905)] {
            assert_relative_eq!(f_of_e(e, &c), oracle(e), max_relative = 1e-15);
            assert_relative_eq!(f_of_e(e, &c), printed, epsilon = 1e-7);
        }
    }

    #[test]
    fn peak_sits_at_e_p() {
        for alpha in [1.0, 2.0, 3.0] {
            for e_p in [0.5, 1.0, 7.0] {
                let c = FilterConfig::with_alpha(e_p, alpha, 1).unwrap();
                let h = 5.0 * e_p / 20_000.0;
                let best = (0..=20_000)
                    .map(|i| i as f64 * h)
                    .max_by(|a, b| f_of_e(*a, &c).total_cmp(&f_of_e(*b, &c)))
                    .unwrap();
                assert!((best - e_p).abs() <= h, "alpha {alpha} e_p {e_p}: {best}");
            }
        }
    }

    #[test]
    fn polynomial_filter_on_eigenvector() {
        let h = sample_matrix();
        let c = FilterConfig::new(1.6, 100).unwrap();
        let out = apply_filter_polynomial(&h, &[1.0, 0.0, 0.0], &c).unwrap();
        // Scalar recurrence on eigenvalue 2.
        let mut s = 1.0;
        for _ in 0..100 {
            s -= (2.0 / 160.0) * s;
        }
        s *= 2.0;
        assert_relative_eq!(out[0], s, max_relative = 1e-14);
        assert_relative_eq!(s, 0.5672, epsilon = 2e-3);
        assert_eq!(&out[1..], &[0.0, 0.0]);
    }

    #[test]
    fn polynomial_filter_counts_applications() {
        struct Counting<'a>(&'a DenseOperator, std::sync::atomic::AtomicUsize);
        impl LinearOperator for Counting<'_> {
            fn dim(&self) -> usize {
                self.0.dim()
            }
            fn apply_into(&self, v: &[f64], out: &mut [f64]) {
                self.1.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                self.0.apply_into(v, out)
            }
        }
        let h = sample_matrix();
        let op = Counting(&h, Default::default());
        apply_filter_polynomial(&op, &[0.7, 0.8, 0.4], &FilterConfig::new(1.6, 37).unwrap()).unwrap();
        assert_eq!(op.1.into_inner(), 38);
    }

    #[test]
    fn zero_vector_and_alpha_rejected() {
        let h = sample_matrix();
        let c = FilterConfig::new(1.6, 10).unwrap();
        assert_eq!(apply_filter_polynomial(&h, &[0.0; 3], &c), Err(Error::ZeroVector));
        let c2 = FilterConfig::with_alpha(1.6, 2.0, 10).unwrap();
        assert!(matches!(
            apply_filter_polynomial(&h, &[1.0; 3], &c2),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn blow_up_names_the_substep() {
        let h = DenseOperator::diagonal(&[1e300]).unwrap();
        let c = FilterConfig::new(1.0, 5).unwrap();
        assert!(matches!(
            apply_filter_polynomial(&h, &[1.0], &c),
            Err(Error::NonFinite { substep: 2 })
        ));
    }

    #[test]
    fn gain_converges_to_exponential_at_first_order() {
        let (e, e_p) = (2.0f64, 1.6);
        let exact = e * (-e / e_p).exp();
        let errs: Vec<f64> = [50, 100, 200, 400, 800]
            .iter()
            .map(|&m| (polynomial_gain(e, &FilterConfig::new(e_p, m).unwrap()) - exact).abs())
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
        }
    }

    #[test]
    fn split_reduces_to_plain_step_without_potential() {
        let g = GridSpec::line(0.0, 1.0, 0.02, Boundary::Dirichlet).unwrap();
        let op = GridOperator::free(g.clone());
        let v: Vec<f64> = (0..g.len()).map(|i| ((i * 7 % 11) as f64) + 0.5).collect();
        let c = FilterConfig::new(1.0 / 4e-5, 1).unwrap();
        let split = apply_evolution_split(&op, &v, &c).unwrap();
        let hv = op.apply(&v).unwrap();
        for i in 0..v.len() {
            let plain = v[i] - c.dtau() * hv[i];
            assert!((split[i] - plain).abs() <= 1e-12 * plain.abs().max(1.0));
        }
        let c = FilterConfig::from_time_step(5.0, 4e-5).unwrap();
        let a = apply_filter_split(&op, &v, &c).unwrap();
        let b = apply_filter_polynomial(&op, &v, &c).unwrap();
        let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn split_coefficients() {
        let s = SplitCoefficients::new(&[0.0, 2.0, 50.0], 0.01);
        assert_eq!((s.a[0], s.b[0]), (1.0, 1.0));
        assert_relative_eq!(s.a[1], 0.99 / 1.01);
        assert_relative_eq!(s.b[1], 1.0 / 1.01);
        assert!(s.b.iter().all(|&b| b > 0.0 && b <= 1.0));
    }

    #[test]
    fn stability_examples() {
        let g = GridSpec::line(0.0, 1.0, 0.02, Boundary::Dirichlet).unwrap();
        let zero = vec![0.0; g.len()];
        let dx2 = 0.02 * 0.02;
        for scheme in [Scheme::Split, Scheme::Polynomial] {
            let s = stability_check(&g, &zero, dx2 / 10.0, scheme);
            assert!(s.pass);
            assert_relative_eq!(s.margin, 10.0, max_relative = 1e-12);
            assert!(!stability_check(&g, &zero, 2.0 * dx2, scheme).pass);
        }
        let big: Vec<f64> = (0..g.len()).map(|i| 1e3 * i as f64).collect();
        assert!(stability_check(&g, &big, 0.99 * dx2, Scheme::Split).pass);
        assert!(!stability_check(&g, &[-1e9], dx2 / 10.0, Scheme::Split).pass);
    }

    #[test]
    fn unstable_split_is_rejected_up_front() {
        let g = GridSpec::line(0.0, 1.0, 0.02, Boundary::Dirichlet).unwrap();
        let op = GridOperator::free(g.clone());
        let c = FilterConfig::new(1.0, 1).unwrap();
        assert!(matches!(
            apply_filter_split(&op, &vec![1.0; g.len()], &c),
            Err(Error::Unstable { .. })
        ));
    }
}
