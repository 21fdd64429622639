//! Convergence theory of the filtered iteration and the `E_p` scan driver.
//!
//! With gain `f(E) = E exp(-E/E_p)`, the iterate after `k` steps is dominated
//! by the eigenvalue `E_a` of largest gain; the runner-up `E_b` sets the ratio
//! `R = f(E_b)/f(E_a)` by which the other components shrink per iteration.
//! Selection flips between neighboring eigenvalues at the turning point
//! `E_tp = (E_b - E_a) / ln(E_b/E_a)`, where `R = 1`.
//!
//! Note the distinction between eigenvector and eigenvalue error: components
//! decay like `R^k`, so the residual does too, but the Rayleigh quotient of a
//! symmetric operator is quadratic in the eigenvector error and its error
//! decays like `R^(2k)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filter::{polynomial_gain, FilterConfig, Scheme, SubstepRule};
use crate::power::{filtered_solve_with, IterationSettings, Status};
use crate::problems::BenchmarkProblem;

/// The two eigenvalues with the largest gain at a given peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceModel {
    pub e_a: f64,
    /// `None` when the spectrum has a single distinct eigenvalue.
    pub e_b: Option<f64>,
    pub ratio: f64,
}

/// Distinct values of `spectrum`, ascending; values closer than `1e-9` relative are merged.
pub fn distinct_eigenvalues(spectrum: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = spectrum.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(sorted.len());
    for e in sorted {
        match out.last() {
            Some(&last) if (e - last).abs() <= 1e-9 * e.abs().max(last.abs()).max(1e-300) => {}
            _ => out.push(e),
        }
    }
    out
}

fn rank_by_gain<G: Fn(f64) -> f64>(spectrum: &[f64], gain: G) -> Result<ConvergenceModel> {
    let distinct = distinct_eigenvalues(spectrum);
    if distinct.is_empty() {
        return Err(Error::InvalidConfig("spectrum is empty".into()));
    }
    let mut ranked: Vec<(f64, f64)> = distinct.iter().map(|&e| (e, gain(e).abs())).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (e_a, g_a) = ranked[0];
    Ok(match ranked.get(1) {
        None => ConvergenceModel { e_a, e_b: None, ratio: 0.0 },
        Some(&(e_b, g_b)) => ConvergenceModel { e_a, e_b: Some(e_b), ratio: g_b / g_a },
    })
}

/// `R(E_p)` under the exact filter `E exp(-E/E_p)`.
pub fn convergence_ratio(spectrum: &[f64], e_p: f64) -> Result<ConvergenceModel> {
    if !(e_p > 0.0) {
        return Err(Error::InvalidConfig(format!("E_p must be positive, got {e_p}")));
    }
    if let Some(bad) = spectrum.iter().find(|&&e| !(e > 0.0)) {
        return Err(Error::InvalidConfig(format!("spectrum must be positive, found {bad}")));
    }
    let mut model = rank_by_gain(spectrum, |e| e * (-e / e_p).exp())?;
    if let Some(e_b) = model.e_b {
        model.ratio = (e_b / model.e_a) * (-(e_b - model.e_a) / e_p).exp();
    }
    Ok(model)
}

/// Like [`convergence_ratio`] but ranked by the polynomial gain the solver
/// actually applies, `E (1 - E/(M E_p))^M`. Accepts any real spectrum.
pub fn effective_ratio(spectrum: &[f64], cfg: &FilterConfig) -> Result<ConvergenceModel> {
    rank_by_gain(spectrum, |e| polynomial_gain(e, cfg))
}

/// Eigenvalue the polynomial filter amplifies most.
pub fn selected_eigenvalue(spectrum: &[f64], cfg: &FilterConfig) -> Result<f64> {
    effective_ratio(spectrum, cfg).map(|m| m.e_a)
}

/// Peak position at which `e_a` and `e_b` are amplified equally.
pub fn turning_point(e_a: f64, e_b: f64) -> Result<f64> {
    if !(e_a > 0.0 && e_b > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "turning point needs positive eigenvalues, got {e_a} and {e_b}"
        )));
    }
    if e_a == e_b {
        return Err(Error::InvalidConfig("turning point of equal eigenvalues is undefined".into()));
    }
    Ok((e_b - e_a) / (e_b / e_a).ln())
}

/// Turning points between consecutive distinct positive eigenvalues.
pub fn turning_points(spectrum: &[f64]) -> Vec<f64> {
    let positive: Vec<f64> = spectrum.iter().copied().filter(|&e| e > 0.0).collect();
    distinct_eigenvalues(&positive)
        .windows(2)
        .filter_map(|w| turning_point(w[0], w[1]).ok())
        .collect()
}

/// Geometric error model `err_k ~ beta ratio^k` fitted to a history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorDecayFit {
    pub beta: f64,
    /// Measured per-iteration decay ratio.
    pub ratio: f64,
    /// `ln(tol / beta)`.
    pub c: f64,
    /// `c / ln(ratio)`.
    pub predicted_k: f64,
}

/// Least-squares fit of `ln abs(h_k - e_final)` against `k` over the middle
/// 60% of the history. Points at round-off level are ignored.
pub fn fit_error_decay(history: &[f64], e_final: f64, tol: f64) -> Result<ErrorDecayFit> {
    let n = history.len();
    if n < 10 {
        return Err(Error::FitUnavailable(format!("history has {n} entries, need at least 10")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tol must be positive, got {tol}")));
    }
    let floor = 1e3 * f64::EPSILON * e_final.abs().max(1.0);
    let (start, end) = (n / 5, n - n / 5);
    let points: Vec<(f64, f64)> = (start..end)
        .filter_map(|k| {
            let err = (history[k] - e_final).abs();
            (err > floor && err.is_finite()).then(|| (k as f64, err.ln()))
        })
        .collect();
    if points.len() < 5 {
        return Err(Error::FitUnavailable(format!(
            "only {} usable points in the geometric regime",
            points.len()
        )));
    }
    let m = points.len() as f64;
    let mean_k = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|(k, y)| (k - mean_k) * (y - mean_y)).sum();
    let sxx: f64 = points.iter().map(|(k, _)| (k - mean_k).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_k;
    let ratio = slope.exp();
    let beta = intercept.exp();
    let c = (tol / beta).ln();
    let predicted_k = if ratio > 0.0 && ratio < 1.0 { c / ratio.ln() } else { f64::INFINITY };
    Ok(ErrorDecayFit { beta, ratio, c, predicted_k })
}

/// `k = C / ln(R)` with `C` taken from a fit and `R` from the model.
pub fn predicted_iterations(model: &ConvergenceModel, fit: &ErrorDecayFit) -> Result<f64> {
    if model.ratio >= 1.0 {
        return Err(Error::NonConvergent { ratio: model.ratio });
    }
    if model.ratio <= 0.0 {
        return Ok(0.0);
    }
    Ok(fit.c / model.ratio.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RowStatus {
    Converged,
    MaxIterations,
    Diverged,
    Failed,
}

impl From<Status> for RowStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Converged => RowStatus::Converged,
            Status::MaxIterations => RowStatus::MaxIterations,
            Status::Diverged => RowStatus::Diverged,
        }
    }
}

impl RowStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Converged => "converged",
            RowStatus::MaxIterations => "max_iterations",
            RowStatus::Diverged => "diverged",
            RowStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub e_p: f64,
    /// Unshifted eigenvalue; NaN when the solve failed outright.
    pub eigenvalue: f64,
    pub iterations: usize,
    pub residual: f64,
    pub status: RowStatus,
    pub error: Option<String>,
    pub nearest_e_tp: Option<f64>,
    pub predicted_r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    /// Turning points of the reference spectrum inside the scanned range.
    pub turning_points: Vec<f64>,
}

/// One filtered solve per peak value, run in parallel and returned in order.
///
/// Rows are annotated from the problem's discrete spectrum when it is
/// available, otherwise from its continuum spectrum.
pub fn scan_ep(
    problem: &BenchmarkProblem,
    e_p_grid: &[f64],
    rule: SubstepRule,
    scheme: Scheme,
    settings: &IterationSettings,
) -> Result<ScanResult> {
    if e_p_grid.is_empty() {
        return Err(Error::InvalidConfig("E_p grid is empty".into()));
    }
    if e_p_grid.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidConfig("E_p grid must be positive".into()));
    }
    if e_p_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("E_p grid must be strictly ascending".into()));
    }
    settings.validate()?;

    let shift = crate::operators::LinearOperator::shift(&problem.operator);
    // Reference spectrum as seen by the solver (shifted).
    let reference: Vec<f64> = problem
        .reference_spectrum()
        .iter()
        .map(|e| e - shift)
        .filter(|&e| e > 0.0)
        .collect();
    let all_tp = turning_points(&reference);

    let rows = e_p_grid
        .par_iter()
        .map(|&e_p| {
            let nearest_e_tp = all_tp
                .iter()
                .copied()
                .min_by(|a, b| (a - e_p).abs().total_cmp(&(b - e_p).abs()));
            let predicted_r = convergence_ratio(&reference, e_p).ok().map(|m| m.ratio);
            let outcome = rule
                .config(e_p)
                .and_then(|cfg| filtered_solve_with(&problem.operator, scheme, &cfg, settings));
            match outcome {
                Ok(report) => ScanRow {
                    e_p,
                    eigenvalue: report.unshifted_eigenvalue(),
                    iterations: report.iterations,
                    residual: report.residual,
                    status: report.status.into(),
                    error: None,
                    nearest_e_tp,
                    predicted_r,
                },
                Err(e) => ScanRow {
                    e_p,
                    eigenvalue: f64::NAN,
                    iterations: 0,
                    residual: f64::NAN,
                    status: RowStatus::Failed,
                    error: Some(e.to_string()),
                    nearest_e_tp,
                    predicted_r,
                },
            }
        })
        .collect();

    let (lo, hi) = (e_p_grid[0], e_p_grid[e_p_grid.len() - 1]);
    let turning_points = all_tp.into_iter().filter(|&t| t >= lo && t <= hi).collect();
    Ok(ScanResult { rows, turning_points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::f_of_e;
    use crate::operators::DenseOperator;
    use crate::power::filtered_power_solve;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn ratio_for_one_two_three() {
        let m = convergence_ratio(&[1.0, 2.0, 3.0], 2.0).unwrap();
        assert_eq!((m.e_a, m.e_b), (2.0, Some(3.0)));
        // Closed form evaluated independently of the ranking code.
        assert_relative_eq!(m.ratio, 1.5 * (-0.5f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(m.ratio, 0.9098, epsilon = 1e-4);
        let c = FilterConfig::new(2.0, 1).unwrap();
        assert!(f_of_e(2.0, &c) > f_of_e(3.0, &c) && f_of_e(3.0, &c) > f_of_e(1.0, &c));
    }

    #[test]
    fn ratio_for_single_eigenvalue_is_zero() {
        let m = convergence_ratio(&[7.0, 7.0], 3.0).unwrap();
        assert_eq!((m.e_b, m.ratio), (None, 0.0));
    }

    #[test]
    fn box_ground_state_dominates_at_its_own_peak() {
        let m = convergence_ratio(&[4.9348, 19.7392, 44.4132], 4.9348).unwrap();
        assert_eq!(m.e_a, 4.9348);
        assert_eq!(m.e_b, Some(19.7392));
    }

    #[test]
    fn ratio_rejects_bad_input() {
        assert!(convergence_ratio(&[], 1.0).is_err());
        assert!(convergence_ratio(&[0.0, 1.0], 1.0).is_err());
        assert!(convergence_ratio(&[1.0], 0.0).is_err());
    }

    #[test]
    fn turning_point_examples() {
        let t = turning_point(1.0, 2.0).unwrap();
        assert_relative_eq!(t, 1.0 / 2f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(t, 1.442695, epsilon = 1e-6);
        let c = FilterConfig::new(t, 1).unwrap();
        assert!((f_of_e(1.0, &c) - f_of_e(2.0, &c)).abs() < 1e-12);

        let t = turning_point(4.934802, 19.739208).unwrap();
        assert_relative_eq!(t, (19.739208 - 4.934802) / 4f64.ln(), max_relative = 1e-6);
        assert!((t - 10.679).abs() < 1e-3, "{t}");
        assert_relative_eq!(turning_point(2.0, 4.0).unwrap(), 2.0 * turning_point(1.0, 2.0).unwrap());
        assert!(turning_point(3.0, 3.0).is_err());
        assert!(turning_point(0.0, 3.0).is_err());
    }

    proptest! {
        #[test]
        fn turning_point_brackets_and_flips(e_a in 0.01f64..100.0, gap in 1.001f64..20.0, off in 0.01f64..0.99) {
            let e_b = e_a * gap;
            let t = turning_point(e_a, e_b).unwrap();
            prop_assert!(t > e_a && t < e_b);
            let below = FilterConfig::new(t * (1.0 - off * 0.5), 1).unwrap();
            let above = FilterConfig::new(t * (1.0 + off), 1).unwrap();
            prop_assert!(f_of_e(e_a, &below) > f_of_e(e_b, &below));
            prop_assert!(f_of_e(e_a, &above) < f_of_e(e_b, &above));
        }

        #[test]
        fn fit_recovers_synthetic_ratio(ratio in 0.3f64..0.97, beta in 1e-3f64..10.0, e in -5.0f64..5.0) {
            let n = ((30.0f64).ln() / -(ratio.ln()) * 2.0).max(40.0) as usize;
            let n = n.min(400);
            let h: Vec<f64> = (0..n).map(|k| e + beta * ratio.powi(k as i32)).collect();
            if let Ok(fit) = fit_error_decay(&h, e, 1e-8) {
                prop_assert!((fit.ratio - ratio).abs() < 1e-3 * ratio);
            }
        }
    }

    #[test]
    fn fit_exact_geometric() {
        let h: Vec<f64> = (0..100).map(|k| 2.0 + 0.1 * 0.9f64.powi(k)).collect();
        let fit = fit_error_decay(&h, 2.0, 1e-8).unwrap();
        assert!((fit.ratio - 0.9).abs() < 1e-3);
        assert!((fit.beta - 0.1).abs() < 1e-3);
        assert_relative_eq!(fit.c, (1e-8f64 / fit.beta).ln());
        assert!(fit.predicted_k > 0.0);
    }

    #[test]
    fn fit_with_noise() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let h: Vec<f64> = (0..100)
            .map(|k| 2.0 + 0.1 * 0.9f64.powi(k) + rng.gen_range(-1e-12..1e-12))
            .collect();
        let fit = fit_error_decay(&h, 2.0, 1e-8).unwrap();
        assert!((fit.ratio - 0.9).abs() < 1e-2);
        assert!((fit.beta - 0.1).abs() < 1e-2);
    }

    #[test]
    fn fit_unavailable_cases() {
        assert!(matches!(fit_error_decay(&[1.0; 50], 1.0, 1e-8), Err(Error::FitUnavailable(_))));
        assert!(matches!(fit_error_decay(&[1.0; 5], 0.0, 1e-8), Err(Error::FitUnavailable(_))));
    }

    #[test]
    fn predicted_iterations_examples() {
        let model = ConvergenceModel { e_a: 1.0, e_b: Some(2.0), ratio: 0.5 };
        let c = (2f64.powi(-20)).ln();
        let fit = ErrorDecayFit { beta: 1.0, ratio: 0.5, c, predicted_k: 20.0 };
        assert_relative_eq!(predicted_iterations(&model, &fit).unwrap(), 20.0, max_relative = 1e-12);

        let mut last = 0.0;
        for r in [0.9, 0.99, 0.999, 0.9999] {
            let k = predicted_iterations(&ConvergenceModel { ratio: r, ..model }, &fit).unwrap();
            assert!(k > last);
            last = k;
        }
        assert!(last > 1e5);
        assert!(matches!(
            predicted_iterations(&ConvergenceModel { ratio: 1.0, ..model }, &fit),
            Err(Error::NonConvergent { .. })
        ));
    }

    #[test]
    fn selection_matches_gain_argmax_on_diagonal_operators() {
        let spectrum = [0.7, 1.9, 2.6, 4.1, 6.0];
        let d = DenseOperator::diagonal(&spectrum).unwrap();
        let s = IterationSettings { init: Some(vec![1.0; 5]), max_iter: 200_000, ..Default::default() };
        let tps = turning_points(&spectrum);
        for i in 1..60 {
            let e_p = 0.1 * i as f64;
            // Stay clear of turning points where convergence stalls.
            let cfg = FilterConfig::new(e_p, 200).unwrap();
            let m = effective_ratio(&spectrum, &cfg).unwrap();
            if m.ratio > 0.995 || tps.iter().any(|t| (t - e_p).abs() < 0.02) {
                continue;
            }
            let r = filtered_power_solve(&d, &cfg, &s).unwrap();
            assert!(r.converged(), "E_p {e_p}");
            assert!((r.eigenvalue - m.e_a).abs() < 1e-8, "E_p {e_p}: {} vs {}", r.eigenvalue, m.e_a);
        }
    }
}
