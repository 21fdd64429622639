//! Fixtures shared by the benchmarks.

use fpower_core::problems::{self, BenchmarkProblem};
use fpower_core::{FilterConfig, LinearOperator};

/// A problem, a peak and a deterministic input vector of matching length.
pub struct Fixture {
    pub problem: BenchmarkProblem,
    pub filter: FilterConfig,
    pub input: Vec<f64>,
}

fn smooth_input(n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.37).sin()).collect()
}

fn fixture(problem: BenchmarkProblem, e_p: f64) -> Fixture {
    let filter = problem.substep_rule.config(e_p).expect("positive peak");
    let input = smooth_input(problem.operator.dim());
    Fixture { problem, filter, input }
}

/// 19^3 cube at the default spacing, peak at the (1,2,2) level.
pub fn cube() -> Fixture {
    fixture(problems::cubic_box(0.05).expect("valid grid"), 44.4)
}

/// 49-point box at the default spacing, peak at the third level.
pub fn box_1d() -> Fixture {
    fixture(problems::box_1d(0.02).expect("valid grid"), 45.0)
}

pub fn harmonic() -> Fixture {
    fixture(problems::harmonic(0.1, 10.0).expect("valid grid"), 3.5)
}

pub fn simple_matrix() -> Fixture {
    let mut f = fixture(problems::simple_matrix(), 1.6);
    f.input = vec![0.7, 0.8, 0.4];
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_match_their_operators() {
        for f in [cube(), box_1d(), harmonic(), simple_matrix()] {
            assert_eq!(f.input.len(), f.problem.operator.dim());
            assert!(f.filter.m() >= 1);
        }
        assert_eq!(cube().input.len(), 6859);
    }
}
