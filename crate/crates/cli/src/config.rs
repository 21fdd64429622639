use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use fpower_core::problems::{self, default_dtau, BenchmarkProblem, CATALOG};
use fpower_core::{FilterConfig, IterationSettings, LinearOperator, Scheme, SubstepRule};
use serde::Serialize;

/// Failure that maps to exit code 1.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<fpower_core::Error> for ConfigError {
    fn from(e: fpower_core::Error) -> Self {
        ConfigError(e.to_string())
    }
}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeArg {
    Polynomial,
    Split,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Polynomial => Scheme::Polynomial,
            SchemeArg::Split => Scheme::Split,
        }
    }
}

/// Flags shared by `solve` and `scan`.
#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Catalog name or a two-column CSV file of (x, V(x)).
    #[arg(long)]
    pub problem: String,
    /// Substep count M; default derived from the time step.
    #[arg(long)]
    pub m: Option<usize>,
    /// Filter exponent; only 1 is supported by the solvers.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long)]
    pub dx: Option<f64>,
    /// Imaginary time step; default dx^2/10.
    #[arg(long)]
    pub dtau: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Residual bound required for convergence.
    #[arg(long, default_value_t = 1e-6)]
    pub residual_tol: f64,
    /// Stop on the eigenvalue difference alone.
    #[arg(long)]
    pub no_residual_check: bool,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Comma-separated initial vector.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub init: Option<Vec<f64>>,
    /// Spectral shift sigma; the operator iterated is H - sigma.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub shift: f64,
    #[arg(long, value_enum, default_value_t = SchemeArg::Polynomial)]
    pub scheme: SchemeArg,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Defaults to json for a `.json` output path, csv otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Everything a run used, with defaults expanded.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub problem: String,
    pub dim: usize,
    pub dx: Option<f64>,
    pub dtau: Option<f64>,
    pub m: Option<usize>,
    pub alpha: f64,
    pub tol: f64,
    pub residual_tol: Option<f64>,
    pub max_iter: usize,
    pub seed: u64,
    pub init: Option<Vec<f64>>,
    pub shift: f64,
    pub scheme: SchemeArg,
    pub format: Format,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    /// `key = value` pairs for file headers. With a filter the effective
    /// `E_p`, `M` and substep are listed; otherwise `M` is `round(1/(E_p dtau))`.
    pub fn echo(&self, filter: Option<&FilterConfig>) -> Vec<(String, String)> {
        let opt = |v: Option<f64>| v.map_or("none".to_string(), crate::output::fmt_num);
        let mut out = vec![
            ("problem".to_string(), self.problem.clone()),
            ("dim".to_string(), self.dim.to_string()),
            ("dx".to_string(), opt(self.dx)),
        ];
        match filter {
            Some(f) => {
                out.push(("e_p".to_string(), crate::output::fmt_num(f.e_p())));
                out.push(("m".to_string(), f.m().to_string()));
                out.push(("dtau".to_string(), crate::output::fmt_num(f.dtau())));
            }
            None => {
                let m = self.m.map_or("round(1/(e_p*dtau))".to_string(), |m| m.to_string());
                out.push(("m".to_string(), m));
                let dtau = self.dtau.map_or("1/(m*e_p)".to_string(), crate::output::fmt_num);
                out.push(("dtau".to_string(), dtau));
            }
        }
        out.extend([
            ("alpha".to_string(), crate::output::fmt_num(self.alpha)),
            ("tol".to_string(), crate::output::fmt_num(self.tol)),
            ("residual_tol".to_string(), opt(self.residual_tol)),
            ("max_iter".to_string(), self.max_iter.to_string()),
            ("seed".to_string(), self.seed.to_string()),
        ]);
        let init = match &self.init {
            Some(v) => v.iter().map(|x| crate::output::fmt_num(*x)).collect::<Vec<_>>().join(" "),
            None => "random".to_string(),
        };
        out.push(("init".to_string(), init));
        out.push(("shift".to_string(), crate::output::fmt_num(self.shift)));
        let scheme = match self.scheme {
            SchemeArg::Polynomial => "polynomial",
            SchemeArg::Split => "split",
        };
        out.push(("scheme".to_string(), scheme.to_string()));
        out
    }

    pub fn settings(&self) -> IterationSettings {
        IterationSettings {
            tol: self.tol,
            residual_tol: self.residual_tol,
            max_iter: self.max_iter,
            seed: self.seed,
            init: self.init.clone(),
        }
    }
}

/// A problem ready to solve plus the resolved settings.
pub struct Resolved {
    pub problem: BenchmarkProblem,
    pub config: RunConfig,
}

impl Resolved {
    /// Substep rule used for every `E_p` of this run.
    pub fn rule(&self) -> SubstepRule {
        match (self.config.m, self.config.dtau) {
            (Some(m), _) => SubstepRule::Fixed(m),
            (None, Some(dtau)) => SubstepRule::TimeStep(dtau),
            (None, None) => self.problem.substep_rule,
        }
    }

    pub fn filter(&self, e_p: f64) -> Result<FilterConfig, ConfigError> {
        if !(e_p > 0.0 && e_p.is_finite()) {
            return Err(bad(format!("E_p must be positive, got {e_p}")));
        }
        Ok(self.rule().config(e_p)?)
    }
}

fn default_dx(name: &str) -> Option<f64> {
    match name {
        "box1d" => Some(0.02),
        "ring" => Some(0.01),
        "harmonic" => Some(0.1),
        "cubic" => Some(0.05),
        _ => None,
    }
}

fn build_catalog(name: &str, dx: f64) -> Result<BenchmarkProblem, ConfigError> {
    let p = match name {
        "box1d" => problems::box_1d(dx),
        "ring" => problems::ring(dx),
        "harmonic" => problems::harmonic(dx, 10.0),
        "cubic" => problems::cubic_box(dx),
        _ => unreachable!("grid catalog names are checked by the caller"),
    };
    Ok(p?)
}

/// Reads `(x, V)` rows; a non-numeric first row is taken as a header.
pub fn read_potential(path: &Path) -> Result<(Vec<f64>, Vec<f64>), ConfigError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    let (mut xs, mut vs) = (Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(format!("{}: {e}", path.display())))?;
        if record.len() != 2 {
            return Err(bad(format!("{}: row {} has {} columns, expected 2", path.display(), i + 1, record.len())));
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(x), Ok(v)) => {
                xs.push(x);
                vs.push(v);
            }
            _ if i == 0 => continue,
            _ => return Err(bad(format!("{}: row {} is not numeric", path.display(), i + 1))),
        }
    }
    if xs.len() < 2 {
        return Err(bad(format!("{}: need at least two rows", path.display())));
    }
    Ok((xs, vs))
}

fn unknown_problem(name: &str) -> ConfigError {
    bad(format!(
        "unknown problem '{name}'; available: {} (or a path to a two-column x,V CSV file)",
        CATALOG.join(", ")
    ))
}

pub fn resolve(args: &ProblemArgs) -> Result<Resolved, ConfigError> {
    if args.alpha != 1.0 {
        return Err(bad(format!("only alpha = 1 is supported, got {}", args.alpha)));
    }
    if args.m.is_some() && args.dtau.is_some() {
        return Err(bad("give at most one of --m and --dtau"));
    }
    if args.m == Some(0) {
        return Err(bad("--m must be at least 1"));
    }
    for (flag, v) in [("--dx", args.dx), ("--dtau", args.dtau)] {
        if let Some(v) = v {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(format!("{flag} must be positive, got {v}")));
            }
        }
    }

    let name = args.problem.as_str();
    let (mut problem, dx) = if name == "simple-matrix" {
        if args.dx.is_some() {
            return Err(bad("--dx does not apply to simple-matrix"));
        }
        (problems::simple_matrix(), None)
    } else if CATALOG.contains(&name) {
        let dx = args.dx.or_else(|| default_dx(name)).expect("grid problems have a default dx");
        (build_catalog(name, dx)?, Some(dx))
    } else if Path::new(name).is_file() {
        let (xs, vs) = read_potential(Path::new(name))?;
        let spacing = xs[1] - xs[0];
        let dx = args.dx.unwrap_or(spacing);
        let stem = Path::new(name).file_stem().and_then(|s| s.to_str()).unwrap_or("tabulated");
        let p = problems::tabulated(stem, &xs, vs, dx)
            .map_err(|e| bad(format!("potential table does not match the grid: {e}")))?;
        (p, Some(dx))
    } else {
        return Err(unknown_problem(name));
    };

    if args.shift != 0.0 {
        if !args.shift.is_finite() {
            return Err(bad("--shift must be finite"));
        }
        problem.operator = problem.operator.shifted(args.shift);
    }
    let dim = problem.operator.dim();
    if let Some(init) = &args.init {
        if init.len() != dim {
            return Err(bad(format!("--init has {} entries, problem dimension is {dim}", init.len())));
        }
    }
    if args.scheme == SchemeArg::Split && problem.grid().is_none() {
        return Err(bad("--scheme split needs a grid problem"));
    }

    let dtau = match (args.m, args.dtau, dx) {
        (Some(_), _, _) => None,
        (None, Some(d), _) => Some(d),
        (None, None, Some(dx)) => Some(default_dtau(dx)),
        (None, None, None) => None,
    };
    let m = match (args.m, dtau) {
        (Some(m), _) => Some(m),
        (None, None) => match problem.substep_rule {
            SubstepRule::Fixed(m) => Some(m),
            SubstepRule::TimeStep(_) => None,
        },
        (None, Some(_)) => None,
    };
    let format = args.format.unwrap_or_else(|| match &args.output {
        Some(p) if p.extension().is_some_and(|e| e == "json") => Format::Json,
        _ => Format::Csv,
    });

    let config = RunConfig {
        problem: problem.name.clone(),
        dim,
        dx,
        dtau,
        m,
        alpha: args.alpha,
        tol: args.tol,
        residual_tol: (!args.no_residual_check).then_some(args.residual_tol),
        max_iter: args.max_iter,
        seed: args.seed,
        init: args.init.clone(),
        shift: args.shift,
        scheme: args.scheme,
        format,
        output: args.output.clone(),
    };
    config.settings().validate()?;
    Ok(Resolved { problem, config })
}
