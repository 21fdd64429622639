use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fpower_core::analysis::{scan_ep, RowStatus, ScanResult};
use fpower_core::filter::stability_check;
use fpower_core::power::filtered_solve_with;
use fpower_core::{FilterConfig, IterationReport, Scheme, Status};
use serde_json::json;

use crate::config::{resolve, ConfigError, Format, ProblemArgs, Resolved};
use crate::output::{csv_writer, fmt_num, opt_num, sink, write_comments};

pub const EXIT_MAX_ITER: u8 = 2;
pub const EXIT_DIVERGED: u8 = 3;

pub fn status_code(status: Status) -> u8 {
    match status {
        Status::Converged => 0,
        Status::MaxIterations => EXIT_MAX_ITER,
        Status::Diverged => EXIT_DIVERGED,
    }
}

fn warn_if_unstable(resolved: &Resolved, cfg: &FilterConfig) {
    if let Some(grid_op) = resolved.problem.operator.as_grid() {
        let scheme: Scheme = resolved.config.scheme.into();
        let s = stability_check(grid_op.grid(), &grid_op.effective_potential(), cfg.dtau(), scheme);
        if !s.pass {
            eprintln!("warning: substep {} is outside the stability bound (margin {})", fmt_num(cfg.dtau()), fmt_num(s.margin));
        }
    }
}

/// `out.csv` -> `out.eigenvector.csv`.
fn sibling_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    output.with_file_name(format!("{stem}.eigenvector.csv"))
}

fn order_note(shape: &[usize]) -> String {
    match shape.len() {
        3 => "row-major, x fastest: index = ix + nx*(iy + ny*iz)".into(),
        _ => "index".into(),
    }
}

fn write_eigenvector(resolved: &Resolved, report: &IterationReport, path: &Path) -> Result<()> {
    let mut w = sink(Some(path)).with_context(|| format!("cannot create {}", path.display()))?;
    let shape: Vec<usize> = match resolved.problem.grid() {
        Some(g) => g.shape().to_vec(),
        None => vec![report.eigenvector.len()],
    };
    let shape_str = shape.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("x");
    let mut header = vec![
        ("problem".to_string(), resolved.problem.name.clone()),
        ("shape".to_string(), shape_str),
        ("order".to_string(), order_note(&shape)),
    ];
    if let Some(g) = resolved.problem.grid() {
        header.push(("dv".to_string(), fmt_num(g.dv())));
    }
    header.push(("eigenvalue".to_string(), fmt_num(report.unshifted_eigenvalue())));
    write_comments(&mut w, &header)?;
    let mut csv = csv_writer(w);
    match resolved.problem.grid() {
        Some(g) => {
            let axes: Vec<Vec<f64>> = (0..g.dim()).map(|a| g.axis_coordinates(a)).collect();
            let names = ["x", "y", "z"];
            let mut head = vec!["index"];
            head.extend(&names[..g.dim()]);
            head.push("psi");
            csv.write_record(&head)?;
            for (i, psi) in report.eigenvector.iter().enumerate() {
                let mut rec = vec![i.to_string()];
                let mut rest = i;
                for (a, coords) in axes.iter().enumerate() {
                    let n = g.shape()[a];
                    rec.push(fmt_num(coords[rest % n]));
                    rest /= n;
                }
                rec.push(fmt_num(*psi));
                csv.write_record(&rec)?;
            }
        }
        None => {
            csv.write_record(["index", "psi"])?;
            for (i, psi) in report.eigenvector.iter().enumerate() {
                csv.write_record([i.to_string(), fmt_num(*psi)])?;
            }
        }
    }
    csv.flush()?;
    Ok(())
}

fn report_summary(report: &IterationReport) -> Vec<(String, String)> {
    vec![
        ("eigenvalue".to_string(), fmt_num(report.unshifted_eigenvalue())),
        ("shifted_eigenvalue".to_string(), fmt_num(report.eigenvalue)),
        ("iterations".to_string(), report.iterations.to_string()),
        ("residual".to_string(), fmt_num(report.residual)),
        ("status".to_string(), report.status.as_str().to_string()),
    ]
}

pub fn solve(args: &ProblemArgs, e_p: f64, eigenvector: Option<PathBuf>) -> Result<u8> {
    let resolved = resolve(args)?;
    let cfg = resolved.filter(e_p)?;
    warn_if_unstable(&resolved, &cfg);
    let settings = resolved.config.settings();
    let report = filtered_solve_with(&resolved.problem.operator, resolved.config.scheme.into(), &cfg, &settings)
        .map_err(ConfigError::from)?;

    let output = resolved.config.output.as_deref();
    let mut w = sink(output).context("cannot open output")?;
    match resolved.config.format {
        Format::Csv => {
            let mut header = vec![("command".to_string(), "solve".to_string())];
            header.extend(resolved.config.echo(Some(&cfg)));
            header.extend(report_summary(&report));
            write_comments(&mut w, &header)?;
            let mut csv = csv_writer(w);
            csv.write_record(["iteration", "eigenvalue", "residual"])?;
            for (k, (e, r)) in report.history.iter().zip(&report.residual_history).enumerate() {
                csv.write_record([k.to_string(), fmt_num(e + report.shift), fmt_num(*r)])?;
            }
            csv.flush()?;
            let dump = eigenvector.or_else(|| output.map(sibling_path));
            if let Some(path) = dump {
                write_eigenvector(&resolved, &report, &path)?;
            }
        }
        Format::Json => {
            let shape: Vec<usize> = match resolved.problem.grid() {
                Some(g) => g.shape().to_vec(),
                None => vec![report.eigenvector.len()],
            };
            let doc = json!({
                "command": "solve",
                "config": resolved.config,
                "filter": { "e_p": cfg.e_p(), "m": cfg.m(), "dtau": cfg.dtau(), "tau": cfg.tau() },
                "report": {
                    "eigenvalue": report.unshifted_eigenvalue(),
                    "shifted_eigenvalue": report.eigenvalue,
                    "shift": report.shift,
                    "iterations": report.iterations,
                    "residual": report.residual,
                    "status": report.status.as_str(),
                    "residual_history": report.residual_history,
                    "eigenvector": {
                        "shape": shape,
                        "order": order_note(&shape),
                        "values": report.eigenvector,
                    },
                },
                "history": report.history.iter().map(|e| e + report.shift).collect::<Vec<_>>(),
            });
            serde_json::to_writer_pretty(&mut w, &doc)?;
            writeln!(w)?;
            w.flush()?;
            if let Some(path) = eigenvector {
                write_eigenvector(&resolved, &report, &path)?;
            }
        }
    }
    eprintln!(
        "{}: E = {} after {} iterations ({}, residual {})",
        resolved.problem.name,
        fmt_num(report.unshifted_eigenvalue()),
        report.iterations,
        report.status.as_str(),
        fmt_num(report.residual)
    );
    Ok(status_code(report.status))
}

/// `min, min + step, ...` up to `max` inclusive.
pub fn ep_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, ConfigError> {
    if !(min > 0.0 && min.is_finite() && max.is_finite()) {
        return Err(ConfigError(format!("E_p must be positive, got --ep-min {min}")));
    }
    if max < min {
        return Err(ConfigError(format!("--ep-max {max} is below --ep-min {min}")));
    }
    if !(step > 0.0) {
        return Err(ConfigError(format!("--ep-step must be positive, got {step}")));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| min + i as f64 * step).collect())
}

fn write_scan(resolved: &Resolved, result: &ScanResult, w: &mut dyn Write) -> Result<()> {
    match resolved.config.format {
        Format::Csv => {
            let mut header = vec![("command".to_string(), "scan".to_string())];
            header.extend(resolved.config.echo(None));
            let tps = result.turning_points.iter().map(|t| fmt_num(*t)).collect::<Vec<_>>().join(" ");
            header.push(("turning_points".to_string(), tps));
            write_comments(w, &header)?;
            let mut csv = csv_writer(w);
            csv.write_record(["e_p", "eigenvalue", "iterations", "status", "nearest_e_tp", "predicted_R"])?;
            for row in &result.rows {
                csv.write_record([
                    fmt_num(row.e_p),
                    fmt_num(row.eigenvalue),
                    row.iterations.to_string(),
                    row.status.as_str().to_string(),
                    opt_num(row.nearest_e_tp),
                    opt_num(row.predicted_r),
                ])?;
            }
            csv.flush()?;
        }
        Format::Json => {
            let doc = json!({
                "command": "scan",
                "config": resolved.config,
                "rows": result.rows,
                "turning_points": result.turning_points,
            });
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

pub fn scan(args: &ProblemArgs, min: f64, max: f64, step: f64) -> Result<u8> {
    let resolved = resolve(args)?;
    let grid = ep_grid(min, max, step)?;
    // Surface configuration errors once instead of as a column of failed rows.
    resolved.filter(grid[0])?;
    let result = scan_ep(&resolved.problem, &grid, resolved.rule(), resolved.config.scheme.into(), &resolved.config.settings())
        .map_err(ConfigError::from)?;
    for row in &result.rows {
        if let Some(e) = &row.error {
            eprintln!("E_p = {}: {e}", fmt_num(row.e_p));
        }
    }
    let mut w = sink(resolved.config.output.as_deref()).context("cannot open output")?;
    write_scan(&resolved, &result, &mut *w)?;
    w.flush()?;

    let has = |s: RowStatus| result.rows.iter().any(|r| r.status == s);
    Ok(if has(RowStatus::Converged) {
        0
    } else if has(RowStatus::MaxIterations) {
        EXIT_MAX_ITER
    } else {
        EXIT_DIVERGED
    })
}
