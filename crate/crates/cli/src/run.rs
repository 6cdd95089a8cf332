//! Command execution. Results go to the output file when one is given,
//! otherwise to the supplied writer; run metadata is written next to the
//! output file.

use crate::config::{CommandKind, FunctionSpec, RunConfig, SOLVE_FUNCTION, SOLVE_GRID};
use crate::error::CliError;
use mellinfrac::derivative::{hadamard_derivative, numeric_bundle, DerivativeBundle};
use mellinfrac::difference::{frac_difference, strong_derivative_estimate, DifferenceConfig};
use mellinfrac::hadamard::{hadamard_integral, QuadConfig};
use mellinfrac::io::{read_sampled_function, write_field, write_samples, write_spectrum};
use mellinfrac::mellin::{mellin_transform, symmetric_t_grid, TransformConfig};
use mellinfrac::pde::{residual_check, solve_pde, PdeProblem};
use mellinfrac::verification::{run_criterion, CriterionReport};
use mellinfrac::{Complex64, FracOrder, LogGrid, MellinFunction};
use serde::Serialize;
use serde_json::{json, Value};
use std::fs::File;
use std::io::{BufWriter, Write};

/// Metadata written alongside the results.
#[derive(Debug, Serialize)]
pub struct RunMetadata {
    pub command: String,
    pub params: RunConfig,
    pub grid: Value,
    pub tolerances: Value,
    pub results_path: Option<String>,
    pub residuals: Value,
}

/// What a command produced, before it is written anywhere.
struct Outcome {
    csv: Vec<u8>,
    grid: Value,
    residuals: Value,
    /// Verify only: whether every criterion passed.
    passed: bool,
}

fn load_function(spec: &FunctionSpec) -> Result<MellinFunction, CliError> {
    match spec {
        FunctionSpec::Builtin(b) => Ok(b.function()?),
        FunctionSpec::Samples(path) => {
            let file = File::open(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            read_sampled_function(file)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
    }
}

fn load_bundle(spec: &FunctionSpec) -> Result<DerivativeBundle, CliError> {
    match spec {
        FunctionSpec::Builtin(b) => Ok(b.bundle()?),
        FunctionSpec::Samples(_) => Ok(numeric_bundle(load_function(spec)?)),
    }
}

fn quad_config(cfg: &RunConfig) -> QuadConfig {
    let mut q = QuadConfig::default();
    if let Some(t) = cfg.tolerances.rel_tol {
        q.rel_tol = t;
    }
    q
}

fn difference_config(cfg: &RunConfig) -> DifferenceConfig {
    let mut d = DifferenceConfig::default();
    if let Some(t) = cfg.tolerances.tail_tol {
        d.tail_tol = t;
    }
    d
}

fn effective_tolerances(cfg: &RunConfig) -> Value {
    match cfg.command {
        CommandKind::Transform => {
            json!({ "rel_tol": cfg.tolerances.rel_tol.unwrap_or(TransformConfig::default().rel_tol) })
        }
        CommandKind::Integrate | CommandKind::Differentiate => {
            json!({ "rel_tol": quad_config(cfg).rel_tol })
        }
        CommandKind::Diffquot => json!({ "tail_tol": difference_config(cfg).tail_tol }),
        CommandKind::Solve => json!({}),
        CommandKind::Verify => json!("per criterion"),
    }
}

/// The evaluation points: the single x or the grid.
fn points(cfg: &RunConfig) -> Result<(Vec<f64>, Value), CliError> {
    match (cfg.x, &cfg.grid) {
        (Some(x), _) => Ok((vec![x], json!({ "x": x }))),
        (None, Some(g)) => Ok((
            g.grid()?.points(),
            serde_json::to_value(g).expect("grid serializes"),
        )),
        (None, None) => Err(CliError::Config("no evaluation points".into())),
    }
}

fn samples_csv(xs: &[f64], values: &[Complex64]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_samples(&mut buf, xs, values)?;
    Ok(buf)
}

fn transform(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let f = load_function(cfg.function.as_ref().expect("validated"))?;
    let w = cfg.t_window.expect("validated");
    let mut tc = TransformConfig::default();
    if let Some(t) = cfg.tolerances.rel_tol {
        tc.rel_tol = t;
    }
    let spec = mellin_transform(
        &f,
        cfg.nu.expect("validated"),
        &symmetric_t_grid(w.t_max, w.n),
        &tc,
    )?;
    let mut csv = Vec::new();
    write_spectrum(&mut csv, &spec)?;
    Ok(Outcome {
        csv,
        grid: json!({ "nu": spec.nu, "t_max": w.t_max, "n": w.n }),
        residuals: json!({ "conjugate_asymmetry": spec.conjugate_asymmetry() }),
        passed: true,
    })
}

fn integrate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let f = load_function(cfg.function.as_ref().expect("validated"))?;
    let order = FracOrder::new(cfg.alpha.expect("validated"))?;
    let quad = quad_config(cfg);
    let (xs, grid) = points(cfg)?;
    let values = xs
        .iter()
        .map(|&x| hadamard_integral(&f, order, cfg.c_value(), x, &quad))
        .collect::<mellinfrac::Result<Vec<_>>>()?;
    Ok(Outcome {
        csv: samples_csv(&xs, &values)?,
        grid,
        residuals: Value::Null,
        passed: true,
    })
}

fn differentiate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let bundle = load_bundle(cfg.function.as_ref().expect("validated"))?;
    let order = FracOrder::new(cfg.alpha.expect("validated"))?;
    let quad = quad_config(cfg);
    let (xs, grid) = points(cfg)?;
    let values = xs
        .iter()
        .map(|&x| hadamard_derivative(&bundle, order, cfg.c_value(), x, &quad))
        .collect::<mellinfrac::Result<Vec<_>>>()?;
    Ok(Outcome {
        csv: samples_csv(&xs, &values)?,
        grid,
        residuals: Value::Null,
        passed: true,
    })
}

/// With h: the quotient Delta_h f / (h-1)^alpha at the points. Without h: the
/// strong-derivative limit over the grid, with its convergence report.
fn diffquot(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let f = load_function(cfg.function.as_ref().expect("validated"))?;
    let alpha = cfg.alpha.expect("validated");
    let c = cfg.c_value();
    let mut dc = difference_config(cfg);
    dc.from_below = cfg.from_below.unwrap_or(false);
    match cfg.h {
        Some(h) => {
            let (xs, grid) = points(cfg)?;
            let denom = Complex64::new(h - 1.0, 0.0).powf(alpha);
            let values = xs
                .iter()
                .map(|&x| Ok(frac_difference(&f, alpha, c, h, x, &dc)? / denom))
                .collect::<mellinfrac::Result<Vec<_>>>()?;
            Ok(Outcome {
                csv: samples_csv(&xs, &values)?,
                grid,
                residuals: Value::Null,
                passed: true,
            })
        }
        None => {
            let spec = cfg.grid.expect("validated");
            let grid: LogGrid = spec.grid()?;
            let est = strong_derivative_estimate(&f, alpha, c, &grid, &dc)?;
            let last = est.estimates.last().cloned().unwrap_or_default();
            Ok(Outcome {
                csv: samples_csv(&grid.points(), &last)?,
                grid: serde_json::to_value(spec).expect("grid serializes"),
                residuals: serde_json::to_value(&est.report).expect("report serializes"),
                passed: true,
            })
        }
    }
}

fn solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg
        .function
        .clone()
        .unwrap_or(FunctionSpec::Builtin(SOLVE_FUNCTION));
    let grid_spec = cfg.grid.unwrap_or(SOLVE_GRID);
    let mut problem = PdeProblem::new(
        cfg.problem.expect("validated"),
        cfg.alpha.expect("validated"),
        load_bundle(&spec)?,
        grid_spec.grid()?,
        cfg.solve_y_values(),
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(nu) = cfg.nu {
        problem.nu = nu;
    }
    if let Some(mode) = cfg.residual {
        problem.config.residual = mode;
    }
    problem
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let w = solve_pde(&problem)?;
    let residuals = match cfg.residual {
        Some(_) => serde_json::to_value(residual_check(&problem, &w)?).expect("report serializes"),
        None => Value::Null,
    };
    let mut csv = Vec::new();
    write_field(&mut csv, &w)?;
    Ok(Outcome {
        csv,
        grid: json!({ "x": grid_spec, "y_values": w.y_values }),
        residuals,
        passed: true,
    })
}

/// Runs the acceptance criteria of the suite, one table line each.
fn verify(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let suite = cfg.suite.unwrap_or(crate::config::Suite::All);
    let mut reports: Vec<CriterionReport> = Vec::new();
    let mut passed = true;
    let mut errors = Vec::new();
    for id in suite.criteria() {
        match run_criterion(id) {
            Ok(r) => {
                writeln!(out, "{}", r.detail())?;
                passed &= r.passed();
                reports.push(r);
            }
            Err(e) => {
                writeln!(out, "FAIL criterion {id}: {e}")?;
                passed = false;
                errors.push(json!({ "id": id, "error": e.to_string() }));
            }
        }
    }
    let total = reports.len() + errors.len();
    let ok = reports.iter().filter(|r| r.passed()).count();
    writeln!(out, "{ok}/{total} criteria passed")?;
    let csv = {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["criterion", "check", "measured", "tolerance", "passed"])
            .map_err(mellinfrac::Error::from)?;
        for r in &reports {
            for c in &r.checks {
                w.write_record([
                    r.id.to_string(),
                    c.name.clone(),
                    format!("{:.16e}", c.measured),
                    format!("{:.16e}", c.tolerance),
                    c.passed.to_string(),
                ])
                .map_err(mellinfrac::Error::from)?;
            }
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))?
    };
    Ok(Outcome {
        csv,
        grid: Value::Null,
        residuals: json!({ "reports": reports, "errors": errors }),
        passed,
    })
}

/// Runs a validated config. Returns whether the run passed: always true
/// except for a verify run with a failing criterion.
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool, CliError> {
    cfg.validate()?;
    let outcome = match cfg.command {
        CommandKind::Transform => transform(cfg)?,
        CommandKind::Integrate => integrate(cfg)?,
        CommandKind::Differentiate => differentiate(cfg)?,
        CommandKind::Diffquot => diffquot(cfg)?,
        CommandKind::Solve => solve(cfg)?,
        CommandKind::Verify => verify(cfg, out)?,
    };
    match &cfg.output {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            f.write_all(&outcome.csv)?;
            f.flush()?;
            let meta = RunMetadata {
                command: cfg.command.name().to_string(),
                params: cfg.clone(),
                grid: outcome.grid,
                tolerances: effective_tolerances(cfg),
                results_path: Some(path.display().to_string()),
                residuals: outcome.residuals,
            };
            let meta_path = cfg.metadata_path().expect("output is set");
            let mut text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
            text.push('\n');
            std::fs::write(meta_path, text)?;
        }
        None if cfg.command != CommandKind::Verify => out.write_all(&outcome.csv)?,
        None => {}
    }
    Ok(outcome.passed)
}
