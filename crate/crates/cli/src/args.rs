//! Command-line flags and their translation into a [`RunConfig`].

use crate::config::{CommandKind, FunctionSpec, GridSpec, RunConfig, Suite, TWindow, Tolerances};
use crate::error::CliError;
use clap::{Args, Parser, Subcommand, ValueEnum};
use mellinfrac::pde::{Problem, ResidualMode};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "mellinfrac",
    version,
    about = "Hadamard-type fractional calculus in the Mellin setting"
)]
pub struct Cli {
    /// Read the whole run from a JSON config instead of flags.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Print the canonical JSON form of the run and exit without computing.
    #[arg(long, global = true)]
    pub print_config: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mellin transform on the line nu over a symmetric t-window (CSV t,re,im).
    Transform(Common),
    /// Fractional integral J^alpha_{0+,mu} f (CSV x,re,im).
    Integrate(Common),
    /// Fractional derivative D^alpha_{0+,c} f (CSV x,re,im).
    Differentiate(Common),
    /// Difference quotient Delta_h f / (h-1)^alpha, or its limit over a grid when h is omitted.
    Diffquot(Common),
    /// Evolution or diffusion problem on the half-plane (CSV x,y,w).
    Solve(Common),
    /// Acceptance suite; prints a pass/fail table and exits 0 only if all pass.
    Verify(Common),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProblemArg {
    Evolution,
    Diffusion,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ResidualArg {
    Slice,
    Commuted,
}

#[derive(Debug, Default, Args)]
pub struct Common {
    /// Function: power:b=..., log_k:k=..., exp:b=..., sinc, sinc_deriv:s=..., chi01,
    /// bump:center=...,width=..., log_gauss:center=...,width=..., or csv:<path>.
    #[arg(long = "f", visible_alias = "function", value_name = "SPEC")]
    pub function: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<f64>,
    /// Dilation step of the difference.
    #[arg(long)]
    pub h: Option<f64>,
    /// Single evaluation point.
    #[arg(long)]
    pub x: Option<f64>,
    /// Take the difference-quotient limit along h = 1 - 2^-k instead of 1 + 2^-k.
    #[arg(long)]
    pub from_below: bool,
    #[arg(long, requires_all = ["x_max", "n"])]
    pub x_min: Option<f64>,
    #[arg(long, requires_all = ["x_min", "n"])]
    pub x_max: Option<f64>,
    /// Number of grid points.
    #[arg(long, requires_all = ["x_min", "x_max"])]
    pub n: Option<usize>,
    #[arg(long, requires = "t_n")]
    pub t_max: Option<f64>,
    #[arg(long, requires = "t_max")]
    pub t_n: Option<usize>,
    #[arg(long, value_enum)]
    pub problem: Option<ProblemArg>,
    /// Comma-separated y levels.
    #[arg(long = "y", value_delimiter = ',')]
    pub y_values: Option<Vec<f64>>,
    /// Check the PDE residual in the given mode.
    #[arg(long, value_enum)]
    pub residual: Option<ResidualArg>,
    /// Which criteria to run.
    #[arg(long, value_parser = Suite::NAMES)]
    pub suite: Option<String>,
    /// Results file; metadata goes next to it with a .json extension.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub tail_tol: Option<f64>,
}

impl Command {
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let (kind, a) = match self {
            Command::Transform(a) => (CommandKind::Transform, a),
            Command::Integrate(a) => (CommandKind::Integrate, a),
            Command::Differentiate(a) => (CommandKind::Differentiate, a),
            Command::Diffquot(a) => (CommandKind::Diffquot, a),
            Command::Solve(a) => (CommandKind::Solve, a),
            Command::Verify(a) => (CommandKind::Verify, a),
        };
        let grid = match (a.x_min, a.x_max, a.n) {
            (Some(x_min), Some(x_max), Some(n)) => Some(GridSpec { x_min, x_max, n }),
            _ => None,
        };
        let t_window = match (a.t_max, a.t_n) {
            (Some(t_max), Some(n)) => Some(TWindow { t_max, n }),
            _ => None,
        };
        Ok(RunConfig {
            command: kind,
            function: a
                .function
                .as_deref()
                .map(str::parse::<FunctionSpec>)
                .transpose()?,
            alpha: a.alpha,
            c: a.c,
            mu: a.mu,
            nu: a.nu,
            h: a.h,
            x: a.x,
            from_below: a.from_below.then_some(true),
            grid,
            t_window,
            problem: a.problem.map(|p| match p {
                ProblemArg::Evolution => Problem::Evolution,
                ProblemArg::Diffusion => Problem::Diffusion,
            }),
            y_values: a.y_values,
            residual: a.residual.map(|r| match r {
                ResidualArg::Slice => ResidualMode::Slice,
                ResidualArg::Commuted => ResidualMode::Commuted,
            }),
            suite: a.suite.as_deref().map(str::parse).transpose()?,
            output: a.output,
            tolerances: Tolerances {
                rel_tol: a.rel_tol,
                tail_tol: a.tail_tol,
            },
        })
    }
}

impl Cli {
    /// The run described by the flags or the config file.
    pub fn resolve(self) -> Result<RunConfig, CliError> {
        match (self.config, self.command) {
            (Some(_), Some(_)) => Err(CliError::Config(
                "give either a subcommand or --config, not both".into(),
            )),
            (Some(path), None) => {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                RunConfig::from_json(&text)
            }
            (None, Some(cmd)) => cmd.into_config(),
            (None, None) => Err(CliError::Config(
                "give a subcommand or --config FILE".into(),
            )),
        }
    }
}
