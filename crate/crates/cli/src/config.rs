//! Run configuration: one command with its parameters, loadable from JSON
//! and echoed back in a canonical form.

use crate::error::CliError;
use mellinfrac::pde::{Problem, ResidualMode};
use mellinfrac::{Builtin, LogGrid};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Transform,
    Integrate,
    Differentiate,
    Diffquot,
    Solve,
    Verify,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Transform => "transform",
            CommandKind::Integrate => "integrate",
            CommandKind::Differentiate => "differentiate",
            CommandKind::Diffquot => "diffquot",
            CommandKind::Solve => "solve",
            CommandKind::Verify => "verify",
        }
    }
}

/// A named builtin such as `power:b=1`, or `csv:<path>` for samples on a
/// log-uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    Builtin(Builtin),
    Samples(PathBuf),
}

impl FromStr for FunctionSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        if let Some(path) = s.strip_prefix("csv:") {
            if path.is_empty() {
                return Err(CliError::Config("csv: needs a file path".into()));
            }
            return Ok(FunctionSpec::Samples(PathBuf::from(path)));
        }
        let b: Builtin = s
            .parse()
            .map_err(|e| CliError::Config(format!("function {s:?}: {e}")))?;
        b.validate()
            .map_err(|e| CliError::Config(format!("function {s:?}: {e}")))?;
        Ok(FunctionSpec::Builtin(b))
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Builtin(b) => write!(f, "{b}"),
            FunctionSpec::Samples(p) => write!(f, "csv:{}", p.display()),
        }
    }
}

impl Serialize for FunctionSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FunctionSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Log-uniform x grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn grid(&self) -> Result<LogGrid, CliError> {
        LogGrid::new(self.x_min, self.x_max, self.n)
            .map_err(|e| CliError::Config(format!("grid: {e}")))
    }
}

/// Symmetric window of `n` t-samples on [-t_max, t_max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TWindow {
    pub t_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Eigen,
    Log,
    Semigroup,
    Fundamental,
    Symbols,
    Strong,
    Integer,
    Stirling,
    Kernels,
    Solutions,
    Probe,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 12] = [
        "eigen",
        "log",
        "semigroup",
        "fundamental",
        "symbols",
        "strong",
        "integer",
        "stirling",
        "kernels",
        "solutions",
        "probe",
        "all",
    ];

    /// Acceptance criteria run by the suite.
    pub fn criteria(self) -> Vec<u8> {
        match self {
            Suite::All => (1..=11).collect(),
            s => vec![s as u8 + 1],
        }
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| {
            CliError::Config(format!(
                "unknown suite {s:?}; expected one of {}",
                Suite::NAMES.join(", ")
            ))
        })
    }
}

/// Everything one run needs. Absent options take the documented defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    /// Difference-quotient limit along h = 1 - e instead of h = 1 + e.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from_below: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_window: Option<TWindow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<Problem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<ResidualMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// Defaults used by `solve` when the corresponding option is absent.
pub const SOLVE_FUNCTION: Builtin = Builtin::LogGauss {
    center: 0.0,
    width: 0.5,
};
pub const SOLVE_GRID: GridSpec = GridSpec {
    x_min: 0.25,
    x_max: 4.0,
    n: 9,
};

impl RunConfig {
    pub fn new(command: CommandKind) -> Self {
        Self {
            command,
            function: None,
            alpha: None,
            c: None,
            mu: None,
            nu: None,
            h: None,
            x: None,
            from_below: None,
            grid: None,
            t_window: None,
            problem: None,
            y_values: None,
            residual: None,
            suite: None,
            output: None,
            tolerances: Tolerances::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    /// Pretty JSON with fixed field order and a trailing newline. Parsing the
    /// result and serializing again gives the same bytes.
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// Checks that required options are present, that options the command
    /// does not use are absent, and that values lie in their domains.
    pub fn validate(&self) -> Result<(), CliError> {
        use CommandKind::*;
        let cmd = self.command;
        let present = [
            ("function", self.function.is_some()),
            ("alpha", self.alpha.is_some()),
            ("c", self.c.is_some()),
            ("mu", self.mu.is_some()),
            ("nu", self.nu.is_some()),
            ("h", self.h.is_some()),
            ("x", self.x.is_some()),
            ("from_below", self.from_below.is_some()),
            ("grid", self.grid.is_some()),
            ("t_window", self.t_window.is_some()),
            ("problem", self.problem.is_some()),
            ("y_values", self.y_values.is_some()),
            ("residual", self.residual.is_some()),
            ("suite", self.suite.is_some()),
        ];
        let allowed: &[&str] = match cmd {
            Transform => &["function", "nu", "t_window"],
            Integrate => &["function", "alpha", "c", "mu", "x", "grid"],
            Differentiate => &["function", "alpha", "c", "x", "grid"],
            Diffquot => &["function", "alpha", "c", "h", "x", "grid", "from_below"],
            Solve => &[
                "function", "alpha", "nu", "grid", "problem", "y_values", "residual",
            ],
            Verify => &["suite"],
        };
        for (name, set) in present {
            if set && !allowed.contains(&name) {
                return Err(CliError::Config(format!(
                    "option {name} does not apply to {}",
                    cmd.name()
                )));
            }
        }
        let need = |name: &str, set: bool| {
            if set {
                Ok(())
            } else {
                Err(CliError::Config(format!(
                    "{} needs option {name}",
                    cmd.name()
                )))
            }
        };
        let finite = |name: &str, v: Option<f64>| match v {
            Some(v) if !v.is_finite() => Err(CliError::Config(format!("{name} must be finite"))),
            _ => Ok(()),
        };
        for (name, v) in [
            ("alpha", self.alpha),
            ("c", self.c),
            ("mu", self.mu),
            ("nu", self.nu),
            ("h", self.h),
            ("x", self.x),
        ] {
            finite(name, v)?;
        }
        if let (Some(c), Some(mu)) = (self.c, self.mu) {
            if c != mu {
                return Err(CliError::Config(format!(
                    "c = {c} and mu = {mu} name the same parameter"
                )));
            }
        }
        if let Some(g) = &self.grid {
            g.grid()?;
        }
        if let Some(x) = self.x {
            if !(x > 0.0) {
                return Err(CliError::Config(format!("x must be positive, got {x}")));
            }
        }
        if matches!(cmd, Integrate | Differentiate | Diffquot) {
            need("function", self.function.is_some())?;
            need("alpha", self.alpha.is_some())?;
            if self.x.is_some() == self.grid.is_some() {
                return Err(CliError::Config(format!(
                    "{} needs exactly one of x or grid",
                    cmd.name()
                )));
            }
            let alpha = self.alpha.unwrap_or_default();
            mellinfrac::FracOrder::new(alpha)
                .map_err(|e| CliError::Config(format!("alpha: {e}")))?;
        }
        match cmd {
            Transform => {
                need("function", self.function.is_some())?;
                need("nu", self.nu.is_some())?;
                need("t_window", self.t_window.is_some())?;
                let w = self.t_window.expect("checked");
                if !(w.t_max > 0.0 && w.t_max.is_finite()) || w.n < 2 {
                    return Err(CliError::Config(
                        "t_window needs t_max > 0 and n >= 2".into(),
                    ));
                }
            }
            Diffquot => {
                let alpha = self.alpha.unwrap_or_default();
                if !(alpha > 0.0) {
                    return Err(CliError::Config(format!(
                        "diffquot needs alpha > 0, got {alpha}"
                    )));
                }
                match self.h {
                    Some(h) if !(h > 0.0) || h == 1.0 => {
                        return Err(CliError::Config(format!(
                            "h must be positive and different from 1, got {h}"
                        )))
                    }
                    Some(_) if self.from_below.is_some() => {
                        return Err(CliError::Config(
                            "from_below applies to the limit without h".into(),
                        ))
                    }
                    None if self.grid.is_none() => {
                        return Err(CliError::Config(
                            "diffquot without h estimates the limit and needs a grid".into(),
                        ))
                    }
                    _ => {}
                }
            }
            Solve => {
                need("problem", self.problem.is_some())?;
                need("alpha", self.alpha.is_some())?;
                let alpha = self.alpha.expect("checked");
                match self.problem.expect("checked") {
                    Problem::Evolution => {
                        if !(alpha > 0.0 && alpha < 1.0) {
                            return Err(CliError::Config(format!(
                                "evolution needs 0 < alpha < 1, got {alpha}"
                            )));
                        }
                        if let Some(nu) = self.nu {
                            if !(nu < 0.0) {
                                return Err(CliError::Config(format!(
                                    "evolution needs nu < 0, got {nu}"
                                )));
                            }
                        }
                    }
                    Problem::Diffusion => {
                        mellinfrac::pde::diffusion_coefficients(alpha)
                            .map_err(|e| CliError::Config(e.to_string()))?;
                        if self.nu.is_some() {
                            return Err(CliError::Config(
                                "nu applies to the evolution problem only".into(),
                            ));
                        }
                    }
                }
                let ys = self.solve_y_values();
                if ys.is_empty() || ys.iter().any(|y| !(*y > 0.0 && y.is_finite())) {
                    return Err(CliError::Config(
                        "y_values must be positive and finite".into(),
                    ));
                }
                if self.residual.is_some() && ys.len() < 3 {
                    return Err(CliError::Config(
                        "the residual check needs at least 3 y values".into(),
                    ));
                }
            }
            _ => {}
        }
        for (name, v) in [
            ("rel_tol", self.tolerances.rel_tol),
            ("tail_tol", self.tolerances.tail_tol),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::Config(format!(
                        "{name} must be positive, got {v}"
                    )));
                }
            }
        }
        if let Some(out) = &self.output {
            if out.extension().is_some_and(|e| e == "json") {
                return Err(CliError::Config(
                    "output names the results file; metadata goes next to it as .json".into(),
                ));
            }
        }
        Ok(())
    }

    /// c for derivatives, mu for integrals; either name is accepted, default 0.
    pub fn c_value(&self) -> f64 {
        self.c.or(self.mu).unwrap_or(0.0)
    }

    pub fn solve_y_values(&self) -> Vec<f64> {
        self.y_values.clone().unwrap_or_else(|| vec![1.0])
    }

    /// Path of the run metadata, next to the results file.
    pub fn metadata_path(&self) -> Option<PathBuf> {
        self.output.as_ref().map(|p| p.with_extension("json"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn integrate() -> RunConfig {
        RunConfig {
            function: Some("power:b=1".parse().unwrap()),
            alpha: Some(0.5),
            c: Some(1.0),
            x: Some(1.0),
            ..RunConfig::new(CommandKind::Integrate)
        }
    }

    #[test]
    fn canonical_form_is_stable() {
        let cfg = integrate();
        let text = cfg.to_canonical_json();
        let back = RunConfig::from_json(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_canonical_json(), text);
    }

    #[test]
    fn loose_input_canonicalizes() {
        let text = r#"{"x": 1, "command": "integrate", "function": " power : b = 1 ", "alpha": 0.5, "c": 1}"#;
        let cfg = RunConfig::from_json(text).unwrap();
        assert_eq!(cfg, integrate());
        assert_eq!(cfg.to_canonical_json(), integrate().to_canonical_json());
    }

    #[test]
    fn validation() {
        integrate().validate().unwrap();
        let mut bad = integrate();
        bad.grid = Some(GridSpec {
            x_min: 0.5,
            x_max: 2.0,
            n: 5,
        });
        assert!(bad.validate().is_err());
        let mut bad = integrate();
        bad.suite = Some(Suite::All);
        assert!(bad.validate().is_err());
        let mut bad = integrate();
        bad.mu = Some(2.0);
        assert!(bad.validate().is_err());
        let solve = RunConfig {
            problem: Some(Problem::Diffusion),
            alpha: Some(2.0),
            ..RunConfig::new(CommandKind::Solve)
        };
        let err = solve.validate().unwrap_err().to_string();
        assert!(err.contains("cos(alpha pi/4) = 0"), "{err}");
        assert!(RunConfig::from_json(r#"{"command": "verify", "bogus": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"command": "integrate", "function": "nope"}"#).is_err());
    }

    #[test]
    fn suites_map_to_criteria() {
        assert_eq!("fundamental".parse::<Suite>().unwrap().criteria(), vec![4]);
        assert_eq!("probe".parse::<Suite>().unwrap().criteria(), vec![11]);
        assert_eq!(Suite::All.criteria().len(), 11);
        assert!("nope".parse::<Suite>().is_err());
    }

    proptest! {
        #[test]
        fn round_trip(alpha in 0.0f64..5.0, c in -3.0f64..3.0, b in -4.0f64..4.0, n in 2usize..100, lo in 0.01f64..1.0) {
            let cfg = RunConfig {
                function: Some(FunctionSpec::Builtin(Builtin::Exp { b })),
                alpha: Some(alpha),
                c: Some(c),
                grid: Some(GridSpec { x_min: lo, x_max: 1.0 + lo, n }),
                output: Some(PathBuf::from("out/result.csv")),
                tolerances: Tolerances { rel_tol: Some(1e-9), tail_tol: None },
                ..RunConfig::new(CommandKind::Differentiate)
            };
            let text = cfg.to_canonical_json();
            let back = RunConfig::from_json(&text).unwrap();
            prop_assert_eq!(&back, &cfg);
            prop_assert_eq!(back.to_canonical_json(), text);
        }
    }
}
