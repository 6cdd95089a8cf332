//! Builtin test functions with exact derivatives of every order and, where
//! they exist, power-series forms.
//!
//! Spec strings look like `power:b=1`, `log_k:k=2`, `exp:b=-0.5`, `sinc`,
//! `sinc_deriv:s=3`, `chi01`, `bump:center=0,width=1`, `log_gauss:center=0,width=0.5`.

use crate::combinatorics::{factorial, stirling_first_kind};
use crate::derivative::{from_log_derivatives, DerivativeBundle};
use crate::error::{Error, Result};
use crate::function::MellinFunction;
use crate::jet::Jet;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

/// Depth of the derivative bundles handed out by [`Builtin::bundle`].
pub const BUNDLE_DEPTH: usize = 16;

/// Number of sinc series terms (in powers of x^2).
const SINC_TERMS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Builtin {
    /// x^b
    Power { b: f64 },
    /// (log x)^k
    LogK { k: u32 },
    /// e^{bx}
    Exp { b: f64 },
    /// sin(pi x)/(pi x)
    Sinc,
    /// s-th derivative of sinc
    SincDeriv { s: u32 },
    /// indicator of (0, 1)
    Chi01,
    /// exp(1 - 1/(1 - r^2)) for |r| < 1, r = (log x - center)/width
    Bump { center: f64, width: f64 },
    /// exp(-(log x - center)^2 / (2 width^2))
    LogGauss { center: f64, width: f64 },
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl Builtin {
    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64, name: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(format!("parameter {name} must be finite")))
            }
        };
        match *self {
            Builtin::Power { b } | Builtin::Exp { b } => finite(b, "b"),
            Builtin::Bump { center, width } | Builtin::LogGauss { center, width } => {
                finite(center, "center")?;
                finite(width, "width")?;
                if width > 0.0 {
                    Ok(())
                } else {
                    Err(Error::domain("width must be positive"))
                }
            }
            Builtin::LogK { k } if k > 64 => Err(Error::domain("log power k must be at most 64")),
            Builtin::SincDeriv { s } if s > 32 => {
                Err(Error::domain("sinc derivative order must be at most 32"))
            }
            _ => Ok(()),
        }
    }

    /// f(x).
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Builtin::Power { b } => x.powf(b),
            Builtin::LogK { k } => x.ln().powi(k as i32),
            Builtin::Exp { b } => (b * x).exp(),
            Builtin::Sinc => sinc_scaled(x, 0, 0)[0],
            Builtin::SincDeriv { s } => sinc_scaled(x, s as usize, 0)[0],
            Builtin::Chi01 => {
                if x < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Builtin::Bump { .. } | Builtin::LogGauss { .. } => self.log_jet(x.ln(), 0)[0],
        }
    }

    /// The function as a [`MellinFunction`], with breakpoints and support declared.
    pub fn function(&self) -> Result<MellinFunction> {
        self.validate()?;
        let me = *self;
        let f = match me {
            Builtin::LogK { k } => {
                MellinFunction::from_log_rule(move |u| Ok(c(u.powi(k as i32))), true)
            }
            Builtin::Bump { center, width } => {
                MellinFunction::from_log_rule(move |u| Ok(c(me.log_jet(u, 0)[0])), true)
                    .with_log_support(center - width, center + width)
            }
            Builtin::LogGauss { .. } => {
                MellinFunction::from_log_rule(move |u| Ok(c(me.log_jet(u, 0)[0])), true)
            }
            Builtin::Chi01 => {
                MellinFunction::from_real(move |x| me.value(x)).with_breakpoints(vec![1.0])
            }
            _ => MellinFunction::from_real(move |x| me.value(x)),
        };
        Ok(f.with_label(self.to_string()))
    }

    /// x^k f^(k)(x) for k = 0..=n.
    pub fn scaled_derivatives(&self, x: f64, n: usize) -> Result<Vec<f64>> {
        if !(x > 0.0) {
            return Err(Error::domain(format!("builtin evaluated at x = {x}")));
        }
        Ok(match *self {
            Builtin::Power { b } => {
                let v = x.powf(b);
                let mut coef = 1.0;
                (0..=n)
                    .map(|k| {
                        let out = coef * v;
                        coef *= b - k as f64;
                        out
                    })
                    .collect()
            }
            Builtin::Exp { b } => {
                let v = (b * x).exp();
                let bx = b * x;
                (0..=n).map(|k| bx.powi(k as i32) * v).collect()
            }
            Builtin::Sinc => sinc_scaled(x, 0, n),
            Builtin::SincDeriv { s } => sinc_scaled(x, s as usize, n),
            Builtin::Chi01 => {
                let mut v = vec![0.0; n + 1];
                v[0] = self.value(x);
                v
            }
            Builtin::LogK { .. } | Builtin::Bump { .. } | Builtin::LogGauss { .. } => {
                let delta: Vec<Complex64> = self.log_jet(x.ln(), n).into_iter().map(c).collect();
                from_log_derivatives(&delta, &stirling_first_kind(n))
                    .into_iter()
                    .map(|z| z.re)
                    .collect()
            }
        })
    }

    /// d^j/du^j f(e^u), j = 0..=n, for the functions defined through log x.
    fn log_jet(&self, u: f64, n: usize) -> Vec<f64> {
        match *self {
            Builtin::LogK { k } => {
                let k = k as usize;
                (0..=n)
                    .map(|j| {
                        if j > k {
                            0.0
                        } else {
                            factorial(k) / factorial(k - j) * u.powi((k - j) as i32)
                        }
                    })
                    .collect()
            }
            Builtin::Bump { center, width } => {
                let r0 = (u - center) / width;
                let q0 = 1.0 - r0 * r0;
                // exp(1 - 1/q) underflows long before q reaches 0.
                if q0 <= 0.0 || 1.0 / q0 > 700.0 {
                    return vec![0.0; n + 1];
                }
                let r = Jet::variable(r0, n + 1);
                let q = Jet::constant(1.0, n + 1).sub(&r.mul(&r));
                let g = Jet::constant(1.0, n + 1)
                    .div(&q)
                    .scale(-1.0)
                    .add_const(1.0)
                    .exp();
                (0..=n)
                    .map(|j| g.derivative(j) * width.powi(-(j as i32)))
                    .collect()
            }
            Builtin::LogGauss { center, width } => {
                let r = Jet::variable((u - center) / width, n + 1);
                let g = r.mul(&r).scale(-0.5).exp();
                (0..=n)
                    .map(|j| g.derivative(j) * width.powi(-(j as i32)))
                    .collect()
            }
            _ => unreachable!("log_jet is only defined for log-based builtins"),
        }
    }

    /// Bundle of exact derivatives up to [`BUNDLE_DEPTH`].
    pub fn bundle(&self) -> Result<DerivativeBundle> {
        let me = *self;
        Ok(DerivativeBundle::from_jet(
            self.function()?,
            BUNDLE_DEPTH,
            move |x, n| Ok(me.scaled_derivatives(x, n)?.into_iter().map(c).collect()),
        ))
    }

    /// Power-series form sum a_k x^k with its radius of validity, when the
    /// function is analytic at 0.
    pub fn power_series(&self) -> Result<Option<MellinFunction>> {
        self.validate()?;
        let series = match *self {
            Builtin::Power { b } if b >= 0.0 && b == b.trunc() && b <= 64.0 => {
                let mut a = vec![0.0; b as usize + 1];
                a[b as usize] = 1.0;
                Some((a, f64::MAX))
            }
            Builtin::Exp { b } => {
                if b == 0.0 {
                    Some((vec![1.0], f64::MAX))
                } else {
                    // Positive b: no cancellation, radius limited only by the
                    // number of terms. Negative b: keep the largest term near e^3.
                    let radius = if b > 0.0 { 20.0 / b } else { 3.0 / -b };
                    let a: Vec<f64> = (0..120)
                        .map(|k| b.powi(k) / factorial(k as usize))
                        .collect();
                    Some((a, radius))
                }
            }
            Builtin::Sinc => Some((sinc_coefficients(0), 2.0)),
            Builtin::SincDeriv { s } => Some((sinc_coefficients(s as usize), 2.0)),
            _ => None,
        };
        series
            .map(|(a, r)| {
                MellinFunction::power_series_real(&a, r)
                    .map(|f| f.with_label(format!("{self} series")))
            })
            .transpose()
    }
}

/// Coefficients of the s-th derivative of sinc as a power series in x.
fn sinc_coefficients(s: usize) -> Vec<f64> {
    let n = 2 * SINC_TERMS;
    let mut base = vec![0.0; n + s + 1];
    for k in 0..=(n + s) / 2 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        base[2 * k] = sign * PI.powi(2 * k as i32) / factorial(2 * k + 1);
    }
    (0..=n)
        .map(|j| base[j + s] * factorial(j + s) / factorial(j))
        .collect()
}

/// x^k (d/dx)^{s+k} sinc(x), k = 0..=n.
fn sinc_scaled(x: f64, s: usize, n: usize) -> Vec<f64> {
    if x <= 1.0 {
        // Series: x^k d^{s+k} x^m = m!/(m-s-k)! x^{m-s}.
        static COEFFS: OnceLock<Vec<f64>> = OnceLock::new();
        let a = COEFFS.get_or_init(|| sinc_coefficients(0));
        let mut out = vec![0.0; n + 1];
        let mut xp = 1.0;
        for (m, am) in a.iter().enumerate().skip(s) {
            if *am != 0.0 {
                // m!/(m-s)!, then one more factor per k.
                let mut ff: f64 = (m - s + 1..=m).map(|i| i as f64).product();
                for (k, o) in out.iter_mut().enumerate() {
                    if m < s + k {
                        break;
                    }
                    if k > 0 {
                        ff *= (m - s - k + 1) as f64;
                    }
                    *o += am * ff * xp;
                }
            }
            xp *= x;
        }
        return out;
    }
    let len = s + n + 1;
    let px = Jet::variable(x, len).scale(PI);
    let (sin, _) = px.sin_cos();
    let q = sin.div(&px);
    (0..=n)
        .map(|k| q.derivative(s + k) * x.powi(k as i32))
        .collect()
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Power { b } => write!(f, "power:b={b}"),
            Builtin::LogK { k } => write!(f, "log_k:k={k}"),
            Builtin::Exp { b } => write!(f, "exp:b={b}"),
            Builtin::Sinc => write!(f, "sinc"),
            Builtin::SincDeriv { s } => write!(f, "sinc_deriv:s={s}"),
            Builtin::Chi01 => write!(f, "chi01"),
            Builtin::Bump { center, width } => write!(f, "bump:center={center},width={width}"),
            Builtin::LogGauss { center, width } => {
                write!(f, "log_gauss:center={center},width={width}")
            }
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, params) = match spec.split_once(':') {
            Some((n, p)) => (n.trim(), p.trim()),
            None => (spec, ""),
        };
        let mut pairs: Vec<(&str, &str)> = Vec::new();
        if !params.is_empty() {
            for item in params.split(',') {
                let (k, v) = item
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("expected key=value, got '{item}'")))?;
                let k = k.trim();
                if pairs.iter().any(|(seen, _)| *seen == k) {
                    return Err(Error::Parse(format!("parameter '{k}' given twice")));
                }
                pairs.push((k, v.trim()));
            }
        }
        let allowed: &[&str] = match name {
            "power" | "exp" => &["b"],
            "log_k" => &["k"],
            "sinc" | "chi01" => &[],
            "sinc_deriv" => &["s"],
            "bump" | "log_gauss" => &["center", "width"],
            _ => return Err(Error::Parse(format!("unknown function '{name}'"))),
        };
        if let Some((k, _)) = pairs.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(Error::Parse(format!(
                "function '{name}' has no parameter '{k}'"
            )));
        }
        let real = |key: &str, default: f64| -> Result<f64> {
            match pairs.iter().find(|(k, _)| *k == key) {
                None => Ok(default),
                Some((_, v)) => {
                    let x: f64 = v.parse().map_err(|_| {
                        Error::Parse(format!("parameter {key}: '{v}' is not a number"))
                    })?;
                    if x.is_finite() {
                        Ok(x)
                    } else {
                        Err(Error::Parse(format!("parameter {key} must be finite")))
                    }
                }
            }
        };
        let int = |key: &str, default: u32| -> Result<u32> {
            match pairs.iter().find(|(k, _)| *k == key) {
                None => Ok(default),
                Some((_, v)) => v.parse().map_err(|_| {
                    Error::Parse(format!(
                        "parameter {key}: '{v}' is not a non-negative integer"
                    ))
                }),
            }
        };
        let b = match name {
            "power" => Builtin::Power { b: real("b", 1.0)? },
            "exp" => Builtin::Exp { b: real("b", 1.0)? },
            "log_k" => Builtin::LogK { k: int("k", 1)? },
            "sinc" => Builtin::Sinc,
            "sinc_deriv" => Builtin::SincDeriv { s: int("s", 1)? },
            "chi01" => Builtin::Chi01,
            "bump" => Builtin::Bump {
                center: real("center", 0.0)?,
                width: real("width", 1.0)?,
            },
            _ => Builtin::LogGauss {
                center: real("center", 0.0)?,
                width: real("width", 0.5)?,
            },
        };
        b.validate().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_display_round_trip() {
        for s in [
            "power:b=1",
            "log_k:k=2",
            "exp:b=-0.5",
            "sinc",
            "sinc_deriv:s=3",
            "chi01",
            "bump:center=0,width=1",
            "log_gauss:center=0.5,width=0.25",
        ] {
            let b: Builtin = s.parse().unwrap();
            assert_eq!(b.to_string(), s);
        }
        assert!("power:c=1".parse::<Builtin>().is_err());
        assert!("bump:width=-1".parse::<Builtin>().is_err());
        assert!("nope".parse::<Builtin>().is_err());
        assert!("power:b=1,b=2".parse::<Builtin>().is_err());
        assert!("power:b=inf".parse::<Builtin>().is_err());
    }

    #[test]
    fn derivatives_match_differences() {
        for s in [
            "power:b=1.5",
            "log_k:k=3",
            "exp:b=-0.7",
            "sinc",
            "sinc_deriv:s=2",
            "bump:center=0.2,width=1.5",
            "log_gauss:center=0,width=0.7",
        ] {
            let b: Builtin = s.parse().unwrap();
            let err = b.bundle().unwrap().cross_check(&[0.6, 1.1, 1.7]).unwrap();
            assert!(err < 1e-6, "{s}: {err}");
        }
    }

    #[test]
    fn sinc_branches_agree() {
        // Series (x <= 1) and jet division (x > 1) paths meet continuously.
        for s in 0..4usize {
            let lo = sinc_scaled(1.0, s, 5);
            let hi = sinc_scaled(1.0 + 1e-12, s, 5);
            for (a, b) in lo.iter().zip(&hi) {
                assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()), "s={s}: {a} vs {b}");
            }
        }
        assert!((Builtin::Sinc.value(0.5) - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn series_forms_match_rules() {
        for s in [
            "exp:b=1",
            "exp:b=-2",
            "sinc",
            "sinc_deriv:s=1",
            "sinc_deriv:s=4",
            "power:b=3",
        ] {
            let b: Builtin = s.parse().unwrap();
            let ser = b.power_series().unwrap().unwrap();
            for x in [0.1, 0.5, 1.0, 1.4] {
                let (_, r) = ser.series().unwrap();
                if x > r {
                    continue;
                }
                let want = b.value(x);
                let got = ser.eval(x).unwrap().re;
                assert!(
                    (got - want).abs() < 1e-13 * (1.0 + want.abs()),
                    "{s} at {x}: {got} vs {want}"
                );
            }
        }
        assert!(Builtin::Chi01.power_series().unwrap().is_none());
    }

    #[test]
    fn bump_support() {
        let b = Builtin::Bump {
            center: 0.0,
            width: 1.0,
        };
        let f = b.function().unwrap();
        assert_eq!(f.eval(3.0).unwrap().re, 0.0);
        assert!((f.eval(1.0).unwrap().re - 1.0).abs() < 1e-15);
        assert!(b
            .scaled_derivatives(2.7, 6)
            .unwrap()
            .iter()
            .all(|v| v.is_finite()));
    }

    proptest! {
        #[test]
        fn parser_never_panics(s in "\\PC{0,40}") {
            let _ = s.parse::<Builtin>();
        }

        #[test]
        fn power_scaled_derivatives(b in -2.0f64..3.0, x in 0.1f64..5.0) {
            let d = Builtin::Power { b }.scaled_derivatives(x, 3).unwrap();
            let want = b * (b - 1.0) * (b - 2.0) * x.powf(b);
            prop_assert!((d[3] - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }
}
