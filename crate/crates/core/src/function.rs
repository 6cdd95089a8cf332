//! Functions on the positive half-line in their three representations.

use crate::error::{Error, Result};
use crate::grid::LogGrid;
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

pub type RuleFn = dyn Fn(f64) -> Result<Complex64> + Send + Sync;

/// Representation kind of a [`MellinFunction`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Rule,
    PowerSeries,
    Sampled,
}

#[derive(Clone)]
enum Repr {
    Rule(Arc<RuleFn>),
    /// Rule taking u = log x, used where x itself would under- or overflow.
    LogRule(Arc<RuleFn>),
    PowerSeries {
        coeffs: Arc<Vec<Complex64>>,
        radius: f64,
    },
    Sampled(Arc<Samples>),
}

/// Natural cubic spline in log x through complex samples.
struct Samples {
    grid: LogGrid,
    values: Vec<Complex64>,
    second: Vec<Complex64>,
    zero_outside: bool,
}

impl Samples {
    fn new(grid: LogGrid, values: Vec<Complex64>, zero_outside: bool) -> Self {
        let n = values.len();
        let h = grid.h_log();
        // Tridiagonal solve for natural spline second derivatives (uniform spacing).
        let mut second = vec![Complex64::new(0.0, 0.0); n];
        if n > 2 {
            let mut cp = vec![0.0; n];
            let mut dp = vec![Complex64::new(0.0, 0.0); n];
            for i in 1..n - 1 {
                let rhs = (values[i + 1] - values[i] * 2.0 + values[i - 1]) * (6.0 / (h * h));
                let denom = 4.0 - cp[i - 1];
                cp[i] = 1.0 / denom;
                dp[i] = (rhs - dp[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                second[i] = dp[i] - second[i + 1] * cp[i];
            }
        }
        Self {
            grid,
            values,
            second,
            zero_outside,
        }
    }

    fn eval_log(&self, u: f64) -> Result<Complex64> {
        let g = &self.grid;
        if !g.contains_log(u) {
            if self.zero_outside {
                return Ok(Complex64::new(0.0, 0.0));
            }
            return Err(Error::domain(format!(
                "sampled function evaluated at log x = {u} outside its span [{}, {}]",
                g.u_min(),
                g.u_max()
            )));
        }
        let h = g.h_log();
        let n = self.values.len();
        let s = ((u - g.u_min()) / h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        let a = 1.0 - t;
        let y0 = self.values[i];
        let y1 = self.values[i + 1];
        let m0 = self.second[i];
        let m1 = self.second[i + 1];
        Ok(y0 * a + y1 * t + (m0 * (a * a * a - a) + m1 * (t * t * t - t)) * (h * h / 6.0))
    }
}

/// A real- or complex-valued function of x > 0.
#[derive(Clone)]
pub struct MellinFunction {
    repr: Repr,
    breakpoints: Vec<f64>,
    log_support: Option<(f64, f64)>,
    real: bool,
    label: String,
}

impl fmt::Debug for MellinFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MellinFunction")
            .field("kind", &self.kind())
            .field("label", &self.label)
            .field("breakpoints", &self.breakpoints)
            .field("log_support", &self.log_support)
            .finish()
    }
}

impl MellinFunction {
    /// Real-valued rule x -> f(x).
    pub fn from_real<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_parts(
            Repr::Rule(Arc::new(move |x| Ok(Complex64::new(f(x), 0.0)))),
            true,
        )
    }

    /// Complex-valued rule x -> f(x).
    pub fn from_complex<F>(f: F) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        Self::from_parts(Repr::Rule(Arc::new(move |x| Ok(f(x)))), false)
    }

    /// Rule whose evaluation may fail (for example because it is itself an integral).
    pub fn from_fallible<F>(f: F, real: bool) -> Self
    where
        F: Fn(f64) -> Result<Complex64> + Send + Sync + 'static,
    {
        Self::from_parts(Repr::Rule(Arc::new(f)), real)
    }

    /// Rule expressed in u = log x.
    pub fn from_log_rule<F>(f: F, real: bool) -> Self
    where
        F: Fn(f64) -> Result<Complex64> + Send + Sync + 'static,
    {
        Self::from_parts(Repr::LogRule(Arc::new(f)), real)
    }

    /// Power series sum a_k x^k, valid for 0 < x <= radius.
    pub fn power_series(coeffs: Vec<Complex64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::domain("power series radius must be positive"));
        }
        let real = coeffs.iter().all(|c| c.im == 0.0);
        Ok(Self::from_parts(
            Repr::PowerSeries {
                coeffs: Arc::new(coeffs),
                radius,
            },
            real,
        ))
    }

    /// Real power series.
    pub fn power_series_real(coeffs: &[f64], radius: f64) -> Result<Self> {
        Self::power_series(
            coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
            radius,
        )
    }

    /// Samples on a log grid, interpolated by a natural cubic spline in log x.
    /// Evaluation outside the grid span is an error.
    pub fn sampled(grid: LogGrid, values: Vec<Complex64>) -> Result<Self> {
        Self::sampled_impl(grid, values, false)
    }

    /// Samples of a function known to vanish outside the grid span.
    pub fn sampled_compact(grid: LogGrid, values: Vec<Complex64>) -> Result<Self> {
        let support = (grid.u_min(), grid.u_max());
        Ok(Self::sampled_impl(grid, values, true)?.with_log_support(support.0, support.1))
    }

    fn sampled_impl(grid: LogGrid, values: Vec<Complex64>, zero_outside: bool) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::domain(format!(
                "{} samples supplied for a grid of {} points",
                values.len(),
                grid.n
            )));
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::domain("samples must be finite"));
        }
        let real = values.iter().all(|v| v.im == 0.0);
        Ok(Self::from_parts(
            Repr::Sampled(Arc::new(Samples::new(grid, values, zero_outside))),
            real,
        ))
    }

    fn from_parts(repr: Repr, real: bool) -> Self {
        Self {
            repr,
            breakpoints: Vec::new(),
            log_support: None,
            real,
            label: String::new(),
        }
    }

    /// Points of non-smoothness (x coordinates); quadrature splits there.
    pub fn with_breakpoints(mut self, mut bps: Vec<f64>) -> Self {
        bps.retain(|b| *b > 0.0 && b.is_finite());
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        self.breakpoints = bps;
        self
    }

    /// Declares f = 0 outside lo <= log x <= hi.
    pub fn with_log_support(mut self, lo: f64, hi: f64) -> Self {
        self.log_support = Some((lo, hi));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Marks a rule as real-valued (imaginary parts are then ignored by norms
    /// and symmetry checks, not discarded).
    pub fn with_real(mut self, real: bool) -> Self {
        self.real = real;
        self
    }

    pub fn kind(&self) -> Kind {
        match self.repr {
            Repr::Rule(_) | Repr::LogRule(_) => Kind::Rule,
            Repr::PowerSeries { .. } => Kind::PowerSeries,
            Repr::Sampled(_) => Kind::Sampled,
        }
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn log_support(&self) -> Option<(f64, f64)> {
        self.log_support
    }

    /// True when evaluation works directly in log x, so points far below the
    /// floating-point range of x can still be evaluated.
    pub fn log_native(&self) -> bool {
        matches!(self.repr, Repr::LogRule(_) | Repr::Sampled(_)) || self.log_support.is_some()
    }

    /// Log-span of the samples for sampled functions.
    pub fn sample_span(&self) -> Option<(f64, f64)> {
        match &self.repr {
            Repr::Sampled(s) => Some((s.grid.u_min(), s.grid.u_max())),
            _ => None,
        }
    }

    /// Power-series coefficients and radius, if this is a series.
    pub fn series(&self) -> Option<(&[Complex64], f64)> {
        match &self.repr {
            Repr::PowerSeries { coeffs, radius } => Some((coeffs.as_slice(), *radius)),
            _ => None,
        }
    }

    /// Samples and grid, if this is a sampled function.
    pub fn samples(&self) -> Option<(&LogGrid, &[Complex64])> {
        match &self.repr {
            Repr::Sampled(s) => Some((&s.grid, s.values.as_slice())),
            _ => None,
        }
    }

    fn outside_support(&self, u: f64) -> bool {
        match self.log_support {
            Some((lo, hi)) => u < lo || u > hi,
            None => false,
        }
    }

    /// f(x) for x > 0.
    pub fn eval(&self, x: f64) -> Result<Complex64> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::domain(format!("function evaluated at x = {x}")));
        }
        if self.log_support.is_some() && self.outside_support(x.ln()) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        match &self.repr {
            Repr::Rule(f) => f(x),
            Repr::LogRule(f) => f(x.ln()),
            Repr::PowerSeries { coeffs, radius } => {
                if x > *radius * (1.0 + 1e-14) {
                    return Err(Error::domain(format!(
                        "power series evaluated at x = {x} beyond radius {radius}"
                    )));
                }
                Ok(horner(coeffs, x))
            }
            Repr::Sampled(s) => s.eval_log(x.ln()),
        }
    }

    /// f(e^u).
    pub fn eval_log(&self, u: f64) -> Result<Complex64> {
        if self.outside_support(u) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        match &self.repr {
            Repr::LogRule(f) => f(u),
            Repr::Sampled(s) => s.eval_log(u),
            _ => {
                let x = u.exp();
                if x == 0.0 || !x.is_finite() {
                    return Err(Error::domain(format!(
                        "log x = {u} leaves the floating-point range"
                    )));
                }
                self.eval(x)
            }
        }
    }

    /// Pointwise product with a scalar.
    pub fn scaled(&self, s: Complex64) -> Self {
        let inner = self.clone();
        let mut out =
            Self::from_fallible(move |x| Ok(inner.eval(x)? * s), self.real && s.im == 0.0);
        out.breakpoints = self.breakpoints.clone();
        out.log_support = self.log_support;
        out
    }
}

/// Horner evaluation of sum a_k x^k.
pub fn horner(coeffs: &[Complex64], x: f64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, a| acc * x + a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_beyond_radius_fails() {
        let f = MellinFunction::power_series_real(&[1.0, 1.0], 1.0).unwrap();
        assert!(f.eval(0.5).is_ok());
        assert!(f.eval(1.5).is_err());
    }

    #[test]
    fn sampled_interpolates_cubics_in_log() {
        let g = LogGrid::new(0.1, 10.0, 201).unwrap();
        let vals: Vec<Complex64> = g
            .log_points()
            .iter()
            .map(|u| Complex64::new((-u * u).exp(), 0.0))
            .collect();
        let f = MellinFunction::sampled(g, vals).unwrap();
        let u: f64 = 0.3217;
        let got = f.eval(u.exp()).unwrap().re;
        assert!((got - (-u * u).exp()).abs() < 1e-6);
        assert!(f.eval(20.0).is_err());
    }

    #[test]
    fn compact_support_zero_outside() {
        let f = MellinFunction::from_real(|_| 1.0).with_log_support(-1.0, 1.0);
        assert_eq!(f.eval(10.0).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(f.eval(1.0).unwrap(), Complex64::new(1.0, 0.0));
    }
}
