//! Mellin derivatives Theta_c^r, the Hadamard-type fractional derivative
//! D^alpha_{0+,c} and its series forms.

use crate::combinatorics::{stirling_first_kind, stirling_function, stirling_numbers};
use crate::error::{Error, Result};
use crate::function::MellinFunction;
use crate::hadamard::{
    finish, hadamard_integral, integrate_t, series_with_symbol, Layout, QuadConfig,
};
use crate::order::FracOrder;
use crate::quad::{fd_weights, CompensatedSum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Highest order available from the finite-difference fallback.
pub const FD_MAX_ORDER: usize = 4;

/// Steps in log x for central differences of order 1..=4.
const FD_STEPS: [f64; 5] = [0.0, 2e-3, 5e-3, 1e-2, 2e-2];
const FD_HALF_WIDTH: usize = 4;

/// Returns the scaled derivatives x^k f^(k)(x) for k = 0..=n.
pub type JetFn = dyn Fn(f64, usize) -> Result<Vec<Complex64>> + Send + Sync;

#[derive(Clone)]
enum Source {
    Jet(Arc<JetFn>),
    Rules(Vec<MellinFunction>),
    FiniteDifference,
}

/// A function together with a way to evaluate its ordinary derivatives.
#[derive(Clone)]
pub struct DerivativeBundle {
    pub f: MellinFunction,
    source: Source,
    depth: usize,
}

impl std::fmt::Debug for DerivativeBundle {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("DerivativeBundle")
            .field("f", &self.f)
            .field("depth", &self.depth)
            .field("analytic", &self.is_analytic())
            .finish()
    }
}

impl DerivativeBundle {
    /// Derivatives from a routine producing all scaled derivatives x^k f^(k)(x)
    /// at once. The scaled form stays finite where x^k and f^(k) separately
    /// under- or overflow.
    pub fn from_jet<J>(f: MellinFunction, depth: usize, jet: J) -> Self
    where
        J: Fn(f64, usize) -> Result<Vec<Complex64>> + Send + Sync + 'static,
    {
        Self {
            f,
            source: Source::Jet(Arc::new(jet)),
            depth,
        }
    }

    /// Derivatives f', f'', ... as separate functions.
    pub fn from_rules(f: MellinFunction, derivs: Vec<MellinFunction>) -> Self {
        let depth = derivs.len();
        Self {
            f,
            source: Source::Rules(derivs),
            depth,
        }
    }

    /// Central differences in log x, up to order four.
    pub fn finite_difference(f: MellinFunction) -> Self {
        Self {
            f,
            source: Source::FiniteDifference,
            depth: FD_MAX_ORDER,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self.source, Source::FiniteDifference)
    }

    /// f^(k)(x) for k = 0..=n.
    pub fn derivatives(&self, x: f64, n: usize) -> Result<Vec<Complex64>> {
        let mut d = self.scaled_derivatives(x, n)?;
        let mut xk = 1.0;
        for v in d.iter_mut() {
            *v /= xk;
            xk *= x;
        }
        Ok(d)
    }

    /// x^k f^(k)(x) for k = 0..=n.
    pub fn scaled_derivatives(&self, x: f64, n: usize) -> Result<Vec<Complex64>> {
        if n > self.depth {
            return Err(Error::MissingDerivative {
                needed: n,
                depth: self.depth,
            });
        }
        match &self.source {
            Source::Jet(j) => {
                let mut v = j(x, n)?;
                v.truncate(n + 1);
                Ok(v)
            }
            Source::Rules(rules) => {
                let mut v = Vec::with_capacity(n + 1);
                v.push(self.f.eval(x)?);
                let mut xk = 1.0;
                for r in &rules[..n] {
                    xk *= x;
                    v.push(r.eval(x)? * xk);
                }
                Ok(v)
            }
            Source::FiniteDifference => fd_derivatives(&self.f, x, n),
        }
    }

    /// The k-th derivative as a function.
    pub fn derivative_function(&self, k: usize) -> Result<MellinFunction> {
        if k > self.depth {
            return Err(Error::MissingDerivative {
                needed: k,
                depth: self.depth,
            });
        }
        let b = self.clone();
        Ok(
            MellinFunction::from_fallible(move |x| Ok(b.derivatives(x, k)?[k]), self.f.is_real())
                .with_breakpoints(self.f.breakpoints().to_vec()),
        )
    }

    /// Largest discrepancy between the supplied derivatives and central
    /// differences at the probe points, measured on x^k f^(k) relative to the
    /// largest such term at each point.
    pub fn cross_check(&self, points: &[f64]) -> Result<f64> {
        let n = self.depth.min(FD_MAX_ORDER);
        let mut worst = 0.0f64;
        for &x in points {
            let a = self.scaled_derivatives(x, n)?;
            let d = fd_derivatives(&self.f, x, n)?;
            let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if scale == 0.0 {
                continue;
            }
            for (p, q) in a.iter().zip(&d) {
                worst = worst.max((p - q).norm() / scale);
            }
        }
        Ok(worst)
    }
}

/// delta^k g(u0), delta = d/du, by a 9-point central stencil with an order-dependent step.
pub(crate) fn log_derivative<G>(mut g: G, u0: f64, k: usize) -> Result<Complex64>
where
    G: FnMut(f64) -> Result<Complex64>,
{
    if k == 0 {
        return g(u0);
    }
    if k > FD_MAX_ORDER {
        return Err(Error::MissingDerivative {
            needed: k,
            depth: FD_MAX_ORDER,
        });
    }
    let h = FD_STEPS[k];
    let offsets: Vec<f64> = (0..=2 * FD_HALF_WIDTH)
        .map(|i| (i as f64 - FD_HALF_WIDTH as f64) * h)
        .collect();
    let w = fd_weights(0.0, &offsets, k);
    let mut acc = CompensatedSum::new();
    for (o, wk) in offsets.iter().zip(&w[k]) {
        if *wk != 0.0 {
            acc.add(g(u0 + o)? * *wk);
        }
    }
    Ok(acc.value())
}

/// x^k f^(k)(x), k = 0..=n, from log-space differences and Stirling numbers
/// of the first kind: x^k f^(k) = sum_j s(k, j) delta^j f.
fn fd_derivatives(f: &MellinFunction, x: f64, n: usize) -> Result<Vec<Complex64>> {
    if n > FD_MAX_ORDER {
        return Err(Error::MissingDerivative {
            needed: n,
            depth: FD_MAX_ORDER,
        });
    }
    if !(x > 0.0) {
        return Err(Error::domain(format!("derivative requested at x = {x}")));
    }
    let u0 = x.ln();
    let mut delta = Vec::with_capacity(n + 1);
    for j in 0..=n {
        delta.push(log_derivative(|u| f.eval_log(u), u0, j)?);
    }
    let s1 = stirling_first_kind(n);
    Ok(from_log_derivatives(&delta, &s1))
}

/// Converts delta^j f (j = 0..=n) into x^k f^(k) (k = 0..=n).
pub(crate) fn from_log_derivatives(delta: &[Complex64], s1: &[Vec<f64>]) -> Vec<Complex64> {
    (0..delta.len())
        .map(|k| (0..=k).map(|j| delta[j] * s1[k][j]).sum())
        .collect()
}

/// Theta_c^r f(x) = sum_k S_c(r, k) x^k f^(k)(x).
pub fn theta_derivative(bundle: &DerivativeBundle, r: usize, c: f64, x: f64) -> Result<Complex64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!(
            "evaluation point must be positive, got {x}"
        )));
    }
    let table = stirling_numbers(c, r);
    let d = bundle.scaled_derivatives(x, r)?;
    Ok(theta_from(&d, table.row(r)))
}

fn theta_from(scaled: &[Complex64], row: &[f64]) -> Complex64 {
    let mut acc = CompensatedSum::new();
    for (d, s) in scaled.iter().zip(row) {
        acc.add(d * *s);
    }
    acc.value()
}

fn check_point(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "evaluation point must be positive, got {x}"
        )));
    }
    Ok(())
}

/// Layout for integrands that need x itself (derivative jets), which caps t at
/// the floating-point range of x e^{-t}.
fn x_layout(f: &MellinFunction, x: f64) -> Layout {
    let mut l = Layout::for_function(f, x);
    l.t_max = l.t_max.min(x.ln() + 700.0);
    l
}

/// D^alpha_{0+,c} f(x) = J^{m-alpha}_{0+,c}(Theta_c^m f)(x), m = floor(alpha) + 1.
pub fn hadamard_derivative(
    bundle: &DerivativeBundle,
    order: FracOrder,
    c: f64,
    x: f64,
    quad: &QuadConfig,
) -> Result<Complex64> {
    check_point(x)?;
    let m = order.m;
    if bundle.depth() < m {
        return Err(Error::MissingDerivative {
            needed: m,
            depth: bundle.depth(),
        });
    }
    let table = stirling_numbers(c, m);
    let row = table.row(m).to_vec();
    let layout = x_layout(&bundle.f, x);
    let lx = x.ln();
    let r = integrate_t(
        |t, out| {
            let d = bundle.scaled_derivatives((lx - t).exp(), m)?;
            out[0] = theta_from(&d, &row);
            Ok(())
        },
        order.complement(),
        &[c],
        &layout,
        quad,
    )?;
    Ok(finish(r)?[0])
}

/// Both operator orders of the fractional derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    /// J^{m-alpha}(Theta^m f), the default path.
    pub value: Complex64,
    /// Theta^m (J^{m-alpha} f) with the outer derivative taken by central differences in log x.
    pub outer: Complex64,
    pub discrepancy: f64,
}

/// Evaluates D^alpha_{0+,c} f(x) through both operator orders and reports their gap.
pub fn hadamard_derivative_checked(
    bundle: &DerivativeBundle,
    order: FracOrder,
    c: f64,
    x: f64,
    quad: &QuadConfig,
) -> Result<DerivativeCheck> {
    let value = hadamard_derivative(bundle, order, c, x, quad)?;
    let outer = theta_of_integral(&bundle.f, order, c, x, quad)?;
    let discrepancy = (value - outer).norm() / value.norm().max(f64::MIN_POSITIVE);
    Ok(DerivativeCheck {
        value,
        outer,
        discrepancy,
    })
}

/// Theta_c^m (J^{m-alpha}_{0+,c} f)(x) = x^{-c} delta^m (x^c J^{m-alpha} f)(x).
pub fn theta_of_integral(
    f: &MellinFunction,
    order: FracOrder,
    c: f64,
    x: f64,
    quad: &QuadConfig,
) -> Result<Complex64> {
    check_point(x)?;
    let inner = FracOrder::new(order.complement())?;
    let tight = QuadConfig {
        rel_tol: quad.rel_tol.min(1e-12),
        ..*quad
    };
    let u0 = x.ln();
    let d = log_derivative(
        |u| Ok(hadamard_integral(f, inner, c, u.exp(), &tight)? * (c * (u - u0)).exp()),
        u0,
        order.m,
    )?;
    Ok(d)
}

/// sum_k (c+k)^alpha a_k x^k for a power series (c = 0 needs a_0 = 0).
pub fn hadamard_derivative_series(
    f: &MellinFunction,
    order: FracOrder,
    c: f64,
    x: f64,
) -> Result<Complex64> {
    series_with_symbol(f, c, x, |ck| ck.powf(order.alpha))
}

/// Partial sum of a Stirling-function series with the last term as a tail proxy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesEstimate {
    pub value: Complex64,
    pub last_term: f64,
    pub terms: usize,
}

/// sum_{k=0}^K S_c(alpha, k) x^k f^(k)(x), the Stirling-function form of D^alpha_{0+,c}.
pub fn stirling_series_derivative(
    bundle: &DerivativeBundle,
    alpha: f64,
    c: f64,
    x: f64,
    k_max: usize,
) -> Result<SeriesEstimate> {
    stirling_series(bundle, alpha, c, x, k_max)
}

/// sum_{k=0}^K S_c(-alpha, k) x^k f^(k)(x), the Stirling-function form of J^alpha_{0+,c}.
pub fn stirling_series_integral(
    bundle: &DerivativeBundle,
    alpha: f64,
    c: f64,
    x: f64,
    k_max: usize,
) -> Result<SeriesEstimate> {
    stirling_series(bundle, -alpha, c, x, k_max)
}

fn stirling_series(
    bundle: &DerivativeBundle,
    power: f64,
    c: f64,
    x: f64,
    k_max: usize,
) -> Result<SeriesEstimate> {
    if !(c > 0.0) {
        return Err(Error::domain(format!(
            "Stirling series needs c > 0, got {c}"
        )));
    }
    check_point(x)?;
    let d = bundle.scaled_derivatives(x, k_max)?;
    let mut acc = CompensatedSum::new();
    let mut last = 0.0;
    for (k, dk) in d.iter().enumerate() {
        let term = dk * stirling_function(c, power, k)?;
        acc.add(term);
        last = term.norm();
    }
    Ok(SeriesEstimate {
        value: acc.value(),
        last_term: last,
        terms: k_max + 1,
    })
}

/// Bundle for J^gamma_{0+,c} f using (J^gamma_c f)^(k) = J^gamma_{c+k} f^(k);
/// in scaled form x^k (J^gamma_c f)^(k)(x) = J^gamma_c [y^k f^(k)(y)](x).
pub fn integral_derivative_bundle(
    bundle: &DerivativeBundle,
    gamma: f64,
    c: f64,
    quad: &QuadConfig,
) -> Result<DerivativeBundle> {
    let order = FracOrder::new(gamma)?;
    let depth = bundle.depth();
    let inner = bundle.clone();
    let q = *quad;
    let jet = move |x: f64, n: usize| -> Result<Vec<Complex64>> {
        check_point(x)?;
        if n > depth {
            return Err(Error::MissingDerivative { needed: n, depth });
        }
        let mus = vec![c; n + 1];
        let layout = x_layout(&inner.f, x);
        let lx = x.ln();
        let r = integrate_t(
            |t, out| {
                let d = inner.scaled_derivatives((lx - t).exp(), n)?;
                out.copy_from_slice(&d);
                Ok(())
            },
            order.alpha,
            &mus,
            &layout,
            &q,
        )?;
        finish(r)
    };
    let base = bundle.f.clone();
    let fq = *quad;
    let f = MellinFunction::from_fallible(
        move |x| hadamard_integral(&base, order, c, x, &fq),
        bundle.f.is_real(),
    )
    .with_label(format!("J^{gamma}_{c} {}", bundle.f.label()));
    Ok(DerivativeBundle::from_jet(f, depth, jet))
}

/// Bundle for a function given only as a rule, with derivatives by differences.
pub fn numeric_bundle(f: MellinFunction) -> DerivativeBundle {
    DerivativeBundle::finite_difference(f)
}
