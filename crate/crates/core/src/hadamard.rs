//! Hadamard-type fractional integrals
//!
//!   (J^alpha_{0+,mu} f)(x) = (1/Gamma(alpha)) int_0^x (u/x)^mu (log(x/u))^(alpha-1) f(u) du/u
//!
//! evaluated after the substitution t = log(x/u), which turns the kernel into
//! e^{-mu t} t^(alpha-1) dt. The weakly singular head [0, T] is handled by a
//! Gauss-Jacobi rule for the weight t^(alpha-1); the remainder is covered by
//! adaptive Gauss-Kronrod between breakpoints and a sequence of doubling tail
//! panels whose increments double as divergence evidence.

use crate::error::{Error, Result};
use crate::function::MellinFunction;
use crate::gamma::gamma;
use crate::order::FracOrder;
use crate::quad::{gk_adaptive, gk_adaptive_vec, jacobi_unit, AdaptiveConfig, CompensatedSum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Quadrature controls for the fractional integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub rel_tol: f64,
    /// Number of doubling tail panels before giving up.
    pub max_levels: usize,
    /// Gauss-Jacobi nodes on the singular head.
    pub jacobi_nodes: usize,
    /// Initial length of the head interval in t.
    pub head: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            max_levels: 20,
            jacobi_nodes: 64,
            head: 5.0,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::domain("rel_tol must be positive"));
        }
        if self.jacobi_nodes < 8 {
            return Err(Error::domain("at least 8 Gauss-Jacobi nodes are required"));
        }
        if !(self.head > 0.0) {
            return Err(Error::domain("head length must be positive"));
        }
        Ok(())
    }

    fn adaptive(&self) -> AdaptiveConfig {
        AdaptiveConfig {
            abs_tol: 1e-300,
            rel_tol: (self.rel_tol * 1e-3).clamp(1e-13, 1e-9),
            max_intervals: 4000,
        }
    }
}

/// Result of the t-integration with the increments of the tail panels.
#[derive(Debug, Clone)]
pub(crate) struct Integration {
    pub value: Vec<Complex64>,
    /// max_d |panel_d| for each doubling tail panel, in order.
    pub increments: Vec<f64>,
    pub converged: bool,
}

/// Where the integrand in t can be nonzero and where it is not smooth.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub t_start: f64,
    pub t_end: Option<f64>,
    pub breaks: Vec<f64>,
    /// Largest t at which the integrand can be evaluated.
    pub t_max: f64,
}

impl Layout {
    pub fn for_function(f: &MellinFunction, x: f64) -> Self {
        let lx = x.ln();
        let (mut t_start, mut t_end) = (0.0, None);
        if let Some((lo, hi)) = f.log_support() {
            t_start = (lx - hi).max(0.0);
            t_end = Some(lx - lo);
        }
        if let Some((lo, hi)) = f.sample_span() {
            t_start = t_start.max(lx - hi);
            let e = lx - lo;
            t_end = Some(t_end.map_or(e, |v: f64| v.min(e)));
        }
        let breaks = f
            .breakpoints()
            .iter()
            .map(|b| lx - b.ln())
            .filter(|t| *t > 0.0)
            .collect();
        let t_max = if f.log_native() {
            f64::INFINITY
        } else {
            lx + 700.0
        };
        let mut l = Self {
            t_start,
            t_end,
            breaks,
            t_max,
        };
        l.breaks.sort_by(f64::total_cmp);
        l
    }
}

/// (1/Gamma(alpha)) int_0^inf e^{-mu_d t} t^(alpha-1) g_d(t) dt for every component d,
/// where `g` fills g_d(t).
pub(crate) fn integrate_t<G>(
    mut g: G,
    alpha: f64,
    mus: &[f64],
    layout: &Layout,
    quad: &QuadConfig,
) -> Result<Integration>
where
    G: FnMut(f64, &mut [Complex64]) -> Result<()>,
{
    quad.validate()?;
    let dim = mus.len();
    let mut total = vec![CompensatedSum::new(); dim];
    let add = |total: &mut Vec<CompensatedSum>, v: &[Complex64]| {
        for (t, x) in total.iter_mut().zip(v) {
            t.add(*x);
        }
    };
    let cfg = quad.adaptive();
    let t_end = layout.t_end;
    if let Some(e) = t_end {
        if e <= layout.t_start {
            return Ok(Integration {
                value: vec![ZERO; dim],
                increments: Vec::new(),
                converged: true,
            });
        }
    }
    let first_break = layout
        .breaks
        .iter()
        .copied()
        .find(|b| *b > layout.t_start)
        .unwrap_or(f64::INFINITY);
    let mut pos = layout.t_start;
    if layout.t_start == 0.0 {
        // Singular head with the t^(alpha-1) weight absorbed by Gauss-Jacobi.
        let mut head = quad.head.min(first_break);
        if let Some(e) = t_end {
            head = head.min(e);
        }
        let fine = jacobi_unit(quad.jacobi_nodes, alpha)?;
        let coarse = jacobi_unit(quad.jacobi_nodes * 3 / 4, alpha)?;
        let mut buf = vec![ZERO; dim];
        let mut accepted = None;
        for _ in 0..40 {
            let mut rule_sum = |rule: &crate::quad::Rule| -> Result<Vec<Complex64>> {
                let mut acc = vec![ZERO; dim];
                for (s, w) in rule.nodes.iter().zip(&rule.weights) {
                    let t = head * s;
                    g(t, &mut buf)?;
                    for ((a, v), mu) in acc.iter_mut().zip(&buf).zip(mus) {
                        *a += v * ((-mu * t).exp() * w);
                    }
                }
                let scale = head.powf(alpha);
                Ok(acc.into_iter().map(|a| a * scale).collect())
            };
            let a = rule_sum(&fine)?;
            let b = rule_sum(&coarse)?;
            let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let diff = a
                .iter()
                .zip(&b)
                .map(|(p, q)| (p - q).norm())
                .fold(0.0, f64::max);
            if diff <= cfg.rel_tol * scale.max(1e-300) || diff == 0.0 {
                accepted = Some(a);
                break;
            }
            head *= 0.5;
        }
        let head_value = accepted.ok_or_else(|| {
            Error::NonConvergent("Gauss-Jacobi head did not settle after 40 halvings".into())
        })?;
        add(&mut total, &head_value);
        pos = head;
    }

    let mut weighted = |t: f64, out: &mut [Complex64]| -> Result<()> {
        g(t, out)?;
        let p = t.powf(alpha - 1.0);
        for (o, mu) in out.iter_mut().zip(mus) {
            *o *= (-mu * t).exp() * p;
        }
        Ok(())
    };

    // Breakpoint segments.
    let mut stops: Vec<f64> = layout.breaks.iter().copied().filter(|b| *b > pos).collect();
    match t_end {
        Some(e) => {
            stops.retain(|b| *b < e);
            stops.push(e);
        }
        None => {
            let last = stops.last().copied().unwrap_or(pos).max(pos);
            let m = last.max(quad.head);
            if m > last {
                stops.push(m);
            }
        }
    }
    for &b in &stops {
        if b > pos {
            let seg = gk_adaptive_vec(&mut weighted, pos, b, dim, &cfg)?;
            if !seg.converged {
                return Err(Error::NonConvergent(format!(
                    "adaptive quadrature failed on t in [{pos}, {b}] (error {:.3e})",
                    seg.error
                )));
            }
            add(&mut total, &seg.value);
            pos = b;
        }
    }
    if t_end.is_some() {
        return Ok(normalize(total, Vec::new(), true, alpha));
    }

    // Doubling tail panels.
    let mut increments = Vec::new();
    let mut quiet = 0;
    let mut converged = false;
    for _ in 0..quad.max_levels {
        let b = 2.0 * pos;
        if b > layout.t_max {
            break;
        }
        let seg = gk_adaptive_vec(&mut weighted, pos, b, dim, &cfg)?;
        add(&mut total, &seg.value);
        let inc = seg.value.iter().map(|v| v.norm()).fold(0.0, f64::max);
        increments.push(inc);
        let scale = total.iter().map(|s| s.value().norm()).fold(0.0, f64::max);
        if inc <= quad.rel_tol * 1e-2 * scale || inc == 0.0 {
            quiet += 1;
        } else {
            quiet = 0;
        }
        pos = b;
        if quiet >= 2 && seg.converged {
            converged = true;
            break;
        }
    }
    Ok(normalize(total, increments, converged, alpha))
}

fn normalize(
    total: Vec<CompensatedSum>,
    increments: Vec<f64>,
    converged: bool,
    alpha: f64,
) -> Integration {
    let g = gamma(alpha);
    Integration {
        value: total.iter().map(|s| s.value() / g).collect(),
        increments: increments.into_iter().map(|v| v / g).collect(),
        converged,
    }
}

/// (J^alpha_{0+,mu} f)(x).
pub fn hadamard_integral(
    f: &MellinFunction,
    order: FracOrder,
    mu: f64,
    x: f64,
    quad: &QuadConfig,
) -> Result<Complex64> {
    check_point(x)?;
    let lx = x.ln();
    let layout = Layout::for_function(f, x);
    let r = integrate_t(
        |t, out| {
            out[0] = f.eval_log(lx - t)?;
            Ok(())
        },
        order.alpha,
        &[mu],
        &layout,
        quad,
    )?;
    finish(r).map(|v| v[0])
}

/// Vector form: J^alpha_{0+,mu_d} applied to the components filled by `g(u, out)`
/// at the point u = log(x e^{-t}).
pub fn hadamard_integral_components<G>(
    mut g: G,
    layout_of: &MellinFunction,
    alpha: f64,
    mus: &[f64],
    x: f64,
    quad: &QuadConfig,
) -> Result<Vec<Complex64>>
where
    G: FnMut(f64, &mut [Complex64]) -> Result<()>,
{
    check_point(x)?;
    let lx = x.ln();
    let layout = Layout::for_function(layout_of, x);
    let r = integrate_t(|t, out| g(lx - t, out), alpha, mus, &layout, quad)?;
    finish(r)
}

pub(crate) fn finish(r: Integration) -> Result<Vec<Complex64>> {
    if r.converged {
        Ok(r.value)
    } else {
        Err(Error::divergent(
            "tail panels kept contributing after the maximum number of doublings",
            r.increments,
        ))
    }
}

fn check_point(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "evaluation point must be positive, got {x}"
        )));
    }
    Ok(())
}

/// Sum_k (c+k)^(-alpha) a_k x^k for a power series; c = 0 requires a_0 = 0.
pub fn hadamard_integral_series(
    f: &MellinFunction,
    order: FracOrder,
    c: f64,
    x: f64,
) -> Result<Complex64> {
    series_with_symbol(f, c, x, |ck| ck.powf(-order.alpha))
}

pub(crate) fn series_with_symbol<S>(
    f: &MellinFunction,
    c: f64,
    x: f64,
    symbol: S,
) -> Result<Complex64>
where
    S: Fn(f64) -> f64,
{
    let (coeffs, radius) = f
        .series()
        .ok_or_else(|| Error::domain("series path needs a power-series function"))?;
    check_point(x)?;
    if x > radius * (1.0 + 1e-14) {
        return Err(Error::domain(format!(
            "x = {x} lies beyond the series radius {radius}"
        )));
    }
    if c < 0.0 {
        return Err(Error::domain(format!(
            "series path requires c >= 0, got {c}"
        )));
    }
    if c == 0.0 && coeffs.first().is_some_and(|a| a.norm() != 0.0) {
        return Err(Error::domain(
            "with c = 0 the constant term must vanish (f(0) = 0)",
        ));
    }
    let mut sum = CompensatedSum::new();
    let mut xk = 1.0;
    for (k, a) in coeffs.iter().enumerate() {
        let ck = c + k as f64;
        if ck > 0.0 && *a != ZERO {
            sum.add(a * (symbol(ck) * xk));
        }
        xk *= x;
    }
    Ok(sum.value())
}

/// r-fold iterated integral x^{-c} int_0^x u_1^c du_1/u_1 ... int_0^{u_{r-1}} f(u_r) u_r^c du_r/u_r,
/// computed by nested one-dimensional quadrature (independent of the Jacobi route).
pub fn integer_iterated_integral(
    f: &MellinFunction,
    r: usize,
    c: f64,
    x: f64,
) -> Result<Complex64> {
    if r == 0 {
        return Err(Error::domain("iterated integral needs r >= 1"));
    }
    check_point(x)?;
    let cfg = AdaptiveConfig {
        abs_tol: 1e-15,
        rel_tol: 1e-11,
        max_intervals: 2000,
    };
    iterated(f, r, c, x.ln(), &cfg)
}

fn iterated(
    f: &MellinFunction,
    r: usize,
    c: f64,
    u: f64,
    cfg: &AdaptiveConfig,
) -> Result<Complex64> {
    if r == 0 {
        return f.eval_log(u);
    }
    // t in [0, inf) mapped to s in [0, 1) by t = s/(1-s); stay inside the double range.
    let t_cap = (u + 700.0).max(0.0);
    if t_cap == 0.0 {
        return Ok(ZERO);
    }
    let s_cap = t_cap / (1.0 + t_cap);
    let res = gk_adaptive(
        |s| {
            let one = 1.0 - s;
            let t = s / one;
            let inner = iterated(f, r - 1, c, u - t, cfg)?;
            Ok(inner * ((-c * t).exp() / (one * one)))
        },
        0.0,
        s_cap,
        cfg,
    )?;
    if !res.converged {
        return Err(Error::divergent(
            format!("nested quadrature at depth {r} did not converge"),
            vec![res.error],
        ));
    }
    Ok(res.value)
}

/// Controls for [`domain_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Successive tail increments growing by more than this factor count as growth.
    pub growth_threshold: f64,
    /// Consecutive levels of evidence needed for a Divergent verdict.
    pub window: usize,
    /// log2 of the increment ratio at or above which a level counts as non-decaying.
    pub min_decay_exponent: f64,
    pub quad: QuadConfig,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            growth_threshold: 1.5,
            window: 5,
            min_decay_exponent: -0.05,
            quad: QuadConfig::default(),
        }
    }
}

/// Verdict of the domain probe, with the refinement trace as evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProbeOutcome {
    Convergent {
        value: f64,
        increments: Vec<f64>,
    },
    Divergent {
        reason: String,
        increments: Vec<f64>,
    },
}

impl ProbeOutcome {
    pub fn is_convergent(&self) -> bool {
        matches!(self, ProbeOutcome::Convergent { .. })
    }
}

/// Classifies whether int_0^x u^c (log(x/u))^(alpha-1) |f(u)| du/u is finite by
/// watching the doubling tail panels in t = log(x/u). A heuristic diagnostic.
pub fn domain_probe(
    f: &MellinFunction,
    order: FracOrder,
    c: f64,
    x: f64,
    cfg: &ProbeConfig,
) -> ProbeOutcome {
    if let Err(e) = check_point(x) {
        return ProbeOutcome::Divergent {
            reason: e.to_string(),
            increments: Vec::new(),
        };
    }
    let lx = x.ln();
    let layout = Layout::for_function(f, x);
    let res = integrate_t(
        |t, out| {
            out[0] = Complex64::new(f.eval_log(lx - t)?.norm(), 0.0);
            Ok(())
        },
        order.alpha,
        &[c],
        &layout,
        &cfg.quad,
    );
    let r = match res {
        Ok(r) => r,
        Err(e) => {
            let increments = match &e {
                Error::Divergent { trace, .. } => trace.clone(),
                _ => Vec::new(),
            };
            return ProbeOutcome::Divergent {
                reason: e.to_string(),
                increments,
            };
        }
    };
    let value = r.value[0].re;
    if r.converged {
        return ProbeOutcome::Convergent {
            value,
            increments: r.increments,
        };
    }
    classify(value, r.increments, cfg)
}

fn classify(value: f64, inc: Vec<f64>, cfg: &ProbeConfig) -> ProbeOutcome {
    let n = inc.len();
    let mut growth_run = 0;
    let mut flat_run = 0;
    for k in 1..n {
        let ratio = inc[k] / inc[k - 1];
        growth_run = if ratio > cfg.growth_threshold {
            growth_run + 1
        } else {
            0
        };
        flat_run = if ratio.log2() >= cfg.min_decay_exponent {
            flat_run + 1
        } else {
            0
        };
        if growth_run >= cfg.window {
            return ProbeOutcome::Divergent {
                reason: format!(
                    "tail increments grew by more than {} for {} levels",
                    cfg.growth_threshold, cfg.window
                ),
                increments: inc,
            };
        }
    }
    if flat_run >= cfg.window {
        return ProbeOutcome::Divergent {
            reason: format!("tail increments stopped decaying for the last {flat_run} levels"),
            increments: inc,
        };
    }
    if n >= 2 {
        let r = inc[n - 1] / inc[n - 2];
        if r < 1.0 {
            // The integrand is non-negative so the tail is bounded by a geometric continuation.
            let tail = inc[n - 1] * r / (1.0 - r);
            return ProbeOutcome::Convergent {
                value: value + tail,
                increments: inc,
            };
        }
    }
    ProbeOutcome::Divergent {
        reason: "tail increments do not decay".into(),
        increments: inc,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn order(a: f64) -> FracOrder {
        FracOrder::new(a).unwrap()
    }

    fn power(b: f64) -> MellinFunction {
        MellinFunction::from_real(move |x| x.powf(b))
    }

    #[test]
    fn eigenfunction_example() {
        let q = QuadConfig::default();
        let v = hadamard_integral(&power(1.0), order(0.5), 1.0, 1.0, &q).unwrap();
        assert!((v.re - 0.5f64.sqrt()).abs() < 1e-12, "{v}");
        let one = MellinFunction::from_real(|_| 1.0);
        let v = hadamard_integral(&one, order(1.0), 2.0, 3.7, &q).unwrap();
        assert!((v.re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn log_input() {
        let f = MellinFunction::from_real(f64::ln);
        let v = hadamard_integral(&f, order(1.0), 1.0, 1.0, &QuadConfig::default()).unwrap();
        assert!((v.re + 1.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn indicator_with_breakpoint() {
        // J^alpha_{0+,1} chi_(0,1) at x = 2: upper regularized gamma Q(alpha, log 2).
        let chi = MellinFunction::from_real(|x| if x < 1.0 { 1.0 } else { 0.0 })
            .with_breakpoints(vec![1.0]);
        let v = hadamard_integral(&chi, order(1.0), 1.0, 2.0, &QuadConfig::default()).unwrap();
        assert!((v.re - 0.5).abs() < 1e-12, "{v}");
    }

    #[test]
    fn series_matches_quadrature() {
        let coeffs: Vec<f64> = (0..40)
            .map(|k| 1.0 / crate::combinatorics::factorial(k))
            .collect();
        let s = MellinFunction::power_series_real(&coeffs, 20.0).unwrap();
        let a = hadamard_integral_series(&s, order(0.5), 1.0, 0.5).unwrap();
        let q = hadamard_integral(
            &MellinFunction::from_real(f64::exp),
            order(0.5),
            1.0,
            0.5,
            &QuadConfig::default(),
        )
        .unwrap();
        assert!((a - q).norm() < 1e-7 * a.norm());
        let constant = MellinFunction::power_series_real(&[1.0], 1.0).unwrap();
        assert!(matches!(
            hadamard_integral_series(&constant, order(0.5), 0.0, 0.5),
            Err(Error::Domain(_))
        ));
        assert!(hadamard_integral_series(&constant, order(0.5), -1.0, 0.5).is_err());
    }

    #[test]
    fn iterated_small_cases() {
        let id = power(1.0);
        let v = integer_iterated_integral(&id, 1, 0.0, 2.0).unwrap();
        assert!((v.re - 2.0).abs() < 1e-10);
        let v = integer_iterated_integral(&id, 2, 0.0, 1.0).unwrap();
        assert!((v.re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn iterated_matches_jacobi_route() {
        let f = MellinFunction::from_real(|u| u * (-u).exp());
        let a = integer_iterated_integral(&f, 3, 1.0, 1.0).unwrap();
        let b = hadamard_integral(&f, order(3.0), 1.0, 1.0, &QuadConfig::default()).unwrap();
        assert!((a - b).norm() < 1e-7 * b.norm(), "{a} vs {b}");
    }

    #[test]
    fn constant_without_weight_diverges() {
        let one = MellinFunction::from_real(|_| 1.0);
        let e = hadamard_integral(&one, order(0.5), 0.0, 1.0, &QuadConfig::default()).unwrap_err();
        assert!(matches!(e, Error::Divergent { .. }));
    }

    fn log_power(gamma: f64) -> MellinFunction {
        let cut = 0.5f64.ln();
        MellinFunction::from_log_rule(
            move |u| {
                Ok(Complex64::new(
                    if u < cut { u.abs().powf(-gamma) } else { 0.0 },
                    0.0,
                ))
            },
            true,
        )
        .with_breakpoints(vec![0.5])
    }

    #[test]
    fn probe_classifies_log_power_family() {
        let cfg = ProbeConfig::default();
        let p = domain_probe(&log_power(0.75), order(0.5), 0.0, 1.0, &cfg);
        assert!(p.is_convergent(), "{p:?}");
        let p = domain_probe(&log_power(1.5), order(1.5), 0.0, 2.0, &cfg);
        assert!(!p.is_convergent(), "{p:?}");
        let p = domain_probe(
            &MellinFunction::from_real(|_| 1.0),
            order(0.5),
            0.0,
            1.0,
            &cfg,
        );
        assert!(!p.is_convergent(), "{p:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn eigenfunction_law(a in 0.1f64..3.0, cb in 0.3f64..4.0, b in -0.2f64..2.0, x in 0.2f64..5.0) {
            let c = cb - b;
            let v = hadamard_integral(&power(b), order(a), c, x, &QuadConfig::default()).unwrap();
            let want = cb.powf(-a) * x.powf(b);
            prop_assert!((v.re - want).abs() <= 1e-9 * want, "{} vs {}", v.re, want);
        }
    }
}
