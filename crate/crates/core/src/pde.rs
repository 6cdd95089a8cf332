//! Kernel solutions of two boundary-value problems in the half-plane x, y > 0:
//!
//! evolution: D^alpha_{0+} w(., y) = -dw/dy,      0 < alpha < 1
//! diffusion: D^alpha_{0+} w(., y) = d^2w/dy^2,   cos(alpha pi / 4) != 0
//!
//! with w(., 0+) = f. In both cases w(x, y) = int f(v) G(x/v, y) dv/v where G
//! is the inverse Mellin transform of a damped symbol. In u = log x both
//! kernels are self-similar, G(e^u, y) = y^{-1/beta} p(u y^{-1/beta}), with
//!
//! p(tau) = (1/pi) Re int_0^inf exp(-C s^beta - i tau s) ds.

use crate::derivative::{hadamard_derivative, theta_derivative, DerivativeBundle};
use crate::difference::discrete_xc_norm;
use crate::error::{Error, Result};
use crate::function::MellinFunction;
use crate::gamma::gamma;
use crate::grid::LogGrid;
use crate::hadamard::QuadConfig;
use crate::mellin::{mellin_inverse_values, symmetric_t_grid, InverseConfig, MellinSpectrum};
use crate::order::FracOrder;
use crate::quad::{gk_adaptive, gk_adaptive_vec, AdaptiveConfig};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    Evolution,
    Diffusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Numeric,
    ClosedForm,
}

/// a = |cos(alpha pi/4)|, b = sin(alpha pi/4) and the sign of the cosine,
/// which selects the bounded branch of the transformed ODE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionCoefficients {
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
}

pub fn diffusion_coefficients(alpha: f64) -> Result<DiffusionCoefficients> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::domain(format!(
            "diffusion order must be positive, got {alpha}"
        )));
    }
    let q = alpha / 4.0;
    // Exact zeros of cos(q pi) sit at half-integers q.
    if ((q - 0.5).rem_euclid(1.0)).min(1.0 - (q - 0.5).rem_euclid(1.0)) < 1e-12 {
        return Err(Error::domain(format!(
            "diffusion order {alpha} has cos(alpha pi/4) = 0; no bounded kernel exists"
        )));
    }
    let cos = (q * PI).cos();
    Ok(DiffusionCoefficients {
        a: cos.abs(),
        b: (q * PI).sin(),
        sigma: cos.signum(),
    })
}

fn check_evolution_order(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "evolution order must lie in (0, 1), got {alpha}"
        )))
    }
}

/// The profile p(tau) = (1/pi) Re int_0^inf exp(-C s^beta - i tau s) ds with Re C > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableKernel {
    pub beta: f64,
    pub coef: Complex64,
}

impl StableKernel {
    /// Symbol e^{-(-it)^alpha y}: beta = alpha, C = e^{-i pi alpha/2}.
    pub fn evolution(alpha: f64) -> Result<Self> {
        check_evolution_order(alpha)?;
        Ok(Self {
            beta: alpha,
            coef: Complex64::from_polar(1.0, -PI * alpha / 2.0),
        })
    }

    /// Symbol e^{-|t|^{alpha/2}(a - i sigma b sgn t) y}: beta = alpha/2, C = a - i sigma b.
    pub fn diffusion(alpha: f64) -> Result<Self> {
        let d = diffusion_coefficients(alpha)?;
        Ok(Self {
            beta: alpha / 2.0,
            coef: Complex64::new(d.a, -d.sigma * d.b),
        })
    }

    pub fn for_problem(problem: Problem, alpha: f64) -> Result<Self> {
        match problem {
            Problem::Evolution => Self::evolution(alpha),
            Problem::Diffusion => Self::diffusion(alpha),
        }
    }

    /// Width in u of the kernel at height y.
    pub fn scale(&self, y: f64) -> f64 {
        y.powf(1.0 / self.beta)
    }

    /// p(tau), integrating along the ray s = r e^{i theta} on which both
    /// exponents decay.
    pub fn density(&self, tau: f64) -> Result<f64> {
        if !tau.is_finite() {
            return Err(Error::domain(format!("kernel profile evaluated at {tau}")));
        }
        let beta = self.beta;
        if tau == 0.0 {
            let v = self.coef.powf(-1.0 / beta) * gamma(1.0 + 1.0 / beta);
            return Ok(v.re / PI);
        }
        let arg_c = self.coef.arg();
        let turn = tau.signum() * PI / 2.0;
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 0..=720 {
            let th = -PI / 2.0 + PI * i as f64 / 720.0;
            let m1 = PI / 2.0 - (arg_c + beta * th).abs();
            let m2 = PI / 2.0 - (turn + th).abs();
            let m = m1.min(m2);
            if m > best.0 {
                best = (m, th);
            }
        }
        let (margin, th) = best;
        if margin <= 1e-6 {
            return Err(Error::NonConvergent(format!(
                "no decaying ray for beta = {beta}, C = {}",
                self.coef
            )));
        }
        let dir = Complex64::from_polar(1.0, th);
        let cb = self.coef * Complex64::from_polar(1.0, beta * th);
        let ct = Complex64::new(0.0, tau) * dir;
        let rate1 = cb.re;
        let rate2 = ct.re;
        let r_max = ((45.0 / rate1).powf(1.0 / beta)).min(45.0 / rate2);
        let integrand = |r: f64| Ok((-cb * r.powf(beta) - ct * r).exp() * dir);
        let cfg = AdaptiveConfig {
            abs_tol: 1e-16,
            rel_tol: 1e-12,
            max_intervals: 400,
        };
        let mut edges = vec![0.0];
        for k in (1..=8).rev() {
            edges.push(r_max * 10f64.powi(-k));
        }
        edges.push(r_max);
        let mut total = Complex64::new(0.0, 0.0);
        for w in edges.windows(2) {
            let r = gk_adaptive(integrand, w[0], w[1], &cfg)?;
            if !r.converged && r.error > 1e-13 {
                return Err(Error::NonConvergent(format!(
                    "kernel profile at tau = {tau} stalled at error {:.2e}",
                    r.error
                )));
            }
            total += r.value;
        }
        Ok(total.re / PI)
    }

    /// G(e^u, y) = y^{-1/beta} p(u y^{-1/beta}).
    pub fn at(&self, u: f64, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(Error::domain(format!("kernel needs y > 0, got {y}")));
        }
        let s = 1.0 / self.scale(y);
        Ok(s * self.density(u * s)?)
    }
}

/// Closed-form kernels, where known: evolution at alpha = 1/2 and diffusion at alpha in {1, 4}.
pub fn closed_form_kernel(problem: Problem, alpha: f64, x: f64, y: f64) -> Option<f64> {
    let u = x.ln();
    let one_sided = |u: f64| {
        if u > 0.0 {
            y / (2.0 * PI.sqrt()) * u.powf(-1.5) * (-y * y / (4.0 * u)).exp()
        } else {
            0.0
        }
    };
    match problem {
        Problem::Evolution if alpha == 0.5 => Some(one_sided(u)),
        Problem::Diffusion if alpha == 1.0 => Some(one_sided(u)),
        Problem::Diffusion if alpha == 4.0 => {
            Some((-u * u / (4.0 * y)).exp() / (2.0 * (PI * y).sqrt()))
        }
        _ => None,
    }
}

/// The closed forms as usually quoted for the same three cases. They differ
/// from the kernel definitions: the evolution form is mirrored to x < 1, the
/// alpha = 1 diffusion form has the wrong exponent and constant, and the
/// alpha = 4 form carries an extra factor pi.
pub fn quoted_closed_form(problem: Problem, alpha: f64, x: f64, y: f64) -> Option<f64> {
    let u = x.ln();
    match problem {
        Problem::Evolution if alpha == 0.5 => Some(if u < 0.0 {
            y / (2.0 * PI.sqrt()) * (-u).powf(-1.5) * (y * y / (4.0 * u)).exp()
        } else {
            0.0
        }),
        Problem::Diffusion if alpha == 1.0 => Some(if u > 0.0 {
            (PI / 2.0).sqrt() * u.powf(-1.5) * (-y / (2.0 * 2f64.sqrt() * u)).exp()
        } else {
            0.0
        }),
        Problem::Diffusion if alpha == 4.0 => {
            Some(0.5 * (PI / y).sqrt() * (-u * u / (4.0 * y)).exp())
        }
        _ => None,
    }
}

/// Kernel samples G(x, y) on x_grid for each y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelField {
    pub x_grid: LogGrid,
    pub y_values: Vec<f64>,
    /// values[j][i] = G(x_i, y_j).
    pub values: Vec<Vec<f64>>,
    pub provenance: Provenance,
    pub alpha: f64,
    pub problem: Problem,
    /// Largest discarded imaginary part.
    pub imag_residual: f64,
}

/// Settings for the direct kernel integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    /// Symbol magnitude at the truncation point, relative to its peak.
    pub tail_tol: f64,
    /// Cap on t-samples for the evolution kernel.
    pub max_points: usize,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            tail_tol: 1e-13,
            max_points: 1 << 23,
        }
    }
}

/// (1/2pi) int e^{-(-nu-it)^alpha y} x^{-nu-it} dt by the trapezoid rule on a
/// symmetric window. The step keeps aliasing, of relative size
/// exp(-|nu| (2 pi/dt - 2 max|log x|)), below e^{-40}.
pub fn evolution_kernel(
    alpha: f64,
    nu: f64,
    x_grid: &LogGrid,
    y: f64,
    cfg: &KernelConfig,
) -> Result<KernelField> {
    check_evolution_order(alpha)?;
    if !(nu < 0.0) {
        return Err(Error::domain(format!(
            "evolution line needs nu < 0, got {nu}"
        )));
    }
    if !(y > 0.0) {
        return Err(Error::domain(format!("kernel needs y > 0, got {y}")));
    }
    let symbol = |t: f64| (-Complex64::new(-nu, -t).powf(alpha) * y).exp();
    let peak = symbol(0.0).norm();
    let mut t_max = 1.0;
    while symbol(t_max).norm() > cfg.tail_tol * peak {
        t_max *= 2.0;
        if t_max > 1e12 {
            break;
        }
    }
    let u_abs = x_grid.u_min().abs().max(x_grid.u_max().abs());
    let dt = 2.0 * PI / (2.0 * u_abs + 40.0 / nu.abs());
    let n = 2 * (t_max / dt).ceil() as usize + 1;
    if n > cfg.max_points {
        return Err(Error::Tail(format!(
            "symbol still above {:.1e} of its peak inside the {}-point window; y = {y} is too small",
            cfg.tail_tol, cfg.max_points
        )));
    }
    let t_values = symmetric_t_grid(t_max, n);
    let values = t_values.iter().map(|&t| symbol(t)).collect();
    let spec = MellinSpectrum {
        nu,
        t_values,
        values,
    };
    let inv = InverseConfig {
        tail_tol: 10.0 * cfg.tail_tol,
    };
    let g = mellin_inverse_values(&spec, &x_grid.log_points(), &inv)?;
    let imag = g.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    Ok(KernelField {
        x_grid: x_grid.clone(),
        y_values: vec![y],
        values: vec![g.iter().map(|v| v.re).collect()],
        provenance: Provenance::Numeric,
        alpha,
        problem: Problem::Evolution,
        imag_residual: imag,
    })
}

/// (1/pi) int_0^inf e^{-t^{alpha/2} a y} cos(t log x - sigma t^{alpha/2} b y) dt,
/// truncated where the envelope falls below `tail_tol` and split into panels
/// of half an oscillation.
pub fn diffusion_kernel(
    alpha: f64,
    x_grid: &LogGrid,
    y: f64,
    cfg: &KernelConfig,
) -> Result<KernelField> {
    let d = diffusion_coefficients(alpha)?;
    if !(y > 0.0) {
        return Err(Error::domain(format!("kernel needs y > 0, got {y}")));
    }
    let beta = alpha / 2.0;
    let t_max = (-cfg.tail_tol.ln() / (d.a * y)).powf(1.0 / beta);
    let quad = AdaptiveConfig {
        abs_tol: 1e-15,
        rel_tol: 1e-12,
        max_intervals: 200,
    };
    let mut row = Vec::with_capacity(x_grid.n);
    for u in x_grid.log_points() {
        let freq = u.abs() + beta * d.b.abs() * y * t_max.powf(beta - 1.0).max(1.0);
        let width = (PI / freq.max(1.0)).min(t_max);
        let panels = (t_max / width).ceil() as usize;
        if panels > cfg.max_points {
            return Err(Error::Tail(format!(
                "damping at y = {y} needs {panels} panels, above the cap {}",
                cfg.max_points
            )));
        }
        let f = |t: f64| {
            let tb = t.powf(beta);
            Ok(Complex64::new(
                (-tb * d.a * y).exp() * (t * u - d.sigma * tb * d.b * y).cos(),
                0.0,
            ))
        };
        let mut acc = 0.0;
        let mut a = 0.0;
        for k in 0..panels {
            let b = ((k + 1) as f64 * width).min(t_max);
            let r = gk_adaptive(f, a, b, &quad)?;
            acc += r.value.re;
            a = b;
        }
        row.push(acc / PI);
    }
    Ok(KernelField {
        x_grid: x_grid.clone(),
        y_values: vec![y],
        values: vec![row],
        provenance: Provenance::Numeric,
        alpha,
        problem: Problem::Diffusion,
        imag_residual: 0.0,
    })
}

/// Closed-form kernel samples; DomainError where no closed form is known.
pub fn closed_form_field(
    problem: Problem,
    alpha: f64,
    x_grid: &LogGrid,
    y_values: &[f64],
) -> Result<KernelField> {
    let mut values = Vec::with_capacity(y_values.len());
    for &y in y_values {
        let row = x_grid
            .points()
            .iter()
            .map(|&x| {
                closed_form_kernel(problem, alpha, x, y).ok_or_else(|| {
                    Error::domain(format!(
                        "no closed-form kernel for {problem:?} at alpha = {alpha}"
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        values.push(row);
    }
    Ok(KernelField {
        x_grid: x_grid.clone(),
        y_values: y_values.to_vec(),
        values,
        provenance: Provenance::ClosedForm,
        alpha,
        problem,
        imag_residual: 0.0,
    })
}

/// Which kernel the solver convolves with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSource {
    Numeric,
    ClosedForm,
}

/// How the residual check evaluates D^alpha_{0+} w(., y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualMode {
    /// On the derivative bundle of the slice w(., y) itself.
    Slice,
    /// As (D^alpha f) * G, using that D^alpha_{0+} commutes with Mellin
    /// convolution. Far cheaper, since the kernel is not inside the
    /// derivative quadrature.
    Commuted,
}

#[derive(Debug, Clone, Copy)]
pub struct PdeConfig {
    pub kernel: KernelSource,
    pub residual: ResidualMode,
    /// Convolution window in log v, intersected with the support of f.
    pub u_lo: f64,
    pub u_hi: f64,
    pub convolve: AdaptiveConfig,
    /// Quadrature for D^alpha in the residual check.
    pub quad: QuadConfig,
}

impl Default for PdeConfig {
    fn default() -> Self {
        Self {
            kernel: KernelSource::Numeric,
            residual: ResidualMode::Slice,
            u_lo: -40.0,
            u_hi: 40.0,
            convolve: AdaptiveConfig {
                abs_tol: 1e-13,
                rel_tol: 1e-9,
                max_intervals: 2000,
            },
            // The residual compares against O(h^2) differences in y.
            quad: QuadConfig {
                rel_tol: 1e-6,
                ..QuadConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct PdeProblem {
    pub problem: Problem,
    pub alpha: f64,
    /// Abscissa of the transform line; evolution only.
    pub nu: f64,
    pub initial: DerivativeBundle,
    pub x_grid: LogGrid,
    pub y_values: Vec<f64>,
    pub config: PdeConfig,
}

impl PdeProblem {
    pub fn new(
        problem: Problem,
        alpha: f64,
        initial: DerivativeBundle,
        x_grid: LogGrid,
        y_values: Vec<f64>,
    ) -> Result<Self> {
        let p = Self {
            problem,
            alpha,
            nu: -0.5,
            initial,
            x_grid,
            y_values,
            config: PdeConfig::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match self.problem {
            Problem::Evolution => {
                check_evolution_order(self.alpha)?;
                if !(self.nu < 0.0) {
                    return Err(Error::domain(format!(
                        "evolution line needs nu < 0, got {}",
                        self.nu
                    )));
                }
            }
            Problem::Diffusion => {
                diffusion_coefficients(self.alpha)?;
            }
        }
        if !self.initial.f.is_real() {
            return Err(Error::domain("initial data must be real-valued"));
        }
        if self.y_values.is_empty() || self.y_values.iter().any(|y| !(*y > 0.0) || !y.is_finite()) {
            return Err(Error::domain("y values must be positive and finite"));
        }
        if !(self.config.u_lo < self.config.u_hi) {
            return Err(Error::domain("empty convolution window"));
        }
        Ok(())
    }

    /// Weight exponent of the norm in which w(., y) -> f.
    pub fn norm_exponent(&self) -> f64 {
        match self.problem {
            Problem::Evolution => self.nu,
            Problem::Diffusion => 0.0,
        }
    }

    fn kernel(&self) -> Result<Kernel> {
        let stable = StableKernel::for_problem(self.problem, self.alpha)?;
        Ok(match self.config.kernel {
            KernelSource::Numeric => Kernel::Stable(stable),
            KernelSource::ClosedForm => {
                if closed_form_kernel(self.problem, self.alpha, 1.0, 1.0).is_none() {
                    return Err(Error::domain(format!(
                        "no closed-form kernel for {:?} at alpha = {}",
                        self.problem, self.alpha
                    )));
                }
                Kernel::Closed(self.problem, self.alpha, stable.beta)
            }
        })
    }
}

#[derive(Debug, Clone, Copy)]
enum Kernel {
    Stable(StableKernel),
    Closed(Problem, f64, f64),
}

impl Kernel {
    fn at(&self, u: f64, y: f64) -> Result<f64> {
        match *self {
            Kernel::Stable(k) => k.at(u, y),
            Kernel::Closed(p, a, _) => Ok(closed_form_kernel(p, a, u.exp(), y).unwrap_or(0.0)),
        }
    }

    fn scale(&self, y: f64) -> f64 {
        match *self {
            Kernel::Stable(k) => k.scale(y),
            Kernel::Closed(_, _, beta) => y.powf(1.0 / beta),
        }
    }
}

/// int comps(v) G(s - v, y) dv componentwise, cut at the kernel peak and at
/// multiples of its width.
fn convolve<F>(
    comps: F,
    dim: usize,
    f: &MellinFunction,
    kernel: &Kernel,
    s: f64,
    y: f64,
    cfg: &PdeConfig,
) -> Result<Vec<f64>>
where
    F: Fn(f64, &mut [Complex64]) -> Result<()>,
{
    let (mut a, mut b) = (cfg.u_lo, cfg.u_hi);
    if let Some((lo, hi)) = f.log_support() {
        a = a.max(lo);
        b = b.min(hi);
    }
    if a >= b {
        return Ok(vec![0.0; dim]);
    }
    let w = kernel.scale(y);
    let mut cuts = vec![a, b, s];
    for m in [1.0, 10.0, 100.0, 1000.0] {
        cuts.push(s - m * w);
        cuts.push(s + m * w);
    }
    cuts.extend(f.breakpoints().iter().map(|p| p.ln()));
    cuts.retain(|c| *c >= a && *c <= b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = vec![0.0; dim];
    for pair in cuts.windows(2) {
        let (p, q) = (pair[0], pair[1]);
        let eps = 1e-13 * (1.0 + p.abs().max(q.abs()));
        if q - p <= 2.0 * eps {
            continue;
        }
        let r = gk_adaptive_vec(
            |v, out: &mut [Complex64]| {
                let g = kernel.at(s - v, y)?;
                comps(v, out)?;
                for o in out.iter_mut() {
                    *o *= g;
                }
                Ok(())
            },
            p + eps,
            q - eps,
            dim,
            &cfg.convolve,
        )?;
        if !r.converged {
            return Err(Error::NonConvergent(format!(
                "convolution at log x = {s}, y = {y} on [{p}, {q}] stalled at error {:.2e}",
                r.error
            )));
        }
        for (t, v) in total.iter_mut().zip(&r.value) {
            *t += v.re;
        }
    }
    Ok(total)
}

/// Samples w(x_i, y_j) of the solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionField {
    pub problem: Problem,
    pub alpha: f64,
    pub x_grid: LogGrid,
    pub y_values: Vec<f64>,
    /// values[j][i] = w(x_i, y_j).
    pub values: Vec<Vec<f64>>,
}

fn solution_at(problem: &PdeProblem, kernel: &Kernel, s: f64, y: f64) -> Result<f64> {
    let f = &problem.initial.f;
    let v = convolve(
        |v, out| {
            out[0] = f.eval_log(v)?;
            Ok(())
        },
        1,
        f,
        kernel,
        s,
        y,
        &problem.config,
    )?;
    Ok(v[0])
}

/// w(x, y) = int f(v) G(x/v, y) dv/v on x_grid x y_values.
pub fn solve_pde(problem: &PdeProblem) -> Result<SolutionField> {
    problem.validate()?;
    let kernel = problem.kernel()?;
    let mut values = Vec::with_capacity(problem.y_values.len());
    for &y in &problem.y_values {
        let row = problem
            .x_grid
            .log_points()
            .iter()
            .map(|&s| solution_at(problem, &kernel, s, y))
            .collect::<Result<Vec<_>>>()?;
        values.push(row);
    }
    Ok(SolutionField {
        problem: problem.problem,
        alpha: problem.alpha,
        x_grid: problem.x_grid.clone(),
        y_values: problem.y_values.clone(),
        values,
    })
}

/// Derivative bundle of w(., y): x^k w^(k)(x) = int (v^k f^(k))(v) G(x/v, y) dv/v.
pub fn solution_bundle(problem: &PdeProblem, y: f64, depth: usize) -> Result<DerivativeBundle> {
    problem.validate()?;
    let kernel = problem.kernel()?;
    let p0 = problem.clone();
    let w = MellinFunction::from_log_rule(
        move |s| Ok(Complex64::new(solution_at(&p0, &kernel, s, y)?, 0.0)),
        true,
    );
    let p1 = problem.clone();
    Ok(DerivativeBundle::from_jet(w, depth, move |x, n| {
        let init = &p1.initial;
        let v = convolve(
            |v, out| {
                let d = init.scaled_derivatives(v.exp(), n)?;
                out.copy_from_slice(&d);
                Ok(())
            },
            n + 1,
            &init.f,
            &kernel,
            x.ln(),
            y,
            &p1.config,
        )?;
        Ok(v.into_iter().map(|r| Complex64::new(r, 0.0)).collect())
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualPoint {
    pub x: f64,
    pub y: f64,
    /// D^alpha_{0+} w in x.
    pub lhs: f64,
    /// -dw/dy or d^2w/dy^2 by central differences.
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub points: Vec<ResidualPoint>,
    pub max_abs: f64,
    /// max_abs over the largest |rhs| on the interior.
    pub max_relative: f64,
}

/// Residual of the equation at interior points of the field. The y-grid must
/// be uniform with at least three levels; x-points at the grid ends are
/// skipped. D^alpha is hadamard_derivative with c = 0 (theta_derivative for
/// integer alpha, where the two agree), applied as `config.residual` selects.
pub fn residual_check(problem: &PdeProblem, w: &SolutionField) -> Result<ResidualReport> {
    let ys = &w.y_values;
    if ys.len() < 3 {
        return Err(Error::domain(
            "residual check needs at least three y levels",
        ));
    }
    let h = ys[1] - ys[0];
    if !(h > 0.0) || ys.windows(2).any(|p| ((p[1] - p[0]) - h).abs() > 1e-9 * h) {
        return Err(Error::domain(
            "residual check needs a uniform increasing y grid",
        ));
    }
    let order = FracOrder::new(problem.alpha)?;
    let depth = order.m;
    let xs = w.x_grid.points();
    let kernel = problem.kernel()?;
    let mut points = Vec::new();
    for j in 1..ys.len() - 1 {
        let bundle = match problem.config.residual {
            ResidualMode::Slice => Some(solution_bundle(problem, ys[j], depth)?),
            ResidualMode::Commuted => None,
        };
        for i in 1..xs.len().saturating_sub(1) {
            let lhs = match &bundle {
                Some(b) => derivative_at(b, order, problem, xs[i])?,
                None => {
                    let init = &problem.initial;
                    convolve(
                        |v, out| {
                            out[0] = derivative_at(init, order, problem, v.exp())?;
                            Ok(())
                        },
                        1,
                        &init.f,
                        &kernel,
                        xs[i].ln(),
                        ys[j],
                        &problem.config,
                    )?[0]
                        .into()
                }
            };
            let rhs = match problem.problem {
                Problem::Evolution => -(w.values[j + 1][i] - w.values[j - 1][i]) / (2.0 * h),
                Problem::Diffusion => {
                    (w.values[j + 1][i] - 2.0 * w.values[j][i] + w.values[j - 1][i]) / (h * h)
                }
            };
            points.push(ResidualPoint {
                x: xs[i],
                y: ys[j],
                lhs: lhs.re,
                rhs,
            });
        }
    }
    let max_abs = points
        .iter()
        .map(|p| (p.lhs - p.rhs).abs())
        .fold(0.0, f64::max);
    let scale = points.iter().map(|p| p.rhs.abs()).fold(0.0, f64::max);
    let max_relative = if scale > 0.0 {
        max_abs / scale
    } else if max_abs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(ResidualReport {
        points,
        max_abs,
        max_relative,
    })
}

fn derivative_at(
    b: &DerivativeBundle,
    order: FracOrder,
    problem: &PdeProblem,
    x: f64,
) -> Result<Complex64> {
    if order.is_integer {
        theta_derivative(b, order.alpha.round() as usize, 0.0, x)
    } else {
        hadamard_derivative(b, order, 0.0, x, &problem.config.quad)
    }
}

/// Discrete X_nu norm of w(., y) - f on the x grid for each y.
pub fn recovery_norms(problem: &PdeProblem, ys: &[f64]) -> Result<Vec<(f64, f64)>> {
    problem.validate()?;
    let kernel = problem.kernel()?;
    let c = problem.norm_exponent();
    let f = &problem.initial.f;
    let logs = problem.x_grid.log_points();
    let mut out = Vec::with_capacity(ys.len());
    for &y in ys {
        let diffs = logs
            .iter()
            .map(
                |&s| Ok(Complex64::new(solution_at(problem, &kernel, s, y)?, 0.0) - f.eval_log(s)?),
            )
            .collect::<Result<Vec<_>>>()?;
        out.push((y, discrete_xc_norm(&problem.x_grid, &diffs, c)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::Builtin;
    use proptest::prelude::*;

    #[test]
    fn coefficients() {
        let d = diffusion_coefficients(0.5).unwrap();
        assert!((d.a - (2.0 + 2f64.sqrt()).sqrt() / 2.0).abs() < 1e-15);
        assert!((d.b - (2.0 - 2f64.sqrt()).sqrt() / 2.0).abs() < 1e-15);
        for bad in [2.0, 6.0, 10.0] {
            let e = diffusion_coefficients(bad).unwrap_err();
            assert!(e.to_string().contains("cos(alpha pi/4) = 0"));
        }
        assert_eq!(diffusion_coefficients(4.0).unwrap().sigma, -1.0);
    }

    #[test]
    fn stable_profile_matches_closed_forms() {
        let k = StableKernel::diffusion(4.0).unwrap();
        for &u in &[-2.0, -0.3, 0.0, 0.7, 3.0] {
            let want = closed_form_kernel(Problem::Diffusion, 4.0, f64::exp(u), 1.3).unwrap();
            assert!((k.at(u, 1.3).unwrap() - want).abs() < 1e-12);
        }
        let e = StableKernel::evolution(0.5).unwrap();
        for &u in &[-2.0, -0.01, 0.0, 0.05, 0.7, 3.0, 40.0] {
            let want = closed_form_kernel(Problem::Evolution, 0.5, f64::exp(u), 0.8).unwrap();
            let got = e.at(u, 0.8).unwrap();
            assert!((got - want).abs() < 1e-12, "u={u}: {got} vs {want}");
        }
    }

    #[test]
    fn numeric_kernels_match_profile() {
        let g = LogGrid::from_log(-2.0, 2.0, 9).unwrap();
        let ev = evolution_kernel(0.5, -0.5, &g, 1.0, &KernelConfig::default()).unwrap();
        assert!(ev.imag_residual < 1e-8);
        let sk = StableKernel::evolution(0.5).unwrap();
        for (u, v) in g.log_points().iter().zip(&ev.values[0]) {
            assert!((sk.at(*u, 1.0).unwrap() - v).abs() < 1e-9, "u={u}");
        }
        let df = diffusion_kernel(1.5, &g, 0.7, &KernelConfig::default()).unwrap();
        let sk = StableKernel::diffusion(1.5).unwrap();
        for (u, v) in g.log_points().iter().zip(&df.values[0]) {
            assert!((sk.at(*u, 0.7).unwrap() - v).abs() < 1e-9, "u={u}");
        }
    }

    #[test]
    fn kernel_is_normalized() {
        // int G du = symbol at t = 0 = 1 on the line nu = 0.
        for (k, y) in [
            (StableKernel::diffusion(4.0).unwrap(), 0.5),
            (StableKernel::diffusion(3.0).unwrap(), 1.0),
            (StableKernel::diffusion(5.0).unwrap(), 1.0),
        ] {
            // Tails decay like |u|^{-1-beta}; panels out to 1e6 leave < 1e-8.
            let mut total = 0.0;
            let mut edges = vec![0.0];
            edges.extend((0..=12).map(|k| 10f64.powf(k as f64 / 2.0)));
            for w in edges.windows(2) {
                for sg in [1.0, -1.0] {
                    let r = gk_adaptive(
                        |u| Ok(Complex64::new(k.at(sg * u, y)?, 0.0)),
                        w[0],
                        w[1],
                        &AdaptiveConfig::default(),
                    )
                    .unwrap();
                    total += r.value.re;
                }
            }
            assert!((total - 1.0).abs() < 1e-7, "{k:?}: {total}");
        }
        // Evolution: int e^{nu u} G du = e^{-(-nu)^alpha y}.
        let k = StableKernel::evolution(0.5).unwrap();
        let (nu, y) = (-0.5, 1.0);
        let r = gk_adaptive(
            |u| Ok(Complex64::new((nu * u).exp() * k.at(u, y)?, 0.0)),
            0.0,
            200.0,
            &AdaptiveConfig::default(),
        )
        .unwrap();
        assert!((r.value.re - (-(0.5f64).sqrt() * y).exp()).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_problems() {
        let f = Builtin::LogGauss {
            center: 0.0,
            width: 0.5,
        }
        .bundle()
        .unwrap();
        let g = LogGrid::new(0.5, 2.0, 5).unwrap();
        assert!(PdeProblem::new(Problem::Diffusion, 2.0, f.clone(), g.clone(), vec![1.0]).is_err());
        assert!(PdeProblem::new(Problem::Evolution, 1.5, f.clone(), g.clone(), vec![1.0]).is_err());
        let mut p = PdeProblem::new(Problem::Evolution, 0.5, f, g, vec![1.0]).unwrap();
        p.nu = 0.2;
        assert!(p.validate().is_err());
    }

    #[test]
    fn heat_kernel_spreads_log_gaussian() {
        let s0: f64 = 0.4;
        let f = Builtin::LogGauss {
            center: 0.0,
            width: s0,
        }
        .bundle()
        .unwrap();
        let g = LogGrid::from_log(-1.5, 1.5, 7).unwrap();
        let mut p =
            PdeProblem::new(Problem::Diffusion, 4.0, f, g.clone(), vec![0.05, 0.2]).unwrap();
        p.config.u_lo = -15.0;
        p.config.u_hi = 15.0;
        let w = solve_pde(&p).unwrap();
        for (j, &y) in p.y_values.iter().enumerate() {
            let var = s0 * s0 + 2.0 * y;
            for (i, u) in g.log_points().iter().enumerate() {
                let want = s0 / var.sqrt() * (-u * u / (2.0 * var)).exp();
                assert!((w.values[j][i] - want).abs() < 1e-8, "y={y} u={u}");
            }
        }
    }

    #[test]
    fn zero_data_gives_zero_residual() {
        let zero = DerivativeBundle::from_jet(MellinFunction::from_real(|_| 0.0), 4, |_, n| {
            Ok(vec![Complex64::new(0.0, 0.0); n + 1])
        });
        let g = LogGrid::from_log(-0.5, 0.5, 3).unwrap();
        let p = PdeProblem::new(Problem::Diffusion, 1.0, zero, g, vec![0.9, 1.0, 1.1]).unwrap();
        let w = solve_pde(&p).unwrap();
        assert!(w.values.iter().flatten().all(|v| *v == 0.0));
        let r = residual_check(&p, &w).unwrap();
        assert_eq!(r.max_abs, 0.0);
        assert_eq!(r.max_relative, 0.0);
    }

    fn smooth_problem(problem: Problem, alpha: f64, xs: LogGrid) -> PdeProblem {
        let f = Builtin::LogGauss {
            center: 0.0,
            width: 0.5,
        }
        .bundle()
        .unwrap();
        let mut p = PdeProblem::new(problem, alpha, f, xs, vec![0.95, 1.0, 1.05]).unwrap();
        p.config.u_lo = -15.0;
        p.config.u_hi = 15.0;
        p
    }

    #[test]
    fn residual_modes_agree_on_evolution() {
        let mut p = smooth_problem(
            Problem::Evolution,
            0.5,
            LogGrid::from_log(-0.5, 0.5, 3).unwrap(),
        );
        let w = solve_pde(&p).unwrap();
        let slice = residual_check(&p, &w).unwrap();
        p.config.residual = ResidualMode::Commuted;
        let comm = residual_check(&p, &w).unwrap();
        assert_eq!(slice.points.len(), 1);
        assert!((slice.points[0].lhs - comm.points[0].lhs).abs() < 1e-6);
        assert!(slice.max_relative < 1e-2 && comm.max_relative < 1e-2);
    }

    #[test]
    fn diffusion_residuals() {
        let g = LogGrid::from_log(-1.0, 1.0, 5).unwrap();
        let mut p = smooth_problem(Problem::Diffusion, 4.0, g.clone());
        p.config.kernel = KernelSource::ClosedForm;
        let w = solve_pde(&p).unwrap();
        assert!(residual_check(&p, &w).unwrap().max_relative < 1e-2);
        // alpha = 1 reduces to x dw/dx = d^2w/dy^2.
        let p = smooth_problem(Problem::Diffusion, 1.0, g);
        let w = solve_pde(&p).unwrap();
        let r = residual_check(&p, &w).unwrap();
        assert!(r.max_relative < 1e-2, "{}", r.max_relative);
    }

    #[test]
    fn recovery_improves_as_y_shrinks() {
        let f = Builtin::Bump {
            center: 0.0,
            width: 1.0,
        }
        .bundle()
        .unwrap();
        let g = LogGrid::from_log(-1.5, 1.5, 31).unwrap();
        let p = PdeProblem::new(Problem::Diffusion, 4.0, f, g, vec![1.0]).unwrap();
        let n = recovery_norms(&p, &[1e-1, 1e-2, 1e-3]).unwrap();
        assert!(n[0].1 > n[1].1 && n[1].1 > n[2].1, "{n:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn diffusion_alpha4_is_even(u in 0.0f64..4.0, y in 0.1f64..3.0) {
            let k = StableKernel::diffusion(4.0).unwrap();
            prop_assert!((k.at(u, y).unwrap() - k.at(-u, y).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn evolution_vanishes_below_one(u in -6.0f64..-1e-3, y in 0.2f64..3.0) {
            let k = StableKernel::evolution(0.5).unwrap();
            prop_assert!(k.at(u, y).unwrap().abs() < 1e-10);
        }
    }
}
