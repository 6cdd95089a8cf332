//! Mellin transform, inverse, translation and convolution, all computed in
//! u = log x where the measure dx/x becomes du.

use crate::error::{Error, Result};
use crate::function::MellinFunction;
use crate::grid::LogGrid;
use crate::quad::{gk_adaptive, gk_adaptive_vec, wynn_epsilon, AdaptiveConfig};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Quadrature settings for the trapezoid-in-log transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformConfig {
    /// Truncation window in u = log x.
    pub u_lo: f64,
    pub u_hi: f64,
    pub rel_tol: f64,
    pub max_points: usize,
    /// Upper bound on |t| * h_log.
    pub max_phase_step: f64,
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self {
            u_lo: -40.0,
            u_hi: 40.0,
            rel_tol: 1e-8,
            max_points: 1 << 20,
            max_phase_step: 0.5,
        }
    }
}

/// Samples of M[f](nu + it) on a uniform t-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MellinSpectrum {
    pub nu: f64,
    pub t_values: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl MellinSpectrum {
    /// max |F(-t) - conj F(t)| over mirrored pairs; None if the grid is not symmetric.
    pub fn conjugate_asymmetry(&self) -> Option<f64> {
        let n = self.t_values.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            let j = n - 1 - i;
            if (self.t_values[i] + self.t_values[j]).abs() > 1e-12 * (1.0 + self.t_values[i].abs())
            {
                return None;
            }
            worst = worst.max((self.values[j] - self.values[i].conj()).norm());
        }
        Some(worst)
    }
}

/// Symmetric uniform grid of n points on [-t_max, t_max].
pub fn symmetric_t_grid(t_max: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|k| {
            let j = 2.0 * k as f64 - (n - 1) as f64;
            t_max * j / (n - 1) as f64
        })
        .collect()
}

fn check_uniform(t: &[f64]) -> Result<()> {
    if t.is_empty() {
        return Err(Error::domain("empty t-grid"));
    }
    if t.len() > 2 {
        let d = t[1] - t[0];
        if !(d > 0.0) {
            return Err(Error::domain("t-grid must be increasing"));
        }
        for w in t.windows(2) {
            if ((w[1] - w[0]) - d).abs() > 1e-9 * d.abs().max(1e-300) {
                return Err(Error::domain("t-grid must be uniform"));
            }
        }
    }
    Ok(())
}

/// Window in u intersected with the declared support, split at breakpoints.
fn segments(f: &MellinFunction, lo: f64, hi: f64) -> Result<Vec<(f64, f64)>> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain(format!("invalid window [{lo}, {hi}]")));
    }
    let (mut a, mut b) = (lo, hi);
    if let Some((s0, s1)) = f.log_support() {
        a = a.max(s0);
        b = b.min(s1);
    }
    if a >= b {
        return Ok(Vec::new());
    }
    let mut cuts = vec![a];
    for bp in f.breakpoints() {
        let u = bp.ln();
        if u > a && u < b {
            cuts.push(u);
        }
    }
    cuts.push(b);
    Ok(cuts.windows(2).map(|w| (w[0], w[1])).collect())
}

/// M[f](nu + it) for each t by the trapezoid rule in u = log x with
/// step halving and Romberg extrapolation.
pub fn mellin_transform(
    f: &MellinFunction,
    nu: f64,
    t_values: &[f64],
    cfg: &TransformConfig,
) -> Result<MellinSpectrum> {
    check_uniform(t_values)?;
    let segs = segments(f, cfg.u_lo, cfg.u_hi)?;
    let mut total = vec![Complex64::new(0.0, 0.0); t_values.len()];
    for (a, b) in segs {
        let part = romberg_segment(f, nu, t_values, a, b, cfg)?;
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    Ok(MellinSpectrum {
        nu,
        t_values: t_values.to_vec(),
        values: total,
    })
}

/// Accumulates sum_j w_j g(u_j) e^{i t u_j} for nodes u_j = u0 + j*step.
fn accumulate(
    g: &[Complex64],
    u0: f64,
    step: f64,
    t_values: &[f64],
    weights_ends: bool,
    out: &mut [Complex64],
) {
    let n = g.len();
    for (k, &t) in t_values.iter().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        let rot = Complex64::from_polar(1.0, t * step);
        let mut ph = Complex64::from_polar(1.0, t * u0);
        for (j, gj) in g.iter().enumerate() {
            if j % 256 == 0 && j > 0 {
                ph = Complex64::from_polar(1.0, t * (u0 + j as f64 * step));
            }
            let w = if weights_ends && (j == 0 || j + 1 == n) {
                0.5
            } else {
                1.0
            };
            acc += gj * ph * w;
            ph *= rot;
        }
        out[k] = acc;
    }
}

fn romberg_segment(
    f: &MellinFunction,
    nu: f64,
    t_values: &[f64],
    a: f64,
    b: f64,
    cfg: &TransformConfig,
) -> Result<Vec<Complex64>> {
    let len = b - a;
    let tmax = t_values.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let mut n = ((len * tmax / cfg.max_phase_step).ceil() as usize)
        .max((len * 2.0).ceil() as usize)
        .max(4);
    let nt = t_values.len();
    let g = |u: f64| -> Result<Complex64> {
        let v = f.eval_log(u)?;
        if v == Complex64::new(0.0, 0.0) {
            return Ok(v);
        }
        Ok(v * (nu * u).exp())
    };
    // Endpoint values use one-sided limits so that jumps at breakpoints are
    // resolved by the segment split rather than by the rule.
    let nudge = |u: f64, inward: f64| u + inward * 1e-13 * (1.0 + u.abs());
    let mut nodes: Vec<Complex64> = Vec::with_capacity(n + 1);
    let h0 = len / n as f64;
    for j in 0..=n {
        let u = if j == 0 {
            nudge(a, 1.0)
        } else if j == n {
            nudge(b, -1.0)
        } else {
            a + j as f64 * h0
        };
        nodes.push(g(u)?);
    }
    let mut sums = vec![Complex64::new(0.0, 0.0); nt];
    accumulate(&nodes, a, h0, t_values, true, &mut sums);
    let mut abs_sum: f64 = nodes.iter().map(|v| v.norm()).sum::<f64>() * h0;
    let mut h = h0;
    let mut trap: Vec<Complex64> = sums.iter().map(|s| s * h).collect();
    let mut table: Vec<Vec<Vec<Complex64>>> = vec![vec![trap.clone()]];
    let mut level = 0;
    loop {
        if 2 * n + 1 > cfg.max_points {
            return Err(Error::NonConvergent(format!(
                "transform on [{a}, {b}] did not reach rel_tol {} within {} points",
                cfg.rel_tol, cfg.max_points
            )));
        }
        // Midpoints of the current level.
        let mut mids = Vec::with_capacity(n);
        for j in 0..n {
            mids.push(g(a + (j as f64 + 0.5) * h)?);
        }
        let mut msum = vec![Complex64::new(0.0, 0.0); nt];
        accumulate(&mids, a + 0.5 * h, h, t_values, false, &mut msum);
        let mabs: f64 = mids.iter().map(|v| v.norm()).sum::<f64>() * h;
        abs_sum = 0.5 * abs_sum + 0.5 * mabs;
        let new_trap: Vec<Complex64> = trap
            .iter()
            .zip(&msum)
            .map(|(t, m)| t * 0.5 + m * (0.5 * h))
            .collect();
        n *= 2;
        h *= 0.5;
        level += 1;
        let mut row = vec![new_trap.clone()];
        for k in 1..=level.min(8) {
            let fac = 4f64.powi(k as i32);
            let prev_row = &table[level - 1];
            if k > prev_row.len() {
                break;
            }
            let next: Vec<Complex64> = row[k - 1]
                .iter()
                .zip(&prev_row[k - 1])
                .map(|(cur, prev)| (cur * fac - prev) / (fac - 1.0))
                .collect();
            row.push(next);
        }
        let tol = cfg.rel_tol * abs_sum.max(1e-300);
        if level >= 2 {
            let trap_diff = new_trap
                .iter()
                .zip(&trap)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            if trap_diff <= tol {
                return Ok(new_trap);
            }
            let best = row.last().expect("row");
            let prev_best = table[level - 1].last().expect("row");
            let rdiff = best
                .iter()
                .zip(prev_best)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            if rdiff <= tol {
                return Ok(best.clone());
            }
        }
        trap = new_trap;
        table.push(row);
    }
}

/// Configuration for the panel-summed transform.
#[derive(Debug, Clone, Copy)]
pub struct PanelConfig {
    /// Panel boundaries are u_start + k * width.
    pub u_start: f64,
    pub width: f64,
    pub max_panels: usize,
    pub rel_tol: f64,
}

/// M[f](nu + it) by summing fixed-width panels outward from `u_start` in both
/// directions and accelerating the partial sums with Wynn's epsilon
/// algorithm. Suited to integrands with slowly decaying, piecewise-smooth
/// tails whose pieces align with the panel width.
pub fn mellin_transform_panels(
    f: &MellinFunction,
    nu: f64,
    t_values: &[f64],
    cfg: &PanelConfig,
) -> Result<MellinSpectrum> {
    check_uniform(t_values)?;
    if !(cfg.width > 0.0) {
        return Err(Error::domain("panel width must be positive"));
    }
    let nt = t_values.len();
    let quad = AdaptiveConfig {
        abs_tol: 1e-300,
        rel_tol: 1e-13,
        max_intervals: 200,
    };
    let mut total = vec![Complex64::new(0.0, 0.0); nt];
    for dir in [1.0, -1.0] {
        let mut partials: Vec<Vec<Complex64>> = vec![Vec::new(); nt];
        let mut running = vec![Complex64::new(0.0, 0.0); nt];
        let mut scale = 0.0f64;
        let mut settled = 0;
        let mut last_est = vec![Complex64::new(0.0, 0.0); nt];
        let mut done = false;
        for k in 0..cfg.max_panels {
            let (p0, p1) = if dir > 0.0 {
                (
                    cfg.u_start + k as f64 * cfg.width,
                    cfg.u_start + (k + 1) as f64 * cfg.width,
                )
            } else {
                (
                    cfg.u_start - (k + 1) as f64 * cfg.width,
                    cfg.u_start - k as f64 * cfg.width,
                )
            };
            let eps = 1e-13 * cfg.width;
            let r = gk_adaptive_vec(
                |u, out: &mut [Complex64]| {
                    let v = f.eval_log(u)?;
                    let base = v * (nu * u).exp();
                    for (o, &t) in out.iter_mut().zip(t_values) {
                        *o = base * Complex64::from_polar(1.0, t * u);
                    }
                    Ok(())
                },
                p0 + eps,
                p1 - eps,
                nt,
                &quad,
            )?;
            let mut contrib = 0.0f64;
            for i in 0..nt {
                running[i] += r.value[i];
                partials[i].push(running[i]);
                contrib = contrib.max(r.value[i].norm());
                scale = scale.max(running[i].norm());
            }
            let tol = cfg.rel_tol * scale.max(1e-300);
            if contrib <= 1e-3 * tol && k >= 2 {
                total.iter_mut().zip(&running).for_each(|(t, r)| *t += r);
                done = true;
                break;
            }
            if k >= 4 {
                let mut change = 0.0f64;
                let mut est = vec![Complex64::new(0.0, 0.0); nt];
                for i in 0..nt {
                    let start = partials[i].len().saturating_sub(24);
                    let (e, _) = wynn_epsilon(&partials[i][start..]);
                    est[i] = e;
                    change = change.max((e - last_est[i]).norm());
                }
                last_est = est;
                if change <= tol {
                    settled += 1;
                    if settled >= 3 {
                        total.iter_mut().zip(&last_est).for_each(|(t, r)| *t += r);
                        done = true;
                        break;
                    }
                } else {
                    settled = 0;
                }
            }
        }
        if !done {
            return Err(Error::NonConvergent(format!(
                "panel transform did not settle within {} panels",
                cfg.max_panels
            )));
        }
    }
    Ok(MellinSpectrum {
        nu,
        t_values: t_values.to_vec(),
        values: total,
    })
}

/// Settings for the inverse transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseConfig {
    /// Largest admissible |F| at the t-window edges, relative to max |F|.
    pub tail_tol: f64,
}

impl Default for InverseConfig {
    fn default() -> Self {
        Self { tail_tol: 1e-8 }
    }
}

/// (1/2pi) int F(nu + it) x^{-nu-it} dt by the trapezoid rule on the
/// spectrum's own t-grid, sampled on `x_grid`.
pub fn mellin_inverse(
    spec: &MellinSpectrum,
    x_grid: &LogGrid,
    cfg: &InverseConfig,
) -> Result<MellinFunction> {
    let values = mellin_inverse_values(spec, &x_grid.log_points(), cfg)?;
    MellinFunction::sampled(x_grid.clone(), values)
}

/// Inverse transform evaluated at arbitrary log-points.
pub fn mellin_inverse_values(
    spec: &MellinSpectrum,
    log_points: &[f64],
    cfg: &InverseConfig,
) -> Result<Vec<Complex64>> {
    check_uniform(&spec.t_values)?;
    let n = spec.values.len();
    if n < 2 {
        return Err(Error::domain(
            "inverse transform needs at least two spectrum samples",
        ));
    }
    let peak = spec.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let edge = spec.values[0].norm().max(spec.values[n - 1].norm());
    if peak > 0.0 && edge > cfg.tail_tol * peak {
        return Err(Error::Tail(format!(
            "|F| at the t-window edge is {edge:.3e}, above {:.1e} of the peak {peak:.3e}",
            cfg.tail_tol
        )));
    }
    let dt = spec.t_values[1] - spec.t_values[0];
    let t0 = spec.t_values[0];
    let mut out = Vec::with_capacity(log_points.len());
    for &u in log_points {
        let mut acc = Complex64::new(0.0, 0.0);
        let rot = Complex64::from_polar(1.0, -dt * u);
        let mut ph = Complex64::from_polar(1.0, -t0 * u);
        for (j, v) in spec.values.iter().enumerate() {
            if j % 256 == 0 && j > 0 {
                ph = Complex64::from_polar(1.0, -spec.t_values[j] * u);
            }
            let w = if j == 0 || j + 1 == n { 0.5 } else { 1.0 };
            acc += v * ph * w;
            ph *= rot;
        }
        out.push(acc * ((-spec.nu * u).exp() * dt / (2.0 * PI)));
    }
    Ok(out)
}

/// Mellin translation x -> h^c f(hx).
pub fn mellin_translate(f: &MellinFunction, h: f64, c: f64) -> Result<MellinFunction> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::domain(format!("translation needs h > 0, got {h}")));
    }
    if h == 1.0 {
        return Ok(f.clone());
    }
    let factor = h.powf(c);
    let ln_h = h.ln();
    let mut out = match (f.series(), f.samples()) {
        (Some((coeffs, radius)), _) => {
            let mut scaled = Vec::with_capacity(coeffs.len());
            let mut hk = factor;
            for a in coeffs {
                scaled.push(a * hk);
                hk *= h;
            }
            MellinFunction::power_series(scaled, radius / h)?
        }
        (_, Some((grid, values))) => {
            let g = LogGrid::new(grid.x_min / h, grid.x_max / h, grid.n)?;
            let vals: Vec<Complex64> = values.iter().map(|v| v * factor).collect();
            if f.log_support().is_some() {
                MellinFunction::sampled_compact(g, vals)?
            } else {
                MellinFunction::sampled(g, vals)?
            }
        }
        _ => {
            let inner = f.clone();
            MellinFunction::from_log_rule(
                move |u| Ok(inner.eval_log(u + ln_h)? * factor),
                f.is_real(),
            )
        }
    };
    out = out.with_breakpoints(f.breakpoints().iter().map(|b| b / h).collect());
    if let Some((lo, hi)) = f.log_support() {
        out = out.with_log_support(lo - ln_h, hi - ln_h);
    }
    Ok(out.with_real(f.is_real()))
}

/// Settings for the Mellin convolution.
#[derive(Debug, Clone, Copy)]
pub struct ConvolveConfig {
    pub u_lo: f64,
    pub u_hi: f64,
    pub quad: AdaptiveConfig,
}

impl Default for ConvolveConfig {
    fn default() -> Self {
        Self {
            u_lo: -40.0,
            u_hi: 40.0,
            quad: AdaptiveConfig {
                abs_tol: 1e-15,
                rel_tol: 1e-11,
                max_intervals: 2000,
            },
        }
    }
}

/// (f * g)(x) = int g(x/u) f(u) du/u at a single point.
pub fn mellin_convolve_at(
    f: &MellinFunction,
    g: &MellinFunction,
    x: f64,
    cfg: &ConvolveConfig,
) -> Result<Complex64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("convolution evaluated at x = {x}")));
    }
    let s = x.ln();
    let (mut a, mut b) = (cfg.u_lo, cfg.u_hi);
    if let Some((lo, hi)) = f.log_support() {
        a = a.max(lo);
        b = b.min(hi);
    }
    if let Some((lo, hi)) = g.log_support() {
        a = a.max(s - hi);
        b = b.min(s - lo);
    }
    if a >= b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut cuts = vec![a, b];
    cuts.extend(f.breakpoints().iter().map(|p| p.ln()));
    cuts.extend(g.breakpoints().iter().map(|p| s - p.ln()));
    cuts.retain(|c| *c >= a && *c <= b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = Complex64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let eps = 1e-13 * (1.0 + p.abs().max(q.abs()));
        if q - p <= 2.0 * eps {
            continue;
        }
        let r = gk_adaptive(
            |v| Ok(g.eval_log(s - v)? * f.eval_log(v)?),
            p + eps,
            q - eps,
            &cfg.quad,
        )?;
        if !r.converged {
            return Err(Error::NonConvergent(format!(
                "convolution at x = {x} on [{p}, {q}] stalled at error {:.2e}",
                r.error
            )));
        }
        total += r.value;
    }
    Ok(total)
}

/// Mellin convolution sampled on `x_grid`.
pub fn mellin_convolve(
    f: &MellinFunction,
    g: &MellinFunction,
    x_grid: &LogGrid,
    cfg: &ConvolveConfig,
) -> Result<MellinFunction> {
    let values = x_grid
        .points()
        .iter()
        .map(|&x| mellin_convolve_at(f, g, x, cfg))
        .collect::<Result<Vec<_>>>()?;
    let compact = match (f.log_support(), g.log_support()) {
        (Some((a0, a1)), Some((b0, b1))) => a0 + b0 >= x_grid.u_min() && a1 + b1 <= x_grid.u_max(),
        _ => false,
    };
    let out = if compact {
        MellinFunction::sampled_compact(x_grid.clone(), values)?
    } else {
        MellinFunction::sampled(x_grid.clone(), values)?
    };
    Ok(out.with_real(f.is_real() && g.is_real()))
}

/// Discrete X_c norm int x^{c-1} |f(x)| dx over the transform window.
pub fn xc_norm(f: &MellinFunction, c: f64, cfg: &TransformConfig) -> Result<f64> {
    let inner = f.clone();
    let mut abs_f = MellinFunction::from_log_rule(
        move |u| Ok(Complex64::new(inner.eval_log(u)?.norm(), 0.0)),
        true,
    )
    .with_breakpoints(f.breakpoints().to_vec());
    if let Some((lo, hi)) = f.log_support() {
        abs_f = abs_f.with_log_support(lo, hi);
    }
    let spec = mellin_transform(&abs_f, c, &[0.0], cfg)?;
    Ok(spec.values[0].re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::gamma_complex;

    fn chi01() -> MellinFunction {
        MellinFunction::from_real(|x| if x < 1.0 { 1.0 } else { 0.0 }).with_breakpoints(vec![1.0])
    }

    #[test]
    fn exp_transform_is_gamma() {
        let f = MellinFunction::from_real(|x| (-x).exp());
        let t = symmetric_t_grid(1.0, 3);
        let s = mellin_transform(&f, 1.0, &t, &TransformConfig::default()).unwrap();
        assert!((s.values[1] - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        let g = gamma_complex(Complex64::new(1.0, 1.0));
        assert!((s.values[2] - g).norm() < 1e-9);
        assert!(s.conjugate_asymmetry().unwrap() < 1e-10);
    }

    #[test]
    fn chi_transform_is_reciprocal() {
        let s = mellin_transform(&chi01(), 2.0, &[0.0], &TransformConfig::default()).unwrap();
        assert!((s.values[0].re - 0.5).abs() < 1e-9);
    }

    #[test]
    fn translation_of_power() {
        let f = MellinFunction::from_real(|x| x);
        let g = mellin_translate(&f, 2.0, 0.0).unwrap();
        assert!((g.eval(3.0).unwrap().re - 6.0).abs() < 1e-14);
        let id = mellin_translate(&f, 1.0, 0.7).unwrap();
        assert_eq!(id.eval(3.0).unwrap().re, 3.0);
        assert!(mellin_translate(&f, 0.0, 0.0).is_err());
    }

    #[test]
    fn chi_self_convolution() {
        let cfg = ConvolveConfig::default();
        let v = mellin_convolve_at(&chi01(), &chi01(), 0.5, &cfg).unwrap();
        assert!((v.re - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(
            mellin_convolve_at(&chi01(), &chi01(), 1.5, &cfg)
                .unwrap()
                .re,
            0.0
        );
    }

    #[test]
    fn inverse_of_gamma_spectrum() {
        let t = symmetric_t_grid(40.0, 1601);
        let spec = MellinSpectrum {
            nu: 1.0,
            values: t
                .iter()
                .map(|&t| gamma_complex(Complex64::new(1.0, t)))
                .collect(),
            t_values: t,
        };
        let v = mellin_inverse_values(&spec, &[0.0], &InverseConfig::default()).unwrap();
        assert!((v[0].re - (-1f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn inverse_rejects_heavy_tails() {
        let t = symmetric_t_grid(10.0, 101);
        let spec = MellinSpectrum {
            nu: 1.0,
            values: t.iter().map(|&t| Complex64::new(1.0, t).inv()).collect(),
            t_values: t,
        };
        assert!(matches!(
            mellin_inverse_values(&spec, &[0.0], &InverseConfig::default()),
            Err(Error::Tail(_))
        ));
    }
}
