//! Quadrature kernels: Gauss-Legendre, Gauss-Jacobi (Golub-Welsch), adaptive
//! Gauss-Kronrod, Wynn's epsilon accelerator and finite-difference weights.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights of an interpolatory rule.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached Gauss-Legendre rule.
pub fn legendre_cached(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("legendre cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(gauss_legendre(n)))
        .clone()
}

/// Gauss-Jacobi rule on [-1, 1] for the weight (1-x)^a (1+x)^b, a, b > -1.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<Rule> {
    if !(a > -1.0 && b > -1.0) {
        return Err(Error::domain(format!(
            "Jacobi exponents must exceed -1, got ({a}, {b})"
        )));
    }
    let ab = a + b;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    for (k, d) in diag.iter_mut().enumerate() {
        let kf = k as f64;
        *d = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
    }
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        let beta = if k == 1 {
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            4.0 * kf * (kf + a) * (kf + b) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
        off[k] = beta.sqrt();
    }
    let mu0 = (2f64).powf(ab + 1.0)
        * (crate::gamma::ln_gamma(a + 1.0) + crate::gamma::ln_gamma(b + 1.0)
            - crate::gamma::ln_gamma(ab + 2.0))
        .exp();
    let (vals, first) = tridiagonal_eigen(diag, off)?;
    let mut pairs: Vec<(f64, f64)> = vals
        .into_iter()
        .zip(first)
        .map(|(x, v)| (x, mu0 * v * v))
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

/// Implicit QL on a symmetric tridiagonal matrix, tracking the first row of
/// the eigenvector matrix. `off[k]` couples rows k-1 and k.
fn tridiagonal_eigen(mut d: Vec<f64>, off: Vec<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = d.len();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[1..n]);
    let mut z = vec![0.0; n];
    if n > 0 {
        z[0] = 1.0;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NonConvergent("tridiagonal QL iteration".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}

/// Rule on [0, 1] for the weight t^(alpha-1), cached per (n, alpha).
pub fn jacobi_unit(n: usize, alpha: f64) -> Result<Arc<Rule>> {
    type Key = (usize, u64);
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, alpha.to_bits());
    if let Some(r) = cache.lock().expect("jacobi cache poisoned").get(&key) {
        return Ok(r.clone());
    }
    let raw = gauss_jacobi(n, 0.0, alpha - 1.0)?;
    let scale = 0.5f64.powf(alpha);
    let rule = Arc::new(Rule {
        nodes: raw.nodes.iter().map(|x| 0.5 * (1.0 + x)).collect(),
        weights: raw.weights.iter().map(|w| w * scale).collect(),
    });
    cache
        .lock()
        .expect("jacobi cache poisoned")
        .insert(key, rule.clone());
    Ok(rule)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for adaptive Gauss-Kronrod integration.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            max_intervals: 4000,
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone)]
pub struct Adaptive<V> {
    pub value: V,
    pub error: f64,
    pub converged: bool,
    pub evaluations: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: Vec<Complex64>,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

fn kronrod_piece<F>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [Complex64]) -> Result<Piece>
where
    F: FnMut(f64, &mut [Complex64]) -> Result<()>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut vals = vec![Complex64::new(0.0, 0.0); 15 * dim];
    f(c, &mut vals[0..dim])?;
    for j in 0..7 {
        let dx = h * XGK[j];
        f(c - dx, &mut vals[(1 + 2 * j) * dim..(2 + 2 * j) * dim])?;
        f(c + dx, &mut vals[(2 + 2 * j) * dim..(3 + 2 * j) * dim])?;
    }
    let mut value = vec![Complex64::new(0.0, 0.0); dim];
    let mut err = 0.0f64;
    for d in 0..dim {
        let fc = vals[d];
        let mut k = fc * WGK[7];
        let mut g = fc * WG[3];
        for j in 0..7 {
            let s = vals[(1 + 2 * j) * dim + d] + vals[(2 + 2 * j) * dim + d];
            k += s * WGK[j];
            if j % 2 == 1 {
                g += s * WG[j / 2];
            }
        }
        let mean = k * 0.5;
        let mut asc = WGK[7] * (fc - mean).norm();
        for j in 0..7 {
            asc += WGK[j]
                * ((vals[(1 + 2 * j) * dim + d] - mean).norm()
                    + (vals[(2 + 2 * j) * dim + d] - mean).norm());
        }
        let resasc = asc * h.abs();
        let mut e = ((k - g) * h).norm();
        if resasc != 0.0 && e != 0.0 {
            e = resasc * (200.0 * e / resasc).powf(1.5).min(1.0);
        }
        // Round-off floor.
        let kabs = (k * h).norm();
        e = e.max(50.0 * f64::EPSILON * kabs);
        value[d] = k * h;
        err = err.max(e);
        buf[d] = value[d];
    }
    if value.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonConvergent(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    Ok(Piece { a, b, value, err })
}

/// Adaptive Gauss-Kronrod 7-15 integration of a vector-valued integrand.
pub fn gk_adaptive_vec<F>(
    mut f: F,
    a: f64,
    b: f64,
    dim: usize,
    cfg: &AdaptiveConfig,
) -> Result<Adaptive<Vec<Complex64>>>
where
    F: FnMut(f64, &mut [Complex64]) -> Result<()>,
{
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    if a == b {
        return Ok(Adaptive {
            value: buf,
            error: 0.0,
            converged: true,
            evaluations: 0,
        });
    }
    let first = kronrod_piece(&mut f, a, b, dim, &mut buf)?;
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    loop {
        let mut total = vec![Complex64::new(0.0, 0.0); dim];
        let mut err = 0.0;
        for p in heap.iter() {
            for (t, v) in total.iter_mut().zip(&p.value) {
                *t += v;
            }
            err += p.err;
        }
        let scale = total.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let target = cfg.abs_tol.max(cfg.rel_tol * scale);
        if err <= target || heap.len() >= cfg.max_intervals {
            return Ok(Adaptive {
                value: total,
                error: err,
                converged: err <= target,
                evaluations,
            });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further.
            heap.push(Piece { err: 0.0, ..worst });
            continue;
        }
        let left = kronrod_piece(&mut f, worst.a, mid, dim, &mut buf)?;
        let right = kronrod_piece(&mut f, mid, worst.b, dim, &mut buf)?;
        evaluations += 30;
        heap.push(left);
        heap.push(right);
    }
}

/// Adaptive Gauss-Kronrod 7-15 integration of a scalar complex integrand.
pub fn gk_adaptive<F>(mut f: F, a: f64, b: f64, cfg: &AdaptiveConfig) -> Result<Adaptive<Complex64>>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    let r = gk_adaptive_vec(
        |x, out: &mut [Complex64]| {
            out[0] = f(x)?;
            Ok(())
        },
        a,
        b,
        1,
        cfg,
    )?;
    Ok(Adaptive {
        value: r.value[0],
        error: r.error,
        converged: r.converged,
        evaluations: r.evaluations,
    })
}

/// Fixed Gauss-Legendre quadrature of a scalar integrand on [a, b].
pub fn legendre_fixed<F>(mut f: F, a: f64, b: f64, n: usize) -> Result<Complex64>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    let rule = legendre_cached(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        acc += f(c + h * x)? * *w;
    }
    Ok(acc * h)
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums.
/// Returns the accelerated limit and a crude error estimate.
pub fn wynn_epsilon(partials: &[Complex64]) -> (Complex64, f64) {
    let n = partials.len();
    if n == 0 {
        return (Complex64::new(0.0, 0.0), f64::INFINITY);
    }
    if n < 3 {
        let last = partials[n - 1];
        let err = if n == 2 {
            (partials[1] - partials[0]).norm()
        } else {
            f64::INFINITY
        };
        return (last, err);
    }
    // Column k holds eps_k^(j) for j = 0..n-k.
    let mut prev: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut curr: Vec<Complex64> = partials.to_vec();
    let mut estimates: Vec<Complex64> = vec![partials[n - 1]];
    let mut k = 0;
    while curr.len() > 1 {
        let mut next = Vec::with_capacity(curr.len() - 1);
        let mut broke = false;
        for j in 0..curr.len() - 1 {
            let diff = curr[j + 1] - curr[j];
            if diff.norm() == 0.0 {
                broke = true;
                break;
            }
            next.push(prev[j + 1] + diff.inv());
        }
        if broke {
            break;
        }
        k += 1;
        prev = curr;
        curr = next;
        if k % 2 == 0 {
            if let Some(v) = curr.last() {
                if v.re.is_finite() && v.im.is_finite() {
                    estimates.push(*v);
                }
            }
        }
    }
    let best = *estimates.last().expect("at least one estimate");
    let err = if estimates.len() >= 2 {
        (best - estimates[estimates.len() - 2]).norm()
    } else {
        (partials[n - 1] - partials[n - 2]).norm()
    };
    (best, err)
}

/// Finite-difference weights (Fornberg). `w[k][j]` multiplies f(x[j]) in the
/// approximation of the k-th derivative at `z`, for k = 0..=m.
pub fn fd_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Neumaier-compensated accumulator for complex sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: Complex64,
    comp: Complex64,
    abs: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: Complex64) {
        self.abs += v.norm();
        self.sum.re = neumaier(self.sum.re, v.re, &mut self.comp.re);
        self.sum.im = neumaier(self.sum.im, v.im, &mut self.comp.im);
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.comp
    }

    /// Sum of absolute values of all added terms.
    pub fn abs_sum(&self) -> f64 {
        self.abs
    }
}

fn neumaier(sum: f64, v: f64, comp: &mut f64) -> f64 {
    let t = sum + v;
    if sum.abs() >= v.abs() {
        *comp += (sum - t) + v;
    } else {
        *comp += (v - t) + sum;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(10);
        let s: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(x, w)| w * x.powi(18))
            .sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_weight_moments() {
        // int_0^1 t^(a-1) t^k dt = 1/(a+k)
        for &a in &[0.25, 0.5, 1.0, 1.7, 2.7] {
            let r = jacobi_unit(64, a).unwrap();
            for k in 0..20 {
                let s: f64 = r
                    .nodes
                    .iter()
                    .zip(&r.weights)
                    .map(|(t, w)| w * t.powi(k))
                    .sum();
                let want = 1.0 / (a + k as f64);
                assert!(
                    (s - want).abs() < 1e-13 * want.max(1.0),
                    "a={a} k={k} {s} {want}"
                );
            }
        }
    }

    #[test]
    fn kronrod_handles_endpoint_singularity() {
        let r = gk_adaptive(
            |x| Ok(Complex64::new(x.sqrt().recip(), 0.0)),
            0.0,
            1.0,
            &AdaptiveConfig::default(),
        )
        .unwrap();
        assert!(r.converged);
        assert!((r.value.re - 2.0).abs() < 1e-9);
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // log 2 = 1 - 1/2 + 1/3 - ...
        let mut s = 0.0;
        let partials: Vec<Complex64> = (1..=20)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                Complex64::new(s, 0.0)
            })
            .collect();
        let (v, _) = wynn_epsilon(&partials);
        assert!((v.re - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn fornberg_central_second_derivative() {
        let w = fd_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
        assert!((w[1][0] + 0.5).abs() < 1e-15 && (w[1][2] - 0.5).abs() < 1e-15);
    }
}
