//! Fractional Mellin differences
//!
//!   Delta_h^{alpha,c} f(x) = sum_j binom(alpha, j) (-1)^{alpha-j} h^{cj} f(h^j x)
//!
//! with (-1)^{alpha-j} = e^{i pi alpha} (-1)^j, and the strong derivative as
//! the limit of Delta_h^{alpha,c} f / (h-1)^alpha for h -> 1.

use crate::combinatorics::BinomialSeries;
use crate::error::{Error, Result};
use crate::function::MellinFunction;
use crate::grid::LogGrid;
use crate::quad::CompensatedSum;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Consecutive negligible terms that end the series.
const QUIET_TERMS: usize = 10;
/// A series that has not produced a non-negligible term by |j log h| > 80 is zero.
const SILENT_LOG_SPAN: f64 = 80.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceConfig {
    pub j_max: usize,
    pub tail_tol: f64,
    /// Values of |h - 1| for the strong-derivative limit, decreasing.
    pub h_sequence: Vec<f64>,
    /// Approach h -> 1 from below (h = 1 - e) instead of from above.
    pub from_below: bool,
}

impl Default for DifferenceConfig {
    fn default() -> Self {
        Self {
            j_max: 100_000,
            tail_tol: 1e-10,
            h_sequence: (3..=12).map(|k| 2f64.powi(-k)).collect(),
            from_below: false,
        }
    }
}

impl DifferenceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.j_max < 2 {
            return Err(Error::domain("j_max must be at least 2"));
        }
        if !(self.tail_tol > 0.0) {
            return Err(Error::domain("tail_tol must be positive"));
        }
        for &e in &self.h_sequence {
            if !(e > 0.0) || (self.from_below && e >= 1.0) {
                return Err(Error::domain(format!("invalid step h - 1 = {e}")));
            }
        }
        Ok(())
    }

    /// The h values of the sequence.
    pub fn h_values(&self) -> Vec<f64> {
        self.h_sequence
            .iter()
            .map(|e| if self.from_below { 1.0 - e } else { 1.0 + e })
            .collect()
    }
}

/// A difference value with the number of series terms it used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifferenceValue {
    pub value: Complex64,
    pub terms: usize,
    pub nonzero_terms: usize,
}

/// e^{i pi alpha}, exact at integers.
pub fn unit_phase(alpha: f64) -> Complex64 {
    if alpha == alpha.trunc() {
        let sign = if (alpha as i64).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        };
        Complex64::new(sign, 0.0)
    } else {
        Complex64::from_polar(1.0, PI * alpha)
    }
}

/// Delta_h^{alpha,c} f(x).
pub fn frac_difference(
    f: &MellinFunction,
    alpha: f64,
    c: f64,
    h: f64,
    x: f64,
    cfg: &DifferenceConfig,
) -> Result<Complex64> {
    Ok(frac_difference_detailed(f, alpha, c, h, x, cfg.tail_tol, cfg)?.value)
}

/// Delta_h^{alpha,c} f(x) with term counts, using `tail_tol` as the
/// negligible-term threshold.
pub fn frac_difference_detailed(
    f: &MellinFunction,
    alpha: f64,
    c: f64,
    h: f64,
    x: f64,
    tail_tol: f64,
    cfg: &DifferenceConfig,
) -> Result<DifferenceValue> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::domain(format!(
            "difference order must be non-negative, got {alpha}"
        )));
    }
    if !(h > 0.0) || h == 1.0 || !h.is_finite() {
        return Err(Error::domain(format!(
            "step must be positive and different from 1, got {h}"
        )));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "evaluation point must be positive, got {x}"
        )));
    }
    let integral = alpha == alpha.trunc();
    let lh = h.ln();
    let u0 = x.ln();
    let mut sum = CompensatedSum::new();
    let mut quiet = 0;
    let mut started = false;
    let mut nonzero = 0;
    let mut terms = 0;
    for (j, b) in BinomialSeries::new(alpha).enumerate() {
        if integral && j as f64 > alpha {
            return Ok(DifferenceValue {
                value: sum.value() * unit_phase(alpha),
                terms: j,
                nonzero_terms: nonzero,
            });
        }
        if j >= cfg.j_max {
            return Err(Error::Truncation(format!(
                "no tail decay after {} terms (h = {h}, alpha = {alpha})",
                cfg.j_max
            )));
        }
        let jf = j as f64;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let term = f.eval_log(u0 + jf * lh)? * (sign * b * (c * jf * lh).exp());
        if !term.re.is_finite() || !term.im.is_finite() {
            return Err(Error::Truncation(format!(
                "term {j} is not finite (h = {h}, alpha = {alpha})"
            )));
        }
        if term.norm() != 0.0 {
            nonzero += 1;
        }
        terms = j + 1;
        sum.add(term);
        if term.norm() < tail_tol {
            if started {
                quiet += 1;
                if quiet >= QUIET_TERMS {
                    break;
                }
            } else if (jf * lh).abs() > SILENT_LOG_SPAN {
                break;
            }
        } else {
            started = true;
            quiet = 0;
        }
    }
    Ok(DifferenceValue {
        value: sum.value() * unit_phase(alpha),
        terms,
        nonzero_terms: nonzero,
    })
}

/// Delta_h^{alpha,c} f as a function of x.
///
/// The cutoff is `tail_tol * x^-c`: once f(h^j x) is reached the terms are of
/// size x^-c, and an absolute cutoff would zero the function where the X_c
/// weight x^c still gives it full size.
pub fn difference_function(
    f: &MellinFunction,
    alpha: f64,
    c: f64,
    h: f64,
    cfg: &DifferenceConfig,
) -> MellinFunction {
    let inner = f.clone();
    let cfg = cfg.clone();
    MellinFunction::from_fallible(
        move |x| {
            Ok(
                frac_difference_detailed(&inner, alpha, c, h, x, cfg.tail_tol * x.powf(-c), &cfg)?
                    .value,
            )
        },
        false,
    )
    .with_label(format!("Delta_{h}^({alpha},{c}) {}", f.label()))
}

/// One row of the strong-derivative convergence report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceEntry {
    pub h: f64,
    /// Discrete X_c norm of the quotient over the grid.
    pub estimate_norm: f64,
    /// Discrete X_c norm of the change from the previous h; absent for the first.
    pub successive_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub entries: Vec<ConvergenceEntry>,
    pub monotone: bool,
}

impl ConvergenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone)]
pub struct StrongEstimate {
    /// Final quotient sampled on the grid.
    pub function: MellinFunction,
    /// Quotients per h (rows) and grid point (columns).
    pub estimates: Vec<Vec<Complex64>>,
    pub report: ConvergenceReport,
}

/// Trapezoid approximation of int x^{c-1} |v(x)| dx = int e^{cu} |v| du over the grid.
pub fn discrete_xc_norm(grid: &LogGrid, values: &[Complex64], c: f64) -> f64 {
    let h = grid.h_log();
    let n = values.len();
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
            w * (c * grid.log_point(i)).exp() * v.norm()
        })
        .sum::<f64>()
        * h
}

/// Delta_h^{alpha,c} f / (h-1)^alpha along the h sequence, principal powers.
///
/// Series terms are dropped once below `tail_tol * |h-1|^(alpha+1) * max|f|`:
/// the quotient is O(1) while the difference is O(|h-1|^alpha), and a tail
/// decaying like h^j sums to about 1/|h-1| times its first term. Successive
/// differences at or below `10 * tail_tol` times the estimate norm count as
/// converged.
pub fn strong_derivative_estimate(
    f: &MellinFunction,
    alpha: f64,
    c: f64,
    grid: &LogGrid,
    cfg: &DifferenceConfig,
) -> Result<StrongEstimate> {
    cfg.validate()?;
    if !(alpha > 0.0) {
        return Err(Error::domain(format!(
            "order must be positive, got {alpha}"
        )));
    }
    let points = grid.points();
    let scale = points
        .iter()
        .map(|&x| f.eval(x).map(|v| v.norm()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut estimates = Vec::new();
    let mut entries = Vec::new();
    for (e, h) in cfg.h_sequence.iter().zip(cfg.h_values()) {
        let denom = Complex64::new(h - 1.0, 0.0).powf(alpha);
        let tol = cfg.tail_tol * e.powf(alpha + 1.0) * scale;
        let row = points
            .iter()
            .map(|&x| Ok(frac_difference_detailed(f, alpha, c, h, x, tol, cfg)?.value / denom))
            .collect::<Result<Vec<Complex64>>>()?;
        let successive_diff = estimates.last().map(|prev: &Vec<Complex64>| {
            let d: Vec<Complex64> = row.iter().zip(prev).map(|(a, b)| a - b).collect();
            discrete_xc_norm(grid, &d, c)
        });
        entries.push(ConvergenceEntry {
            h,
            estimate_norm: discrete_xc_norm(grid, &row, c),
            successive_diff,
        });
        estimates.push(row);
    }
    let diffs: Vec<f64> = entries.iter().filter_map(|e| e.successive_diff).collect();
    let floor = 10.0 * cfg.tail_tol * entries.iter().map(|e| e.estimate_norm).fold(0.0, f64::max);
    let decreasing = |w: &[f64]| w[1] < w[0] || w[1] <= floor;
    let monotone = diffs.windows(2).all(decreasing);
    let tail = &diffs[diffs.len().saturating_sub(4)..];
    if tail.len() >= 2 && !tail.windows(2).all(decreasing) {
        return Err(Error::NonConvergent(format!(
            "successive differences of the quotient do not decrease over the last {} steps: {tail:?}",
            tail.len()
        )));
    }
    let last = estimates.last().cloned().unwrap_or_default();
    let function =
        MellinFunction::sampled(grid.clone(), last)?.with_label("strong derivative estimate");
    Ok(StrongEstimate {
        function,
        estimates,
        report: ConvergenceReport { entries, monotone },
    })
}

/// |Delta^alpha(Delta^beta f)(x) - Delta^{alpha+beta} f(x)|.
pub fn difference_semigroup_check(
    f: &MellinFunction,
    alpha: f64,
    beta: f64,
    c: f64,
    h: f64,
    x: f64,
    cfg: &DifferenceConfig,
) -> Result<f64> {
    let inner = difference_function(f, beta, c, h, cfg);
    let nested = frac_difference(&inner, alpha, c, h, x, cfg)?;
    let direct = frac_difference(f, alpha + beta, c, h, x, cfg)?;
    Ok((nested - direct).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::frac_binomial;
    use proptest::prelude::*;

    fn cfg() -> DifferenceConfig {
        DifferenceConfig::default()
    }

    fn power(b: f64) -> MellinFunction {
        MellinFunction::from_real(move |x| x.powf(b))
    }

    #[test]
    fn integer_orders_are_finite_sums() {
        let v = frac_difference(&power(1.0), 1.0, 0.0, 2.0, 1.0, &cfg()).unwrap();
        assert_eq!(v, Complex64::new(1.0, 0.0));
        let v = frac_difference(&power(1.0), 2.0, 0.0, 2.0, 1.0, &cfg()).unwrap();
        assert_eq!(v, Complex64::new(1.0, 0.0));
        for r in 1..=4 {
            let d = frac_difference_detailed(&power(2.0), r as f64, 0.5, 1.3, 0.7, 1e-10, &cfg())
                .unwrap();
            assert_eq!(d.terms, r + 1);
        }
    }

    #[test]
    fn eigenfunction_symbol_from_below() {
        // Delta_h x^b = e^{i pi alpha} (1 - h^{c+b})^alpha x^b for h < 1.
        let (alpha, c, b, h, x) = (0.5, 1.0, 1.0, 0.9, 1.7);
        let v = frac_difference(&power(b), alpha, c, h, x, &cfg()).unwrap();
        let want = unit_phase(alpha) * (1.0 - h.powf(c + b)).powf(alpha) * x.powf(b);
        assert!((v - want).norm() < 1e-9, "{v} vs {want}");
    }

    #[test]
    fn growth_is_reported() {
        let e = frac_difference(&power(1.0), 0.5, 1.0, 1.1, 1.0, &cfg()).unwrap_err();
        assert!(matches!(e, Error::Truncation(_)), "{e:?}");
    }

    #[test]
    fn strong_estimate_of_linear_function() {
        let g = LogGrid::new(0.5, 2.0, 5).unwrap();
        let est = strong_derivative_estimate(
            &power(1.0),
            1.0,
            0.0,
            &g,
            &DifferenceConfig {
                h_sequence: vec![0.1, 0.01, 0.001, 1e-4],
                ..cfg()
            },
        );
        // Quotients equal x up to cancellation in f(hx) - f(x).
        let est = est.unwrap();
        for row in &est.estimates {
            for (v, x) in row.iter().zip(g.points()) {
                assert!((v.re - x).abs() < 1e-10 && v.im == 0.0, "{v} vs {x}");
            }
        }
    }

    #[test]
    fn strong_estimate_converges_for_eigenfunction() {
        let g = LogGrid::new(0.5, 2.0, 3).unwrap();
        let c = DifferenceConfig {
            from_below: true,
            ..cfg()
        };
        let est = strong_derivative_estimate(&power(0.0), 0.5, 1.0, &g, &c).unwrap();
        for v in est.estimates.last().unwrap() {
            assert!((v.re - 1.0).abs() < 1e-3 && v.im.abs() < 1e-6, "{v}");
        }
        assert!(est.report.monotone);
        let json = est.report.to_json();
        assert!(json.contains("successive_diff"));
    }

    #[test]
    fn semigroup_examples() {
        let d = difference_semigroup_check(&power(2.0), 1.0, 1.0, 0.0, 1.5, 1.0, &cfg()).unwrap();
        assert!(d < 1e-12);
        let tight = DifferenceConfig {
            tail_tol: 1e-14,
            ..cfg()
        };
        let d =
            difference_semigroup_check(&power(1.0), 0.5, 0.5, 1.0, 1.0 / 1.1, 1.0, &tight).unwrap();
        assert!(d < 1e-6, "{d}");
        let d = difference_semigroup_check(&power(1.0), 0.5, 0.0, 1.0, 0.8, 1.0, &cfg()).unwrap();
        let direct = frac_difference(&power(1.0), 0.5, 1.0, 0.8, 1.0, &cfg()).unwrap();
        assert!(d <= 1e-15 * direct.norm());
        assert!(matches!(
            difference_semigroup_check(&power(1.0), 0.5, 0.5, 1.0, 1.1, 1.0, &cfg()),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn binomial_tail_sum_converges() {
        for alpha in [0.3, 0.5, 1.7, 2.5] {
            let partial =
                |n: usize| -> f64 { BinomialSeries::new(alpha).take(n).map(f64::abs).sum() };
            let a = partial(20_000);
            let b = partial(40_000);
            let tail_bound = 40_000f64.powf(-alpha) * 2.0;
            assert!(
                (b - a).abs() <= tail_bound,
                "alpha {alpha}: {} > {tail_bound}",
                b - a
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn norm_bound(alpha in 0.2f64..2.5, k in 1usize..6) {
            // f = e^{-x}, c = 1; shifts by whole grid steps keep the discrete norm exact.
            let g = LogGrid::from_log(-20.0, 5.0, 701).unwrap();
            let h = (-(k as f64) * g.h_log()).exp();
            let f = MellinFunction::from_real(|x| (-x).exp());
            let c = 1.0;
            let vals: Vec<Complex64> = g.points().iter().map(|&x| f.eval(x).unwrap()).collect();
            let diff: Vec<Complex64> = g.points().iter().map(|&x| frac_difference(&f, alpha, c, h, x, &cfg()).unwrap()).collect();
            let sum_abs: f64 = BinomialSeries::new(alpha).take(200_000).map(f64::abs).sum();
            let lhs = discrete_xc_norm(&g, &diff, c);
            let rhs = sum_abs * discrete_xc_norm(&g, &vals, c);
            prop_assert!(lhs <= rhs * (1.0 + 1e-6), "{} > {}", lhs, rhs);
        }

        #[test]
        fn binomial_decay(alpha in 0.1f64..3.0) {
            let bound = (10..=10_000).step_by(97).map(|j| frac_binomial(alpha, j).abs() * (j as f64).powf(alpha + 1.0)).fold(0.0, f64::max);
            prop_assert!(bound < 10.0);
        }
    }
}
