//! Closed-form values of J^alpha_{0+,c} and D^alpha_{0+,c} on four function
//! families: powers x^b, log powers log^k x, exponentials e^{bx} and sinc
//! (with its derivatives). No quadrature is shared with the engines.

use crate::combinatorics::{b_alpha, binomial, factorial};
use crate::error::{Error, Result};
use crate::grid::LogGrid;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

/// Series families stop once a term falls below this fraction of the sum.
const SERIES_TOL: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Power,
    LogK,
    Exp,
    Sinc,
    SincDeriv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Op {
    J,
    D,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Power => "power",
            Family::LogK => "log_k",
            Family::Exp => "exp",
            Family::Sinc => "sinc",
            Family::SincDeriv => "sinc_deriv",
        };
        f.write_str(s)
    }
}

/// One closed-form evaluation. Unused parameters are ignored by the family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleCase {
    pub family: Family,
    pub op: Op,
    /// Exponent for power, rate for exp.
    pub b: f64,
    /// Power of the logarithm.
    pub k: u32,
    pub c: f64,
    pub alpha: f64,
    /// Derivative order for sinc_deriv.
    pub s: u32,
    pub x: f64,
}

impl OracleCase {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::domain(format!(
                "order must be positive, got {}",
                self.alpha
            )));
        }
        if !(self.x > 0.0) || !self.x.is_finite() {
            return Err(Error::domain(format!(
                "point must be positive, got {}",
                self.x
            )));
        }
        let ok = match self.family {
            Family::Power => self.c + self.b > 0.0,
            Family::LogK | Family::Exp | Family::Sinc => self.c > 0.0,
            Family::SincDeriv => self.c > 0.0 || (self.c == 0.0 && self.s % 2 == 1),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "parameters outside the domain of the {} family: c = {}, b = {}, s = {}",
                self.family, self.c, self.b, self.s
            )))
        }
    }

    /// The same case with the other operator.
    pub fn with_op(&self, op: Op) -> Self {
        Self { op, ..*self }
    }
}

/// Closed-form value of the case.
pub fn oracle_eval(case: &OracleCase) -> Result<Complex64> {
    case.validate()?;
    let sign = match case.op {
        Op::J => -1.0,
        Op::D => 1.0,
    };
    let (a, c, x) = (case.alpha, case.c, case.x);
    let v = match case.family {
        Family::Power => (c + case.b).powf(sign * a) * x.powf(case.b),
        Family::LogK => match case.op {
            Op::J => log_power_integral(case.k, a, c, x)?,
            Op::D => log_power_derivative(case.k, a, c, x)?,
        },
        Family::Exp => {
            // sum_k (c+k)^{-+alpha} b^k/k! x^k
            let bx = case.b * x;
            series(
                |k| {
                    let mut t = 1.0;
                    for i in 1..=k {
                        t *= bx / i as f64;
                    }
                    (c + k as f64).powf(sign * a) * t
                },
                bx.abs(),
            )
        }
        Family::Sinc => series(
            |k| {
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                s * (c + 2.0 * k as f64).powf(sign * a) * (PI * x).powi(2 * k as i32)
                    / factorial(2 * k + 1)
            },
            PI * x,
        ),
        Family::SincDeriv => {
            let s = case.s as usize;
            // sum over k with 2k >= s of (-1)^k pi^{2k}/(2k+1)! A_{s,k} (c+2k-s)^{-+alpha} x^{2k-s}
            series(
                |k| {
                    let k = k + s.div_ceil(2);
                    let a_sk: f64 = (0..s).map(|nu| (2 * k - nu) as f64).product();
                    if a_sk == 0.0 {
                        return 0.0;
                    }
                    let sg = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
                    let e = 2 * k - s;
                    sg * PI.powi(2 * k as i32) / factorial(2 * k + 1)
                        * a_sk
                        * (c + e as f64).powf(sign * a)
                        * x.powi(e as i32)
                },
                PI * x,
            )
        }
    };
    Ok(Complex64::new(v, 0.0))
}

/// Sums term(k) for k = 0, 1, ... until the terms, past their peak near
/// `peak`, drop below SERIES_TOL of the running sum.
fn series<T: Fn(usize) -> f64>(term: T, peak: f64) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut small = 0;
    for k in 0..2000 {
        let t = term(k);
        let y = t - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        if (k as f64) > peak && t.abs() <= SERIES_TOL * sum.abs() {
            small += 1;
            if small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
    }
    sum
}

/// J^alpha_{0+,c} log^k x = sum_j (-1)^{k-j} C(k,j) B_alpha(k,j) / c^{alpha+k-j} log^j x.
fn log_power_integral(k: u32, alpha: f64, c: f64, x: f64) -> Result<f64> {
    let k = k as usize;
    let l = x.ln();
    let mut sum = 0.0;
    for j in 0..=k {
        let sg = if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        sum += sg * binomial(k, j) * b_alpha(alpha, k, j)? / c.powf(alpha + (k - j) as f64)
            * l.powi(j as i32);
    }
    Ok(sum)
}

/// D^alpha_{0+,c} log^k x = x^{-c} sum_j (-1)^{k-j} C(k,j) B_{m-alpha}(k,j)/c^{m-alpha+k-j} delta^m(x^c log^j x)
/// with delta^m(x^c log^j x) = x^c sum_i C(m,i) c^{m-i} j!/(j-i)! log^{j-i} x.
fn log_power_derivative(k: u32, alpha: f64, c: f64, x: f64) -> Result<f64> {
    let k = k as usize;
    let m = alpha.floor() as usize + 1;
    let beta = m as f64 - alpha;
    let l = x.ln();
    let mut sum = 0.0;
    for j in 0..=k {
        let sg = if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        let coef = sg * binomial(k, j) * b_alpha(beta, k, j)? / c.powf(beta + (k - j) as f64);
        let mut inner = 0.0;
        for i in 0..=m.min(j) {
            inner += binomial(m, i) * c.powi((m - i) as i32) * factorial(j) / factorial(j - i)
                * l.powi((j - i) as i32);
        }
        sum += coef * inner;
    }
    Ok(sum)
}

/// Parameters held fixed across the suite sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteParams {
    pub c: f64,
    pub power_b: f64,
    pub log_k: u32,
    pub exp_b: f64,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            power_b: 1.0,
            log_k: 2,
            exp_b: 1.0,
        }
    }
}

/// All families x {J, D} x orders x grid points, in that nesting order.
pub fn oracle_suite(
    grid: &LogGrid,
    orders: &[f64],
    params: &SuiteParams,
) -> Result<Vec<(OracleCase, Complex64)>> {
    let mut out = Vec::new();
    for family in [Family::Power, Family::LogK, Family::Exp, Family::Sinc] {
        for op in [Op::J, Op::D] {
            for &alpha in orders {
                for x in grid.points() {
                    let case = OracleCase {
                        family,
                        op,
                        b: match family {
                            Family::Power => params.power_b,
                            Family::Exp => params.exp_b,
                            _ => 0.0,
                        },
                        k: if family == Family::LogK {
                            params.log_k
                        } else {
                            0
                        },
                        c: params.c,
                        alpha,
                        s: 0,
                        x,
                    };
                    let v = oracle_eval(&case)?;
                    out.push((case, v));
                }
            }
        }
    }
    Ok(out)
}

/// Flat CSV row of a case with its reference value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoldenRow {
    pub family: Family,
    pub op: Op,
    pub b: f64,
    pub k: u32,
    pub c: f64,
    pub alpha: f64,
    pub s: u32,
    pub x: f64,
    pub re: f64,
    pub im: f64,
}

impl GoldenRow {
    pub fn case(&self) -> OracleCase {
        OracleCase {
            family: self.family,
            op: self.op,
            b: self.b,
            k: self.k,
            c: self.c,
            alpha: self.alpha,
            s: self.s,
            x: self.x,
        }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

pub fn write_golden(path: &Path, rows: &[(OracleCase, Complex64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (c, v) in rows {
        w.serialize(GoldenRow {
            family: c.family,
            op: c.op,
            b: c.b,
            k: c.k,
            c: c.c,
            alpha: c.alpha,
            s: c.s,
            x: c.x,
            re: v.re,
            im: v.im,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_golden(path: &Path) -> Result<Vec<GoldenRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::stirling_function;
    use proptest::prelude::*;

    fn case(
        family: Family,
        op: Op,
        b: f64,
        k: u32,
        c: f64,
        alpha: f64,
        s: u32,
        x: f64,
    ) -> OracleCase {
        OracleCase {
            family,
            op,
            b,
            k,
            c,
            alpha,
            s,
            x,
        }
    }

    #[test]
    fn listed_values() {
        let v = oracle_eval(&case(Family::Power, Op::J, 1.0, 0, 1.0, 0.5, 0, 1.0)).unwrap();
        assert!((v.re - 0.5f64.sqrt()).abs() < 1e-15);
        let v = oracle_eval(&case(
            Family::LogK,
            Op::D,
            0.0,
            1,
            1.0,
            0.5,
            0,
            std::f64::consts::E,
        ))
        .unwrap();
        assert!((v.re - 1.5).abs() < 1e-14);
        let v = oracle_eval(&case(Family::LogK, Op::J, 0.0, 1, 1.0, 1.0, 0, 1.0)).unwrap();
        assert!((v.re + 1.0).abs() < 1e-15);
    }

    #[test]
    fn log_integral_matches_antiderivative() {
        // alpha = 1, k = 1: x^{-c} int_0^x u^{c-1} log u du = log x / c - 1/c^2.
        for &(c, x) in &[(1.0, 1.0), (2.0, 3.0), (0.5, 0.2)] {
            let v = oracle_eval(&case(Family::LogK, Op::J, 0.0, 1, c, 1.0, 0, x))
                .unwrap()
                .re;
            let want = x.ln() / c - 1.0 / (c * c);
            assert!((v - want).abs() < 1e-14, "{v} vs {want}");
        }
    }

    #[test]
    fn log_derivative_matches_continued_product() {
        // D^alpha log^k = sum_j (-1)^{k-j} C(k,j) B_{-alpha}(k,j) c^{alpha-k+j} log^j x.
        for k in 0..5u32 {
            for &alpha in &[0.3, 1.0, 1.5, 2.7] {
                let (c, x) = (1.7, 2.3);
                let v = oracle_eval(&case(Family::LogK, Op::D, 0.0, k, c, alpha, 0, x))
                    .unwrap()
                    .re;
                let ku = k as usize;
                let mut want = 0.0;
                for j in 0..=ku {
                    let sg = if (ku - j).is_multiple_of(2) {
                        1.0
                    } else {
                        -1.0
                    };
                    want += sg
                        * binomial(ku, j)
                        * b_alpha(-alpha, ku, j).unwrap()
                        * c.powf(alpha - (ku - j) as f64)
                        * x.ln().powi(j as i32);
                }
                assert!(
                    (v - want).abs() < 1e-12 * (1.0 + want.abs()),
                    "k={k} alpha={alpha}: {v} vs {want}"
                );
            }
        }
    }

    #[test]
    fn exp_family_matches_stirling_form() {
        for op in [Op::J, Op::D] {
            let (b, c, alpha, x) = (1.0, 1.0, 0.5, 0.3);
            let v = oracle_eval(&case(Family::Exp, op, b, 0, c, alpha, 0, x))
                .unwrap()
                .re;
            let p = if op == Op::D { alpha } else { -alpha };
            let st: f64 = (0..40)
                .map(|k| stirling_function(c, p, k).unwrap() * (x * b).powi(k as i32))
                .sum();
            let want = (b * x).exp() * st;
            assert!(
                (v - want).abs() < 1e-8 * want.abs(),
                "{op:?}: {v} vs {want}"
            );
        }
    }

    #[test]
    fn sinc_derivative_first_order_and_domain() {
        // s = 1, c = 0 is allowed and the sum starts at k = 1.
        let v = oracle_eval(&case(Family::SincDeriv, Op::J, 0.0, 0, 0.0, 1.0, 1, 0.3)).unwrap();
        assert!(v.re.is_finite());
        assert!(oracle_eval(&case(Family::SincDeriv, Op::J, 0.0, 0, 0.0, 1.0, 2, 0.3)).is_err());
        assert!(oracle_eval(&case(Family::Sinc, Op::J, 0.0, 0, 0.0, 1.0, 0, 0.3)).is_err());
        assert!(oracle_eval(&case(Family::Power, Op::J, -1.0, 0, 1.0, 1.0, 0, 0.3)).is_err());
    }

    #[test]
    fn suite_size() {
        let g = LogGrid::new(0.5, 2.0, 5).unwrap();
        let s = oracle_suite(&g, &[0.5, 1.3, 2.7], &SuiteParams::default()).unwrap();
        assert_eq!(s.len(), 120);
    }

    proptest! {
        #[test]
        fn power_round_trip(b in -1.0f64..3.0, cb in 0.1f64..4.0, alpha in 0.1f64..4.0, x in 0.1f64..10.0) {
            let c = cb - b;
            let j = oracle_eval(&case(Family::Power, Op::J, b, 0, c, alpha, 0, x)).unwrap().re;
            let d = oracle_eval(&case(Family::Power, Op::D, b, 0, c, alpha, 0, x)).unwrap().re;
            let xb = x.powf(b);
            prop_assert!((j * d / xb - xb).abs() <= 1e-12 * xb);
        }
    }
}
