//! Fractional binomial coefficients, generalized Stirling numbers and
//! Stirling functions, and the Gamma-ratio products B_alpha(k, j).

use crate::dd::DD;
use crate::error::{Error, Result};
use crate::quad::CompensatedSum;
use num_complex::Complex64;

/// Digits of cancellation tolerated before the alternating sum is redone in
/// double-double arithmetic.
const MAX_LOST_DIGITS: f64 = 10.0;

/// Generalized binomial coefficient alpha (alpha-1) ... (alpha-j+1) / j!.
pub fn frac_binomial(alpha: f64, j: usize) -> f64 {
    if alpha >= 0.0 && alpha == alpha.trunc() && (j as f64) > alpha {
        return 0.0;
    }
    if j <= 64 {
        let mut b = 1.0;
        for i in 0..j {
            b *= (alpha - i as f64) / (i as f64 + 1.0);
        }
        return b;
    }
    // Log-magnitude accumulation keeps long products free of over/underflow.
    let mut log_mag = 0.0;
    let mut negative = false;
    for i in 0..j {
        let num = alpha - i as f64;
        if num == 0.0 {
            return 0.0;
        }
        if num < 0.0 {
            negative = !negative;
        }
        log_mag += num.abs().ln() - (i as f64 + 1.0).ln();
    }
    let mag = log_mag.exp();
    if negative {
        -mag
    } else {
        mag
    }
}

/// Iterator over binom(alpha, j), j = 0, 1, 2, ... by the ratio recurrence.
#[derive(Debug, Clone)]
pub struct BinomialSeries {
    alpha: f64,
    j: usize,
    current: f64,
}

impl BinomialSeries {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            j: 0,
            current: 1.0,
        }
    }
}

impl Iterator for BinomialSeries {
    type Item = f64;
    fn next(&mut self) -> Option<f64> {
        let out = self.current;
        let j = self.j as f64;
        self.current *= (self.alpha - j) / (j + 1.0);
        self.j += 1;
        Some(out)
    }
}

/// Triangle of generalized Stirling numbers of the second kind S_c(r, k).
#[derive(Debug, Clone, PartialEq)]
pub struct StirlingTable {
    pub c: f64,
    pub r_max: usize,
    entries: Vec<Vec<f64>>,
}

impl StirlingTable {
    pub fn get(&self, r: usize, k: usize) -> f64 {
        if r > self.r_max || k > r {
            return 0.0;
        }
        self.entries[r][k]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.entries[r]
    }
}

/// S_c(r, k) for 0 <= k <= r <= r_max from S_c(r, 0) = c^r, S_c(r, r) = 1 and
/// S_c(r+1, k) = S_c(r, k-1) + (c + k) S_c(r, k).
pub fn stirling_numbers(c: f64, r_max: usize) -> StirlingTable {
    let mut entries: Vec<Vec<f64>> = Vec::with_capacity(r_max + 1);
    entries.push(vec![1.0]);
    for r in 0..r_max {
        let prev = &entries[r];
        let mut next = vec![0.0; r + 2];
        next[0] = c * prev[0];
        for k in 1..=r {
            next[k] = prev[k - 1] + (c + k as f64) * prev[k];
        }
        next[r + 1] = 1.0;
        entries.push(next);
    }
    StirlingTable { c, r_max, entries }
}

/// Signed Stirling numbers of the first kind s(n, k), 0 <= k <= n.
pub fn stirling_first_kind(n: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![1.0]];
    for r in 0..n {
        let prev = &rows[r];
        let mut next = vec![0.0; r + 2];
        for k in 1..=r + 1 {
            let a = prev[k - 1];
            let b = if k <= r { prev[k] } else { 0.0 };
            next[k] = a - r as f64 * b;
        }
        rows.push(next);
    }
    rows
}

pub fn factorial(n: usize) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn is_integer(alpha: f64) -> bool {
    alpha == alpha.trunc()
}

/// Stirling function S_c(alpha, k) = (1/k!) sum_j (-1)^{k-j} binom(k, j) (c+j)^alpha.
///
/// Summed with compensation; when more than ten digits cancel the sum is
/// recomputed in double-double arithmetic.
pub fn stirling_function(c: f64, alpha: f64, k: usize) -> Result<f64> {
    Ok(stirling_function_detailed(c, alpha, k)?.value)
}

/// Value of a Stirling function together with the cancellation it suffered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StirlingValue {
    pub value: f64,
    /// log10 of (sum of |terms|) / |result|.
    pub digits_lost: f64,
    pub extended: bool,
}

pub fn stirling_function_detailed(c: f64, alpha: f64, k: usize) -> Result<StirlingValue> {
    let integral = is_integer(alpha);
    for j in 0..=k {
        let base = c + j as f64;
        if base < 0.0 && !integral {
            return Err(Error::domain(format!(
                "base c + j = {base} is negative for non-integer order {alpha}"
            )));
        }
        if base == 0.0 && (alpha < 0.0 || !integral && alpha <= 0.0) {
            return Err(Error::domain(format!("base c + j = 0 with order {alpha}")));
        }
        if base == 0.0 && !integral {
            // 0^alpha = 0 for alpha > 0; still require a positive base per definition.
            return Err(Error::domain(format!(
                "base c + j = 0 for non-integer order {alpha}"
            )));
        }
    }
    let mut sum = CompensatedSum::new();
    let mut binom = 1.0;
    for j in 0..=k {
        if j > 0 {
            binom = binom * (k - j + 1) as f64 / j as f64;
        }
        let sign = if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        sum.add(Complex64::new(sign * binom * pow(c + j as f64, alpha), 0.0));
    }
    let kf = factorial(k);
    let raw = sum.value().re;
    let abs = sum.abs_sum();
    let lost = if raw == 0.0 {
        f64::INFINITY
    } else {
        (abs / raw.abs()).log10()
    };
    if lost <= MAX_LOST_DIGITS {
        return Ok(StirlingValue {
            value: raw / kf,
            digits_lost: lost.max(0.0),
            extended: false,
        });
    }
    let (v, lost_dd) = stirling_dd(c, alpha, k);
    if lost_dd > 28.0 && v != 0.0 {
        return Err(Error::NonConvergent(format!(
            "Stirling function S_{c}({alpha}, {k}) cancels beyond double-double precision"
        )));
    }
    Ok(StirlingValue {
        value: v,
        digits_lost: lost_dd,
        extended: true,
    })
}

fn pow(base: f64, alpha: f64) -> f64 {
    if is_integer(alpha) && alpha.abs() < 1e9 {
        base.powi(alpha as i32)
    } else {
        base.powf(alpha)
    }
}

fn pow_dd(base: DD, alpha: f64) -> DD {
    if is_integer(alpha) && alpha.abs() < 1e6 {
        let n = alpha.abs() as u64;
        let mut acc = DD::ONE;
        let mut b = base;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b;
            }
            b = b * b;
            e >>= 1;
        }
        if alpha < 0.0 {
            DD::ONE / acc
        } else {
            acc
        }
    } else {
        base.powf(alpha)
    }
}

fn stirling_dd(c: f64, alpha: f64, k: usize) -> (f64, f64) {
    let mut sum = DD::ZERO;
    let mut abs = DD::ZERO;
    let mut binom = DD::ONE;
    let cdd = DD::new(c);
    for j in 0..=k {
        if j > 0 {
            binom = binom.mul_f64((k - j + 1) as f64) / DD::new(j as f64);
        }
        let base = cdd + DD::new(j as f64);
        let term = if base.hi == 0.0 {
            if alpha == 0.0 {
                DD::ONE
            } else {
                DD::ZERO
            }
        } else {
            binom * pow_dd(base, alpha)
        };
        abs = abs + term.abs();
        if (k - j).is_multiple_of(2) {
            sum = sum + term;
        } else {
            sum = sum - term;
        }
    }
    let mut kf = DD::ONE;
    for i in 2..=k {
        kf = kf.mul_f64(i as f64);
    }
    let v = (sum / kf).to_f64();
    let lost = if sum.hi == 0.0 {
        0.0
    } else {
        (abs.to_f64() / sum.to_f64().abs()).log10()
    };
    (v, lost)
}

/// B_alpha(k, j) = Gamma(alpha + k - j) / Gamma(alpha) as the finite product
/// prod_{nu=1}^{k-j} (alpha + k - j - nu).
pub fn b_alpha(alpha: f64, k: usize, j: usize) -> Result<f64> {
    if j > k {
        return Err(Error::domain(format!(
            "B_alpha(k, j) needs j <= k, got k = {k}, j = {j}"
        )));
    }
    let n = k - j;
    Ok((1..=n).fold(1.0, |acc, nu| acc * (alpha + n as f64 - nu as f64)))
}

/// Binomial coefficient for integers.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_cases() {
        assert_eq!(frac_binomial(0.5, 2), -0.125);
        assert_eq!(frac_binomial(1.0, 2), 0.0);
        assert_eq!(frac_binomial(3.0, 2), 3.0);
        let series: Vec<f64> = BinomialSeries::new(0.5).take(3).collect();
        assert_eq!(series, vec![1.0, 0.5, -0.125]);
    }

    #[test]
    fn classical_stirling_values() {
        let t = stirling_numbers(0.0, 4);
        assert_eq!(t.get(3, 2), 3.0);
        assert_eq!(t.get(3, 1), 1.0);
        assert_eq!(t.get(4, 2), 7.0);
    }

    #[test]
    fn generalized_second_row() {
        for &c in &[0.0, 0.5, 2.0, -1.3] {
            let t = stirling_numbers(c, 2);
            assert_eq!(t.get(1, 0), c);
            assert!((t.get(2, 1) - (2.0 * c + 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn first_kind_inverts_second_kind() {
        let s2 = stirling_numbers(0.0, 6);
        let s1 = stirling_first_kind(6);
        for n in 0..=6 {
            for k in 0..=n {
                let v: f64 = (k..=n).map(|j| s1[n][j] * s2.get(j, k)).sum();
                assert_eq!(v, if n == k { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn stirling_function_small_cases() {
        assert!((stirling_function(2.0, 0.5, 0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(stirling_function(0.0, 3.0, 2).unwrap(), 3.0);
        let v = stirling_function(1.0, -0.5, 1).unwrap();
        assert!((v - (0.5f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn stirling_function_rejects_negative_bases() {
        assert!(stirling_function(-0.5, 0.5, 2).is_err());
        assert!(stirling_function(-0.5, 2.0, 2).is_ok());
    }

    #[test]
    fn b_alpha_cases() {
        assert_eq!(b_alpha(0.7, 3, 3).unwrap(), 1.0);
        assert_eq!(b_alpha(0.5, 1, 0).unwrap(), 0.5);
        assert_eq!(b_alpha(2.0, 3, 1).unwrap(), 6.0);
        assert!(b_alpha(1.0, 1, 2).is_err());
    }
}
