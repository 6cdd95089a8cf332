//! Truncated Taylor arithmetic. A `Jet` stores f(x0), f'(x0), f''(x0)/2!, ...
//! and propagates them exactly through the elementary functions used by the
//! builtin test functions, giving derivatives of any order without
//! finite differences.

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub c: Vec<f64>,
}

impl Jet {
    pub fn constant(v: f64, n: usize) -> Self {
        let mut c = vec![0.0; n];
        c[0] = v;
        Jet { c }
    }

    /// The identity function expanded at x0, carrying `n` coefficients.
    pub fn variable(x0: f64, n: usize) -> Self {
        let mut c = vec![0.0; n];
        c[0] = x0;
        if n > 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// k-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let mut f = 1.0;
        for i in 2..=k {
            f *= i as f64;
        }
        self.c[k] * f
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            c: self.c.iter().map(|a| a * s).collect(),
        }
    }

    pub fn add_const(&self, s: f64) -> Jet {
        let mut j = self.clone();
        j.c[0] += s;
        j
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.len();
        let mut c = vec![0.0; n];
        for (k, ck) in c.iter_mut().enumerate() {
            *ck = (0..=k).map(|j| self.c[j] * o.c[k - j]).sum();
        }
        Jet { c }
    }

    pub fn div(&self, o: &Jet) -> Jet {
        let n = self.len();
        let mut q = vec![0.0; n];
        for k in 0..n {
            let s: f64 = (1..=k).map(|j| o.c[j] * q[k - j]).sum();
            q[k] = (self.c[k] - s) / o.c[0];
        }
        Jet { c: q }
    }

    pub fn exp(&self) -> Jet {
        let n = self.len();
        let mut b = vec![0.0; n];
        b[0] = self.c[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| j as f64 * self.c[j] * b[k - j]).sum();
            b[k] = s / k as f64;
        }
        Jet { c: b }
    }

    pub fn ln(&self) -> Jet {
        let n = self.len();
        let a0 = self.c[0];
        let mut b = vec![0.0; n];
        b[0] = a0.ln();
        for k in 1..n {
            let s: f64 = (1..k).map(|j| j as f64 * b[j] * self.c[k - j]).sum();
            b[k] = (self.c[k] - s / k as f64) / a0;
        }
        Jet { c: b }
    }

    /// self^p with a non-zero expansion value.
    pub fn powf(&self, p: f64) -> Jet {
        let n = self.len();
        let a0 = self.c[0];
        let mut b = vec![0.0; n];
        b[0] = if p == p.trunc() && p.abs() < 1e9 {
            a0.powi(p as i32)
        } else {
            a0.powf(p)
        };
        for k in 1..n {
            let s: f64 = (1..=k)
                .map(|j| ((p + 1.0) * j as f64 - k as f64) * self.c[j] * b[k - j])
                .sum();
            b[k] = s / (k as f64 * a0);
        }
        Jet { c: b }
    }

    pub fn sin_cos(&self) -> (Jet, Jet) {
        let n = self.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        s[0] = self.c[0].sin();
        c[0] = self.c[0].cos();
        for k in 1..n {
            let mut ss = 0.0;
            let mut cc = 0.0;
            for j in 1..=k {
                let w = j as f64 * self.c[j];
                ss += w * c[k - j];
                cc += w * s[k - j];
            }
            s[k] = ss / k as f64;
            c[k] = -cc / k as f64;
        }
        (Jet { c: s }, Jet { c })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_linear() {
        let x = Jet::variable(0.3, 6).scale(2.0);
        let e = x.exp();
        for k in 0..6 {
            let want = 2f64.powi(k as i32) * 0.6f64.exp();
            assert!((e.derivative(k) - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn quotient_rule() {
        // d/dx (sin x / x) at x = 1
        let x = Jet::variable(1.0, 3);
        let (s, _) = x.sin_cos();
        let q = s.div(&x);
        let want = 1f64.cos() - 1f64.sin();
        assert!((q.derivative(1) - want).abs() < 1e-14);
    }

    #[test]
    fn log_and_power() {
        let x = Jet::variable(2.0, 5);
        let l = x.ln();
        // d^3/dx^3 log x = 2/x^3
        assert!((l.derivative(3) - 0.25).abs() < 1e-14);
        let p = x.powf(0.5);
        // d^2/dx^2 sqrt(x) = -1/4 x^{-3/2}
        assert!((p.derivative(2) + 0.25 * 2f64.powf(-1.5)).abs() < 1e-14);
    }
}
