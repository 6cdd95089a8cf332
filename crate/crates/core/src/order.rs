use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Distance to the nearest integer below which an order counts as integral.
pub const INTEGER_TOL: f64 = 1e-12;

/// Fractional order alpha > 0 with m = floor(alpha) + 1 (so alpha = 1 gives m = 2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracOrder {
    pub alpha: f64,
    pub m: usize,
    pub is_integer: bool,
}

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::domain(format!(
                "order must be a positive finite real, got {alpha}"
            )));
        }
        let nearest = alpha.round();
        let is_integer = (alpha - nearest).abs() <= INTEGER_TOL;
        let m = if is_integer {
            nearest as usize + 1
        } else {
            alpha.floor() as usize + 1
        };
        Ok(Self {
            alpha,
            m,
            is_integer,
        })
    }

    /// m - alpha, the order of the inner integral in D^alpha = J^{m-alpha} Theta^m.
    pub fn complement(&self) -> f64 {
        self.m as f64 - self.alpha
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_orders_take_next_m() {
        let o = FracOrder::new(1.0).unwrap();
        assert_eq!(o.m, 2);
        assert!(o.is_integer);
        let o = FracOrder::new(2.5).unwrap();
        assert_eq!(o.m, 3);
        assert!(!o.is_integer);
        let o = FracOrder::new(3.0 - 1e-14).unwrap();
        assert_eq!(o.m, 4);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(FracOrder::new(0.0).is_err());
        assert!(FracOrder::new(-1.0).is_err());
        assert!(FracOrder::new(f64::NAN).is_err());
    }
}
