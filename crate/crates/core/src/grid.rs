use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Log-uniform sampling of [x_min, x_max].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl LogGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min > 0.0 && x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::domain(format!(
                "grid bounds must be positive and finite, got [{x_min}, {x_max}]"
            )));
        }
        if x_min >= x_max {
            return Err(Error::domain(format!(
                "grid needs x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n < 2 {
            return Err(Error::domain("grid needs at least two points"));
        }
        Ok(Self { x_min, x_max, n })
    }

    /// Grid with the given log-space bounds.
    pub fn from_log(u_min: f64, u_max: f64, n: usize) -> Result<Self> {
        Self::new(u_min.exp(), u_max.exp(), n)
    }

    pub fn u_min(&self) -> f64 {
        self.x_min.ln()
    }

    pub fn u_max(&self) -> f64 {
        self.x_max.ln()
    }

    /// Spacing in log x.
    pub fn h_log(&self) -> f64 {
        (self.u_max() - self.u_min()) / (self.n - 1) as f64
    }

    pub fn log_point(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.u_max()
        } else {
            self.u_min() + i as f64 * self.h_log()
        }
    }

    pub fn point(&self, i: usize) -> f64 {
        if i == 0 {
            self.x_min
        } else if i + 1 == self.n {
            self.x_max
        } else {
            self.log_point(i).exp()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    pub fn log_points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.log_point(i)).collect()
    }

    pub fn contains_log(&self, u: f64) -> bool {
        let slack = 1e-12 * self.h_log();
        u >= self.u_min() - slack && u <= self.u_max() + slack
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_bounds() {
        assert!(LogGrid::new(0.0, 1.0, 10).is_err());
        assert!(LogGrid::new(2.0, 1.0, 10).is_err());
        assert!(LogGrid::new(1.0, 2.0, 1).is_err());
    }

    #[test]
    fn endpoints_exact() {
        let g = LogGrid::new(0.01, 100.0, 41).unwrap();
        let p = g.points();
        assert_eq!(p[0], 0.01);
        assert_eq!(p[40], 100.0);
        assert!((p[20] - 1.0).abs() < 1e-14);
    }
}
