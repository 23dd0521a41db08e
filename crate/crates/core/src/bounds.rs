//! Uniform deviation sequences `e_z(N)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundSchedule {
    /// `c0 / sqrt(N)`.
    HeuristicInverseSqrt { c0: f64 },
    /// VC envelope `sqrt((d (ln(2N/d) + 1) + ln(8/δ)) / N)`.
    ///
    /// The raw envelope is increasing for `N` below
    /// `N* = (d/2) (δ/8)^(1/d)`; there it is held at its value at `N*`,
    /// which is `sqrt(d / N*)`. The result is positive and non-increasing for
    /// all `N >= 1`.
    Vc { d_vc: f64, delta: f64 },
}

impl Default for BoundSchedule {
    fn default() -> Self {
        BoundSchedule::HeuristicInverseSqrt { c0: 0.1 }
    }
}

impl BoundSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BoundSchedule::HeuristicInverseSqrt { c0 } => {
                if !(c0 > 0.0 && c0.is_finite()) {
                    return Err(Error::config("bound.c0", "must be positive"));
                }
            }
            BoundSchedule::Vc { d_vc, delta } => {
                if !(d_vc > 0.0 && d_vc.is_finite()) {
                    return Err(Error::config("bound.d_vc", "must be positive"));
                }
                if !(delta > 0.0 && delta <= 1.0) {
                    return Err(Error::config("bound.delta", "must lie in (0, 1]"));
                }
            }
        }
        Ok(())
    }

    /// `e(N)` for `N >= 1` samples.
    pub fn deviation(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::invalid("deviation bound needs N >= 1"));
        }
        let n = n as f64;
        Ok(match *self {
            BoundSchedule::HeuristicInverseSqrt { c0 } => c0 / n.sqrt(),
            BoundSchedule::Vc { d_vc, delta } => {
                let log_conf = (8.0 / delta).ln();
                let turning = 0.5 * d_vc * (-log_conf / d_vc).exp();
                let n = n.max(turning);
                ((d_vc * ((2.0 * n / d_vc).ln() + 1.0) + log_conf) / n).sqrt()
            }
        })
    }
}
