//! Shared domain scalars.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Consumer surplus / profit / total surplus triple with `ts = cs + pi` by
/// construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffPoint {
    pub cs: f64,
    pub pi: f64,
    pub ts: f64,
}

impl PayoffPoint {
    pub fn new(cs: f64, pi: f64) -> PayoffPoint {
        PayoffPoint {
            cs,
            pi,
            ts: cs + pi,
        }
    }

    pub fn scale(&self, theta: f64) -> PayoffPoint {
        PayoffPoint::new(theta * self.cs, theta * self.pi)
    }

    /// Weighted objective k CS + (1-k) Pi.
    pub fn weighted(&self, k: f64) -> f64 {
        k * self.cs + (1.0 - k) * self.pi
    }
}

/// Welfare weight on consumer surplus, with the derived tail parameter
/// `lambda = (2k-1)/k` used above the one-half threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelfareWeight {
    k: f64,
}

impl WelfareWeight {
    pub fn new(k: f64) -> Result<WelfareWeight> {
        if !(0.0..=1.0).contains(&k) {
            return Err(Error::InvalidInput(format!(
                "welfare weight must lie in [0,1], got {k}"
            )));
        }
        Ok(WelfareWeight { k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// True when the degenerate top-type market is optimal (k <= 1/2).
    pub fn is_degenerate(&self) -> bool {
        self.k <= 0.5
    }

    /// lambda = (2k-1)/k, defined for k > 1/2 and lying in (0, 1].
    pub fn lambda(&self) -> f64 {
        debug_assert!(self.k > 0.5);
        (2.0 * self.k - 1.0) / self.k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payoff_keeps_ts_consistent() {
        let p = PayoffPoint::new(0.1, 0.2);
        assert!((p.ts - (p.cs + p.pi)).abs() < 1e-10);
        let s = p.scale(0.5);
        assert!((s.ts - 0.15).abs() < 1e-15);
    }

    #[test]
    fn lambda_range() {
        assert!(WelfareWeight::new(1.2).is_err());
        let w = WelfareWeight::new(1.0).unwrap();
        assert_eq!(w.lambda(), 1.0);
        let w = WelfareWeight::new(0.75).unwrap();
        assert!((w.lambda() - 2.0 / 3.0).abs() < 1e-15);
        assert!(WelfareWeight::new(0.5).unwrap().is_degenerate());
        assert!(!WelfareWeight::new(0.51).unwrap().is_degenerate());
    }
}
