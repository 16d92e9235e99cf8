//! Quality-cost technologies.
//!
//! A convex cost `c` has `c(0) = 0`, `c'(0) = 0`, strictly increasing
//! marginal cost, `c'' > 0` on the relevant range, and a top quality
//! `qbar = (c')^{-1}(1)`. Curvature may not flatten too fast:
//! `-q c'''(q)/c''(q) < 2` on (0, qbar]. The linear kind trades a constant
//! marginal cost for a capacity and routes through posted pricing instead
//! of nonlinear screening.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::bisect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostKind {
    Generic,
    Quadratic,
    Elasticity,
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CostModel {
    /// c(q) = q^2 / 2, qbar = 1.
    Quadratic,
    /// c(q) = q^eta / eta with eta > 1, qbar = 1.
    Elasticity { eta: f64 },
    /// Polynomial `c(q) = sum coeffs[i] q^i`, validated on a grid.
    GenericPoly { coeffs: Vec<f64>, qbar: f64 },
    /// Constant marginal cost with a quality capacity.
    Linear { marginal: f64, capacity: f64 },
}

/// Constructs and validates a cost model.
///
/// * `quadratic` takes no params.
/// * `elasticity` takes `[eta]` with eta > 1.
/// * `linear` takes `[M, Qbar]` with M in [0,1) and Qbar > 0.
/// * `generic` takes polynomial coefficients `[a0, a1, a2, ...]`.
pub fn make_cost(kind: CostKind, params: &[f64]) -> Result<CostModel> {
    match kind {
        CostKind::Quadratic => {
            if !params.is_empty() {
                return Err(Error::InvalidCost(
                    "quadratic cost takes no parameters".into(),
                ));
            }
            Ok(CostModel::Quadratic)
        }
        CostKind::Elasticity => {
            let eta = *params
                .first()
                .ok_or_else(|| Error::InvalidCost("elasticity cost needs eta".into()))?;
            if !eta.is_finite() || eta <= 1.0 {
                return Err(Error::InvalidCost(format!(
                    "elasticity requires eta > 1, got {eta}"
                )));
            }
            Ok(CostModel::Elasticity { eta })
        }
        CostKind::Linear => {
            if params.len() != 2 {
                return Err(Error::InvalidCost("linear cost needs [M, Qbar]".into()));
            }
            let (m, cap) = (params[0], params[1]);
            if !(0.0..1.0).contains(&m) {
                return Err(Error::InvalidCost(format!(
                    "marginal cost must lie in [0,1), got {m}"
                )));
            }
            if !cap.is_finite() || cap <= 0.0 {
                return Err(Error::InvalidCost(format!(
                    "capacity must be positive, got {cap}"
                )));
            }
            Ok(CostModel::Linear {
                marginal: m,
                capacity: cap,
            })
        }
        CostKind::Generic => {
            let model = CostModel::build_generic(params.to_vec())?;
            model.validate_convex()?;
            Ok(model)
        }
    }
}

impl CostModel {
    fn build_generic(coeffs: Vec<f64>) -> Result<CostModel> {
        if coeffs.len() < 3 {
            return Err(Error::InvalidCost(
                "generic cost needs a polynomial of degree >= 2".into(),
            ));
        }
        if coeffs[0].abs() > 1e-12 {
            return Err(Error::InvalidCost("generic cost must have c(0) = 0".into()));
        }
        if coeffs[1].abs() > 1e-12 {
            return Err(Error::InvalidCost(
                "generic cost must have c'(0) = 0".into(),
            ));
        }
        // qbar = (c')^{-1}(1): bracket by scanning outward.
        let cp = |q: f64| poly_deriv(&coeffs, q, 1);
        let mut hi = 1.0;
        let mut tries = 0;
        while cp(hi) < 1.0 {
            hi *= 2.0;
            tries += 1;
            if tries > 60 {
                return Err(Error::InvalidCost("marginal cost never reaches 1".into()));
            }
        }
        let qbar = bisect(|q| cp(q) - 1.0, 0.0, hi, 1e-14, 200)
            .map_err(|e| Error::InvalidCost(format!("cannot invert marginal cost: {e}")))?;
        if !qbar.is_finite() || qbar <= 0.0 {
            return Err(Error::InvalidCost("top quality must be positive".into()));
        }
        Ok(CostModel::GenericPoly { coeffs, qbar })
    }

    /// Grid validation of Assumptions 1-2 style invariants: c'' > 0 and the
    /// curvature bound -q c'''/c'' < 2 on a log-spaced grid in
    /// (1e-6 qbar, qbar], plus c'(qbar) = 1.
    pub fn validate_convex(&self) -> Result<()> {
        if let CostModel::Linear { .. } = self {
            return Err(Error::InvalidCost(
                "linear kind is not a convex screening cost".into(),
            ));
        }
        let qbar = self.qbar();
        if (self.cp(qbar) - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidCost(format!(
                "c'(qbar) = {} differs from 1 beyond tolerance",
                self.cp(qbar)
            )));
        }
        let n = 1000;
        let lo = (1e-6 * qbar).ln();
        let hi = qbar.ln();
        let mut prev_cp = 0.0;
        for i in 0..=n {
            let q = (lo + (hi - lo) * i as f64 / n as f64).exp();
            let cpp = self.cpp(q);
            if cpp <= 0.0 {
                return Err(Error::InvalidCost(format!(
                    "c''({q}) = {cpp} is not positive"
                )));
            }
            let curv = -q * self.cppp(q) / cpp;
            if curv >= 2.0 {
                return Err(Error::InvalidCost(format!(
                    "curvature bound violated at q = {q}: -q c'''/c'' = {curv} >= 2"
                )));
            }
            let cp = self.cp(q);
            if cp <= prev_cp {
                return Err(Error::InvalidCost(format!(
                    "marginal cost is not strictly increasing near q = {q}"
                )));
            }
            prev_cp = cp;
        }
        Ok(())
    }

    pub fn kind(&self) -> CostKind {
        match self {
            CostModel::Quadratic => CostKind::Quadratic,
            CostModel::Elasticity { .. } => CostKind::Elasticity,
            CostModel::GenericPoly { .. } => CostKind::Generic,
            CostModel::Linear { .. } => CostKind::Linear,
        }
    }

    pub fn is_convex_kind(&self) -> bool {
        !matches!(self, CostModel::Linear { .. })
    }

    /// Top quality (c')^{-1}(1) for convex kinds; capacity for the linear
    /// kind.
    pub fn qbar(&self) -> f64 {
        match self {
            CostModel::Quadratic => 1.0,
            CostModel::Elasticity { .. } => 1.0,
            CostModel::GenericPoly { qbar, .. } => *qbar,
            CostModel::Linear { capacity, .. } => *capacity,
        }
    }

    pub fn c(&self, q: f64) -> f64 {
        match self {
            CostModel::Quadratic => 0.5 * q * q,
            CostModel::Elasticity { eta } => q.powf(*eta) / eta,
            CostModel::GenericPoly { coeffs, .. } => poly_deriv(coeffs, q, 0),
            CostModel::Linear { marginal, .. } => marginal * q,
        }
    }

    pub fn cp(&self, q: f64) -> f64 {
        match self {
            CostModel::Quadratic => q,
            CostModel::Elasticity { eta } => q.powf(eta - 1.0),
            CostModel::GenericPoly { coeffs, .. } => poly_deriv(coeffs, q, 1),
            CostModel::Linear { marginal, .. } => *marginal,
        }
    }

    pub fn cpp(&self, q: f64) -> f64 {
        match self {
            CostModel::Quadratic => 1.0,
            CostModel::Elasticity { eta } => (eta - 1.0) * q.powf(eta - 2.0),
            CostModel::GenericPoly { coeffs, .. } => poly_deriv(coeffs, q, 2),
            CostModel::Linear { .. } => 0.0,
        }
    }

    pub fn cppp(&self, q: f64) -> f64 {
        match self {
            CostModel::Quadratic => 0.0,
            CostModel::Elasticity { eta } => (eta - 1.0) * (eta - 2.0) * q.powf(eta - 3.0),
            CostModel::GenericPoly { coeffs, .. } => poly_deriv(coeffs, q, 3),
            CostModel::Linear { .. } => 0.0,
        }
    }

    /// Monotone inverse of the marginal cost on [0, qbar]; z must lie in
    /// [0, 1]. Closed form for the named kinds, bracketed bisection with a
    /// 200-iteration cap otherwise.
    pub fn inverse_marginal(&self, z: f64) -> f64 {
        match self {
            CostModel::Quadratic => z,
            CostModel::Elasticity { eta } => z.powf(1.0 / (eta - 1.0)),
            CostModel::GenericPoly { coeffs, qbar } => {
                if z <= 0.0 {
                    return 0.0;
                }
                if z >= 1.0 {
                    return *qbar;
                }
                bisect(|q| poly_deriv(coeffs, q, 1) - z, 0.0, *qbar, 1e-12, 200)
                    .unwrap_or(0.5 * qbar)
            }
            CostModel::Linear { .. } => 0.0,
        }
    }
}

fn poly_deriv(coeffs: &[f64], q: f64, order: u32) -> f64 {
    // Horner evaluation of the order-th derivative.
    let mut acc = 0.0;
    for i in (order as usize..coeffs.len()).rev() {
        let mut factor = 1.0;
        for k in 0..order as usize {
            factor *= (i - k) as f64;
        }
        acc = acc * q + coeffs[i] * factor;
    }
    acc
}
