//! Fixed-inventory variant: the seller reallocates an exogenous quality
//! stock instead of producing at convex cost. The reduced objective is
//! linear in the virtual-value profile, so the optimal market composition
//! is a threshold profile and the whole analysis collapses to one cutoff.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{bisect, golden_max};
use crate::piecewise::{PiecewiseFn, Segment, SegmentKind};
use crate::types::{PayoffPoint, WelfareWeight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InventoryKind {
    Uniform,
    TwoPoint,
    Custom,
}

/// An inventory of qualities, represented by its nondecreasing lower
/// quantile on `[0,1]`. Values are arbitrary nonnegative qualities.
#[derive(Debug, Clone)]
pub struct InventoryModel {
    kind: InventoryKind,
    qbar: PiecewiseFn,
}

impl InventoryModel {
    /// Uniform stock on `[0,1]`: quantile u -> u.
    pub fn uniform() -> InventoryModel {
        InventoryModel {
            kind: InventoryKind::Uniform,
            qbar: PiecewiseFn::new(vec![Segment::linear(0.0, 1.0, 0.0, 1.0)]).unwrap(),
        }
    }

    /// Half the stock at quality 1/2, half at quality 1.
    pub fn two_point() -> InventoryModel {
        InventoryModel {
            kind: InventoryKind::TwoPoint,
            qbar: PiecewiseFn::new(vec![
                Segment::constant(0.0, 0.5, 0.5),
                Segment::constant(0.5, 1.0, 1.0),
            ])
            .unwrap(),
        }
    }

    pub fn custom(qbar: PiecewiseFn) -> Result<InventoryModel> {
        let (lo, hi) = qbar.domain();
        if lo.abs() > 1e-12 || (hi - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(
                "inventory quantile must cover [0,1]".into(),
            ));
        }
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=1000 {
            let v = qbar.eval(i as f64 / 1000.0);
            if v < 0.0 {
                return Err(Error::InvalidInput(
                    "inventory qualities must be nonnegative".into(),
                ));
            }
            if v < prev - 1e-9 {
                return Err(Error::InvalidInput(
                    "inventory quantile must be nondecreasing".into(),
                ));
            }
            prev = v;
        }
        Ok(InventoryModel {
            kind: InventoryKind::Custom,
            qbar,
        })
    }

    pub fn kind(&self) -> InventoryKind {
        self.kind
    }

    pub fn qbar(&self) -> &PiecewiseFn {
        &self.qbar
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.qbar.eval(u)
    }

    /// Exact `∫_lo^hi qbar(u)/(1-u) du` (the rent-weighted stock).
    pub fn weighted_integral(&self, lo: f64, hi: f64) -> f64 {
        let mut acc = 0.0;
        for seg in self.qbar.segments() {
            let a = seg.u0.max(lo);
            let b = seg.u1.min(hi);
            if b <= a {
                continue;
            }
            acc += match seg.kind {
                SegmentKind::Constant(v) => -v * ((1.0 - b).ln() - (1.0 - a).ln()),
                SegmentKind::Linear { v0, v1 } => {
                    let s = (v1 - v0) / (seg.u1 - seg.u0);
                    let alpha = v0 - s * seg.u0;
                    // ∫ (alpha + s u)/(1-u) du = -(alpha+s) ln(1-u) - s u
                    -(alpha + s) * ((1.0 - b).ln() - (1.0 - a).ln()) - s * (b - a)
                }
                SegmentKind::Analytic(_) => {
                    crate::num::integrate(|u| seg.eval(u) / (1.0 - u), a, b, 1e-12)
                }
            };
        }
        acc
    }

    /// Whether qbar is continuous, strictly positive on (0,1], with Psi
    /// strictly increasing: the single-crossing condition that makes the
    /// first-order condition sufficient.
    pub fn is_single_crossing(&self) -> bool {
        // continuity across segment junctions
        for w in self.qbar.segments().windows(2) {
            if (w[0].value_end() - w[1].value_start()).abs() > 1e-12 {
                return false;
            }
        }
        if self.eval(1.0) <= 0.0 {
            return false;
        }
        let mut prev = 0.0;
        for i in 1..=1000 {
            let b = i as f64 / 1001.0;
            if self.eval(b) <= 0.0 {
                return false;
            }
            let psi = self.psi(b);
            if psi <= prev {
                return false;
            }
            prev = psi;
        }
        true
    }

    /// `Psi(b) = (1/qbar(b)) ∫_0^b qbar(u)/(1-u) du`, defined where
    /// qbar(b) > 0.
    pub fn psi(&self, b: f64) -> f64 {
        self.weighted_integral(0.0, b) / self.eval(b)
    }
}

/// Payoffs of the threshold profile with cutoff b: profit is the stock
/// above the cutoff, consumer surplus the rent-weighted stock below.
pub fn inventory_threshold_payoffs(b: f64, inv: &InventoryModel) -> Result<PayoffPoint> {
    if !(0.0..=1.0).contains(&b) {
        return Err(Error::Domain(format!("cutoff must lie in [0,1], got {b}")));
    }
    let pi = inv.qbar.integral(b, 1.0)?;
    let cs = if b >= 1.0 {
        0.0
    } else {
        (1.0 - b) * inv.weighted_integral(0.0, b)
    };
    Ok(PayoffPoint::new(cs, pi))
}

/// Optimal cutoff for welfare weight k: b = 0 for k <= 1/2; for higher k a
/// root of `Psi(b) = (2k-1)/k` under single crossing, otherwise a global
/// grid maximization refined inside the winning smooth bracket.
pub fn inventory_optimal(k: WelfareWeight, inv: &InventoryModel) -> Result<(f64, PayoffPoint)> {
    if k.is_degenerate() {
        let payoff = inventory_threshold_payoffs(0.0, inv)?;
        return Ok((0.0, payoff));
    }
    let lambda = k.lambda();
    let kv = k.k();
    let objective = |b: f64| {
        let p = inventory_threshold_payoffs(b, inv).expect("cutoff in range");
        kv * p.cs + (1.0 - kv) * p.pi
    };
    // J'(b) = qbar(b) [(2k-1) - k Psi(b)]: the cutoff solves Psi = lambda.
    let foc = |b: f64| lambda - inv.psi(b);

    let b_star = if inv.is_single_crossing() {
        bisect(foc, 1e-9, 1.0 - 1e-9, 1e-14, 200)?
    } else {
        let n = 10_000;
        let mut best = (0.0, objective(0.0));
        for i in 1..=n {
            let b = i as f64 / n as f64;
            let j = objective(b);
            if j > best.1 {
                best = (b, j);
            }
        }
        let lo = (best.0 - 1.0 / n as f64).max(0.0);
        let hi = (best.0 + 1.0 / n as f64).min(1.0);
        // refine by the first-order condition when the bracket avoids
        // inventory jump points (atoms leave kinks the FOC cannot see)
        let has_jump = inv.qbar.segments().windows(2).any(|w| {
            w[1].u0 > lo && w[1].u0 < hi && (w[0].value_end() - w[1].value_start()).abs() > 1e-12
        });
        if !has_jump && inv.eval(lo) > 0.0 && foc(lo) > 0.0 && foc(hi) < 0.0 {
            bisect(foc, lo, hi, 1e-14, 200)?
        } else {
            golden_max(objective, lo, hi, 1e-12).0
        }
    };
    let payoff = inventory_threshold_payoffs(b_star, inv)?;
    Ok((b_star, payoff))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RegionPoint {
    pub b: f64,
    pub cs: f64,
    pub pi: f64,
}

/// The implementable (CS, Pi) region of the fixed-inventory problem:
/// threshold curve plus its concave upper boundary in profit.
#[derive(Debug, Clone)]
pub struct InventoryRegion {
    pub curve: Vec<RegionPoint>,
    /// Upper concave boundary vertices (pi, cs), ascending in pi.
    hull: Vec<(f64, f64)>,
}

/// Samples the threshold curve on a b-grid and builds the concave
/// majorant of consumer surplus over profit (the region's upper boundary).
pub fn inventory_region(inv: &InventoryModel, grid_size: usize) -> Result<InventoryRegion> {
    let n = grid_size.max(16);
    let mut curve = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let b = i as f64 / n as f64;
        let p = inventory_threshold_payoffs(b, inv)?;
        curve.push(RegionPoint {
            b,
            cs: p.cs,
            pi: p.pi,
        });
    }
    // upper hull over (pi, cs); the segment {(0, pi)} is covered by the
    // curve's own endpoints (b = 0 gives (0, Pi(0)), b = 1 gives (0, 0))
    let mut pts: Vec<(f64, f64)> = curve.iter().map(|p| (p.pi, p.cs)).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-15 && (a.1 - b.1).abs() <= 1e-15);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // pop b if it lies below the chord a-p (non-concave turn)
            let cross = (b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1);
            if cross >= -1e-18 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    Ok(InventoryRegion { curve, hull })
}

impl InventoryRegion {
    /// Evaluates the concave upper boundary at a profit level.
    pub fn upper_boundary(&self, pi: f64) -> f64 {
        let h = &self.hull;
        if h.is_empty() {
            return 0.0;
        }
        if pi <= h[0].0 {
            return h[0].1;
        }
        if pi >= h[h.len() - 1].0 {
            return h[h.len() - 1].1;
        }
        for w in h.windows(2) {
            if pi <= w[1].0 {
                let t = (pi - w[0].0) / (w[1].0 - w[0].0);
                return w[0].1 + t * (w[1].1 - w[0].1);
            }
        }
        h[h.len() - 1].1
    }

    pub fn hull_vertices(&self) -> &[(f64, f64)] {
        &self.hull
    }

    /// The Pareto frontier: the boundary from the CS peak to the
    /// profit-maximal endpoint (decreasing branch in CS over pi).
    pub fn pareto_frontier(&self) -> Vec<(f64, f64)> {
        let peak = self
            .hull
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.hull[peak..].to_vec()
    }
}
