//! Seller-side evaluation: pointwise optimal quality and profit, market
//! payoffs through the ironing pipeline, value-space menus, and the
//! posted-price optimum for constant marginal cost.

use serde::{Deserialize, Serialize};

use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::ironing::concavified_revenue;
use crate::num::{gauss16, golden_max, integrate};
use crate::piecewise::{QuantileFn, SegmentKind, VirtualValueProfile};
use crate::types::PayoffPoint;

/// Pointwise seller problem: quality `q(z) = argmax { z x - c(x) }` and the
/// indirect profit `pi(z)`. Quality is 0 below z = 0 and capped at qbar
/// above z = 1.
pub fn pointwise_quality_profit(z: f64, cost: &CostModel) -> (f64, f64) {
    debug_assert!(cost.is_convex_kind());
    let q = if z <= 0.0 {
        0.0
    } else if z >= 1.0 {
        cost.qbar()
    } else {
        cost.inverse_marginal(z)
    };
    (q, z * q - cost.c(q))
}

/// Merged, sorted, deduplicated partition of [0,1] from quantile and
/// profile breakpoints plus the kinks of q(phi) at phi = 0 and phi = 1.
fn integration_grid(q: &QuantileFn, phi: &VirtualValueProfile) -> Vec<f64> {
    let mut pts = q.breakpoints();
    pts.extend(phi.breakpoints());
    pts.extend(phi.level_crossings(0.0));
    pts.extend(phi.level_crossings(1.0));
    pts.retain(|u| u.is_finite());
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
    pts
}

/// Seller-optimal payoffs for a market composition under a convex cost:
/// profit from the ironed virtual values, consumer surplus from the wedge
/// against the original quantile.
pub fn evaluate_market(q: &QuantileFn, cost: &CostModel) -> Result<PayoffPoint> {
    if !cost.is_convex_kind() {
        return Err(Error::InvalidCost(
            "evaluate_market needs a convex cost kind; use posted_price_optimum for linear costs"
                .into(),
        ));
    }
    let (_, phi) = concavified_revenue(q)?;
    let grid = integration_grid(q, &phi);
    let mut pi_total = 0.0;
    let mut cs_total = 0.0;
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 1e-15 {
            continue;
        }
        let mid_phi = phi.eval(0.5 * (a + b));
        if mid_phi <= 0.0 {
            continue; // excluded ranks: zero quality, zero profit
        }
        pi_total += integrate(
            |u| {
                let (_, p) = pointwise_quality_profit(phi.eval(u), cost);
                p
            },
            a,
            b,
            1e-13,
        );
        cs_total += integrate(
            |u| {
                let z = phi.eval(u);
                let (qty, _) = pointwise_quality_profit(z, cost);
                (q.eval(u) - z) * qty
            },
            a,
            b,
            1e-13,
        );
    }
    Ok(PayoffPoint::new(cs_total, pi_total))
}

/// One value-space contract: buyers of valuation `v` choose quality `q` at
/// transfer `t`; `[u0, u1]` is the rank band the row represents.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MenuRow {
    pub v: f64,
    pub q: f64,
    pub t: f64,
    pub u0: f64,
    pub u1: f64,
}

impl MenuRow {
    pub fn mass(&self) -> f64 {
        self.u1 - self.u0
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TopAtom {
    pub mass: f64,
    pub q: f64,
    pub t: f64,
}

/// A discretized seller-optimal menu in value space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MenuSchedule {
    pub rows: Vec<MenuRow>,
    pub top_atom: Option<TopAtom>,
}

const BUNCH_TOL: f64 = 1e-9;

/// Builds the seller-optimal menu: quality `q(phi(u))` mapped to value
/// space along strictly increasing stretches of the quantile, transfers by
/// envelope integration from the lowest served type. Atoms, support gaps
/// and bunching blocks each emit a single row.
pub fn seller_menu(q: &QuantileFn, cost: &CostModel, grid_size: usize) -> Result<MenuSchedule> {
    if !cost.is_convex_kind() {
        return Err(Error::InvalidCost(
            "seller_menu needs a convex cost kind".into(),
        ));
    }
    let (_, phi) = concavified_revenue(q)?;
    let grid = integration_grid(q, &phi);
    let grid_size = grid_size.max(2);

    let mut rows: Vec<MenuRow> = Vec::new();
    let mut utility = 0.0; // buyer indirect utility accumulated up the ranks
    let mut prev_value = q.eval(0.0);
    let mut prev_phi_left = phi.eval(0.0);
    let top_mass = q.top_atom_mass();
    let top_start = 1.0 - top_mass;

    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 1e-15 {
            continue;
        }
        // Support gap: quantile jumps at `a`; the allocation on the gap is
        // constant at the left-edge quality, so utility grows linearly.
        let v_start = q.eval(a);
        if v_start > prev_value + 1e-12 {
            let (qty, _) = pointwise_quality_profit(prev_phi_left, cost);
            utility += qty * (v_start - prev_value);
        }

        if a >= top_start - 1e-14 && top_mass > 0.0 {
            prev_value = q.eval(b - 1e-15);
            prev_phi_left = phi.eval(b - 1e-15);
            continue; // folded into the top atom below
        }

        let phi_a = phi.eval(a);
        let phi_mid = phi.eval(0.5 * (a + b));
        let v_end = q.eval(b - 1e-15);
        let quantile_flat = (v_end - v_start).abs() <= 1e-12;
        let phi_flat = (phi.eval(b - 1e-15) - phi_a).abs() <= BUNCH_TOL;

        if quantile_flat {
            // atom: one contract for the whole block
            let (qty, _) = pointwise_quality_profit(phi_mid, cost);
            let t = v_start * qty - utility;
            rows.push(MenuRow {
                v: v_start,
                q: qty,
                t,
                u0: a,
                u1: b,
            });
        } else if phi_flat {
            // bunching: a range of types shares one contract
            let (qty, _) = pointwise_quality_profit(phi_mid, cost);
            let t = v_start * qty - utility;
            rows.push(MenuRow {
                v: v_start,
                q: qty,
                t,
                u0: a,
                u1: b,
            });
            utility += qty * (v_end - v_start);
        } else {
            // separating stretch: grid rows with Gauss-accurate envelope
            let cells = (((b - a) * grid_size as f64).ceil() as usize).max(1);
            for c in 0..cells {
                let ca = a + (b - a) * c as f64 / cells as f64;
                let cb = a + (b - a) * (c + 1) as f64 / cells as f64;
                let mid = 0.5 * (ca + cb);
                let du = |u: f64| {
                    let (qty, _) = pointwise_quality_profit(phi.eval(u), cost);
                    qty * quantile_deriv(q, u)
                };
                let u_mid = utility + gauss16(du, ca, mid);
                let v_mid = q.eval(mid);
                let (qty, _) = pointwise_quality_profit(phi.eval(mid), cost);
                rows.push(MenuRow {
                    v: v_mid,
                    q: qty,
                    t: v_mid * qty - u_mid,
                    u0: ca,
                    u1: cb,
                });
                utility += gauss16(du, ca, cb);
            }
        }
        prev_value = v_end;
        prev_phi_left = phi.eval(b - 1e-15);
    }

    let top_atom = if top_mass > 0.0 {
        // jump into the atom, if the body ends below 1
        if 1.0 > prev_value + 1e-12 {
            let (qty, _) = pointwise_quality_profit(prev_phi_left, cost);
            utility += qty * (1.0 - prev_value);
        }
        let qbar = cost.qbar();
        let t = qbar - utility;
        rows.push(MenuRow {
            v: 1.0,
            q: qbar,
            t,
            u0: top_start,
            u1: 1.0,
        });
        Some(TopAtom {
            mass: top_mass,
            q: qbar,
            t,
        })
    } else {
        None
    };

    Ok(MenuSchedule { rows, top_atom })
}

fn quantile_deriv(q: &QuantileFn, u: f64) -> f64 {
    for seg in q.segments() {
        if u <= seg.u1 {
            return match seg.kind {
                SegmentKind::Constant(_) => 0.0,
                SegmentKind::Linear { v0, v1 } => (v1 - v0) / (seg.u1 - seg.u0),
                SegmentKind::Analytic(form) => form.deriv(u),
            };
        }
    }
    0.0
}

/// Seller-optimal posted price under constant marginal cost `m` and
/// capacity `qcap`, with ties broken in favor of the consumer (smallest
/// maximizing cutoff). Returns the cutoff and the (CS, Pi, TS) payoff.
pub fn posted_price_optimum(q: &QuantileFn, m: f64, qcap: f64) -> Result<(f64, PayoffPoint)> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::InvalidInput(format!(
            "marginal cost must lie in [0,1), got {m}"
        )));
    }
    if !qcap.is_finite() || qcap <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "capacity must be positive, got {qcap}"
        )));
    }
    let revenue = |r: f64| (r - m) * q.survival(r);

    let mut candidates: Vec<f64> = q
        .endpoint_values()
        .into_iter()
        .filter(|&v| v >= m && v <= 1.0)
        .collect();
    candidates.push(m);
    candidates.push(1.0);
    // refine continuous stretches: upper semicontinuity makes atoms enough,
    // but interior maxima of continuous segments need a scan
    for seg in q.segments() {
        if matches!(seg.kind, SegmentKind::Constant(_)) {
            continue;
        }
        let lo = seg.value_start().max(m);
        let hi = seg.value_end().min(1.0);
        if hi <= lo {
            continue;
        }
        let n = 128;
        let mut best = (lo, revenue(lo));
        for i in 0..=n {
            let r = lo + (hi - lo) * i as f64 / n as f64;
            let p = revenue(r);
            if p > best.1 {
                best = (r, p);
            }
        }
        let bracket = (hi - lo) / n as f64;
        let wlo = (best.0 - bracket).max(lo);
        let whi = (best.0 + bracket).min(hi);
        // Derivative of (r - m) S(r) inside a strictly increasing segment;
        // a sign-change bisection pins an interior peak to machine
        // precision where golden section would stall at sqrt(eps).
        let slope = |r: f64| {
            let u = q.rank_of_value(r);
            let qp = quantile_deriv(q, u.min(1.0 - 1e-12));
            if qp <= 0.0 {
                f64::NAN
            } else {
                q.survival(r) - (r - m) / qp
            }
        };
        let (dlo, dhi) = (slope(wlo), slope(whi));
        if dlo.is_finite() && dhi.is_finite() && dlo > 0.0 && dhi < 0.0 {
            if let Ok(r_star) = crate::num::bisect(slope, wlo, whi, 1e-14, 200) {
                candidates.push(r_star);
            }
        } else {
            let (r_star, _) = golden_max(revenue, wlo, whi, 1e-10);
            candidates.push(r_star);
        }
        candidates.push(best.0);
    }

    let p_max = candidates
        .iter()
        .map(|&r| revenue(r))
        .fold(f64::NEG_INFINITY, f64::max);
    let tie = 1e-11 * p_max.abs().max(1.0);
    let r_opt = candidates
        .iter()
        .copied()
        .filter(|&r| revenue(r) >= p_max - tie)
        .fold(f64::INFINITY, f64::min);

    let pi = qcap * (r_opt - m) * q.survival(r_opt);
    let cs = qcap * q.expected_excess(r_opt);
    Ok((r_opt, PayoffPoint::new(cs, pi)))
}
