//! Frontier tracing over the welfare weight, the radial hull, rank-band
//! segmentation experiments, mean-preserving-spread generators, and the
//! convex-order test.

use serde::{Deserialize, Serialize};

use crate::closedform;
use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::fbvp;
use crate::num::integrate;
use crate::piecewise::{QuantileFn, Segment};
use crate::screening::evaluate_market;
use crate::types::{PayoffPoint, WelfareWeight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontierEngine {
    Fbvp,
    ClosedForm,
    Linear,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FrontierRow {
    pub k: f64,
    pub b: f64,
    pub cs: f64,
    pub pi: f64,
    pub ts: f64,
    pub vlow: f64,
}

/// The traced consumer-surplus/profit frontier, one row per welfare
/// weight.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrontierCurve {
    pub rows: Vec<FrontierRow>,
}

/// Traces the frontier over a grid of welfare weights with the chosen
/// engine. Weights at or below one-half produce the degenerate top-type
/// row. Solves fan out across threads, one task per weight.
pub fn trace_frontier(
    cost: &CostModel,
    k_grid: &[f64],
    engine: FrontierEngine,
) -> Result<FrontierCurve> {
    match engine {
        FrontierEngine::Linear => {
            if !matches!(cost, CostModel::Linear { .. }) {
                return Err(Error::InvalidInput(
                    "the linear engine requires a linear cost kind".into(),
                ));
            }
        }
        FrontierEngine::ClosedForm => match cost {
            CostModel::Quadratic | CostModel::Elasticity { .. } => {}
            _ => {
                return Err(Error::InvalidInput(
                    "the closed-form engine covers quadratic and elasticity costs".into(),
                ))
            }
        },
        FrontierEngine::Fbvp => {
            if !cost.is_convex_kind() {
                return Err(Error::InvalidInput(
                    "the fbvp engine requires a convex cost kind".into(),
                ));
            }
        }
    }
    for &k in k_grid {
        if !(0.0..=1.0).contains(&k) {
            return Err(Error::InvalidInput(format!(
                "welfare weight {k} outside [0,1]"
            )));
        }
    }

    let workers = std::env::var("SCREENOPT_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|p| p.get())
                .unwrap_or(1)
        })
        .min(k_grid.len().max(1));

    let results: Vec<Result<FrontierRow>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..workers {
            let ks: Vec<(usize, f64)> = k_grid
                .iter()
                .copied()
                .enumerate()
                .skip(w)
                .step_by(workers)
                .collect();
            handles.push(scope.spawn(move || {
                ks.into_iter()
                    .map(|(i, k)| (i, frontier_row(cost, k, engine)))
                    .collect::<Vec<_>>()
            }));
        }
        let mut indexed: Vec<(usize, Result<FrontierRow>)> = Vec::with_capacity(k_grid.len());
        for h in handles {
            indexed.extend(h.join().expect("frontier worker"));
        }
        indexed.sort_by_key(|&(i, _)| i);
        indexed.into_iter().map(|(_, r)| r).collect()
    });

    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(FrontierCurve { rows })
}

fn frontier_row(cost: &CostModel, k: f64, engine: FrontierEngine) -> Result<FrontierRow> {
    let kw = WelfareWeight::new(k)?;
    if kw.is_degenerate() {
        let pi = match cost {
            CostModel::Linear { marginal, capacity } => capacity * (1.0 - marginal),
            _ => {
                let qbar = cost.qbar();
                qbar - cost.c(qbar)
            }
        };
        return Ok(FrontierRow {
            k,
            b: 0.0,
            cs: 0.0,
            pi,
            ts: pi,
            vlow: 1.0,
        });
    }
    match engine {
        FrontierEngine::Linear => {
            let (m, qcap) = match cost {
                CostModel::Linear { marginal, capacity } => (*marginal, *capacity),
                _ => unreachable!("validated above"),
            };
            let sol = closedform::linear_optimal(kw, m, qcap)?;
            let b = 1.0 - sol.market.top_atom_mass();
            Ok(FrontierRow {
                k,
                b,
                cs: sol.payoff.cs,
                pi: sol.payoff.pi,
                ts: sol.payoff.ts,
                vlow: sol.market.lower_value(),
            })
        }
        FrontierEngine::ClosedForm => match cost {
            CostModel::Quadratic => {
                let sol = closedform::quadratic_optimal(kw)?;
                Ok(FrontierRow {
                    k,
                    b: sol.b,
                    cs: sol.cs,
                    pi: sol.pi,
                    ts: sol.cs + sol.pi,
                    vlow: sol.lower_value(),
                })
            }
            CostModel::Elasticity { eta } => {
                let sol = closedform::elasticity_optimal(kw, *eta)?;
                let market = sol.market(2048)?;
                let payoff = evaluate_market(&market, cost)?;
                Ok(FrontierRow {
                    k,
                    b: sol.b,
                    cs: payoff.cs,
                    pi: payoff.pi,
                    ts: payoff.ts,
                    vlow: sol.vlow,
                })
            }
            _ => unreachable!("validated above"),
        },
        FrontierEngine::Fbvp => {
            let sol = fbvp::solve_optimal_market(cost, kw, 1e-10)?;
            Ok(FrontierRow {
                k,
                b: sol.b,
                cs: sol.cs,
                pi: sol.pi,
                ts: sol.cs + sol.pi,
                vlow: sol.lower_value(),
            })
        }
    }
}

/// The radial hull {(theta cs_k, theta pi_k)}: every contraction of a
/// frontier point toward the origin is implementable by mixing the optimal
/// market with a zero-value atom.
pub fn radial_hull(curve: &FrontierCurve, theta_grid: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(curve.rows.len() * theta_grid.len());
    for row in &curve.rows {
        for &theta in theta_grid {
            out.push((theta * row.cs, theta * row.pi));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SegmentOutcome {
    pub mass: f64,
    pub cs: f64,
    pub pi: f64,
}

/// Splits a market into rank bands, screens each conditional market
/// separately, and returns the mass-weighted average payoff with the
/// per-segment breakdown.
pub fn segment_and_evaluate(
    q: &QuantileFn,
    split_ranks: &[f64],
    cost: &CostModel,
) -> Result<(PayoffPoint, Vec<SegmentOutcome>)> {
    let mut cuts = vec![0.0];
    let mut sorted = split_ranks.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for &s in &sorted {
        if !(0.0 < s && s < 1.0) {
            return Err(Error::InvalidInput(format!(
                "split rank {s} must lie strictly inside (0,1)"
            )));
        }
        cuts.push(s);
    }
    cuts.push(1.0);
    for w in cuts.windows(2) {
        if w[1] - w[0] <= 1e-12 {
            return Err(Error::InvalidInput(
                "empty rank band in segmentation".into(),
            ));
        }
    }

    let mut outcomes = Vec::with_capacity(cuts.len() - 1);
    let mut avg_cs = 0.0;
    let mut avg_pi = 0.0;
    for w in cuts.windows(2) {
        let band = q.restrict_ranks(w[0], w[1])?;
        let payoff = evaluate_market(&band, cost)?;
        let mass = w[1] - w[0];
        avg_cs += mass * payoff.cs;
        avg_pi += mass * payoff.pi;
        outcomes.push(SegmentOutcome {
            mass,
            cs: payoff.cs,
            pi: payoff.pi,
        });
    }
    Ok((PayoffPoint::new(avg_cs, avg_pi), outcomes))
}

/// Finite-support mean-preserving spread: block-averages the strictly
/// increasing body of the market over equispaced rank cutpoints and
/// replaces each block by the two-point law on its endpoints (the lowest
/// pushed down to `a`), keeping the top atom. The result has exactly
/// `n_support` support points including `a` and 1.
pub fn mps_finite(q: &QuantileFn, n_support: usize, a: f64) -> Result<QuantileFn> {
    if n_support < 2 {
        return Err(Error::InvalidInput(
            "finite spread needs at least two support points".into(),
        ));
    }
    let b = 1.0 - q.top_atom_mass();
    if b <= 0.0 || b >= 1.0 {
        return Err(Error::InvalidInput(
            "market must have a strictly increasing body and a top atom".into(),
        ));
    }
    let vlow = q.lower_value();
    if !(0.0 < a && a < vlow) {
        return Err(Error::InvalidInput(format!(
            "spread anchor must lie in (0, vlow) = (0, {vlow}), got {a}"
        )));
    }
    let blocks = n_support - 1;
    let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(2 * blocks + 1);
    let mass = b / blocks as f64;
    for i in 1..=blocks {
        let lo = b * (i - 1) as f64 / blocks as f64;
        let hi = b * i as f64 / blocks as f64;
        let avg = q.integral(lo, hi)? / mass;
        let c = if i == 1 { a } else { q.eval(lo) };
        let d = if i == blocks { 1.0 } else { q.eval(hi) };
        if !(c < avg && avg < d) {
            return Err(Error::InvalidInput(
                "market body must be strictly increasing across every block".into(),
            ));
        }
        atoms.push((c, mass * (d - avg) / (d - c)));
        atoms.push((d, mass * (avg - c) / (d - c)));
    }
    atoms.push((1.0, 1.0 - b));
    // merge coincident support points
    atoms.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (v, m) in atoms {
        match merged.last_mut() {
            Some(last) if (last.0 - v).abs() <= 1e-12 => last.1 += m,
            _ => merged.push((v, m)),
        }
    }
    QuantileFn::from_atoms(&merged)
}

/// Absolutely continuous mean-preserving spread: mixes the power-law
/// kernel `K(x, dy)` with exponent `alpha(x) = (x-a)/(1-x)` over the body
/// of the market and keeps the top atom. The output is discretized to a
/// piecewise-linear quantile on `grid_size` points with support [a, 1].
pub fn mps_smooth(q: &QuantileFn, a: f64, grid_size: usize) -> Result<QuantileFn> {
    let b = 1.0 - q.top_atom_mass();
    if b <= 0.0 || b >= 1.0 {
        return Err(Error::InvalidInput(
            "market must have a strictly increasing body and a top atom".into(),
        ));
    }
    let vlow = q.lower_value();
    if !(0.0 < a && a < vlow) {
        return Err(Error::InvalidInput(format!(
            "spread anchor must lie in (0, vlow) = (0, {vlow}), got {a}"
        )));
    }
    let grid = grid_size.max(64);
    // CDF of the mixture on [a, 1): F(y) = ∫_0^b ((y-a)/(1-a))^alpha(Q(u)) du
    let cdf = |y: f64| -> f64 {
        if y <= a {
            return 0.0;
        }
        let base = ((y - a) / (1.0 - a)).min(1.0);
        integrate(
            |u| {
                let x = q.eval(u).min(1.0 - 1e-12);
                let alpha = (x - a) / (1.0 - x);
                base.powf(alpha)
            },
            0.0,
            b,
            1e-11,
        )
    };
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(grid + 2);
    pts.push((0.0, a));
    let mut prev_rank = 0.0;
    for j in 1..grid {
        // cosine grading: the mixture density vanishes at y = a and its
        // kernel exponents diverge toward y = 1, so the quantile is steep
        // at both ends and needs fine cells there
        let frac = j as f64 / grid as f64;
        let y = a + (1.0 - a) * 0.5 * (1.0 - (std::f64::consts::PI * frac).cos());
        let r = cdf(y).clamp(prev_rank, b);
        if r > prev_rank + 1e-13 {
            pts.push((r, y));
            prev_rank = r;
        }
    }
    pts.push((b, 1.0));

    // The kernel is mean-preserving; remove the discretization bias by a
    // uniform shift of the interior nodes (endpoints stay pinned at `a`
    // and 1, so support and the top atom are untouched).
    let disc_mean = {
        let mut acc = (1.0 - b) * 1.0;
        for w in pts.windows(2) {
            acc += 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0);
        }
        acc
    };
    let gap = q.mean() - disc_mean;
    let weight: f64 = (1..pts.len() - 1)
        .map(|j| 0.5 * (pts[j + 1].0 - pts[j - 1].0))
        .sum();
    if weight > 0.0 && gap.abs() < 1e-4 {
        let delta = gap / weight;
        for j in 1..pts.len() - 1 {
            pts[j].1 += delta;
        }
    }

    let mut segs: Vec<Segment> = pts
        .windows(2)
        .map(|w| Segment::linear(w[0].0, w[1].0, w[0].1, w[1].1))
        .collect();
    segs.push(Segment::constant(b, 1.0, 1.0));
    QuantileFn::new(segs)
}

/// Quantile test of the convex order `F >=_cx G`: equal means and
/// nonnegative tail integrals `∫_t^1 (Q_F - Q_G) >= 0` at every grid rank.
pub fn convex_order_check(f: &QuantileFn, g: &QuantileFn, grid_size: usize) -> bool {
    if (f.mean() - g.mean()).abs() > 1e-8 {
        return false;
    }
    let n = grid_size.max(16);
    for i in 0..n {
        let t = i as f64 / n as f64;
        if f.tail_integral(t) - g.tail_integral(t) < -1e-8 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{make_cost, CostKind};

    fn w(k: f64) -> WelfareWeight {
        WelfareWeight::new(k).unwrap()
    }

    fn quadratic() -> CostModel {
        make_cost(CostKind::Quadratic, &[]).unwrap()
    }

    fn optimal_market_k1() -> QuantileFn {
        closedform::quadratic_optimal(w(1.0))
            .unwrap()
            .market(4096)
            .unwrap()
    }

    #[test]
    fn closedform_frontier_endpoints() {
        let curve = trace_frontier(&quadratic(), &[0.5, 1.0], FrontierEngine::ClosedForm).unwrap();
        assert_eq!(curve.rows.len(), 2);
        assert_eq!(curve.rows[0].cs, 0.0);
        assert!((curve.rows[0].pi - 0.5).abs() < 1e-14);
        let gold = closedform::quadratic_optimal(w(1.0)).unwrap();
        assert!((curve.rows[1].cs - gold.cs).abs() < 1e-14);
        assert!((curve.rows[1].pi - gold.pi).abs() < 1e-14);
    }

    #[test]
    fn linear_frontier_endpoints() {
        let cost = make_cost(CostKind::Linear, &[0.0, 1.0]).unwrap();
        let curve = trace_frontier(&cost, &[0.5, 1.0], FrontierEngine::Linear).unwrap();
        assert!((curve.rows[0].pi - 1.0).abs() < 1e-14);
        assert_eq!(curve.rows[0].cs, 0.0);
        let e = std::f64::consts::E;
        assert!((curve.rows[1].cs - 1.0 / e).abs() < 1e-14);
        assert!((curve.rows[1].pi - 1.0 / e).abs() < 1e-14);
        // engine/cost mismatch
        assert!(trace_frontier(&quadratic(), &[1.0], FrontierEngine::Linear).is_err());
        assert!(trace_frontier(&cost, &[1.0], FrontierEngine::Fbvp).is_err());
    }

    #[test]
    fn fbvp_frontier_is_monotone() {
        let curve = trace_frontier(&quadratic(), &[0.6, 0.8], FrontierEngine::Fbvp).unwrap();
        assert!(curve.rows[1].b > curve.rows[0].b);
        assert!(curve.rows[1].cs > curve.rows[0].cs);
        assert!(curve.rows[1].pi < curve.rows[0].pi);
        assert!(curve.rows[1].ts < curve.rows[0].ts);
        assert!(curve.rows[1].vlow < curve.rows[0].vlow);
    }

    #[test]
    fn radial_hull_scales_rows() {
        let curve = trace_frontier(&quadratic(), &[1.0], FrontierEngine::ClosedForm).unwrap();
        let pts = radial_hull(&curve, &[0.0, 0.5, 1.0]);
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[0], (0.0, 0.0));
        assert!((pts[1].0 - 0.5 * curve.rows[0].cs).abs() < 1e-15);
        assert!((pts[2].1 - curve.rows[0].pi).abs() < 1e-15);
        // headline k=1 halves
        assert!((pts[1].0 - 0.051970).abs() < 1e-6);
        assert!((pts[1].1 - 0.118772).abs() < 1e-6);
    }

    #[test]
    fn segmentation_identity_without_splits() {
        let g = optimal_market_k1();
        let cost = quadratic();
        let full = evaluate_market(&g, &cost).unwrap();
        let (avg, parts) = segment_and_evaluate(&g, &[], &cost).unwrap();
        assert_eq!(parts.len(), 1);
        assert!((avg.cs - full.cs).abs() < 1e-12);
        assert!((avg.pi - full.pi).abs() < 1e-12);
    }

    #[test]
    fn segmentation_of_delta_one_is_unchanged() {
        let cost = quadratic();
        let (avg, _) = segment_and_evaluate(&QuantileFn::delta_one(), &[0.3, 0.7], &cost).unwrap();
        assert!(avg.cs.abs() < 1e-12);
        assert!((avg.pi - 0.5).abs() < 1e-12);
    }

    #[test]
    fn segmentation_raises_profit_and_lowers_cs() {
        let g = optimal_market_k1();
        let cost = quadratic();
        let full = evaluate_market(&g, &cost).unwrap();
        let b = 1.0 - g.top_atom_mass();
        for splits in [vec![b], vec![0.4], vec![0.25, 0.6]] {
            let (avg, _) = segment_and_evaluate(&g, &splits, &cost).unwrap();
            assert!(
                avg.pi >= full.pi - 1e-9,
                "profit must weakly rise under segmentation"
            );
            assert!(
                avg.cs < full.cs - 1e-9,
                "CS must strictly drop for a non-degenerate split: {} vs {}",
                avg.cs,
                full.cs
            );
        }
        assert!(segment_and_evaluate(&g, &[0.0], &cost).is_err());
        assert!(segment_and_evaluate(&g, &[0.5, 0.5], &cost).is_err());
    }

    #[test]
    fn finite_spread_properties() {
        let g = optimal_market_k1();
        let a = 0.1;
        for &n in &[2usize, 3, 5] {
            let f = mps_finite(&g, n, a).unwrap();
            assert!(
                (f.mean() - g.mean()).abs() < 1e-10,
                "mean preserved at n = {n}"
            );
            let support = f.endpoint_values();
            assert_eq!(support.len(), n, "support {support:?}");
            assert!((support[0] - a).abs() < 1e-12);
            assert!((support[n - 1] - 1.0).abs() < 1e-12);
            assert!(
                convex_order_check(&f, &g, 512),
                "spread must dominate in convex order"
            );
        }
        assert!(mps_finite(&g, 2, g.lower_value() + 0.01).is_err());
    }

    #[test]
    fn smooth_spread_properties() {
        let g = optimal_market_k1();
        let a = 0.1;
        let f = mps_smooth(&g, a, 2048).unwrap();
        assert!((f.top_atom_mass() - g.top_atom_mass()).abs() < 1e-9);
        assert!(
            (f.mean() - g.mean()).abs() < 1e-6,
            "mean gap {}",
            (f.mean() - g.mean()).abs()
        );
        assert!((f.lower_value() - a).abs() < 1e-9);
        assert!(convex_order_check(&f, &g, 512));
    }

    #[test]
    fn convex_order_rejects_contractions() {
        let uniform = QuantileFn::from_points(&[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        let point = QuantileFn::degenerate(0.5).unwrap();
        assert!(convex_order_check(&uniform, &uniform, 256));
        assert!(
            !convex_order_check(&point, &uniform, 256),
            "a contraction is not a spread"
        );
        assert!(convex_order_check(&uniform, &point, 256));
    }
}
