//! General-convex-cost solver for the upstream problem at k in (1/2, 1]:
//! integrates the autonomous reverse-time free-boundary system to produce
//! the optimal virtual-value profile, its cutoff, and the induced market.
//!
//! In log time t = -ln(1-u) the interior system is autonomous:
//!
//! ```text
//!   dA/dt = x,   dQ/dt = c''(x) (lambda x - A),
//!   with x recovered from  Q = c'(x) + c''(x)(lambda x - A),
//! ```
//!
//! and the terminal state at the cutoff is (A, Q, x) = (lambda qbar, 1,
//! qbar). Reversing time (s = T - t) turns the boundary-value problem into
//! an initial-value problem whose stopping event A = 0 determines the
//! horizon T and hence the cutoff b = 1 - e^{-T}. The per-step recovery of
//! x is a monotone root-find; monotonicity is exactly the curvature bound
//! the cost model validates.

use serde::{Deserialize, Serialize};

use crate::config::FBVP_SAMPLES;
use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::num::integrate;
use crate::piecewise::{QuantileFn, Segment};
use crate::screening::pointwise_quality_profit;
use crate::types::{PayoffPoint, WelfareWeight};

const MAX_LOG_TIME: f64 = 50.0;
const MAX_STEP: f64 = 1e-2;

/// One interior sample of the solved system at rank u.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FbvpSample {
    /// rank in [0, b]
    pub u: f64,
    /// quality x(u)
    pub x: f64,
    /// virtual value phi(u) = c'(x(u))
    pub phi: f64,
    /// cumulative spillover A(u)
    pub a: f64,
    /// induced quantile Q(u)
    pub qv: f64,
}

/// Solution of the free-boundary problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FbvpSolution {
    /// true when k <= 1/2 and the optimal market collapses to the top type
    pub degenerate: bool,
    /// cutoff rank: the optimal market has an atom of mass 1-b at v = 1
    pub b: f64,
    /// log-time horizon T = -ln(1-b)
    pub t_horizon: f64,
    /// interior samples, equispaced in rank
    pub samples: Vec<FbvpSample>,
    /// max Euler-Lagrange residual over the emitted samples
    pub el_residual_max: f64,
    /// consumer surplus of the solved market (solver quadrature)
    pub cs: f64,
    /// seller profit of the solved market (solver quadrature)
    pub pi: f64,
}

impl FbvpSolution {
    pub fn payoff(&self) -> PayoffPoint {
        PayoffPoint::new(self.cs, self.pi)
    }

    /// Lower support endpoint of the induced market.
    pub fn lower_value(&self) -> f64 {
        if self.degenerate {
            1.0
        } else {
            self.samples.first().map(|s| s.qv).unwrap_or(1.0)
        }
    }
}

/// Recovers the quality x from the algebraic relation
/// `Q = c'(x) + c''(x)(lambda x - A)` on the bracket [A/lambda, qbar].
/// A failed bracket signals a curvature violation.
fn solve_quality(cost: &CostModel, lambda: f64, a: f64, q: f64) -> Result<f64> {
    let qbar = cost.qbar();
    let h = |x: f64| cost.cp(x) + cost.cpp(x) * (lambda * x - a);
    let mut lo = (a / lambda).max(1e-14).min(qbar);
    let mut f_lo = h(lo) - q;
    // Technologies with exploding curvature near zero quality (elasticity
    // close to 1) can push H above Q at the epsilon clamp even though the
    // root sits below it; scan down while still above the true bracket
    // floor A/lambda.
    while f_lo > 1e-9 && lo > 1e-250 && a / lambda < lo {
        lo *= 1e-3;
        f_lo = h(lo) - q;
    }
    let f_hi = h(qbar) - q;
    if f_lo > 1e-9 || f_hi < -1e-9 {
        return Err(Error::Numerical(format!(
            "quality bracket failed (H(lo)-Q = {f_lo:.3e}, H(qbar)-Q = {f_hi:.3e}); \
             the cost model likely violates the curvature bound"
        )));
    }
    // safeguarded Newton on a monotone function
    let mut x = 0.5 * (lo + qbar);
    let (mut blo, mut bhi) = (lo, qbar);
    for _ in 0..100 {
        let f = h(x) - q;
        if f.abs() < 1e-15 {
            return Ok(x);
        }
        if f > 0.0 {
            bhi = x;
        } else {
            blo = x;
        }
        let dh = (1.0 + lambda) * cost.cpp(x) + (lambda * x - a) * cost.cppp(x);
        let step = if dh > 0.0 { f / dh } else { f64::NAN };
        let next = x - step;
        x = if next.is_finite() && next > blo && next < bhi {
            next
        } else {
            0.5 * (blo + bhi)
        };
        if bhi - blo < 1e-16 {
            break;
        }
    }
    Ok(x)
}

struct DenseStep {
    s0: f64,
    h: f64,
    y0: [f64; 2],
    f0: [f64; 2],
    y1: [f64; 2],
    f1: [f64; 2],
}

impl DenseStep {
    /// Cubic Hermite interpolation inside the step.
    fn eval(&self, s: f64) -> [f64; 2] {
        let t = ((s - self.s0) / self.h).clamp(0.0, 1.0);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let mut out = [0.0; 2];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = h00 * self.y0[i]
                + h10 * self.h * self.f0[i]
                + h01 * self.y1[i]
                + h11 * self.h * self.f1[i];
        }
        out
    }
}

struct Trajectory {
    steps: Vec<DenseStep>,
    /// reverse-time horizon (the A = 0 event)
    t_end: f64,
}

impl Trajectory {
    fn state(&self, s: f64) -> [f64; 2] {
        let s = s.clamp(0.0, self.t_end);
        // steps are ordered in s; binary search for the covering step
        let mut lo = 0usize;
        let mut hi = self.steps.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.steps[mid].s0 + self.steps[mid].h < s {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        self.steps[lo].eval(s)
    }
}

/// Integrates the reversed autonomous system from the terminal state until
/// A hits zero, with a Dormand-Prince 5(4) pair.
fn integrate_reverse(cost: &CostModel, lambda: f64, rtol: f64) -> Result<Trajectory> {
    let qbar = cost.qbar();
    let rhs = |y: [f64; 2]| -> Result<[f64; 2]> {
        // Stages of the final step evaluate past the A = 0 event; clamping
        // keeps the quality recovery well-posed in the overshoot region.
        let a = y[0].max(0.0);
        let x = solve_quality(cost, lambda, a, y[1])?;
        Ok([-x, -cost.cpp(x) * (lambda * x - a)])
    };

    let atol = rtol.max(1e-14);
    let mut s = 0.0;
    let mut y = [lambda * qbar, 1.0];
    let mut f = rhs(y)?;
    let mut h = 1e-4_f64;
    let mut steps: Vec<DenseStep> = Vec::new();

    // Dormand-Prince coefficients
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    const E1: f64 = 35.0 / 384.0 - 5179.0 / 57600.0;
    const E3: f64 = 500.0 / 1113.0 - 7571.0 / 16695.0;
    const E4: f64 = 125.0 / 192.0 - 393.0 / 640.0;
    const E5: f64 = -2187.0 / 6784.0 + 92097.0 / 339200.0;
    const E6: f64 = 11.0 / 84.0 - 187.0 / 2100.0;
    const E7: f64 = -1.0 / 40.0;

    let comb = |y: [f64; 2], h: f64, ks: &[([f64; 2], f64)]| {
        let mut out = y;
        for &(k, c) in ks {
            out[0] += h * c * k[0];
            out[1] += h * c * k[1];
        }
        out
    };

    while s < MAX_LOG_TIME {
        h = h.min(MAX_STEP);
        // approach the stopping event gently: a large overshoot would make
        // the final step's dense output rely on clamped dynamics
        if f[0] < 0.0 {
            let time_to_event = y[0] / (-f[0]);
            if time_to_event < h {
                h = (1.1 * time_to_event).max(1e-6);
            }
        }
        let k1 = f;
        let k2 = rhs(comb(y, h, &[(k1, A21)]))?;
        let k3 = rhs(comb(y, h, &[(k1, A31), (k2, A32)]))?;
        let k4 = rhs(comb(y, h, &[(k1, A41), (k2, A42), (k3, A43)]))?;
        let k5 = rhs(comb(y, h, &[(k1, A51), (k2, A52), (k3, A53), (k4, A54)]))?;
        let k6 = rhs(comb(
            y,
            h,
            &[(k1, A61), (k2, A62), (k3, A63), (k4, A64), (k5, A65)],
        ))?;
        let y_new = comb(y, h, &[(k1, B1), (k3, B3), (k4, B4), (k5, B5), (k6, B6)]);
        // The A component can undershoot zero near the event: keep the RHS
        // well-defined by clamping the quality bracket, not the state.
        let k7 = rhs(y_new)?;

        let mut err: f64 = 0.0;
        for i in 0..2 {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = atol + rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / scale).abs());
        }

        if err <= 1.0 {
            steps.push(DenseStep {
                s0: s,
                h,
                y0: y,
                f0: k1,
                y1: y_new,
                f1: k7,
            });
            s += h;
            y = y_new;
            f = k7;
            if y[0] <= 0.0 {
                break;
            }
        }
        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h *= factor.clamp(0.2, 5.0);
        if h < 1e-15 {
            return Err(Error::Numerical(
                "step size collapsed in the free-boundary solver".into(),
            ));
        }
    }

    if y[0] > 0.0 {
        return Err(Error::Numerical(format!(
            "no boundary event within log-time {MAX_LOG_TIME}; the cost model is malformed"
        )));
    }

    // Localize A = 0 on the last step by bisection on the dense output.
    let last = steps.last().expect("at least one accepted step");
    let (mut lo, mut hi) = (last.s0, last.s0 + last.h);
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if last.eval(mid)[0] > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t_end = 0.5 * (lo + hi);
    Ok(Trajectory { steps, t_end })
}

/// Solves the optimal-market free-boundary problem. Returns the degenerate
/// top-type solution for k <= 1/2; otherwise integrates the reversed
/// autonomous system with relative tolerance `tol` and emits `FBVP_SAMPLES`
/// interior samples equispaced in rank.
pub fn solve_optimal_market(cost: &CostModel, k: WelfareWeight, tol: f64) -> Result<FbvpSolution> {
    solve_with_samples(cost, k, tol, FBVP_SAMPLES)
}

pub fn solve_with_samples(
    cost: &CostModel,
    k: WelfareWeight,
    tol: f64,
    n_samples: usize,
) -> Result<FbvpSolution> {
    if !cost.is_convex_kind() {
        return Err(Error::InvalidCost(
            "the free-boundary solver needs a convex cost kind".into(),
        ));
    }
    let qbar = cost.qbar();
    if k.is_degenerate() {
        let (_, pi_top) = pointwise_quality_profit(1.0, cost);
        return Ok(FbvpSolution {
            degenerate: true,
            b: 0.0,
            t_horizon: 0.0,
            samples: Vec::new(),
            el_residual_max: 0.0,
            cs: 0.0,
            pi: pi_top,
        });
    }
    let lambda = k.lambda();
    let traj = integrate_reverse(cost, lambda, tol.max(1e-13))?;
    let t_horizon = traj.t_end;
    let b = 1.0 - (-t_horizon).exp();

    let n = n_samples.max(8);
    let mut samples = Vec::with_capacity(n);
    for j in 0..n {
        let u = b * j as f64 / (n - 1) as f64;
        let t = -(1.0 - u).ln();
        let s = (t_horizon - t).clamp(0.0, t_horizon);
        let st = traj.state(s);
        let (a, qv) = (st[0].max(0.0), st[1].min(1.0));
        let x = if j + 1 == n {
            qbar
        } else {
            solve_quality(cost, lambda, a, qv)?
        };
        let phi = cost.cp(x).min(1.0);
        samples.push(FbvpSample { u, x, phi, a, qv });
    }

    // Solver-side payoffs by quadrature along the dense solution,
    // integrating in log time: du = e^{-t} dt.
    let eval_at_t = |t: f64| -> [f64; 2] { traj.state((t_horizon - t).clamp(0.0, t_horizon)) };
    let integrand = |t: f64, want_cs: bool| -> f64 {
        let st = eval_at_t(t);
        let x = solve_quality(cost, lambda, st[0].max(0.0), st[1].min(1.0)).unwrap_or(qbar);
        let phi = cost.cp(x);
        let w = (-t).exp();
        if want_cs {
            (st[1] - phi) * x * w
        } else {
            (phi * x - cost.c(x)) * w
        }
    };
    let cs = integrate(|t| integrand(t, true), 0.0, t_horizon, 1e-12);
    let (_, pi_top) = pointwise_quality_profit(1.0, cost);
    let pi = integrate(|t| integrand(t, false), 0.0, t_horizon, 1e-12) + (1.0 - b) * pi_top;

    let el_residual_max = el_residual_samples(&samples, cost, k);

    Ok(FbvpSolution {
        degenerate: false,
        b,
        t_horizon,
        samples,
        el_residual_max,
        cs,
        pi,
    })
}

/// Max Euler-Lagrange residual `|k A + k (Q - phi)/c''(x) + (1-2k) x|`
/// over the interior samples of a solution.
pub fn el_residual(sol: &FbvpSolution, cost: &CostModel, k: WelfareWeight) -> Result<f64> {
    if sol.degenerate {
        return Err(Error::InvalidInput(
            "degenerate solutions have no interior branch".into(),
        ));
    }
    Ok(el_residual_samples(&sol.samples, cost, k))
}

pub fn el_residual_samples(samples: &[FbvpSample], cost: &CostModel, k: WelfareWeight) -> f64 {
    let kv = k.k();
    let mut worst: f64 = 0.0;
    for s in samples {
        if s.x <= 0.0 {
            continue;
        }
        let r = kv * s.a + kv * (s.qv - s.phi) / cost.cpp(s.x) + (1.0 - 2.0 * kv) * s.x;
        worst = worst.max(r.abs());
    }
    worst
}

/// The induced market composition: a piecewise-linear strictly increasing
/// quantile on [0, b] plus the atom at v = 1.
pub fn to_market(sol: &FbvpSolution) -> Result<QuantileFn> {
    if sol.degenerate {
        return Ok(QuantileFn::delta_one());
    }
    let mut segs = Vec::with_capacity(sol.samples.len() + 1);
    for w in sol.samples.windows(2) {
        let v1 = if w[1].u >= sol.b - 1e-15 {
            1.0
        } else {
            w[1].qv
        };
        segs.push(Segment::linear(
            w[0].u,
            w[1].u,
            w[0].qv.min(1.0),
            v1.min(1.0),
        ));
    }
    segs.push(Segment::constant(sol.b, 1.0, 1.0));
    QuantileFn::new(segs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::quadratic_optimal;
    use crate::cost::{make_cost, CostKind};
    use crate::screening::evaluate_market;

    fn w(k: f64) -> WelfareWeight {
        WelfareWeight::new(k).unwrap()
    }

    fn quadratic() -> CostModel {
        make_cost(CostKind::Quadratic, &[]).unwrap()
    }

    #[test]
    fn degenerate_below_half() {
        for &k in &[0.0, 0.3, 0.5] {
            let sol = solve_optimal_market(&quadratic(), w(k), 1e-10).unwrap();
            assert!(sol.degenerate);
            assert_eq!(sol.b, 0.0);
            assert!((sol.pi - 0.5).abs() < 1e-14);
            let market = to_market(&sol).unwrap();
            assert_eq!(market.eval(0.5), 1.0);
        }
    }

    #[test]
    fn quadratic_k1_matches_closed_form() {
        let sol = solve_optimal_market(&quadratic(), w(1.0), 1e-10).unwrap();
        let gold = quadratic_optimal(w(1.0)).unwrap();
        assert!(
            (sol.b - gold.b).abs() < 1e-8,
            "cutoff: solver {} vs closed form {}",
            sol.b,
            gold.b
        );
        assert!((sol.t_horizon - gold.t_horizon).abs() < 1e-8);
        assert!((sol.cs - gold.cs).abs() < 1e-8);
        assert!((sol.pi - gold.pi).abs() < 1e-8);
        // schedules agree along the interior
        for s in sol.samples.iter().step_by(97) {
            assert!((s.phi - gold.phi(s.u)).abs() < 1e-7, "phi at u = {}", s.u);
            assert!((s.qv - gold.quantile(s.u)).abs() < 1e-7, "Q at u = {}", s.u);
            assert!((s.a - gold.spillover(s.u)).abs() < 1e-7, "A at u = {}", s.u);
        }
    }

    #[test]
    fn quadratic_k075_cutoff() {
        let sol = solve_optimal_market(&quadratic(), w(0.75), 1e-10).unwrap();
        let gold = quadratic_optimal(w(0.75)).unwrap();
        assert!((sol.b - gold.b).abs() < 1e-8);
        // terminal identity k A(b) = (2k-1) qbar
        let last = sol.samples.last().unwrap();
        assert!((0.75 * last.a - 0.5).abs() < 1e-9);
    }

    #[test]
    fn terminal_and_initial_conditions() {
        for &k in &[0.55, 0.7, 0.9, 1.0] {
            let sol = solve_optimal_market(&quadratic(), w(k), 1e-10).unwrap();
            let first = sol.samples.first().unwrap();
            let last = sol.samples.last().unwrap();
            assert!(first.a.abs() < 1e-8, "A(0) = {} at k = {k}", first.a);
            assert!((last.a - w(k).lambda()).abs() < 1e-8);
            assert!((last.x - 1.0).abs() < 1e-10);
            assert!((last.qv - 1.0).abs() < 1e-10);
            assert!((last.phi - 1.0).abs() < 1e-10);
            // x strictly increasing along the interior; the induced
            // quantile dominates the virtual value pointwise
            for pair in sol.samples.windows(2) {
                assert!(pair[1].x > pair[0].x - 1e-12);
                assert!(pair[1].qv >= pair[0].qv - 1e-12);
            }
            for s in &sol.samples {
                assert!(s.qv >= s.phi - 1e-12, "Q < phi at u = {}", s.u);
            }
        }
    }

    #[test]
    fn el_residual_near_zero_on_solution() {
        let cost = quadratic();
        let sol = solve_optimal_market(&cost, w(1.0), 1e-10).unwrap();
        assert!(
            sol.el_residual_max < 1e-6,
            "residual {}",
            sol.el_residual_max
        );
    }

    #[test]
    fn el_residual_on_injected_closed_form() {
        let cost = quadratic();
        let gold = quadratic_optimal(w(1.0)).unwrap();
        let samples: Vec<FbvpSample> = (0..512)
            .map(|i| {
                let u = gold.b * i as f64 / 511.0;
                let phi = gold.phi(u);
                FbvpSample {
                    u,
                    x: phi,
                    phi,
                    a: gold.spillover(u),
                    qv: gold.quantile(u),
                }
            })
            .collect();
        let r = el_residual_samples(&samples, &cost, w(1.0));
        assert!(r < 1e-10, "closed-form residual {r}");

        // a 1% scaling of phi must be detected
        let perturbed: Vec<FbvpSample> = samples
            .iter()
            .map(|s| FbvpSample {
                phi: (s.phi * 1.01).min(1.0),
                x: (s.x * 1.01).min(1.0),
                ..*s
            })
            .collect();
        let r = el_residual_samples(&perturbed, &cost, w(1.0));
        assert!(r > 1e-3, "perturbation residual {r}");
    }

    #[test]
    fn round_trip_through_screening_pipeline() {
        let cost = quadratic();
        for &k in &[0.75, 1.0] {
            let sol = solve_optimal_market(&cost, w(k), 1e-10).unwrap();
            let market = to_market(&sol).unwrap();
            let payoff = evaluate_market(&market, &cost).unwrap();
            assert!(
                (payoff.cs - sol.cs).abs() < 1e-6,
                "cs round trip at k = {k}: {} vs {}",
                payoff.cs,
                sol.cs
            );
            assert!(
                (payoff.pi - sol.pi).abs() < 1e-6,
                "pi round trip at k = {k}"
            );
        }
    }

    #[test]
    fn vlow_identity() {
        // v_low = 1 - ∫_0^b (1 - phi)
        let sol = solve_optimal_market(&quadratic(), w(1.0), 1e-10).unwrap();
        let n = sol.samples.len();
        let mut acc = 0.0;
        for wnd in sol.samples.windows(2) {
            acc += 0.5 * ((1.0 - wnd[0].phi) + (1.0 - wnd[1].phi)) * (wnd[1].u - wnd[0].u);
        }
        let _ = n;
        assert!((sol.lower_value() - (1.0 - acc)).abs() < 1e-6);
    }

    #[test]
    fn elasticity_cost_solves_and_matches_semianalytic() {
        let cost = make_cost(CostKind::Elasticity, &[3.0]).unwrap();
        let sol = solve_optimal_market(&cost, w(1.0), 1e-10).unwrap();
        let gold = crate::closedform::elasticity_optimal(w(1.0), 3.0).unwrap();
        assert!(
            (sol.b - gold.b).abs() < 1e-7,
            "cutoff: solver {} vs semi-analytic {}",
            sol.b,
            gold.b
        );
        assert!((sol.lower_value() - gold.vlow).abs() < 1e-6);
    }

    #[test]
    fn elasticity_extremes_match_semianalytic() {
        // near-unit elasticity has exploding curvature at zero quality;
        // high elasticity has a nearly flat cost below the top
        for &eta in &[1.05, 8.0] {
            let cost = make_cost(CostKind::Elasticity, &[eta]).unwrap();
            let sol = solve_optimal_market(&cost, w(0.75), 1e-10).unwrap();
            let gold = crate::closedform::elasticity_optimal(w(0.75), eta).unwrap();
            assert!(
                (sol.b - gold.b).abs() < 1e-6,
                "eta = {eta}: solver b = {} vs {}",
                sol.b,
                gold.b
            );
            assert!(sol.el_residual_max < 1e-6);
        }
    }

    #[test]
    fn generic_poly_cost_close_to_quadratic() {
        // a small quartic correction keeps the solution near quadratic
        let cost = make_cost(CostKind::Generic, &[0.0, 0.0, 0.5, 0.0, 0.01]).unwrap();
        let sol = solve_optimal_market(&cost, w(0.8), 1e-10).unwrap();
        let quad = solve_optimal_market(&quadratic(), w(0.8), 1e-10).unwrap();
        assert!((sol.b - quad.b).abs() < 0.05);
        assert!(sol.el_residual_max < 1e-6);
        let last = sol.samples.last().unwrap();
        assert!(
            (0.8 * last.a - 0.6 * cost.qbar()).abs() < 1e-8,
            "terminal identity"
        );
    }
}
