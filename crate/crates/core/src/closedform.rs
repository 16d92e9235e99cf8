//! Analytic engines: the quadratic-cost solution and welfare coordinates,
//! the linear-cost posted-price optimum and its region geometry, and
//! constant-elasticity quantities. These are the golden references the
//! general free-boundary solver is validated against.

use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::num::{bisect, gauss16};
use crate::piecewise::{AnalyticForm, QuantileFn, Segment};
use crate::types::{PayoffPoint, WelfareWeight};

// ---------------------------------------------------------------------------
// Quadratic cost
// ---------------------------------------------------------------------------

/// Closed-form solution of the optimal-market problem for c(q) = q^2/2 and
/// a welfare weight k in (1/2, 1].
#[derive(Debug, Clone, Copy)]
pub struct QuadraticSolution {
    pub k: f64,
    pub lambda: f64,
    pub omega: f64,
    pub eta_coef: f64,
    pub sigma: f64,
    pub rho: f64,
    pub theta: f64,
    pub t_horizon: f64,
    pub b: f64,
    pub cs: f64,
    pub pi: f64,
}

/// Evaluates the trigonometric closed form for the quadratic benchmark.
pub fn quadratic_optimal(k: WelfareWeight) -> Result<QuadraticSolution> {
    let k = k.k();
    if k <= 0.5 {
        return Err(Error::InvalidInput(
            "the quadratic closed form covers k > 1/2; k <= 1/2 is the degenerate top-type market"
                .into(),
        ));
    }
    let lambda = (2.0 * k - 1.0) / k;
    let ratio = (k + 1.0) / (3.0 * k - 1.0); // (k+1)/(3k-1)
    let omega = 0.5 * ratio.sqrt();
    let eta_coef = ratio.sqrt().recip() / k; // (1/k) sqrt((3k-1)/(k+1))
    let sigma = (1.0 - k) / ((k + 1.0) * (3.0 * k - 1.0)).sqrt();
    let rho = ratio.sqrt().recip();
    let theta = ((2.0 * k - 1.0) * ratio.sqrt()).atan();
    let t_horizon = theta / omega;
    let b = 1.0 - (-t_horizon).exp();
    let m = 1.0 - b;

    // welfare coordinates; a series step keeps the k -> 1/2+ limit clean
    let (half_sin_sq, lobe) = if theta < 1e-6 {
        let t2 = theta * theta;
        (
            0.5 * t2 * (1.0 - t2 / 3.0),
            theta * t2 / 3.0 - 2.0 / 15.0 * theta * t2 * t2,
        )
    } else {
        let s = theta.sin();
        (0.5 * s * s, 0.5 * theta - 0.25 * (2.0 * theta).sin())
    };
    let cs = m * (rho + sigma) / omega * (half_sin_sq - sigma * lobe);
    let sin2t = (2.0 * theta).sin();
    let sin_sq = theta.sin() * theta.sin();
    let pi = 0.5 * m
        + 0.5 * m / omega
            * (0.5 * (1.0 + sigma * sigma) * theta + 0.25 * (1.0 - sigma * sigma) * sin2t
                - sigma * sin_sq);

    Ok(QuadraticSolution {
        k,
        lambda,
        omega,
        eta_coef,
        sigma,
        rho,
        theta,
        t_horizon,
        b,
        cs,
        pi,
    })
}

impl QuadraticSolution {
    fn tau(&self, u: f64) -> f64 {
        ((1.0 - u) / (1.0 - self.b)).ln()
    }

    fn envelope(&self, u: f64) -> f64 {
        ((1.0 - self.b) / (1.0 - u)).sqrt()
    }

    /// Optimal virtual value (equals the quality schedule for quadratic
    /// cost).
    pub fn phi(&self, u: f64) -> f64 {
        if u >= self.b {
            return 1.0;
        }
        let w = self.omega * self.tau(u);
        self.envelope(u) * (w.cos() - self.sigma * w.sin())
    }

    /// Optimal market quantile.
    pub fn quantile(&self, u: f64) -> f64 {
        if u >= self.b {
            return 1.0;
        }
        let w = self.omega * self.tau(u);
        self.envelope(u) * (w.cos() + self.rho * w.sin())
    }

    /// Cumulative spillover A(u) along the interior branch.
    pub fn spillover(&self, u: f64) -> f64 {
        if u >= self.b {
            return self.lambda;
        }
        let w = self.omega * self.tau(u);
        self.envelope(u) * (self.lambda * w.cos() - self.eta_coef * w.sin())
    }

    pub fn payoff(&self) -> PayoffPoint {
        PayoffPoint::new(self.cs, self.pi)
    }

    /// Lower support endpoint Q(0).
    pub fn lower_value(&self) -> f64 {
        self.quantile(0.0)
    }

    /// The optimal market as a piecewise-linear quantile with an exact top
    /// atom, sampled on n interior cells.
    pub fn market(&self, n: usize) -> Result<QuantileFn> {
        let n = n.max(2);
        let mut segs = Vec::with_capacity(n + 1);
        let mut prev = (0.0, self.quantile(0.0));
        for i in 1..=n {
            let u = self.b * i as f64 / n as f64;
            let v = if i == n { 1.0 } else { self.quantile(u) };
            segs.push(Segment::linear(prev.0, u, prev.1, v.min(1.0)));
            prev = (u, v.min(1.0));
        }
        segs.push(Segment::constant(self.b, 1.0, 1.0));
        QuantileFn::new(segs)
    }
}

// ---------------------------------------------------------------------------
// Linear cost (posted pricing)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub r: f64,
    pub market: QuantileFn,
    pub payoff: PayoffPoint,
    /// Upstream value k CS + (1-k) Pi at the optimum.
    pub value: f64,
}

/// Optimal market composition and posted price under constant marginal
/// cost `m` with capacity `qcap`: the degenerate top-type market for
/// k <= 1/2, a shifted equal-revenue distribution with a top atom above.
pub fn linear_optimal(k: WelfareWeight, m: f64, qcap: f64) -> Result<LinearSolution> {
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
    let kv = k.k();
    if k.is_degenerate() {
        let pi = qcap * (1.0 - m);
        return Ok(LinearSolution {
            r: 1.0,
            market: QuantileFn::delta_one(),
            payoff: PayoffPoint::new(0.0, pi),
            value: (1.0 - kv) * pi,
        });
    }
    let lambda = k.lambda();
    let atom = (-lambda).exp();
    let r = m + (1.0 - m) * atom;
    let b = 1.0 - atom;
    let market = QuantileFn::new(vec![
        Segment::analytic(0.0, b, AnalyticForm::EqualRevenue { a: r - m, shift: m }),
        Segment::constant(b, 1.0, 1.0),
    ])?;
    let pi = qcap * (1.0 - m) * atom;
    let cs = pi * lambda;
    Ok(LinearSolution {
        r,
        market,
        payoff: PayoffPoint::new(cs, pi),
        value: qcap * kv * (1.0 - m) * atom,
    })
}

/// Upper boundary of the implementable posted-price region:
/// `f(pi) = pi ln(A/pi)` with `A = qcap (1-m)`, and `f(0) = 0`.
pub fn linear_boundary(pi: f64, m: f64, qcap: f64) -> Result<f64> {
    let a = qcap * (1.0 - m);
    if !(0.0..=a + 1e-12).contains(&pi) {
        return Err(Error::Domain(format!("profit {pi} outside [0, {a}]")));
    }
    if pi == 0.0 {
        return Ok(0.0);
    }
    Ok(pi * (a / pi).ln())
}

// ---------------------------------------------------------------------------
// Constant elasticity cost
// ---------------------------------------------------------------------------

/// Semi-analytic solution for c(q) = q^eta / eta: the log-time horizon and
/// the quality/quantile schedules come from one-dimensional integrals of
/// rational functions over the auxiliary variable z in [0, lambda].
#[derive(Debug, Clone)]
pub struct ElasticitySolution {
    pub k: f64,
    pub eta: f64,
    pub lambda: f64,
    pub t_horizon: f64,
    pub b: f64,
    /// Lower support endpoint of the optimal market.
    pub vlow: f64,
    /// Q-hat evaluated at z = lambda (equals vlow).
    pub qhat_lambda: f64,
    z_nodes: Vec<f64>,
    /// cumulative ∫_0^z f_eta
    time_cum: Vec<f64>,
    /// cumulative ∫_0^z (1+s)/denominator = -log xhat(z)
    logx_cum: Vec<f64>,
}

const Z_TABLE: usize = 512;

pub fn elasticity_optimal(k: WelfareWeight, eta: f64) -> Result<ElasticitySolution> {
    if !eta.is_finite() || eta <= 1.0 {
        return Err(Error::InvalidInput(format!(
            "elasticity requires eta > 1, got {eta}"
        )));
    }
    let kv = k.k();
    if k.is_degenerate() {
        return Err(Error::InvalidInput(
            "elasticity closed form covers k > 1/2; k <= 1/2 is degenerate".into(),
        ));
    }
    let lambda = k.lambda();
    let denom = move |s: f64| 1.0 + (eta - 1.0 - lambda) * s + s * s;
    let f_time = move |s: f64| (1.0 + lambda + (eta - 2.0) * s) / denom(s);
    let f_logx = move |s: f64| (1.0 + s) / denom(s);

    let mut z_nodes = Vec::with_capacity(Z_TABLE + 1);
    let mut time_cum = Vec::with_capacity(Z_TABLE + 1);
    let mut logx_cum = Vec::with_capacity(Z_TABLE + 1);
    let mut t_acc = 0.0;
    let mut x_acc = 0.0;
    z_nodes.push(0.0);
    time_cum.push(0.0);
    logx_cum.push(0.0);
    for i in 1..=Z_TABLE {
        let z0 = lambda * (i - 1) as f64 / Z_TABLE as f64;
        let z1 = lambda * i as f64 / Z_TABLE as f64;
        t_acc += gauss16(f_time, z0, z1);
        x_acc += gauss16(f_logx, z0, z1);
        z_nodes.push(z1);
        time_cum.push(t_acc);
        logx_cum.push(x_acc);
    }
    let t_horizon = t_acc;
    let b = 1.0 - (-t_horizon).exp();
    let xhat_lambda = (-x_acc).exp();
    let qhat_lambda = xhat_lambda.powf(eta - 1.0) * (1.0 + (eta - 1.0) * lambda);
    Ok(ElasticitySolution {
        k: kv,
        eta,
        lambda,
        t_horizon,
        b,
        vlow: qhat_lambda,
        qhat_lambda,
        z_nodes,
        time_cum,
        logx_cum,
    })
}

impl ElasticitySolution {
    fn denom(&self, s: f64) -> f64 {
        1.0 + (self.eta - 1.0 - self.lambda) * s + s * s
    }

    /// ∫_0^z f_eta, refined from the cached table.
    fn time_at(&self, z: f64) -> f64 {
        let idx = self.locate(z);
        let f = |s: f64| (1.0 + self.lambda + (self.eta - 2.0) * s) / self.denom(s);
        self.time_cum[idx] + gauss16(f, self.z_nodes[idx], z)
    }

    fn logx_at(&self, z: f64) -> f64 {
        let idx = self.locate(z);
        let f = |s: f64| (1.0 + s) / self.denom(s);
        self.logx_cum[idx] + gauss16(f, self.z_nodes[idx], z)
    }

    fn locate(&self, z: f64) -> usize {
        match self
            .z_nodes
            .binary_search_by(|n| n.partial_cmp(&z).unwrap())
        {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
    }

    /// Interior quality schedule parameterized by z: x-hat(z).
    pub fn xhat(&self, z: f64) -> f64 {
        (-self.logx_at(z)).exp()
    }

    /// Induced quantile parameterized by z.
    pub fn qhat(&self, z: f64) -> f64 {
        self.xhat(z).powf(self.eta - 1.0) * (1.0 + (self.eta - 1.0) * z)
    }

    /// Solve t_eta(z) = -ln(1-u) for the auxiliary variable at rank u:
    /// t_eta(z) = T - ∫_0^z f decreases from T to 0 on [0, lambda].
    pub fn z_of_rank(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return self.lambda;
        }
        if u >= self.b {
            return 0.0;
        }
        let target = self.t_horizon + (1.0 - u).ln(); // = T - t = ∫_0^z f
                                                      // monotone increasing in z
        bisect(|z| self.time_at(z) - target, 0.0, self.lambda, 1e-14, 200).unwrap_or(0.0)
    }

    /// Interior quality schedule in rank space.
    pub fn x_of_rank(&self, u: f64) -> f64 {
        if u >= self.b {
            1.0
        } else {
            self.xhat(self.z_of_rank(u))
        }
    }

    /// Optimal virtual value in rank space: x^(eta-1) below the cutoff, 1
    /// above.
    pub fn phi_of_rank(&self, u: f64) -> f64 {
        if u >= self.b {
            1.0
        } else {
            self.x_of_rank(u).powf(self.eta - 1.0)
        }
    }

    /// Optimal market quantile in rank space.
    pub fn quantile(&self, u: f64) -> f64 {
        if u >= self.b {
            1.0
        } else {
            self.qhat(self.z_of_rank(u))
        }
    }

    /// The optimal market as a piecewise-linear quantile with an exact top
    /// atom.
    pub fn market(&self, n: usize) -> Result<QuantileFn> {
        let n = n.max(2);
        let mut segs = Vec::with_capacity(n + 1);
        let mut prev = (0.0, self.quantile(0.0).min(1.0));
        for i in 1..=n {
            let u = self.b * i as f64 / n as f64;
            let v = if i == n {
                1.0
            } else {
                self.quantile(u).min(1.0)
            };
            segs.push(Segment::linear(prev.0, u, prev.1, v));
            prev = (u, v);
        }
        segs.push(Segment::constant(self.b, 1.0, 1.0));
        QuantileFn::new(segs)
    }
}

/// Welfare value of the constructed elasticity optimizer, evaluated
/// through the full screening pipeline.
pub fn elasticity_value(sol: &ElasticitySolution, cost: &CostModel, samples: usize) -> Result<f64> {
    let market = sol.market(samples)?;
    let payoff = crate::screening::evaluate_market(&market, cost)?;
    Ok(payoff.weighted(sol.k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_2, FRAC_PI_4, PI};

    fn w(k: f64) -> WelfareWeight {
        WelfareWeight::new(k).unwrap()
    }

    #[test]
    fn quadratic_k1_golden() {
        let sol = quadratic_optimal(w(1.0)).unwrap();
        assert!((sol.theta - FRAC_PI_4).abs() < 1e-14);
        assert!((sol.omega - 0.5).abs() < 1e-14);
        assert!((sol.t_horizon - FRAC_PI_2).abs() < 1e-14);
        let b_expect = 1.0 - (-FRAC_PI_2).exp();
        assert!((sol.b - b_expect).abs() < 1e-14);
        let m = (-FRAC_PI_2).exp();
        assert!((sol.cs - 0.5 * m).abs() < 1e-14, "cs = {}", sol.cs);
        assert!(
            (sol.pi - m * (0.75 + PI / 8.0)).abs() < 1e-14,
            "pi = {}",
            sol.pi
        );
        // headline magnitudes
        assert!((sol.b - 0.792120).abs() < 1e-6);
        assert!((sol.cs - 0.103940).abs() < 1e-6);
        assert!((sol.pi - 0.237544).abs() < 1e-6);
    }

    #[test]
    fn quadratic_k075_cutoff() {
        let sol = quadratic_optimal(w(0.75)).unwrap();
        // T = 2 sqrt(1.25/1.75) atan(0.5 sqrt(1.75/1.25))
        let t_expect = 2.0 * (1.25f64 / 1.75).sqrt() * (0.5 * (1.75f64 / 1.25).sqrt()).atan();
        assert!((sol.t_horizon - t_expect).abs() < 1e-14);
        assert!((sol.b - (1.0 - (-t_expect).exp())).abs() < 1e-14);
        assert!((sol.b - 0.5947).abs() < 1e-3);
    }

    #[test]
    fn quadratic_limit_at_half() {
        let sol = quadratic_optimal(w(0.5000001)).unwrap();
        assert!(sol.b < 1e-5);
        assert!(sol.cs < 1e-10);
        assert!((sol.pi - 0.5).abs() < 1e-5);
    }

    #[test]
    fn quadratic_rejects_low_k() {
        assert!(quadratic_optimal(w(0.5)).is_err());
        assert!(quadratic_optimal(w(0.3)).is_err());
    }

    #[test]
    fn quadratic_schedules_satisfy_boundary_conditions() {
        for &k in &[0.6, 0.75, 0.9, 1.0] {
            let sol = quadratic_optimal(w(k)).unwrap();
            assert!((sol.phi(sol.b) - 1.0).abs() < 1e-12);
            assert!((sol.quantile(sol.b) - 1.0).abs() < 1e-10);
            assert!((sol.spillover(0.0)).abs() < 1e-12, "A(0) at k = {k}");
            assert!((sol.spillover(sol.b) - sol.lambda).abs() < 1e-10);
            // algebraic relation Q = mu phi - A on the interior
            let mu = (3.0 * k - 1.0) / k;
            for i in 0..50 {
                let u = sol.b * i as f64 / 50.0;
                let res = sol.quantile(u) - mu * sol.phi(u) + sol.spillover(u);
                assert!(res.abs() < 1e-12, "algebraic relation at u = {u}: {res}");
            }
        }
    }

    #[test]
    fn quadratic_vlow_matches_interior_deficit() {
        // v_low = 1 - ∫_0^b (1 - phi)
        for &k in &[0.7, 1.0] {
            let sol = quadratic_optimal(w(k)).unwrap();
            let n = 20_000;
            let mut acc = 0.0;
            for i in 0..n {
                let u = sol.b * (i as f64 + 0.5) / n as f64;
                acc += (1.0 - sol.phi(u)) * sol.b / n as f64;
            }
            assert!((sol.lower_value() - (1.0 - acc)).abs() < 1e-7);
        }
    }

    #[test]
    fn linear_one_over_e_benchmark() {
        let sol = linear_optimal(w(1.0), 0.0, 1.0).unwrap();
        assert!((sol.r - 1.0 / E).abs() < 1e-14);
        assert!((sol.payoff.pi - 1.0 / E).abs() < 1e-14);
        assert!((sol.payoff.cs - 1.0 / E).abs() < 1e-14);
        assert!((sol.value - 1.0 / E).abs() < 1e-14);
    }

    #[test]
    fn linear_k075() {
        let sol = linear_optimal(w(0.75), 0.0, 1.0).unwrap();
        let atom = (-2.0f64 / 3.0).exp();
        assert!((sol.r - atom).abs() < 1e-14);
        assert!((sol.payoff.pi - atom).abs() < 1e-14);
        assert!((sol.payoff.cs - atom * 2.0 / 3.0).abs() < 1e-14);
        assert!((sol.r - 0.513417).abs() < 1e-6);
    }

    #[test]
    fn linear_degenerate_branch() {
        let sol = linear_optimal(w(0.4), 0.5, 2.0).unwrap();
        assert_eq!(sol.r, 1.0);
        assert!((sol.payoff.pi - 1.0).abs() < 1e-14);
        assert_eq!(sol.payoff.cs, 0.0);
        assert!((sol.value - 0.6).abs() < 1e-14);
    }

    #[test]
    fn boundary_function_values() {
        assert!((linear_boundary(1.0 / E, 0.0, 1.0).unwrap() - 1.0 / E).abs() < 1e-14);
        assert_eq!(linear_boundary(1.0, 0.0, 1.0).unwrap(), 0.0);
        assert!((linear_boundary(0.5, 0.0, 1.0).unwrap() - 0.5 * 2.0f64.ln()).abs() < 1e-14);
        assert_eq!(linear_boundary(0.0, 0.0, 1.0).unwrap(), 0.0);
        assert!(linear_boundary(1.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn boundary_is_concave_with_peak_at_a_over_e() {
        for &(m, qcap) in &[(0.0, 1.0), (0.5, 2.0)] {
            let a = qcap * (1.0 - m);
            let n = 400;
            let f: Vec<f64> = (1..n)
                .map(|i| linear_boundary(a * i as f64 / n as f64, m, qcap).unwrap())
                .collect();
            for w in f.windows(3) {
                assert!(
                    w[2] - 2.0 * w[1] + w[0] <= 1e-12,
                    "second difference positive"
                );
            }
            let peak = f
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.partial_cmp(y.1).unwrap())
                .map(|(i, _)| a * (i + 1) as f64 / n as f64)
                .unwrap();
            assert!(
                (peak - a / E).abs() < 2.0 * a / n as f64,
                "peak at {peak}, expected {}",
                a / E
            );
        }
    }

    #[test]
    fn elasticity_two_matches_quadratic() {
        for &k in &[0.6, 0.75, 0.9, 1.0] {
            let e = elasticity_optimal(w(k), 2.0).unwrap();
            let q = quadratic_optimal(w(k)).unwrap();
            assert!(
                (e.t_horizon - q.t_horizon).abs() < 1e-12,
                "T mismatch at k = {k}: {} vs {}",
                e.t_horizon,
                q.t_horizon
            );
            assert!((e.b - q.b).abs() < 1e-12);
            // interior schedules agree too
            for i in 1..10 {
                let u = q.b * i as f64 / 10.0;
                assert!(
                    (e.x_of_rank(u) - q.phi(u)).abs() < 1e-9,
                    "x at u={u}, k={k}"
                );
                assert!(
                    (e.quantile(u) - q.quantile(u)).abs() < 1e-9,
                    "Q at u={u}, k={k}"
                );
            }
        }
    }

    #[test]
    fn elasticity_k1_eta2_horizon_is_half_pi() {
        let e = elasticity_optimal(w(1.0), 2.0).unwrap();
        assert!((e.t_horizon - FRAC_PI_2).abs() < 1e-13);
    }

    #[test]
    fn elasticity_monotone_in_eta() {
        let mut prev_b = f64::INFINITY;
        let mut prev_vlow = f64::INFINITY;
        for &eta in &[1.5, 2.0, 3.0, 5.0] {
            let e = elasticity_optimal(w(1.0), eta).unwrap();
            assert!(e.b < prev_b, "cutoff should fall with eta");
            assert!(e.vlow < prev_vlow, "lower endpoint should fall with eta");
            prev_b = e.b;
            prev_vlow = e.vlow;
        }
    }

    #[test]
    fn elasticity_rejects_bad_eta() {
        assert!(elasticity_optimal(w(1.0), 1.0).is_err());
        assert!(elasticity_optimal(w(0.5), 2.0).is_err());
    }
}
