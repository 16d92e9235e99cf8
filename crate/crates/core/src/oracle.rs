//! Independent brute-force maximizer of the reduced objective over
//! discretized monotone virtual-value profiles. Small instances are
//! enumerated exhaustively; larger ones run a cyclic coordinate ascent.
//! Both validate the free-boundary solver's structure and values from a
//! direction that shares none of its machinery.

use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::num::golden_max;
use crate::screening::pointwise_quality_profit;
use crate::types::WelfareWeight;

/// Exact objective `k CS + (1-k) Pi` of an n-cell step profile: cell i
/// occupies ranks [i/n, (i+1)/n) at virtual value `levels[i]`. Profit and
/// the in-cell wedge integral both have closed forms, so the evaluation
/// involves no quadrature at all.
pub fn discretized_objective(levels: &[f64], cost: &CostModel, k: WelfareWeight) -> Result<f64> {
    let n = levels.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty level profile".into()));
    }
    for w in levels.windows(2) {
        if w[1] < w[0] {
            return Err(Error::InvalidInput("levels must be nondecreasing".into()));
        }
    }
    if levels[0] < 0.0 || levels[n - 1] > 1.0 {
        return Err(Error::InvalidInput("levels must lie in [0,1]".into()));
    }
    let kv = k.k();
    let nf = n as f64;
    let mut suffix = 0.0; // (1/n) sum of levels in cells above i
    let mut cs = 0.0;
    let mut pi = 0.0;
    for i in (0..n).rev() {
        let phi = levels[i];
        let (q, p) = pointwise_quality_profit(phi, cost);
        pi += p / nf;
        let u0 = i as f64 / nf;
        let u1 = (i + 1) as f64 / nf;
        // Q(u) - phi = (phi u1 + suffix - phi)/(1-u) inside the cell
        let wedge = phi * u1 + suffix - phi;
        if wedge.abs() > 1e-300 && u1 < 1.0 {
            cs += q * wedge * ((1.0 - u0) / (1.0 - u1)).ln();
        } else if wedge.abs() > 1e-300 && i + 1 == n {
            // top cell: the wedge vanishes identically (Q = phi there)
        }
        suffix += phi / nf;
    }
    Ok(kv * cs + (1.0 - kv) * pi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    Exhaustive,
    Ascent,
}

/// Result of a brute-force search: the best profile found and its
/// objective value.
#[derive(Debug, Clone)]
pub struct OracleOutcome {
    pub levels: Vec<f64>,
    pub objective: f64,
}

const EXHAUSTIVE_BUDGET: f64 = 1e7;

/// Maximizes the discretized objective over monotone n-cell profiles.
///
/// * `Exhaustive` enumerates every nondecreasing profile on the level grid
///   {0, 1/m, ..., 1} (budget-checked: C(n+m, n) <= 1e7), partitioned
///   across threads by the top cell's level.
/// * `Ascent` runs cyclic coordinate maximization over continuous levels
///   from the all-ones start, with monotonicity projection and ties pushed
///   toward the higher level.
pub fn oracle_maximize(
    cost: &CostModel,
    k: WelfareWeight,
    n: usize,
    m: usize,
    mode: OracleMode,
) -> Result<OracleOutcome> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one cell".into()));
    }
    match mode {
        OracleMode::Exhaustive => exhaustive(cost, k, n, m),
        OracleMode::Ascent => ascent(cost, k, n),
    }
}

fn binomial(a: usize, b: usize) -> f64 {
    let mut acc = 1.0f64;
    for i in 0..b.min(a - b) {
        acc *= (a - i) as f64 / (i + 1) as f64;
    }
    acc
}

fn thread_count() -> usize {
    std::env::var("SCREENOPT_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|p| p.get())
                .unwrap_or(1)
        })
}

struct CellTables {
    /// q(level) and pi(level)/n per grid level
    q: Vec<f64>,
    pi_over_n: Vec<f64>,
    /// ln((1-u_i)/(1-u_{i+1})) per cell, 0 for the top cell
    lnr: Vec<f64>,
    /// u_{i+1} per cell
    u1: Vec<f64>,
    level_of: Vec<f64>,
    n: usize,
}

impl CellTables {
    fn new(cost: &CostModel, n: usize, m: usize) -> CellTables {
        let nf = n as f64;
        let mut q = Vec::with_capacity(m + 1);
        let mut pi_over_n = Vec::with_capacity(m + 1);
        let mut level_of = Vec::with_capacity(m + 1);
        for l in 0..=m {
            let lev = l as f64 / m as f64;
            let (qq, pp) = pointwise_quality_profit(lev, cost);
            q.push(qq);
            pi_over_n.push(pp / nf);
            level_of.push(lev);
        }
        let mut lnr = Vec::with_capacity(n);
        let mut u1s = Vec::with_capacity(n);
        for i in 0..n {
            let u0 = i as f64 / nf;
            let u1 = (i + 1) as f64 / nf;
            lnr.push(if i + 1 == n {
                0.0
            } else {
                ((1.0 - u0) / (1.0 - u1)).ln()
            });
            u1s.push(u1);
        }
        CellTables {
            q,
            pi_over_n,
            lnr,
            u1: u1s,
            level_of,
            n,
        }
    }
}

/// Depth-first enumeration from the top cell downward (levels
/// nonincreasing as the recursion descends), carrying the suffix sum so
/// each node costs O(1).
#[allow(clippy::too_many_arguments)]
fn descend(
    t: &CellTables,
    kv: f64,
    cell: usize,
    max_level: usize,
    suffix: f64,
    j_acc: f64,
    stack: &mut Vec<usize>,
    best: &mut (f64, Vec<usize>),
) {
    for l in 0..=max_level {
        let phi = t.level_of[l];
        let wedge = phi * t.u1[cell] + suffix - phi;
        let cs_i = if cell + 1 == t.n {
            0.0
        } else {
            t.q[l] * wedge * t.lnr[cell]
        };
        let j = j_acc + kv * cs_i + (1.0 - kv) * t.pi_over_n[l];
        stack.push(l);
        if cell == 0 {
            if j > best.0 {
                best.0 = j;
                best.1 = stack.clone();
            }
        } else {
            descend(
                t,
                kv,
                cell - 1,
                l,
                suffix + phi / t.n as f64,
                j,
                stack,
                best,
            );
        }
        stack.pop();
    }
}

fn exhaustive(cost: &CostModel, k: WelfareWeight, n: usize, m: usize) -> Result<OracleOutcome> {
    if m == 0 {
        return Err(Error::InvalidInput("level grid needs m >= 1".into()));
    }
    let count = binomial(n + m, n);
    if count > EXHAUSTIVE_BUDGET {
        return Err(Error::Budget(format!(
            "C({}, {n}) = {count:.3e} monotone profiles exceeds the {EXHAUSTIVE_BUDGET:.0e} budget",
            n + m
        )));
    }
    let tables = CellTables::new(cost, n, m);
    let kv = k.k();

    // partition by the top cell's level across threads
    let workers = thread_count().min(m + 1).max(1);
    let results = std::thread::scope(|scope| {
        let tables = &tables;
        let mut handles = Vec::new();
        for w in 0..workers {
            handles.push(scope.spawn(move || {
                let mut best = (f64::NEG_INFINITY, Vec::new());
                let mut stack = Vec::with_capacity(n);
                for top in (0..=m).skip(w).step_by(workers) {
                    let phi = tables.level_of[top];
                    let j0 = (1.0 - kv) * tables.pi_over_n[top];
                    stack.push(top);
                    if n == 1 {
                        if j0 > best.0 {
                            best = (j0, stack.clone());
                        }
                    } else {
                        descend(
                            tables,
                            kv,
                            n - 2,
                            top,
                            phi / n as f64,
                            j0,
                            &mut stack,
                            &mut best,
                        );
                    }
                    stack.pop();
                }
                best
            }));
        }
        handles
            .into_iter()
            .map(|h| h.join().expect("oracle worker"))
            .collect::<Vec<_>>()
    });

    let mut best = (f64::NEG_INFINITY, Vec::new());
    for r in results {
        if r.0 > best.0 {
            best = r;
        }
    }
    // the stack is built top cell first; reverse into rank order
    let levels: Vec<f64> = best.1.iter().rev().map(|&l| tables.level_of[l]).collect();
    let objective = discretized_objective(&levels, cost, k)?;
    Ok(OracleOutcome { levels, objective })
}

fn ascent(cost: &CostModel, k: WelfareWeight, n: usize) -> Result<OracleOutcome> {
    let mut levels = vec![1.0; n];
    let mut current = discretized_objective(&levels, cost, k)?;
    for _sweep in 0..500 {
        let mut improved = 0.0;
        for i in 0..n {
            let lo = if i == 0 { 0.0 } else { levels[i - 1] };
            let hi = if i + 1 == n { 1.0 } else { levels[i + 1] };
            if hi - lo < 1e-14 {
                continue;
            }
            let eval = |x: f64| {
                let mut trial = levels.clone();
                trial[i] = x;
                discretized_objective(&trial, cost, k).unwrap_or(f64::NEG_INFINITY)
            };
            // coarse scan plus golden refinement inside the best cell
            let grid = 32;
            let mut best = (levels[i], current);
            for g in 0..=grid {
                let x = lo + (hi - lo) * g as f64 / grid as f64;
                let j = eval(x);
                // ties go to the higher level
                if j > best.1 + 1e-15 || (j >= best.1 - 1e-15 && x > best.0) {
                    best = (x, j);
                }
            }
            let cell = (hi - lo) / grid as f64;
            let (xg, jg) = golden_max(
                eval,
                (best.0 - cell).max(lo),
                (best.0 + cell).min(hi),
                1e-12,
            );
            if jg > best.1 {
                best = (xg, jg);
            }
            if best.1 > current + 1e-15 {
                improved += best.1 - current;
                levels[i] = best.0;
                current = best.1;
            }
        }
        if improved <= 1e-12 {
            break;
        }
    }
    Ok(OracleOutcome {
        levels: levels.clone(),
        objective: current,
    })
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

    /// Independent Riemann-sum evaluation of the step-profile objective.
    fn riemann_objective(levels: &[f64], cost: &CostModel, k: f64, pts: usize) -> f64 {
        let n = levels.len();
        let phi_at = |u: f64| levels[((u * n as f64) as usize).min(n - 1)];
        let tail = |u: f64| {
            // exact ∫_u^1 phi for a step profile
            let i = ((u * n as f64) as usize).min(n - 1);
            let mut acc = levels[i] * ((i + 1) as f64 / n as f64 - u);
            for (j, &l) in levels.iter().enumerate().skip(i + 1) {
                let _ = j;
                acc += l / n as f64;
            }
            acc
        };
        let mut cs = 0.0;
        let mut pi = 0.0;
        for s in 0..pts {
            let u = (s as f64 + 0.5) / pts as f64;
            let phi = phi_at(u);
            let (q, p) = pointwise_quality_profit(phi, cost);
            let qv = tail(u) / (1.0 - u);
            cs += (qv - phi) * q / pts as f64;
            pi += p / pts as f64;
        }
        k * cs + (1.0 - k) * pi
    }

    #[test]
    fn all_ones_is_delta_one_payoff() {
        for &k in &[0.0, 0.5, 0.8, 1.0] {
            let j = discretized_objective(&[1.0; 6], &quadratic(), w(k)).unwrap();
            assert!((j - (1.0 - k) * 0.5).abs() < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn two_cell_profile_matches_riemann_oracle() {
        let cost = quadratic();
        let levels = [0.5, 1.0];
        // frozen from the Riemann oracle: CS = (ln 2)/8 for k = 1
        let expect = 2.0f64.ln() / 8.0;
        let j1 = discretized_objective(&levels, &cost, w(1.0)).unwrap();
        assert!(
            (j1 - expect).abs() < 1e-14,
            "closed form {j1} vs (ln 2)/8 = {expect}"
        );
        let r1 = riemann_objective(&levels, &cost, 1.0, 2_000_000);
        assert!((j1 - r1).abs() < 1e-6, "closed form {j1} vs riemann {r1}");

        // k = 0: profit only: (pi(0.5) + pi(1))/2 = (0.125 + 0.5)/2
        let j0 = discretized_objective(&levels, &cost, w(0.0)).unwrap();
        assert!((j0 - 0.3125).abs() < 1e-14);
    }

    #[test]
    fn random_profiles_match_riemann_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let cost = quadratic();
        for _ in 0..10 {
            let n = rng.gen_range(2..7);
            let mut levels: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for &k in &[0.0, 0.6, 1.0] {
                let j = discretized_objective(&levels, &cost, w(k)).unwrap();
                let r = riemann_objective(&levels, &cost, k, 400_000);
                assert!((j - r).abs() < 2e-5, "n = {n}, k = {k}: {j} vs {r}");
            }
        }
    }

    #[test]
    fn rejects_non_monotone_levels() {
        assert!(discretized_objective(&[0.5, 0.4], &quadratic(), w(1.0)).is_err());
        assert!(discretized_objective(&[0.5, 1.2], &quadratic(), w(1.0)).is_err());
    }

    #[test]
    fn exhaustive_total_surplus_picks_all_ones() {
        let out = oracle_maximize(&quadratic(), w(0.5), 4, 10, OracleMode::Exhaustive).unwrap();
        assert!(out.levels.iter().all(|&l| l == 1.0), "{:?}", out.levels);
        assert!((out.objective - 0.25).abs() < 1e-14);
    }

    #[test]
    fn exhaustive_budget_guard() {
        let err = oracle_maximize(&quadratic(), w(1.0), 40, 100, OracleMode::Exhaustive);
        assert!(matches!(err, Err(Error::Budget(_))));
    }

    #[test]
    fn monotone_refinement_improves() {
        let cost = quadratic();
        let j2 = oracle_maximize(&cost, w(1.0), 2, 12, OracleMode::Exhaustive)
            .unwrap()
            .objective;
        let j4 = oracle_maximize(&cost, w(1.0), 4, 12, OracleMode::Exhaustive)
            .unwrap()
            .objective;
        let j8 = oracle_maximize(&cost, w(1.0), 8, 12, OracleMode::Exhaustive)
            .unwrap()
            .objective;
        assert!(j4 >= j2 - 1e-15);
        assert!(j8 >= j4 - 1e-15);
    }

    #[test]
    fn exhaustive_structure_echo_small() {
        // k > 1/2: no zero cell, a terminal block of ones, strictly
        // increasing interior at the grid resolution
        let out = oracle_maximize(&quadratic(), w(1.0), 6, 16, OracleMode::Exhaustive).unwrap();
        assert!(out.levels[0] > 0.0, "no exclusion: {:?}", out.levels);
        assert_eq!(*out.levels.last().unwrap(), 1.0, "top cell binds");
        let interior: Vec<f64> = out.levels.iter().copied().filter(|&l| l < 1.0).collect();
        for pair in interior.windows(2) {
            assert!(pair[1] > pair[0], "interior bunching in {:?}", out.levels);
        }
    }

    #[test]
    fn ascent_brackets_solver_value() {
        let cost = quadratic();
        let k = w(0.9);
        let out = oracle_maximize(&cost, k, 32, 0, OracleMode::Ascent).unwrap();
        let gold = crate::closedform::quadratic_optimal(k).unwrap();
        let j_star = 0.9 * gold.cs + 0.1 * gold.pi;
        assert!(
            out.objective <= j_star + 1e-9,
            "oracle {} above optimum {j_star}",
            out.objective
        );
        assert!(
            out.objective >= j_star - 2.0 / 32.0,
            "oracle {} too far below optimum {j_star}",
            out.objective
        );
    }

    #[test]
    fn sampled_solver_profile_converges() {
        let cost = quadratic();
        let k = w(1.0);
        let gold = crate::closedform::quadratic_optimal(k).unwrap();
        let j_star = gold.cs; // k = 1
        let mut prev_gap = f64::INFINITY;
        for &n in &[16usize, 32, 64, 128] {
            let levels: Vec<f64> = (0..n)
                .map(|i| gold.phi((i as f64 + 0.5) / n as f64).min(1.0))
                .collect();
            let j = discretized_objective(&levels, &cost, k).unwrap();
            let gap = j_star - j;
            assert!(gap > -1e-12, "step profile cannot beat the optimum");
            assert!(gap < prev_gap, "gap should shrink with refinement");
            prev_gap = gap;
        }
        assert!(
            prev_gap < 0.02,
            "O(1/n) convergence leaves gap {prev_gap} at n = 128"
        );
    }
}
