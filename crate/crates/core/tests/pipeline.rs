//! Cross-module integration: the solver's market fed back through the
//! ironing and screening pipeline, reduction identities on random markets,
//! and menus built from solved markets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use screenopt::corpus::market_corpus;
use screenopt::fbvp::{solve_optimal_market, to_market};
use screenopt::frontier::{convex_order_check, mps_finite};
use screenopt::ironing::{concavified_revenue, regularize, truncate_nonneg};
use screenopt::screening::{evaluate_market, seller_menu};
use screenopt::{make_cost, CostKind, WelfareWeight};

#[test]
fn pipeline_reproduces_closed_form_welfare_coordinates() {
    // hull -> virtual values -> quadrature on the stored closed-form
    // market agrees with the analytic welfare formulas
    let cost = make_cost(CostKind::Quadratic, &[]).unwrap();
    for &k in &[0.6, 0.75, 0.9, 1.0] {
        let gold = screenopt::closedform::quadratic_optimal(WelfareWeight::new(k).unwrap()).unwrap();
        let market = gold.market(8192).unwrap();
        let p = evaluate_market(&market, &cost).unwrap();
        assert!((p.cs - gold.cs).abs() < 1e-8, "cs gap {:.2e} at k = {k}", (p.cs - gold.cs).abs());
        assert!((p.pi - gold.pi).abs() < 1e-8, "pi gap {:.2e} at k = {k}", (p.pi - gold.pi).abs());
    }
}

#[test]
fn solver_market_round_trips_under_elasticity_cost() {
    let cost = make_cost(CostKind::Elasticity, &[3.0]).unwrap();
    let k = WelfareWeight::new(0.9).unwrap();
    let sol = solve_optimal_market(&cost, k, 1e-10).unwrap();
    let market = to_market(&sol).unwrap();
    let payoff = evaluate_market(&market, &cost).unwrap();
    assert!(
        (payoff.cs - sol.cs).abs() < 1e-6,
        "cs {} vs {}",
        payoff.cs,
        sol.cs
    );
    assert!(
        (payoff.pi - sol.pi).abs() < 1e-6,
        "pi {} vs {}",
        payoff.pi,
        sol.pi
    );
}

#[test]
fn reduction_identities_on_random_corpus() {
    let cost = make_cost(CostKind::Quadratic, &[]).unwrap();
    for market in market_corpus(3, 15) {
        let reg = regularize(&market).unwrap();
        let (_, phi) = concavified_revenue(&market).unwrap();
        let (_, truncated) = truncate_nonneg(&phi).unwrap();
        for &k in &[0.0, 0.5, 1.0] {
            let base = evaluate_market(&market, &cost).unwrap().weighted(k);
            let regular = evaluate_market(&reg, &cost).unwrap().weighted(k);
            let trunc = evaluate_market(&truncated, &cost).unwrap().weighted(k);
            assert!(
                (trunc - regular).abs() < 1e-9,
                "truncation identity broke at k = {k}"
            );
            assert!(
                regular >= base - 1e-9,
                "regularization dominance broke at k = {k}"
            );
        }
    }
}

#[test]
fn menu_from_solver_market_is_incentive_compatible() {
    let cost = make_cost(CostKind::Quadratic, &[]).unwrap();
    let k = WelfareWeight::new(0.8).unwrap();
    let market = to_market(&solve_optimal_market(&cost, k, 1e-10).unwrap()).unwrap();
    let menu = seller_menu(&market, &cost, 512).unwrap();
    let atom = menu.top_atom.expect("optimal market has a top atom");
    assert!((atom.q - 1.0).abs() < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let i = rng.gen_range(0..menu.rows.len());
        let j = rng.gen_range(0..menu.rows.len());
        let vi = menu.rows[i].v;
        let own = vi * menu.rows[i].q - menu.rows[i].t;
        let other = vi * menu.rows[j].q - menu.rows[j].t;
        assert!(own >= other - 1e-7, "IC violated between rows {i} and {j}");
        assert!(own >= -1e-9, "IR violated at row {i}");
    }
}

#[test]
fn equal_revenue_market_screened_under_quadratic_cost() {
    // the linear-cost optimum at k = 1 (equal-revenue tail with a 1/e top
    // atom) screened under a quadratic cost: the hull is flat-then-linear,
    // so the interior is excluded and the top atom takes the single
    // full-extraction contract
    let cost = make_cost(CostKind::Quadratic, &[]).unwrap();
    let k = WelfareWeight::new(1.0).unwrap();
    let market = screenopt::closedform::linear_optimal(k, 0.0, 1.0)
        .unwrap()
        .market;
    let menu = seller_menu(&market, &cost, 256).unwrap();
    let atom = menu.top_atom.expect("top atom present");
    assert!((atom.mass - (-1.0f64).exp()).abs() < 1e-12);
    assert!((atom.q - 1.0).abs() < 1e-12);
    assert!(
        (atom.t - 1.0).abs() < 1e-9,
        "full extraction at the top, t = {}",
        atom.t
    );
    // buyer utility at the top equals the market's consumer surplus density
    let payoff = evaluate_market(&market, &cost).unwrap();
    let top_utility = 1.0 * atom.q - atom.t;
    assert!(payoff.cs.abs() < 1e-9);
    assert!(top_utility.abs() < 1e-9);
    assert!((payoff.pi - atom.mass * 0.5).abs() < 1e-9);
}

#[test]
fn solver_rejects_curvature_violations_via_bracket_failure() {
    // a hand-built polynomial whose declared top quality is inconsistent
    // with its marginal cost: the quality bracket cannot hold and the
    // solver must refuse rather than iron over the multiplicity
    let bad = screenopt::CostModel::GenericPoly {
        coeffs: vec![0.0, 0.0, 0.5, -1.0 / 6.0],
        qbar: 0.9,
    };
    let k = WelfareWeight::new(0.9).unwrap();
    let err = solve_optimal_market(&bad, k, 1e-10);
    assert!(err.is_err(), "inconsistent cost must be refused");
}

#[test]
fn finite_spread_of_solver_market_is_dominated() {
    let cost = make_cost(CostKind::Quadratic, &[]).unwrap();
    let k = WelfareWeight::new(0.75).unwrap();
    let sol = solve_optimal_market(&cost, k, 1e-10).unwrap();
    let market = to_market(&sol).unwrap();
    let spread = mps_finite(&market, 4, 0.1).unwrap();
    assert!(convex_order_check(&spread, &market, 256));
    let w_base = evaluate_market(&market, &cost).unwrap().weighted(0.75);
    let w_spread = evaluate_market(&spread, &cost).unwrap().weighted(0.75);
    assert!(
        w_base >= w_spread - 1e-8,
        "the optimal contraction must weakly dominate its spreads"
    );
}
