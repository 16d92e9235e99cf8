//! Seeded random market generator for property suites: step markets,
//! piecewise-linear markets, gappy supports, top atoms, and equal-revenue
//! tails, all valid by construction.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::piecewise::{AnalyticForm, QuantileFn, Segment};

/// Draws one random market composition.
pub fn random_market(rng: &mut ChaCha8Rng) -> QuantileFn {
    match rng.gen_range(0..4) {
        0 => random_step(rng),
        1 => random_linear(rng),
        2 => random_with_top_atom(rng),
        _ => random_equal_revenue(rng),
    }
}

/// A corpus of n distinct random markets from one seed.
pub fn market_corpus(seed: u64, n: usize) -> Vec<QuantileFn> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_market(&mut rng)).collect()
}

fn sorted_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut vals: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=1.0)).collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    if vals.is_empty() {
        vals.push(rng.gen_range(0.1..0.9));
    }
    vals
}

fn random_masses(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.gen_range(1e-3f64..1.0).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|m| m / total).collect()
}

fn random_step(rng: &mut ChaCha8Rng) -> QuantileFn {
    let n = rng.gen_range(2..8);
    let values = sorted_values(rng, n);
    let masses = random_masses(rng, values.len());
    let atoms: Vec<(f64, f64)> = values.into_iter().zip(masses).collect();
    QuantileFn::from_atoms(&atoms).expect("random step market is valid")
}

fn random_linear(rng: &mut ChaCha8Rng) -> QuantileFn {
    let n = rng.gen_range(2..6);
    let mut ranks: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.05..0.95)).collect();
    ranks.push(0.0);
    ranks.push(1.0);
    ranks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ranks.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    let vals = {
        let mut v = sorted_values(rng, ranks.len());
        while v.len() < ranks.len() {
            v.push(1.0);
        }
        v.truncate(ranks.len());
        v
    };
    let pts: Vec<(f64, f64)> = ranks.into_iter().zip(vals).collect();
    QuantileFn::from_points(&pts).expect("random linear market is valid")
}

fn random_with_top_atom(rng: &mut ChaCha8Rng) -> QuantileFn {
    let b = rng.gen_range(0.3..0.9);
    let v0 = rng.gen_range(0.0..0.5);
    let v1 = rng.gen_range(v0..1.0);
    let mid = rng.gen_range(0.2..0.8) * b;
    let vm = v0 + (v1 - v0) * rng.gen_range(0.2..0.8);
    let segs = vec![
        Segment::linear(0.0, mid, v0, vm),
        Segment::linear(mid, b, vm, v1),
        Segment::constant(b, 1.0, 1.0),
    ];
    QuantileFn::new(segs).expect("random top-atom market is valid")
}

fn random_equal_revenue(rng: &mut ChaCha8Rng) -> QuantileFn {
    // a/(1-u) on [0, b] reaching value a/(1-b) <= 1, then an atom at 1
    let b = rng.gen_range(0.2..0.8);
    let top = rng.gen_range(0.5..1.0);
    let a = top * (1.0 - b);
    let segs = vec![
        Segment::analytic(0.0, b, AnalyticForm::EqualRevenue { a, shift: 0.0 }),
        Segment::constant(b, 1.0, 1.0),
    ];
    QuantileFn::new(segs).expect("random equal-revenue market is valid")
}
