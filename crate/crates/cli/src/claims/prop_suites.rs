//! Property suites for the sequence utilities and the solver oracles.

use crate::config::{get_u64, Params};
use crate::report::ResultRow;
use crate::HarnessError;
use countable_games::catalog::{self, random_games, strategies};
use countable_games::engine::{forward_reach_exact, freeze_all, simulate_mc};
use countable_games::game::{StateId, Tag};
use countable_games::numerics::{
    product_positive, tail_product_index, weierstrass_bound, Convergence, SeriesOracle,
    TailProductOracle,
};
use countable_games::oracle;
use countable_games::solver::{matrix_game_value, value_iteration, MatrixGame};
use countable_games::strategy::Player;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::sync::Arc;

fn summary_row(
    claim: &str,
    name: &str,
    checked: u64,
    failures: u64,
    worst: f64,
    threshold: f64,
    rule: &str,
) -> ResultRow {
    ResultRow::new(
        claim,
        json!({"suite": name, "instances": checked, "failures": failures}),
        worst,
        worst,
        threshold,
        "oracle",
        rule,
        failures == 0,
    )
}

/// `∏(1-a_k) ≤ 1/(1+Σa_k)` on random sequences.
pub fn wstrass(p: &Params) -> Result<Vec<ResultRow>, HarnessError> {
    let samples = get_u64(p, "WSTRASS", "samples")?;
    let seed = get_u64(p, "WSTRASS", "seed")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0u64;
    let mut worst_gap = f64::NEG_INFINITY;
    for _ in 0..samples {
        let len = rng.gen_range(1..=50);
        let a: Vec<f64> = (0..len).map(|_| rng.gen()).collect();
        let (product, bound) = weierstrass_bound(&a).map_err(|e| HarnessError::Run(e.to_string()))?;
        worst_gap = worst_gap.max(product - bound);
        if product > bound + 1e-12 {
            failures += 1;
        }
    }
    Ok(vec![summary_row(
        "WSTRASS",
        "product_bound",
        samples,
        failures,
        worst_gap,
        0.0,
        "product-bound<=0 on every instance",
    )])
}

/// Certificate-driven classification matches the construction class.
pub fn prodsum(p: &Params) -> Result<Vec<ResultRow>, HarnessError> {
    let samples = get_u64(p, "PRODSUM", "samples")?;
    let seed = get_u64(p, "PRODSUM", "seed")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0u64;
    for _ in 0..samples {
        let (oracle, expect) = match rng.gen_range(0..3) {
            0 => {
                // a_n = c/(n+1)^q with q > 1: tail bound c/((q-1) n^{q-1})
                let c = rng.gen_range(0.1..3.0);
                let q = rng.gen_range(1.4..3.0);
                (
                    SeriesOracle::convergent(
                        move |n| c / ((n + 1) as f64).powf(q),
                        move |n| {
                            if n == 0 {
                                c * (1.0 + 1.0 / (q - 1.0))
                            } else {
                                c / ((q - 1.0) * (n as f64).powf(q - 1.0))
                            }
                        },
                    ),
                    Convergence::ConvergesPositive,
                )
            }
            1 => {
                // a_n = c / (n+1)^q with q < 1/2: divergence witness from the
                // integral lower bound
                let c = rng.gen_range(0.2..1.0);
                let q = rng.gen_range(0.0..0.5);
                (
                    SeriesOracle::divergent(
                        move |n| (c / ((n + 1) as f64).powf(q)).min(1.0),
                        move |m| ((m * (1.0 - q) / c).powf(1.0 / (1.0 - q)) + 2.0) as u64,
                    ),
                    Convergence::DivergesToZero,
                )
            }
            _ => {
                let c = rng.gen_range(0.01..1.0);
                (
                    SeriesOracle::terms_only(move |n| c / n as f64),
                    Convergence::Undecided,
                )
            }
        };
        if product_positive(&oracle, 1 << 22) != expect {
            failures += 1;
        }
    }
    Ok(vec![summary_row(
        "PRODSUM",
        "classification",
        samples,
        failures,
        failures as f64,
        0.0,
        "classification matches construction class",
    )])
}

/// Certified tail indices keep partial products above 1-eps.
pub fn tailprod(p: &Params) -> Result<Vec<ResultRow>, HarnessError> {
    let samples = get_u64(p, "TAILPROD", "samples")?;
    let seed = get_u64(p, "TAILPROD", "seed")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0u64;
    let mut worst = 1.0f64;
    for _ in 0..samples {
        // a_n = 1 - c r^n: -ln a_n <= c r^n / (1-c), tail <= c r^N/((1-c)(1-r))
        let c = rng.gen_range(0.05..0.5);
        let r: f64 = rng.gen_range(0.3..0.9);
        let eps = rng.gen_range(0.01..0.9);
        let oracle = TailProductOracle {
            term: Arc::new(move |n| 1.0 - c * r.powi(n as i32)),
            neg_log_tail: Some(Arc::new(move |n| {
                c * r.powi(n as i32) / ((1.0 - c) * (1.0 - r))
            })),
        };
        let n0 = tail_product_index(&oracle, eps).map_err(|e| HarnessError::Run(e.to_string()))?;
        let partial: f64 = (n0..n0 + 300).map(|n| (oracle.term)(n)).product();
        worst = worst.min(partial - (1.0 - eps));
        if partial < 1.0 - eps - 1e-12 {
            failures += 1;
        }
    }
    Ok(vec![summary_row(
        "TAILPROD",
        "tail_index",
        samples,
        failures,
        worst,
        0.0,
        "partial product from certified index>=1-eps",
    )])
}

/// Cross-checks of the numerical routes against independent oracles.
pub fn oracles(p: &Params) -> Result<Vec<ResultRow>, HarnessError> {
    let matrices = get_u64(p, "ORACLES", "matrices")?;
    let tiny = get_u64(p, "ORACLES", "tiny_games")?;
    let pairs = get_u64(p, "ORACLES", "pairs")?;
    let seed = get_u64(p, "ORACLES", "seed")?;
    let mut rows = Vec::new();

    // matrix solver vs grid search
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut failures = 0u64;
    for _ in 0..matrices {
        let m = [[rng.gen::<f64>(), rng.gen()], [rng.gen(), rng.gen()]];
        let g = MatrixGame::new(vec![m[0].to_vec(), m[1].to_vec()])
            .map_err(|e| HarnessError::Run(e.to_string()))?;
        let (v, _, _) = matrix_game_value(&g).map_err(|e| HarnessError::Run(e.to_string()))?;
        let grid = oracle::grid_matrix_value_2x2(&m, 1e-3);
        let gap = (v - grid).abs();
        worst = worst.max(gap);
        if gap > 2e-3 {
            failures += 1;
        }
    }
    rows.push(summary_row(
        "ORACLES",
        "matrix_vs_grid",
        matrices,
        failures,
        worst,
        2e-3,
        "|solver-grid|<=2e-3",
    ));

    // value iteration vs exhaustive enumeration on tiny turn-based games
    let mut worst = 0.0f64;
    let mut failures = 0u64;
    for s in 0..tiny {
        let g = random_games::random_tiny(seed ^ (s + 100));
        let fg = freeze_all(&g).map_err(|e| HarnessError::Run(e.to_string()))?;
        let vi = value_iteration(&fg, 1e-12, 10_000_000);
        let brute = oracle::bruteforce_game_values(&fg);
        for i in 0..fg.len() {
            let gap = (vi[i] - brute[i]).abs();
            worst = worst.max(gap);
            if gap > 1e-6 {
                failures += 1;
            }
        }
    }
    rows.push(summary_row(
        "ORACLES",
        "value_iteration_vs_bruteforce",
        tiny,
        failures,
        worst,
        1e-6,
        "|vi-bruteforce|<=1e-6 on every state",
    ));

    // exact sweep vs Monte Carlo confidence intervals
    let g = catalog::big_match_n();
    let gtb = catalog::tb_big_match_n();
    let mut failures = 0u64;
    let mut checked = 0u64;
    for k in 0..pairs {
        let (game, sigma, pi, start) = match k % 4 {
            0 => (
                &g,
                strategies::max_bm_strategy((k % 3) as u32, 4 + (k % 5) as u32),
                strategies::min_fair_coin(),
                StateId::new(Tag::C, vec![3]),
            ),
            1 => (
                &g,
                strategies::mr_from_f(&strategies::MrFamily::inverse_squares()),
                strategies::random_memoryless(&g, Player::Minimizer, seed ^ k),
                StateId::new(Tag::C, vec![4]),
            ),
            2 => (
                &g,
                strategies::random_memoryless(&g, Player::Maximizer, seed ^ (2 * k)),
                strategies::min_always((k % 2) as usize),
                StateId::new(Tag::C, vec![2]),
            ),
            _ => (
                &gtb,
                strategies::max_bm_strategy_tb(1, 3),
                strategies::random_memoryless(&gtb, Player::Minimizer, seed ^ (3 * k)),
                StateId::new(Tag::C, vec![1]),
            ),
        };
        let exact = forward_reach_exact(game, &sigma, &pi, &start, 120, 0.0)?;
        let mc = simulate_mc(game, &sigma, &pi, &start, 120, 20_000, seed ^ (7 * k), 0.99)?;
        checked += 1;
        if !mc.interval.intersects(&exact.interval) {
            failures += 1;
        }
    }
    rows.push(summary_row(
        "ORACLES",
        "sweep_vs_monte_carlo",
        checked,
        failures,
        failures as f64,
        0.0,
        "MC confidence interval intersects exact bracket",
    ));
    Ok(rows)
}
