//! Engine-level behavior: exact sweeps against hand-computed chains, Monte
//! Carlo agreement, the induced-MDP construction, and strategy validation.

use countable_games::catalog::{self, random_games, strategies};
use countable_games::engine::{
    best_response_value, forward_reach_exact, induce_mdp, simulate_mc,
};
use countable_games::game::{BoundaryPolicy, StateId, Tag};
use countable_games::numerics::weierstrass_bound;
use countable_games::strategy::{restrict_time_constant, validate, Mix, Move, Player, Strategy};
use countable_games::catalog::windows;

fn c(i: u32) -> StateId {
    StateId::new(Tag::C, vec![i])
}

#[test]
fn sweep_resolves_immediate_jump() {
    // resolving with probability one against the cooperative column ends the
    // round instantly in the target
    let g = catalog::big_match_n();
    let fam = strategies::MrFamily::new(|_| 1.0, countable_games::numerics::SeriesOracle::terms_only(|_| 1.0));
    let sigma = strategies::mr_from_f(&fam);
    let pi = strategies::min_always(1);
    let est = forward_reach_exact(&g, &sigma, &pi, &c(5), 1, 0.0).unwrap();
    assert!((est.interval.lo - 1.0).abs() < 1e-12);
    assert!((est.interval.hi - 1.0).abs() < 1e-12);
}

#[test]
fn sweep_matches_hand_product() {
    // descending from c_3 against the all-zero column survives each stage
    // with 1 - 1/(k+1)^2: (3/4)(8/9)(15/16) = 5/8
    let g = catalog::big_match_n();
    let sigma = strategies::mr_from_f(&strategies::MrFamily::inverse_squares());
    let pi = strategies::min_always(0);
    let est = forward_reach_exact(&g, &sigma, &pi, &c(3), 10, 0.0).unwrap();
    assert!((est.interval.lo - 0.625).abs() < 1e-12);
    assert!((est.interval.hi - 0.625).abs() < 1e-12);
}

#[test]
fn sweep_horizon_zero_is_vacuous() {
    let g = catalog::big_match_n();
    let sigma = strategies::max_bm_strategy(0, 3);
    let pi = strategies::min_fair_coin();
    let est = forward_reach_exact(&g, &sigma, &pi, &c(2), 0, 0.0).unwrap();
    assert_eq!(est.interval.lo, 0.0);
    assert_eq!(est.interval.hi, 1.0);
}

#[test]
fn sweep_lower_bound_monotone_in_horizon() {
    let g = catalog::big_match_n();
    let sigma = strategies::max_bm_strategy(2, 4);
    let pi = strategies::min_fair_coin();
    let mut prev_lo = 0.0;
    for h in [0u64, 5, 10, 20, 40, 80] {
        let est = forward_reach_exact(&g, &sigma, &pi, &c(2), h, 0.0).unwrap();
        assert!(est.interval.lo >= prev_lo - 1e-12);
        assert!(est.interval.lo <= est.interval.hi + 1e-12);
        prev_lo = est.interval.lo;
    }
}

#[test]
fn mc_deterministic_and_exact_on_chains() {
    // a three-step deterministic chain to the target
    let g = random_games::random_turn_game(
        3,
        random_games::RandomGameShape {
            states: 5,
            max_decisions: 0,
            min_decisions: 0,
            acyclic: true,
        },
    );
    let sigma = strategies::passive_max();
    let pi = strategies::passive_min();
    let start = g.canonical(0).unwrap();
    let exact = forward_reach_exact(&g, &sigma, &pi, &start, 10, 0.0).unwrap();
    let est1 = simulate_mc(&g, &sigma, &pi, &start, 10, 2000, 42, 0.95).unwrap();
    let est2 = simulate_mc(&g, &sigma, &pi, &start, 10, 2000, 42, 0.95).unwrap();
    assert_eq!(est1.interval.lo, est2.interval.lo);
    assert_eq!(est1.interval.hi, est2.interval.hi);
    assert!(est1.interval.intersects(&exact.interval));
}

#[test]
fn mc_ci_intersects_exact_sweep() {
    let g = catalog::big_match_n();
    let pairs: Vec<(Strategy, Strategy)> = vec![
        (
            strategies::max_bm_strategy(0, 6),
            strategies::min_fair_coin(),
        ),
        (
            strategies::mr_from_f(&strategies::MrFamily::inverse_squares()),
            strategies::min_always(1),
        ),
        (
            strategies::mr_from_f(&strategies::MrFamily::constant(0.3)),
            strategies::min_fair_coin(),
        ),
        (
            strategies::random_memoryless(&g, Player::Maximizer, 11),
            strategies::random_memoryless(&g, Player::Minimizer, 12),
        ),
    ];
    for (k, (sigma, pi)) in pairs.iter().enumerate() {
        let start = c(4);
        let exact = forward_reach_exact(&g, sigma, pi, &start, 150, 0.0).unwrap();
        let mc = simulate_mc(&g, sigma, pi, &start, 150, 20_000, 1000 + k as u64, 0.99).unwrap();
        assert!(
            mc.interval.intersects(&exact.interval),
            "pair {k}: MC {:?} vs exact {:?}",
            mc.interval,
            exact.interval
        );
    }
}

#[test]
fn induced_mdp_attainment_matches_guarantee() {
    // fixing the scheduled mixing and letting the opponent respond exactly
    let g = catalog::big_match_n();
    for (x, n) in [(2u32, 5u32), (1, 3)] {
        let sigma = strategies::max_bm_strategy(x, n);
        let trunc = windows::bm_window(x + n + 2, BoundaryPolicy::PessimisticMax);
        let mdp = induce_mdp(&g, &sigma, &trunc).unwrap();
        let values = best_response_value(&mdp.game, Player::Minimizer).unwrap();
        let start = mdp.product(&c(x), 0).unwrap();
        let bound = n as f64 / (2.0 * n as f64 + 2.0);
        // value iteration approaches the fixed point from below, so leave
        // room for the stopping tolerance
        assert!(
            values[&start].lo >= bound - 1e-6,
            "x={x} N={n}: {} < {bound}",
            values[&start].lo
        );
    }
}

#[test]
fn induced_mdp_against_fixed_min_frees_maximizer() {
    // with the all-zero column fixed, the Maximizer walks down unhindered
    let g = catalog::big_match_n();
    let pi = strategies::min_always(0);
    let trunc = windows::bm_window(10, BoundaryPolicy::PessimisticMax);
    let mdp = induce_mdp(&g, &pi, &trunc).unwrap();
    let values = best_response_value(&mdp.game, Player::Maximizer).unwrap();
    let start = mdp.product(&c(4), 0).unwrap();
    assert!((values[&start].lo - 1.0).abs() < 1e-6);
}

#[test]
fn induced_mdp_product_size_scales_with_modes() {
    let g = catalog::big_match_n();
    let trunc = windows::bm_window(8, BoundaryPolicy::PessimisticMax);
    let one_mode = induce_mdp(&g, &strategies::max_bm_strategy(0, 4), &trunc).unwrap();
    // a 2-mode public strategy doubles the product state count
    let two_mode = {
        use countable_games::strategy::{MemorySpec, Visibility};
        use std::sync::Arc;
        let s = Strategy::new(
            "bit_flipper",
            Player::Maximizer,
            MemorySpec::finite(2, 0, Visibility::Public),
            false,
            Arc::new(|_s: &StateId, m, _| {
                Mix(vec![
                    (Move::Action((m % 2) as usize), 0.75),
                    (Move::Action(((m + 1) % 2) as usize), 0.25),
                ])
            }),
            Arc::new(|_, _, m, _| Mix::dirac(1 - m.min(1))),
        );
        induce_mdp(&g, &s, &trunc).unwrap()
    };
    let count = |mdp: &countable_games::engine::InducedMdp| {
        let mut n = 0u64;
        while mdp.game.canonical(n).is_some() {
            n += 1;
        }
        n
    };
    assert_eq!(count(&two_mode), 2 * count(&one_mode));
}

#[test]
fn best_response_decays_against_constant_mix_below_product_bound() {
    // against the constant-half profile the opponent pushes the attainment
    // under the survival product bound
    let g = catalog::big_match_n();
    let fam = strategies::MrFamily::constant(0.5);
    let sigma = strategies::mr_from_f(&fam);
    let trunc = windows::bm_window(25, BoundaryPolicy::PessimisticMax);
    let mdp = induce_mdp(&g, &sigma, &trunc).unwrap();
    let values = best_response_value(&mdp.game, Player::Minimizer).unwrap();
    let mut prev = 1.0;
    for x in 1..=15u32 {
        let v = values[&mdp.product(&c(x), 0).unwrap()].lo;
        assert!(v <= prev + 1e-9, "attainment not decreasing at {x}");
        let (_, bound) = weierstrass_bound(&vec![0.5; x as usize]).unwrap();
        assert!(v <= bound + 1e-9, "x={x}: {v} above product bound {bound}");
        prev = v;
    }
}

#[test]
fn validator_accepts_catalog_and_flags_illegal_moves() {
    let g = catalog::big_match_n();
    assert!(validate(&strategies::min_fair_coin(), &g, 100, 4).ok());
    assert!(validate(&strategies::max_bm_strategy(0, 5), &g, 100, 4).ok());

    // a strategy putting mass on a nonexistent action
    let bad = Strategy::memoryless("bad", Player::Minimizer, |_s| {
        Mix(vec![(Move::Action(7), 1.0)])
    });
    let report = validate(&bad, &g, 20, 2);
    assert!(!report.ok());

    // a turn strategy aiming at an illegal successor
    let gtb = catalog::tb_big_match_n();
    let teleport = Strategy::md("teleport", Player::Minimizer, |_s| Move::Succ(c(0)));
    assert!(!validate(&teleport, &gtb, 60, 2).ok());
}

#[test]
fn time_freeze_produces_the_pointwise_strategy() {
    // a Markov mix drifting like 1/(i+1)^2 + 1/(t+1), frozen at t = 999
    let markov = Strategy::markov("drift", Player::Maximizer, |s: &StateId, t| {
        if s.tag == Tag::C && s.param(0) >= 1 {
            let p = (1.0 / ((s.param(0) + 1) as f64).powi(2) + 1.0 / (t + 1) as f64).min(1.0);
            Mix(vec![(Move::Action(1), p), (Move::Action(0), 1.0 - p)])
        } else {
            Mix::dirac(Move::Action(0))
        }
    });
    let frozen = restrict_time_constant(&markov, 999);
    assert!(!frozen.spec.uses_step_counter);
    for i in [1u32, 4, 9] {
        let expect = 1.0 / ((i + 1) as f64).powi(2) + 1e-3;
        for t in [0u64, 5, 123] {
            let mix = frozen.act(&c(i), 0, t);
            assert!((mix.entries()[0].1 - expect).abs() < 1e-12);
        }
    }
    // freezing a memoryless strategy changes nothing
    let mr = strategies::mr_from_f(&strategies::MrFamily::inverse_squares());
    let frozen = restrict_time_constant(&mr, 17);
    for i in 0..20u32 {
        assert!(frozen.act(&c(i), 0, 0).approx_eq(&mr.act(&c(i), 0, 3)));
    }
    // freezing the drift at two different times differs somewhere
    let f1 = restrict_time_constant(&markov, 10);
    let f2 = restrict_time_constant(&markov, 1000);
    assert!(!f1.act(&c(3), 0, 0).approx_eq(&f2.act(&c(3), 0, 0)));
}
