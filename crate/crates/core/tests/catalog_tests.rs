//! Catalog-wide structural invariants: exact kernels, legal enumerations,
//! strategy/game compatibility, and the analytic certificates carried by the
//! counter-strategy constructors.

use countable_games::catalog::{self, strategies};
use countable_games::game::{frac, Dist, NodeKind, StateId, Successors, Tag};
use countable_games::numerics::Convergence;
use countable_games::strategy::{validate, Player};
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn c(i: u32) -> StateId {
    StateId::new(Tag::C, vec![i])
}

fn catalog_games() -> Vec<countable_games::Game> {
    vec![
        catalog::big_match_n(),
        catalog::big_match_z(12),
        catalog::tb_big_match_n(),
        catalog::tb_big_match_simple(std::sync::Arc::new(|i, m| {
            frac(1, (i + 2 + m as u32) as i64)
        })),
        catalog::inf_branch_no_mr(),
        catalog::inf_branch_no_markov(),
        catalog::nested(2),
        catalog::nested(3),
        catalog::combined(),
        catalog::conc_optmax(),
        catalog::infbranch_optmin(),
    ]
}

#[test]
fn enumerations_are_injective_and_stable() {
    for g in catalog_games() {
        let a = g.enumerate_states(10_000);
        let b = g.enumerate_states(10_000);
        assert_eq!(a, b, "{} enumeration unstable", g.label());
        let set: std::collections::BTreeSet<_> = a.iter().collect();
        assert_eq!(set.len(), a.len(), "{} enumeration collides", g.label());
    }
}

#[test]
fn first_thousand_states_typecheck() {
    for g in catalog_games() {
        for s in g.enumerate_states(1000) {
            match g.kind_of(&s) {
                NodeKind::MaxTurn(succ) | NodeKind::MinTurn(succ) => {
                    let prefix = succ.prefix(8);
                    assert!(!prefix.is_empty(), "{}: {s} has no successor", g.label());
                }
                NodeKind::Random(d) => check_mass(&g, &s, &d),
                NodeKind::Concurrent(node) => {
                    assert!(node.max_actions >= 1 && node.min_actions >= 1);
                    for a in 0..node.max_actions {
                        for b in 0..node.min_actions {
                            check_mass(&g, &s, &node.kernel(a, b));
                        }
                    }
                }
            }
        }
    }
}

fn check_mass(g: &countable_games::Game, s: &StateId, d: &Dist<StateId>) {
    for n in 1..=64usize {
        let covered: f64 = d
            .prefix(n)
            .iter()
            .map(|(_, p)| p.to_f64().unwrap())
            .sum();
        let tail = d.tail_bound(n);
        assert!(
            tail >= 1.0 - covered - 1e-12,
            "{}: tail bound too small at {s} (n={n})",
            g.label()
        );
        if d.is_finite() && covered > 1.0 + 1e-12 {
            panic!("{}: mass above one at {s}", g.label());
        }
    }
}

#[test]
fn catalog_targets_are_absorbing() {
    for g in catalog_games() {
        for s in g.enumerate_states(500) {
            if !g.is_target(&s) {
                continue;
            }
            match g.kind_of(&s) {
                NodeKind::MaxTurn(Successors::Finite(succ)) => {
                    assert!(succ.iter().all(|t| *t == s), "{}: target {s} leaks", g.label())
                }
                _ => panic!("{}: target {s} not an absorbing turn node", g.label()),
            }
        }
    }
}

#[test]
fn tb_kernels_match_defining_rationals() {
    let g = catalog::tb_big_match_n();
    for i in 1..=50u32 {
        for j in (1..=50u32).step_by(7) {
            let NodeKind::Random(Dist::Finite(v0)) =
                g.kind_of(&StateId::new(Tag::R0, vec![i, j]))
            else {
                panic!()
            };
            let lose_mass = v0
                .iter()
                .find(|(t, _)| t.tag == Tag::Lose)
                .map(|(_, p)| p.clone())
                .unwrap();
            assert_eq!(lose_mass, frac(1, j as i64));
            let NodeKind::Random(Dist::Finite(v1)) =
                g.kind_of(&StateId::new(Tag::R1, vec![i, j]))
            else {
                panic!()
            };
            let win_mass = v1
                .iter()
                .find(|(t, _)| t.tag == Tag::C && t.param(0) == 0)
                .map(|(_, p)| p.clone())
                .unwrap();
            assert_eq!(win_mass, frac(1, j as i64));
        }
    }
}

#[test]
fn tb_simple_reads_back_its_probabilities() {
    let p = std::sync::Arc::new(|i: u32, m: u8| frac(1, (i + 2 + m as u32) as i64));
    let g = catalog::tb_big_match_simple(p.clone());
    for i in 1..=20u32 {
        let NodeKind::MaxTurn(Successors::Finite(succ)) = g.kind_of(&c(i)) else {
            panic!()
        };
        assert_eq!(succ.len(), 2, "branching degree two");
        for m in 0..2u32 {
            let NodeKind::Random(Dist::Finite(v)) =
                g.kind_of(&StateId::new(Tag::R1, vec![i, m]))
            else {
                panic!()
            };
            let to_target = v
                .iter()
                .find(|(t, _)| t.tag == Tag::C && t.param(0) == 0)
                .unwrap()
                .1
                .clone();
            assert_eq!(to_target, p(i, m as u8));
        }
    }
}

#[test]
fn stalling_in_the_chain_never_reaches_target() {
    // walking the chain forever yields no progress at any horizon
    let g = catalog::tb_big_match_n();
    let sigma = strategies::tb_walker("staller".into(), |_| None);
    let pi = strategies::min_always(0);
    let est = countable_games::engine::forward_reach_exact(&g, &sigma, &pi, &c(2), 400, 0.0)
        .unwrap();
    assert_eq!(est.interval.lo, 0.0);
}

#[test]
fn max_bm_probabilities_follow_schedule() {
    let s = strategies::max_bm_strategy(0, 3);
    // at c_3 (n = 0): resolve with probability 1
    let mix = s.act(&c(3), 0, 0);
    assert!(mix.is_dirac());
    assert_eq!(mix.entries()[0].0, countable_games::Move::Action(1));
    // at c_1 (n = 2): probability 1/9
    let mix = s.act(&c(1), 0, 5);
    let p1: f64 = mix
        .entries()
        .iter()
        .filter(|(m, _)| *m == countable_games::Move::Action(1))
        .map(|(_, p)| p)
        .sum();
    assert!((p1 - 1.0 / 9.0).abs() < 1e-15);
}

#[test]
fn catalog_strategies_validate_against_their_games() {
    let bm = catalog::big_match_n();
    let tb = catalog::tb_big_match_n();
    let no_mr = catalog::inf_branch_no_mr();
    let no_markov = catalog::inf_branch_no_markov();
    let optmax = catalog::conc_optmax();
    let optmin = catalog::infbranch_optmin();

    let cases: Vec<(&countable_games::Game, countable_games::Strategy)> = vec![
        (&bm, strategies::max_bm_strategy(0, 5)),
        (&bm, strategies::min_fair_coin()),
        (&bm, strategies::min_always(0)),
        (&bm, strategies::min_always(1)),
        (&bm, strategies::mr_from_f(&strategies::MrFamily::inverse_squares())),
        (&tb, strategies::max_bm_strategy_tb(1, 4)),
        (&tb, strategies::min_always(1)),
        (&no_mr, strategies::max_as_winning(&no_mr).unwrap()),
        (&no_markov, strategies::markov_parity_summable().strategy),
        (&no_markov, strategies::markov_parity_divergent().strategy),
        (&optmax, strategies::opt_max_conc_optmax()),
        (&optmin, strategies::opt_min_infbranch()),
    ];
    for (g, s) in cases {
        let report = validate(&s, g, 120, 4);
        assert!(
            report.ok(),
            "{} on {}: {:?}",
            s.name,
            g.label(),
            report.violations.first().map(|v| v.to_string())
        );
    }
}

#[test]
fn min_vs_mr_selects_case_from_certificate() {
    let summable = strategies::MrFamily::inverse_squares();
    let counter = strategies::min_vs_mr(&summable).unwrap();
    assert_eq!(counter.case, Convergence::ConvergesPositive);
    // always picks action 1
    let mv = counter.strategy.act(&c(7), 0, 0);
    assert_eq!(mv.entries()[0].0, countable_games::Move::Action(1));
    // bound(x) certifies the resolution tail
    let b5 = (counter.bound)(5);
    let true_tail: f64 = (5..10_000u64).map(|k| 1.0 / ((k + 1) as f64).powi(2)).sum();
    assert!(b5 >= true_tail && b5 <= true_tail + 1e-3);

    let divergent = strategies::MrFamily::constant(0.3);
    let counter = strategies::min_vs_mr(&divergent).unwrap();
    assert_eq!(counter.case, Convergence::DivergesToZero);
    let mv = counter.strategy.act(&c(7), 0, 0);
    assert_eq!(mv.entries()[0].0, countable_games::Move::Action(0));
    assert!(((counter.bound)(10) - 1.0 / 4.0).abs() < 1e-12);

    let opaque = strategies::MrFamily::new(
        |k| 1.0 / k as f64,
        countable_games::numerics::SeriesOracle::terms_only(|k| 1.0 / k as f64),
    );
    assert!(strategies::min_vs_mr(&opaque).is_err());
}

#[test]
fn min_vs_mr_bounds_respected_by_sweeps() {
    let g = catalog::big_match_n();
    for fam in [
        strategies::MrFamily::inverse_squares(),
        strategies::MrFamily::constant(0.3),
    ] {
        let sigma = strategies::mr_from_f(&fam);
        let counter = strategies::min_vs_mr(&fam).unwrap();
        for x in [5u32, 10, 20] {
            let est = countable_games::engine::forward_reach_exact(
                &g,
                &sigma,
                &counter.strategy,
                &c(x),
                600,
                0.0,
            )
            .unwrap();
            let bound = (counter.bound)(x as u64);
            assert!(
                est.interval.lo <= bound + 1e-9,
                "x={x}: lo {} above bound {bound}",
                est.interval.lo
            );
        }
    }
}

#[test]
fn accumulation_oracles_verify_their_witnesses() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
    for fam in [
        strategies::markov_parity_summable(),
        strategies::markov_parity_divergent(),
    ] {
        for _ in 0..100 {
            let i = rng.gen_range(1..60u64);
            let eps = rng.gen_range(1e-6..0.2f64);
            let t0 = rng.gen_range(0..5000u64);
            assert!(fam.oracle.verify(i, eps, t0));
        }
    }
}

#[test]
fn min_vs_markov_entry_satisfies_partial_sum_inequality() {
    let fam = strategies::markov_parity_divergent();
    let eps = 0.1;
    let pi = strategies::min_vs_markov(&fam.oracle, &fam.series, fam.classification, eps).unwrap();
    // cycle 0 budget is eps/2; the entry must satisfy sum_{i<=i0} f(i) >= 2/eps
    let mv = pi.act(&StateId::bare(Tag::U), 0, 0);
    let countable_games::Move::Succ(b) = mv.entries()[0].0.clone() else {
        panic!()
    };
    assert_eq!(b.tag, Tag::B);
    let i0 = b.param(0) as u64;
    let partial: f64 = (1..=i0).map(|i| (fam.series.term)(i)).sum();
    assert!(partial >= 2.0 / eps, "partial {partial} below {}", 2.0 / eps);

    // mismatched certificates are rejected
    let lying = countable_games::numerics::SeriesOracle::terms_only(|_| 0.5);
    assert!(
        strategies::min_vs_markov(&fam.oracle, &lying, fam.classification, eps).is_err()
    );
}

#[test]
fn min_vs_markov_delays_reach_witnessed_stages() {
    let fam = strategies::markov_parity_summable();
    let pi = strategies::min_vs_markov(&fam.oracle, &fam.series, fam.classification, 0.1).unwrap();
    for t in [3u64, 10, 77] {
        let mv = pi.act(&StateId::new(Tag::B, vec![4]), 0, t);
        let countable_games::Move::Succ(b) = mv.entries()[0].0.clone() else {
            panic!()
        };
        assert_eq!(b.tag, Tag::Bij);
        let delay = b.param(1) as u64;
        // arrival stage t + 1 + delay must satisfy the closeness condition
        let t_arr = t + 1 + delay;
        let f = (fam.oracle.f_at)(4, t_arr);
        let fl = (fam.oracle.f_limit)(4);
        assert!(f <= fl + 0.5f64.powi(4) * 0.05 / 2.0 + 1e-12);
    }
}

#[test]
fn exploiters_compute_positive_margins() {
    let g = catalog::conc_optmax();
    let fr = strategies::random_memoryless(&g, Player::Maximizer, 3);
    let ex = strategies::exploit_fr(&g, &fr).unwrap();
    assert!(ex.margin > 0.0);
    let g = catalog::infbranch_optmin();
    let fr = strategies::random_memoryless(&g, Player::Minimizer, 4);
    let ex = strategies::exploit_fr(&g, &fr).unwrap();
    assert!(ex.margin > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn act_masses_are_probability_one(
        x in 0u32..8,
        ncap in 0u32..8,
        i in 0u32..40,
        t in 0u64..1000,
    ) {
        let s = strategies::max_bm_strategy(x, ncap);
        let mix = s.act(&c(i), 0, t);
        prop_assert!((mix.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mr_strategies_are_time_constant(i in 0u32..50, t1 in 0u64..1000, t2 in 0u64..1000) {
        let s = strategies::mr_from_f(&strategies::MrFamily::inverse_squares());
        let a = s.act(&c(i), 0, t1);
        let b = s.act(&c(i), 0, t2);
        prop_assert!(a.approx_eq(&b));
    }
}
