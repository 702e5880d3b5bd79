//! The optimal-strategy counterexamples: infinite-memory optima attain their
//! values, finite-memory stand-ins are exploited past them.

use crate::config::{get_f64, get_u64, Params};
use crate::report::ResultRow;
use crate::HarnessError;
use countable_games::catalog::{self, strategies};
use countable_games::engine::{forward_reach_exact, simulate_mc};
use countable_games::game::{StateId, Tag};
use countable_games::strategy::{MemorySpec, Mix, Move, Player, Strategy, Visibility};
use serde_json::json;
use std::sync::Arc;

/// Finite-memory Maximizer ladders on the geometric-scatter game: resolve
/// when the rung index matches the mode class, otherwise climb.
fn fr_max_ladder(modes: u64, stride: u64) -> Strategy {
    Strategy::new(
        format!("fr_ladder({modes},{stride})"),
        Player::Maximizer,
        MemorySpec::finite(modes, 0, Visibility::Private),
        false,
        Arc::new(move |s: &StateId, m, _| match s.tag {
            Tag::SDoublePrime => {
                let i = s.param(0) as u64;
                if i % (modes * stride) == m * stride {
                    Mix::dirac(Move::Succ(StateId::new(Tag::R1, vec![s.param(0)])))
                } else {
                    Mix::dirac(Move::Succ(StateId::new(
                        Tag::SDoublePrime,
                        vec![s.param(0) + 1],
                    )))
                }
            }
            _ => Mix::dirac(Move::Action(0)),
        }),
        Arc::new(move |_, _, m, _| Mix::dirac((m + 1) % modes)),
    )
}

/// Finite-memory Minimizer answers on the infinitely branching opener.
fn fr_min_answer(modes: u64) -> Strategy {
    Strategy::new(
        format!("fr_answer({modes})"),
        Player::Minimizer,
        MemorySpec::finite(modes, 0, Visibility::Private),
        false,
        Arc::new(move |s: &StateId, m, _| match s.tag {
            Tag::U => Mix::dirac(Move::Succ(StateId::new(
                Tag::SDoublePrime,
                vec![m as u32 + 1],
            ))),
            _ => Mix::dirac(Move::Action(0)),
        }),
        Arc::new(move |_, _, m, _| Mix::dirac((m + 1) % modes)),
    )
}

/// The refusal-tracking Maximizer attains 2/3 against every tested
/// Minimizer (Monte Carlo; the geometric opener is sampled exactly), and
/// every tested finite-memory ladder is exploited below 2/3 by the computed
/// margin (exact sweeps).
pub fn optmax(p: &Params) -> Result<Vec<ResultRow>, HarnessError> {
    let episodes = get_u64(p, "OPTMAX-23", "episodes")?;
    let seed = get_u64(p, "OPTMAX-23", "seed")?;
    let tol = get_f64(p, "OPTMAX-23", "tol")?;
    let g = catalog::conc_optmax();
    let sigma = strategies::opt_max_conc_optmax();
    let s0 = StateId::bare(Tag::S0);
    let value = 2.0 / 3.0;
    let mut rows = Vec::new();

    let refuse_at = |k: u32| {
        Strategy::md(format!("refuse_{k}"), Player::Minimizer, move |s| match s.tag {
            Tag::SPrime if s.param(0) == k => {
                Move::Succ(StateId::new(Tag::SDoublePrime, vec![1]))
            }
            Tag::SPrime => Move::Succ(StateId::new(Tag::R1, vec![s.param(0)])),
            _ => Move::Action(0),
        })
    };
    for (name, pi) in [
        ("resolve_all", refuse_at(u32::MAX)),
        ("refuse_5", refuse_at(5)),
        (
            "random",
            strategies::random_memoryless(&g, Player::Minimizer, seed ^ 1),
        ),
    ] {
        let est = simulate_mc(&g, &sigma, &pi, &s0, 400, episodes, seed, 0.999)?;
        let mid = (est.interval.lo + est.interval.hi) / 2.0;
        rows.push(ResultRow::new(
            "OPTMAX-23",
            json!({"opponent": name, "episodes": episodes}),
            est.interval.lo,
            est.interval.hi,
            value,
            "closed_form",
            format!("|estimate-2/3|<={tol}"),
            (mid - value).abs() <= tol,
        ));
    }

    for fr in [fr_max_ladder(1, 2), fr_max_ladder(2, 1), fr_max_ladder(3, 1)] {
        let ex = strategies::exploit_fr(&g, &fr)?;
        let est = forward_reach_exact(&g, &fr, &ex.strategy, &s0, 500, 0.0)?;
        rows.push(ResultRow::new(
            "OPTMAX-23",
            json!({"exploited": fr.name, "index": ex.index, "margin": ex.margin}),
            est.interval.lo,
            est.interval.hi,
            value - ex.margin,
            "analytic_bound",
            "margin>0 && attainment<=2/3-margin",
            ex.margin > 0.0 && est.interval.hi <= value - ex.margin + 1e-9,
        ));
    }
    Ok(rows)
}

/// The index-matching Minimizer answer holds every tested opener to at most
/// 1/2 + 1e-3 (exact sweeps), and every tested finite-memory answer is
/// exploited above 1/2 by the computed margin.
pub fn optmin(p: &Params) -> Result<Vec<ResultRow>, HarnessError> {
    let openers = get_u64(p, "OPTMIN-12", "openers")?;
    let seed = get_u64(p, "OPTMIN-12", "seed")?;
    let g = catalog::infbranch_optmin();
    let pi = strategies::opt_min_infbranch().assume_mode_bound(64);
    let s0 = StateId::bare(Tag::S0);
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for k in 0..openers {
        let sigma = strategies::random_memoryless(&g, Player::Maximizer, seed ^ (k + 1));
        let est = forward_reach_exact(&g, &sigma, &pi, &s0, 200, 0.0)?;
        worst = worst.max(est.interval.hi);
    }
    rows.push(ResultRow::new(
        "OPTMIN-12",
        json!({"openers": openers}),
        worst,
        worst,
        0.5 + 1e-3,
        "closed_form",
        "max attainment<=0.5+1e-3",
        worst <= 0.5 + 1e-3,
    ));

    for fr in [fr_min_answer(1), fr_min_answer(2), fr_min_answer(3)] {
        let ex = strategies::exploit_fr(&g, &fr)?;
        let est = forward_reach_exact(&g, &ex.strategy, &fr, &s0, 400, 0.0)?;
        rows.push(ResultRow::new(
            "OPTMIN-12",
            json!({"exploited": fr.name, "index": ex.index, "margin": ex.margin}),
            est.interval.lo,
            est.interval.hi,
            0.5 + ex.margin,
            "analytic_bound",
            "margin>0 && attainment>=1/2+margin",
            ex.margin > 0.0 && est.interval.lo >= 0.5 + ex.margin - 1e-9,
        ));
    }
    Ok(rows)
}
