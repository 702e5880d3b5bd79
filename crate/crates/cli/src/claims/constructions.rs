//! Constructive procedures: the acyclic MD choice rule and plastering.

use crate::config::{get_f64, get_list_f64, get_u64, Params};
use crate::report::ResultRow;
use crate::HarnessError;
use countable_games::catalog::{random_games, windows};
use countable_games::engine::{best_response_value, freeze_all, induce_mdp};
use countable_games::game::{truncate, BoundaryPolicy, FrozenKind, StateId, Tag};
use countable_games::oracle;
use countable_games::solver::{
    acyclic_min_md, layer, plaster, value_iteration, StationaryMove,
};
use countable_games::strategy::Player;
use serde_json::json;
use std::collections::HashMap;
use std::sync::Arc;

/// The slack-threshold MD choice stays within `val(s0)(1+eps)` against the
/// exhaustive Maximizer best response on random acyclic games.
pub fn acyclic_min(p: &Params) -> Result<Vec<ResultRow>, HarnessError> {
    let games = get_u64(p, "ACYCLIC-MIN", "games")?;
    let states = get_u64(p, "ACYCLIC-MIN", "states")? as usize;
    let eps_list = get_list_f64(p, "ACYCLIC-MIN", "eps_list")?;
    let mut rows = Vec::new();
    for eps in eps_list {
        let mut worst_ratio = 0.0f64;
        let mut complaints = 0usize;
        for seed in 0..games {
            let g = random_games::random_acyclic(seed, states);
            let fg = freeze_all(&g).map_err(|e| HarnessError::Run(e.to_string()))?;
            let values = value_iteration(&fg, 1e-12, 10_000_000);
            let vmap: HashMap<StateId, f64> = fg
                .states
                .iter()
                .cloned()
                .zip(values.iter().copied())
                .collect();
            let start = g.canonical(0).unwrap();
            let val0 = vmap[&start];
            let vm = vmap.clone();
            let built = acyclic_min_md(
                &g,
                Arc::new(move |s| vm.get(s).copied()),
                eps,
                Arc::new(|s: &StateId| s.param(0) as u64 + 1),
            );
            let profile: Vec<Option<StationaryMove>> = fg
                .states
                .iter()
                .enumerate()
                .map(|(i, s)| match &fg.kinds[i] {
                    FrozenKind::MinTurn(succ) if !succ.is_empty() => {
                        let mv = built.strategy.act(s, 0, 0);
                        let countable_games::Move::Succ(t) = mv.entries()[0].0.clone() else {
                            return None;
                        };
                        succ.iter()
                            .position(|&k| fg.states[k] == t)
                            .map(StationaryMove::Succ)
                    }
                    _ => None,
                })
                .collect();
            let response = oracle::bruteforce_response(&fg, None, Some(&profile));
            let attained = response[fg.index_of(&start).unwrap()];
            complaints += built.complaints.lock().unwrap().len();
            if val0 > 1e-12 {
                worst_ratio = worst_ratio.max(attained / val0);
            } else if attained > 1e-9 {
                worst_ratio = f64::INFINITY;
            }
        }
        rows.push(ResultRow::new(
            "ACYCLIC-MIN",
            json!({"eps": eps, "games": games}),
            worst_ratio,
            worst_ratio,
            1.0 + eps,
            "oracle",
            "worst attainment ratio<=1+eps; no unsatisfiable states",
            worst_ratio <= 1.0 + eps + 1e-9 && complaints == 0,
        ));
    }
    Ok(rows)
}

/// Plastering the layered truncated big match: ledger invariants hold and
/// the public 1-bit strategy read back from the fixings attains the window
/// value minus eps from every inner-layer position, verified through the
/// induced MDP and exact best response.
pub fn plaster_one_bit(p: &Params) -> Result<Vec<ResultRow>, HarnessError> {
    let radius = get_u64(p, "PLASTER-1BIT", "radius")? as u32;
    let eps = get_f64(p, "PLASTER-1BIT", "eps")?;
    let g = countable_games::catalog::big_match_n();
    let trunc = windows::bm_window(radius, BoundaryPolicy::PessimisticMax);
    let finite = truncate(&g, &trunc).game;
    let layered = layer(&finite);
    let ledger = plaster(&layered, eps, None)?;
    let mut rows = Vec::new();

    let inv = ledger.check_invariants();
    rows.push(ResultRow::new(
        "PLASTER-1BIT",
        json!({"check": "ledger invariants", "rounds": ledger.rounds.len()}),
        if inv.is_ok() { 1.0 } else { 0.0 },
        1.0,
        1.0,
        "oracle",
        "disjoint round sets; F[0]⊆F[1]⊆next F[0]; Σeps_i<=eps",
        inv.is_ok(),
    ));

    // verification through the public 1-bit strategy on the base game
    let one_bit = ledger.one_bit_strategy(&finite);
    let mdp = induce_mdp(&finite, &one_bit, &trunc)?;
    let values = best_response_value(&mdp.game, Player::Minimizer)?;
    for (s, val, _) in ledger.inner_layer_attainment() {
        if s.tag != Tag::C {
            continue;
        }
        let attained = values[&mdp.product(&s, 0).unwrap()].lo;
        rows.push(ResultRow::new(
            "PLASTER-1BIT",
            json!({"state": s.to_string()}),
            attained,
            attained,
            val - eps,
            "oracle",
            "one-bit attainment>=window value-eps",
            attained >= val - eps - 1e-9,
        ));
    }
    Ok(rows)
}
