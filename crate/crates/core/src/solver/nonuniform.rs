//! Memoryless strategies that are near-optimal from a finite set of start
//! states: bounded-horizon search, region closure, restriction, and a
//! verified stationary extraction loop.

use super::vi::{
    bellman_step, best_response_against_max, extract_discounted_max, extract_max_profile,
    value_iteration, StationaryMove, StationaryProfile,
};
use super::SolveError;
use crate::engine::freeze_all;
use crate::game::{FiniteGame, FrozenKind, Game, StateId};
use crate::numerics::SOLVER_TOL;
use crate::strategy::{MemorySpec, Mix, Move, Player, Strategy};
use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

pub struct NonUniformOutcome {
    /// Stationary decision per state of the input game (None outside the
    /// region or at no-choice states).
    pub profile: StationaryProfile,
    /// Indices of the region R the play is meant to stay in.
    pub region: Vec<usize>,
    /// Horizon witnessing the bounded-value convergence.
    pub horizon: u64,
    /// Verified best-response attainment per start index.
    pub attained: Vec<(usize, f64)>,
}

const HORIZON_BUDGET: u64 = 2_000_000;

/// Core construction on a frozen finite game. The returned profile is
/// verified: against it, the opponent's exact best response still leaves at
/// least `value(start) - eps` from every start.
pub fn non_uniform_core(
    fg: &FiniteGame,
    starts: &[usize],
    eps: f64,
) -> Result<NonUniformOutcome, SolveError> {
    assert!(eps > 0.0);
    let n_states = fg.len();
    let values = value_iteration(fg, SOLVER_TOL.min(eps * 1e-3), 10_000_000);

    if starts.iter().all(|&s| fg.target[s]) {
        return Ok(NonUniformOutcome {
            profile: vec![None; n_states],
            region: starts.to_vec(),
            horizon: 0,
            attained: starts.iter().map(|&s| (s, 1.0)).collect(),
        });
    }

    let eps_quarter = eps / 4.0;
    let horizon = bounded_horizon(fg, starts, &values, eps_quarter)?;
    let region = region_closure(fg, starts, horizon, eps_quarter);
    let (fg_r, to_r) = restrict(fg, &region);

    // candidate stationary strategies on the restricted game, each verified
    // by the opponent's exact best response against the full requirement
    let check = |profile_r: &StationaryProfile| -> (f64, Vec<(usize, f64)>) {
        let b = best_response_against_max(&fg_r, profile_r, SOLVER_TOL.min(eps * 1e-3), 10_000_000);
        let mut worst = f64::NEG_INFINITY;
        let mut attained = Vec::new();
        for &s in starts {
            let br = b[to_r[s].expect("start inside region")];
            attained.push((s, br));
            worst = worst.max(values[s] - br);
        }
        (worst, attained)
    };

    let mut best: Option<(f64, StationaryProfile, Vec<(usize, f64)>)> = None;
    let consider = |profile_r: StationaryProfile,
                        best: &mut Option<(f64, StationaryProfile, Vec<(usize, f64)>)>|
     -> bool {
        let (shortfall, attained) = check(&profile_r);
        if best.as_ref().is_none_or(|(sf, _, _)| shortfall < *sf) {
            *best = Some((shortfall, profile_r, attained));
        }
        shortfall <= eps + 1e-9
    };

    let v_r = value_iteration(&fg_r, SOLVER_TOL.min(eps * 1e-3), 10_000_000);
    let mut done = consider(extract_max_profile(&fg_r, &v_r), &mut best);

    // strategy-improvement refinement: re-extract against the exact best
    // response of the current candidate
    if !done {
        let mut current = best.as_ref().unwrap().1.clone();
        for _ in 0..60 {
            let b = best_response_against_max(&fg_r, &current, SOLVER_TOL * 1e-2, 10_000_000);
            current = extract_max_profile(&fg_r, &b);
            if consider(current.clone(), &mut best) {
                done = true;
                break;
            }
        }
    }

    if !done {
        for lam in [0.9, 0.99, 0.999, 1.0 - 1e-4, 1.0 - 1e-5, 1.0 - 1e-6] {
            let iters = ((40.0 / (1.0 - lam)) as usize).clamp(10_000, 2_000_000);
            let (_, profile) = extract_discounted_max(&fg_r, lam, iters);
            if consider(profile, &mut best) {
                done = true;
                break;
            }
        }
    }

    let (shortfall, profile_r, attained) = best.expect("at least one candidate");
    if !done {
        return Err(SolveError::NoStationary {
            shortfall: shortfall - eps,
        });
    }

    // translate restricted indices back to the input game's index space
    let mut profile: StationaryProfile = vec![None; n_states];
    for (orig, r) in to_r.iter().enumerate() {
        if let Some(r) = r {
            profile[orig] = profile_r[*r].clone();
        }
    }
    Ok(NonUniformOutcome {
        profile,
        region: region.into_iter().collect(),
        horizon,
        attained,
    })
}

/// Smallest horizon h with `v_h(start) >= v(start) - gap` for every start.
fn bounded_horizon(
    fg: &FiniteGame,
    starts: &[usize],
    values: &[f64],
    gap: f64,
) -> Result<u64, SolveError> {
    let mut v = vec![0.0; fg.len()];
    for h in 0..HORIZON_BUDGET {
        if starts.iter().all(|&s| v[s] >= values[s] - gap) {
            return Ok(h);
        }
        v = bellman_step(fg, &v, 1.0);
    }
    Err(SolveError::HorizonBudget(HORIZON_BUDGET))
}

/// Inductive forward closure: grows for `horizon` steps, keeping per
/// distribution only the largest-probability successors covering at least
/// `1 - gap/horizon` of the mass.
fn region_closure(fg: &FiniteGame, starts: &[usize], horizon: u64, gap: f64) -> BTreeSet<usize> {
    let mut region: BTreeSet<usize> = starts.iter().copied().collect();
    let keep = 1.0 - gap / horizon.max(1) as f64;
    let mut frontier: Vec<usize> = starts.to_vec();
    for _ in 0..horizon {
        let mut next = Vec::new();
        for &s in &frontier {
            if fg.target[s] {
                continue;
            }
            let succs: Vec<usize> = match &fg.kinds[s] {
                FrozenKind::MaxTurn(v) | FrozenKind::MinTurn(v) => v.clone(),
                FrozenKind::Random(entries) => mass_cover(entries, keep),
                FrozenKind::Concurrent { kernel, .. } => kernel
                    .iter()
                    .flatten()
                    .flat_map(|entries| mass_cover(entries, keep))
                    .collect(),
            };
            for t in succs {
                if region.insert(t) {
                    next.push(t);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    region
}

fn mass_cover(entries: &[(usize, f64)], keep: f64) -> Vec<usize> {
    let mut sorted: Vec<(usize, f64)> = entries.to_vec();
    sorted.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut cum = 0.0;
    let mut out = Vec::new();
    for (t, p) in sorted {
        out.push(t);
        cum += p;
        if cum >= keep {
            break;
        }
    }
    out
}

/// Restriction of the game to a region: transitions leaving it are rerouted
/// to a fresh non-target absorbing sink (index `len`).
fn restrict(fg: &FiniteGame, region: &BTreeSet<usize>) -> (FiniteGame, Vec<Option<usize>>) {
    let order: Vec<usize> = region.iter().copied().collect();
    let mut to_r: Vec<Option<usize>> = vec![None; fg.len()];
    for (r, &orig) in order.iter().enumerate() {
        to_r[orig] = Some(r);
    }
    let dead = order.len();
    let map = |t: usize, to_r: &Vec<Option<usize>>| -> usize { to_r[t].unwrap_or(dead) };

    let mut kinds: Vec<FrozenKind> = Vec::with_capacity(dead + 1);
    let mut target: Vec<bool> = Vec::with_capacity(dead + 1);
    let mut states: Vec<StateId> = Vec::with_capacity(dead + 1);
    for &orig in &order {
        states.push(fg.states[orig].clone());
        target.push(fg.target[orig]);
        let kind = match &fg.kinds[orig] {
            FrozenKind::MaxTurn(v) => {
                FrozenKind::MaxTurn(v.iter().map(|&t| map(t, &to_r)).collect())
            }
            FrozenKind::MinTurn(v) => {
                FrozenKind::MinTurn(v.iter().map(|&t| map(t, &to_r)).collect())
            }
            FrozenKind::Random(entries) => FrozenKind::Random(
                entries
                    .iter()
                    .map(|&(t, p)| (map(t, &to_r), p))
                    .collect(),
            ),
            FrozenKind::Concurrent {
                max_actions,
                min_actions,
                kernel,
            } => FrozenKind::Concurrent {
                max_actions: *max_actions,
                min_actions: *min_actions,
                kernel: kernel
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|entries| {
                                entries
                                    .iter()
                                    .map(|&(t, p)| (map(t, &to_r), p))
                                    .collect()
                            })
                            .collect()
                    })
                    .collect(),
            },
        };
        kinds.push(kind);
    }
    // the dead sink
    states.push(StateId::bare(crate::game::Tag::Boundary));
    target.push(false);
    kinds.push(FrozenKind::MaxTurn(vec![dead]));

    let index: HashMap<StateId, usize> = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    (
        FiniteGame {
            states,
            index,
            kinds,
            target,
            tail_slack: fg.tail_slack,
        },
        to_r,
    )
}

/// Construction of a memoryless strategy and finite region such that the
/// strategy, played from any of the given starts, reaches the target while
/// staying in the region with probability at least `value - eps`, verified
/// by exact best response. Deterministic (MD) whenever the game is
/// turn-based.
pub struct NonUniformStrategy {
    pub strategy: Strategy,
    pub region: Vec<StateId>,
    pub attained: Vec<(StateId, f64)>,
    pub horizon: u64,
}

pub fn non_uniform_memoryless(
    game: &Game,
    starts: &[StateId],
    eps: f64,
) -> Result<NonUniformStrategy, SolveError> {
    let fg = freeze_all(game)?;
    let start_idx: Vec<usize> = starts
        .iter()
        .map(|s| {
            fg.index_of(s)
                .ok_or_else(|| SolveError::StartOutsideWindow(s.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let outcome = non_uniform_core(&fg, &start_idx, eps)?;

    let mut table: HashMap<StateId, Mix<Move>> = HashMap::new();
    let mut deterministic = true;
    for (i, mv) in outcome.profile.iter().enumerate() {
        let Some(mv) = mv else { continue };
        let mix = match (mv, &fg.kinds[i]) {
            (StationaryMove::Succ(j), FrozenKind::MaxTurn(succ)) => {
                Mix::dirac(Move::Succ(fg.states[succ[*j]].clone()))
            }
            (StationaryMove::SuccMix(entries), FrozenKind::MaxTurn(succ)) => {
                deterministic = false;
                Mix(entries
                    .iter()
                    .map(|&(j, p)| (Move::Succ(fg.states[succ[j]].clone()), p))
                    .collect())
            }
            (StationaryMove::Mix(x), FrozenKind::Concurrent { .. }) => {
                if x.iter().filter(|p| **p > 1e-15).count() > 1 {
                    deterministic = false;
                }
                Mix(x
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| **p > 0.0)
                    .map(|(a, &p)| (Move::Action(a), p))
                    .collect())
            }
            _ => continue,
        };
        table.insert(fg.states[i].clone(), mix);
    }
    let table = Arc::new(table);
    let fallback_game = game.clone();
    let act = Arc::new(move |s: &StateId, _: u64, _: u64| -> Mix<Move> {
        if let Some(m) = table.get(s) {
            return m.clone();
        }
        default_move(&fallback_game, s)
    });
    let strategy = Strategy::new(
        format!("non_uniform(eps={eps})"),
        Player::Maximizer,
        MemorySpec::memoryless(),
        deterministic,
        act,
        Arc::new(|_, _, m, _| Mix::dirac(m)),
    );
    Ok(NonUniformStrategy {
        strategy,
        region: outcome.region.iter().map(|&i| fg.states[i].clone()).collect(),
        attained: outcome
            .attained
            .iter()
            .map(|&(i, v)| (fg.states[i].clone(), v))
            .collect(),
        horizon: outcome.horizon,
    })
}

/// Default move at states the profile does not cover.
pub(crate) fn default_move(game: &Game, s: &StateId) -> Mix<Move> {
    match game.kind_of(s) {
        crate::game::NodeKind::MaxTurn(succ) | crate::game::NodeKind::MinTurn(succ) => {
            Mix::dirac(Move::Succ(succ.get(0).expect("state with no successor")))
        }
        _ => Mix::dirac(Move::Action(0)),
    }
}
