//! Value computation and the constructive strategy-building procedures:
//! truncated value bracketing, bounded-horizon sweeps, matrix-game Bellman
//! steps, the acyclic MD construction for Minimizer, clock expansion,
//! layering, region-restricted memoryless strategies, and plastering.

pub mod matrix;
mod nonuniform;
mod plaster;
mod vi;

pub use matrix::{matrix_game_value, solve_2x2, MatrixError, MatrixGame};
pub use nonuniform::{non_uniform_core, non_uniform_memoryless, NonUniformOutcome};
pub use plaster::{plaster, FixedChoice, PlasterLedger, PlasterRound};
pub use vi::{
    bellman_step, best_response_against_max, best_response_against_min, extract_discounted_max,
    extract_max_profile, extract_min_profile, value_iteration, StationaryMove, StationaryProfile,
};

use crate::engine::freeze_all;
use crate::game::{
    truncate, Dist, DistError, Game, NodeKind, Prob, StateId, Successors, Truncation,
};
use crate::numerics::{ValueInterval, SOLVER_TOL};
use crate::strategy::{MemorySpec, Mix, Move, Player, Strategy};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("infinitely branching node at {0} exceeds the enumeration budget")]
    InfiniteBranching(String),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Freeze(#[from] crate::game::FreezeError),
    #[error(transparent)]
    Engine(#[from] crate::engine::EngineError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("truncation schedule entry {0} is not nested in its successor")]
    ScheduleNotNested(usize),
    #[error("start state {0} outside the truncation window")]
    StartOutsideWindow(String),
    #[error("no stationary strategy verified within {shortfall:.3e} of the requirement")]
    NoStationary { shortfall: f64 },
    #[error("bounded-value horizon search exceeded {0} steps")]
    HorizonBudget(u64),
    #[error("plastering failed in round {round}: {source}")]
    Plaster {
        round: usize,
        #[source]
        source: Box<SolveError>,
    },
}

/// Exact value of reaching the target within at most `n` steps, computed by
/// backward induction over the (state, steps-remaining) DAG; concurrent
/// nodes are resolved by the matrix-game solver. The n-step forward closure
/// from `starts` must be finite.
pub fn bounded_reach_value(
    game: &Game,
    starts: &[StateId],
    n: u64,
) -> Result<HashMap<StateId, f64>, SolveError> {
    const DIST_BUDGET: usize = 65_536;
    const TAIL_CUT: f64 = 1e-12;

    // forward closure with BFS depth labels
    let mut depth: HashMap<StateId, u64> = HashMap::new();
    let mut order: Vec<StateId> = Vec::new();
    let mut frontier: Vec<StateId> = Vec::new();
    for s in starts {
        if depth.insert(s.clone(), 0).is_none() {
            order.push(s.clone());
            frontier.push(s.clone());
        }
    }
    for d in 0..n {
        let mut next_frontier = Vec::new();
        for s in frontier {
            if game.is_target(&s) {
                continue;
            }
            for t in successors_of(game, &s, DIST_BUDGET, TAIL_CUT)? {
                if !depth.contains_key(&t) {
                    depth.insert(t.clone(), d + 1);
                    order.push(t.clone());
                    next_frontier.push(t);
                }
            }
        }
        frontier = next_frontier;
        if frontier.is_empty() {
            break;
        }
    }

    let index: HashMap<StateId, usize> = order
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    let mut v: Vec<f64> = order
        .iter()
        .map(|s| if game.is_target(s) { 1.0 } else { 0.0 })
        .collect();

    for r in 1..=n {
        let mut next = v.clone();
        for (i, s) in order.iter().enumerate() {
            if depth[s] > n - r || game.is_target(s) {
                continue;
            }
            next[i] = bounded_stage(game, s, &index, &v, DIST_BUDGET, TAIL_CUT)?;
        }
        v = next;
    }

    Ok(starts
        .iter()
        .map(|s| (s.clone(), v[index[s]]))
        .collect())
}

fn successors_of(
    game: &Game,
    s: &StateId,
    budget: usize,
    tail_cut: f64,
) -> Result<Vec<StateId>, SolveError> {
    Ok(match game.kind_of(s) {
        NodeKind::MaxTurn(succ) | NodeKind::MinTurn(succ) => match succ {
            Successors::Finite(v) => v,
            Successors::Infinite(_) => return Err(SolveError::InfiniteBranching(s.to_string())),
        },
        NodeKind::Random(d) => d
            .to_weighted_f64(budget, tail_cut, s)?
            .0
            .into_iter()
            .map(|(t, _)| t)
            .collect(),
        NodeKind::Concurrent(node) => {
            let mut out = Vec::new();
            for a in 0..node.max_actions {
                for b in 0..node.min_actions {
                    for (t, _) in node.kernel(a, b).to_weighted_f64(budget, tail_cut, s)?.0 {
                        out.push(t);
                    }
                }
            }
            out
        }
    })
}

fn bounded_stage(
    game: &Game,
    s: &StateId,
    index: &HashMap<StateId, usize>,
    v: &[f64],
    budget: usize,
    tail_cut: f64,
) -> Result<f64, SolveError> {
    let val = |t: &StateId| index.get(t).map_or(0.0, |&i| v[i]);
    Ok(match game.kind_of(s) {
        NodeKind::MaxTurn(succ) => match succ {
            Successors::Finite(ts) => ts.iter().map(|t| val(t)).fold(0.0, f64::max),
            Successors::Infinite(_) => return Err(SolveError::InfiniteBranching(s.to_string())),
        },
        NodeKind::MinTurn(succ) => match succ {
            Successors::Finite(ts) => ts
                .iter()
                .map(|t| val(t))
                .fold(f64::INFINITY, f64::min)
                .min(1.0),
            Successors::Infinite(_) => return Err(SolveError::InfiniteBranching(s.to_string())),
        },
        NodeKind::Random(d) => d
            .to_weighted_f64(budget, tail_cut, s)?
            .0
            .iter()
            .map(|(t, p)| p * val(t))
            .sum(),
        NodeKind::Concurrent(node) => {
            let mut payoff = vec![vec![0.0; node.min_actions]; node.max_actions];
            for (a, row) in payoff.iter_mut().enumerate() {
                for (bcol, cell) in row.iter_mut().enumerate() {
                    let entries = node.kernel(a, bcol).to_weighted_f64(budget, tail_cut, s)?.0;
                    *cell = entries
                        .iter()
                        .map(|(t, p)| p * val(t))
                        .sum::<f64>()
                        .min(1.0);
                }
            }
            matrix_game_value(&MatrixGame::new(payoff)?)?.0
        }
    })
}

/// Per-truncation bracket rows recorded by [`value_bounds`].
pub struct ValueBoundsTrace {
    pub rows: Vec<(u32, f64, f64)>,
    pub bracket: ValueInterval,
}

/// Brackets the value of `start` by running value iteration under both
/// boundary policies for each truncation of a nested, increasing schedule.
/// Stops early once the bracket is tighter than `tol`; a non-closing gap is
/// visible in the returned width, not an error.
pub fn value_bounds(
    game: &Game,
    start: &StateId,
    schedule: &[Truncation],
    tol: f64,
) -> Result<ValueBoundsTrace, SolveError> {
    assert!(!schedule.is_empty());
    for i in 0..schedule.len() - 1 {
        if !schedule[i].nested_in(&schedule[i + 1]) {
            return Err(SolveError::ScheduleNotNested(i));
        }
    }
    let mut rows = Vec::new();
    let mut bracket = ValueInterval::full();
    for trunc in schedule {
        if !trunc.inside(start) {
            return Err(SolveError::StartOutsideWindow(start.to_string()));
        }
        let (lo, hi) = bracket_at(game, start, trunc)?;
        if let Some(&(_, plo, phi)) = rows.last() {
            assert!(
                lo >= plo - 1e-9 && hi <= phi + 1e-9,
                "bracket nesting violated: [{plo},{phi}] then [{lo},{hi}]"
            );
        }
        rows.push((trunc.radius, lo, hi));
        bracket = bracket.intersect(&ValueInterval::new(lo.min(hi), hi.max(lo)));
        if bracket.width() < tol {
            break;
        }
    }
    Ok(ValueBoundsTrace { rows, bracket })
}

/// A candidate value function together with Minimizer mixes under which it
/// cannot increase in expectation, both in exact rationals.
///
/// Once [`check_supermartingale`] verifies the one-step inequalities, the
/// candidate upper-bounds the game value at every covered state: against the
/// fixed mixes, the candidate along any play is a bounded supermartingale,
/// and reaching the target forces it to 1, so no Maximizer strategy reaches
/// with probability above the starting candidate (optional stopping).
pub struct SupermartingaleCert {
    pub candidate: Arc<dyn Fn(&StateId) -> Option<Prob> + Send + Sync>,
    /// Column mix at concurrent states, chosen successor index at Minimizer
    /// turn states.
    pub min_choice: Arc<dyn Fn(&StateId) -> Option<MinChoice> + Send + Sync>,
}

pub enum MinChoice {
    Mix(Vec<Prob>),
    Succ(u64),
}

/// Verifies the certificate on the given states with exact arithmetic:
/// candidates in [0,1], 1 on targets, and one-step non-increase for every
/// Maximizer option under the certificate's Minimizer choice. For the
/// catalog families the checked inequalities are rational-function
/// identities in the position index, so a window of positions decides them
/// for all positions.
pub fn check_supermartingale(
    game: &Game,
    cert: &SupermartingaleCert,
    states: &[StateId],
) -> Result<(), String> {
    use num_traits::{One, Zero};
    let one: Prob = Prob::one();
    let zero: Prob = Prob::zero();
    let cand = |s: &StateId| -> Result<Prob, String> {
        (cert.candidate)(s).ok_or_else(|| format!("no candidate value at {s}"))
    };
    let dist_expectation = |d: &Dist<StateId>| -> Result<Prob, String> {
        match d {
            Dist::Finite(entries) => {
                let mut acc = zero.clone();
                for (t, p) in entries {
                    acc += p.clone() * cand(t)?;
                }
                Ok(acc)
            }
            Dist::Countable { .. } => Err("certificate check needs finite kernels".into()),
        }
    };
    for s in states {
        let v = cand(s)?;
        if v < zero || v > one {
            return Err(format!("candidate at {s} outside [0,1]"));
        }
        if game.is_target(s) && v != one {
            return Err(format!("target {s} has candidate != 1"));
        }
        match game.kind_of(s) {
            NodeKind::MaxTurn(Successors::Finite(succ)) => {
                for t in &succ {
                    if cand(t)? > v {
                        return Err(format!("{s} -> {t} increases the candidate"));
                    }
                }
            }
            NodeKind::MaxTurn(Successors::Infinite(_)) => {
                return Err(format!("{s}: infinite Maximizer branching unsupported"));
            }
            NodeKind::MinTurn(succ) => {
                let Some(MinChoice::Succ(j)) = (cert.min_choice)(s) else {
                    return Err(format!("no Minimizer pick at {s}"));
                };
                let t = succ.get(j).ok_or_else(|| format!("{s}: pick out of range"))?;
                if cand(&t)? > v {
                    return Err(format!("{s} -> {t} increases the candidate"));
                }
            }
            NodeKind::Random(d) => {
                if dist_expectation(&d)? > v {
                    return Err(format!("random step at {s} increases the candidate"));
                }
            }
            NodeKind::Concurrent(node) => {
                let Some(MinChoice::Mix(y)) = (cert.min_choice)(s) else {
                    return Err(format!("no Minimizer mix at {s}"));
                };
                if y.len() != node.min_actions {
                    return Err(format!("{s}: mix arity mismatch"));
                }
                let total: Prob = y.iter().cloned().sum();
                if total != one || y.iter().any(|p| *p < zero) {
                    return Err(format!("{s}: mix is not a distribution"));
                }
                for a in 0..node.max_actions {
                    let mut acc = zero.clone();
                    for (b, yb) in y.iter().enumerate() {
                        if yb.is_zero() {
                            continue;
                        }
                        acc += yb.clone() * dist_expectation(&node.kernel(a, b))?;
                    }
                    if acc > v {
                        return Err(format!(
                            "{s}: Maximizer action {a} increases the candidate"
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Pessimistic and optimistic values of `start` under one window.
pub fn bracket_at(
    game: &Game,
    start: &StateId,
    trunc: &Truncation,
) -> Result<(f64, f64), SolveError> {
    use crate::game::BoundaryPolicy::*;
    let mut out = [0.0f64; 2];
    for (k, policy) in [PessimisticMax, OptimisticMax].into_iter().enumerate() {
        let t = truncate(game, &trunc.with_policy(policy));
        let fg = freeze_all(&t.game)?;
        let v = value_iteration(&fg, SOLVER_TOL, 10_000_000);
        let i = fg
            .index_of(start)
            .ok_or_else(|| SolveError::StartOutsideWindow(start.to_string()))?;
        out[k] = v[i];
    }
    Ok((out[0], out[1]))
}

/// The acyclic game on `S x N` with `(s,i) -> (t,i+1)` iff `s -> t`;
/// probabilities preserved, targets are target copies at every stage.
pub fn clock_expand(game: &Game) -> Game {
    let inner = game.clone();
    let kind_of = Arc::new(move |s: &StateId| -> NodeKind {
        let (base, t) = s.unwrap_clock().expect("clock-expanded state");
        let wrap: Arc<dyn Fn(&StateId) -> StateId + Send + Sync> =
            Arc::new(move |x: &StateId| StateId::wrap_clock(x, t + 1));
        match inner.kind_of(&base) {
            NodeKind::MaxTurn(succ) => NodeKind::MaxTurn(wrap_succ(succ, Arc::clone(&wrap))),
            NodeKind::MinTurn(succ) => NodeKind::MinTurn(wrap_succ(succ, Arc::clone(&wrap))),
            NodeKind::Random(d) => NodeKind::Random(map_dist_items(&d, Arc::clone(&wrap))),
            NodeKind::Concurrent(node) => {
                let kernel = node.kernel;
                let wrap = Arc::clone(&wrap);
                NodeKind::Concurrent(crate::game::ConcurrentNode {
                    max_actions: node.max_actions,
                    min_actions: node.min_actions,
                    kernel: Arc::new(move |a, b| map_dist_items(&kernel(a, b), Arc::clone(&wrap))),
                })
            }
        }
    });
    let inner = game.clone();
    let is_target = Arc::new(move |s: &StateId| {
        s.unwrap_clock()
            .map(|(base, _)| inner.is_target(&base))
            .unwrap_or(false)
    });

    // finite inner games enumerate row-major; infinite ones diagonally
    let inner_size = {
        let mut size = None;
        for k in 0..200_000u64 {
            if game.canonical(k).is_none() {
                size = Some(k);
                break;
            }
        }
        size
    };
    let inner = game.clone();
    let canonical = Arc::new(move |n: u64| -> Option<StateId> {
        let (t, idx) = match inner_size {
            Some(sz) => (n / sz, n % sz),
            None => crate::game::uncantor(n),
        };
        inner
            .canonical(idx)
            .map(|s| StateId::wrap_clock(&s, t as u32))
    });
    let start = game.start_hint().map(|s| StateId::wrap_clock(s, 0));
    Game::new(
        format!("clock({})", game.label()),
        kind_of,
        is_target,
        canonical,
        start,
    )
}

fn wrap_succ(succ: Successors, wrap: Arc<dyn Fn(&StateId) -> StateId + Send + Sync>) -> Successors {
    match succ {
        Successors::Finite(v) => Successors::Finite(v.iter().map(|t| wrap(t)).collect()),
        Successors::Infinite(f) => Successors::Infinite(Arc::new(move |n| wrap(&f(n)))),
    }
}

fn map_dist_items(
    d: &Dist<StateId>,
    f: Arc<dyn Fn(&StateId) -> StateId + Send + Sync>,
) -> Dist<StateId> {
    match d {
        Dist::Finite(v) => Dist::Finite(v.iter().map(|(t, p)| (f(t), p.clone())).collect()),
        Dist::Countable { item, tail } => {
            let item = Arc::clone(item);
            Dist::Countable {
                item: Arc::new(move |n| {
                    let (t, p) = item(n);
                    (f(&t), p)
                }),
                tail: Arc::clone(tail),
            }
        }
    }
}

/// Two copies of every state. Maximizer's choices are duplicated with a
/// layer selector, so 1-bit memory updates become state choice; Minimizer
/// and random transitions stay in the current layer. Values of both copies
/// equal the value of the underlying state.
pub fn layer(game: &Game) -> Game {
    let inner = game.clone();
    let kind_of = Arc::new(move |s: &StateId| -> NodeKind {
        let (base, ell) = s.unwrap_layer().expect("layered state");
        if inner.is_target(&base) {
            return NodeKind::MaxTurn(Successors::Finite(vec![s.clone()]));
        }
        let same = Arc::new(move |t: &StateId| StateId::wrap_layer(t, ell));
        match inner.kind_of(&base) {
            NodeKind::MaxTurn(succ) => NodeKind::MaxTurn(match succ {
                Successors::Finite(v) => Successors::Finite(
                    v.iter()
                        .flat_map(|t| [StateId::wrap_layer(t, 0), StateId::wrap_layer(t, 1)])
                        .collect(),
                ),
                Successors::Infinite(f) => Successors::Infinite(Arc::new(move |n| {
                    StateId::wrap_layer(&f(n / 2), (n % 2) as u8)
                })),
            }),
            NodeKind::MinTurn(succ) => NodeKind::MinTurn(wrap_succ(succ, same)),
            NodeKind::Random(d) => NodeKind::Random(map_dist_items(&d, same)),
            NodeKind::Concurrent(node) => {
                let kernel = node.kernel;
                NodeKind::Concurrent(crate::game::ConcurrentNode {
                    // action encodes (base action, next layer): a' = 2a + l
                    max_actions: node.max_actions * 2,
                    min_actions: node.min_actions,
                    kernel: Arc::new(move |a2, b| {
                        let (a, l) = (a2 / 2, (a2 % 2) as u8);
                        map_dist_items(&kernel(a, b), Arc::new(move |t| StateId::wrap_layer(t, l)))
                    }),
                })
            }
        }
    });
    let inner = game.clone();
    let is_target = Arc::new(move |s: &StateId| {
        s.unwrap_layer()
            .map(|(base, _)| inner.is_target(&base))
            .unwrap_or(false)
    });
    let inner = game.clone();
    let canonical = Arc::new(move |n: u64| {
        inner
            .canonical(n / 2)
            .map(|s| StateId::wrap_layer(&s, (n % 2) as u8))
    });
    let start = game.start_hint().map(|s| StateId::wrap_layer(s, 0));
    Game::new(
        format!("layer({})", game.label()),
        kind_of,
        is_target,
        canonical,
        start,
    )
}

/// MD Minimizer strategy for acyclic games: at each Minimizer state pick the
/// first canonical successor whose value is within the multiplicative slack
/// `(1 + ln(1+eps) * 2^{-iota(s)})` of the state's own value. States where
/// no successor passes within the enumeration budget are reported through
/// `complaints` (a signal that the supplied value map is inaccurate).
pub struct AcyclicMinMd {
    pub strategy: Strategy,
    pub complaints: Arc<Mutex<Vec<StateId>>>,
}

pub fn acyclic_min_md(
    game: &Game,
    values: Arc<dyn Fn(&StateId) -> Option<f64> + Send + Sync>,
    eps: f64,
    iota: Arc<dyn Fn(&StateId) -> u64 + Send + Sync>,
) -> AcyclicMinMd {
    assert!(eps > 0.0);
    const SCAN_BUDGET: u64 = 65_536;
    let complaints: Arc<Mutex<Vec<StateId>>> = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&complaints);
    let inner = game.clone();
    let act = move |s: &StateId| -> Move {
        let NodeKind::MinTurn(succ) = inner.kind_of(s) else {
            // only queried at Minimizer turns; anything else is a no-op
            return Move::Action(0);
        };
        let vs = values(s).unwrap_or(1.0);
        let slack = 1.0 + (1.0 + eps).ln() * 0.5f64.powi(iota(s).min(1000) as i32);
        let threshold = vs * slack;
        let limit = match &succ {
            Successors::Finite(v) => v.len() as u64,
            Successors::Infinite(_) => SCAN_BUDGET,
        };
        let mut fallback: Option<(StateId, f64)> = None;
        for idx in 0..limit {
            let Some(t) = succ.get(idx) else { break };
            let vt = values(&t).unwrap_or(1.0);
            if vt <= threshold + 1e-12 {
                return Move::Succ(t);
            }
            if fallback.as_ref().is_none_or(|(_, fv)| vt < *fv) {
                fallback = Some((t, vt));
            }
        }
        log.lock().unwrap().push(s.clone());
        Move::Succ(fallback.expect("Minimizer state with no successor").0)
    };
    AcyclicMinMd {
        strategy: Strategy::new(
            format!("acyclic_min_md(eps={eps})"),
            Player::Minimizer,
            MemorySpec::memoryless(),
            true,
            Arc::new(move |s, _, _| Mix::dirac(act(s))),
            Arc::new(|_, _, m, _| Mix::dirac(m)),
        ),
        complaints,
    }
}
