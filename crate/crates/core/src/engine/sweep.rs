//! Exact finite-horizon forward sweep over the chain induced by a fixed
//! strategy pair.

use super::{EngineError, EstimateMethod, ReachEstimate};
use crate::game::{Game, NodeKind, StateId};
use crate::numerics::ValueInterval;
use crate::strategy::{Move, Player, Strategy, Transition};
use std::collections::BTreeMap;
use std::sync::Arc;

/// One weighted configuration of the product chain: game state, both
/// players' memory modes, and the probability mass currently sitting there.
#[derive(Debug, Clone)]
pub struct WeightedConfig {
    pub state: StateId,
    pub max_mode: u64,
    pub min_mode: u64,
    pub time: u64,
    pub mass: f64,
}

#[derive(Clone)]
pub struct SweepOptions {
    /// Configurations below this mass are pruned; their mass is added to the
    /// upper bound, never dropped silently.
    pub mass_floor: f64,
    /// Countable supports are cut once the tail bound drops below this.
    pub tail_cut: f64,
    /// Maximum support entries enumerated per random node.
    pub dist_budget: usize,
    /// Mass entering these states is retired as a definite miss (used for
    /// before-revisit objectives where the caller knows such states cannot
    /// reach the target anymore).
    pub fail_at: Option<Arc<dyn Fn(&StateId) -> bool + Send + Sync>>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            mass_floor: 0.0,
            tail_cut: 1e-12,
            dist_budget: 65_536,
            fail_at: None,
        }
    }
}

/// Full sweep outcome: the estimate plus the decomposition of the unit mass.
pub struct SweepOutcome {
    pub estimate: ReachEstimate,
    /// Mass absorbed in the target within the horizon.
    pub reached: f64,
    /// Mass retired as a definite miss (doomed sinks and `fail_at` states).
    pub failed: f64,
    /// Pruned configuration mass plus cut distribution tails.
    pub pruned: f64,
    /// Unresolved configurations at the horizon.
    pub alive: Vec<WeightedConfig>,
}

impl SweepOutcome {
    pub fn alive_mass(&self) -> f64 {
        self.alive.iter().map(|c| c.mass).sum()
    }
}

/// Exact forward sweep; see [`forward_reach_exact`] for the common entry
/// point. The estimate brackets `P(reach within horizon)` from below and
/// `P(reach ever)` from above by `reached + alive + pruned`.
pub fn forward_sweep(
    game: &Game,
    sigma: &Strategy,
    pi: &Strategy,
    start: &StateId,
    horizon: u64,
    opts: &SweepOptions,
) -> Result<SweepOutcome, EngineError> {
    check_pair(sigma, pi)?;
    let mut frontier: BTreeMap<(StateId, u64, u64), f64> = BTreeMap::new();
    frontier.insert(
        (start.clone(), sigma.spec.initial_mode, pi.spec.initial_mode),
        1.0,
    );
    let mut reached = 0.0f64;
    let mut failed = 0.0f64;
    let mut pruned = 0.0f64;

    for step in 0..=horizon {
        let mut expandable: Vec<((StateId, u64, u64), f64)> = Vec::new();
        for ((s, mm, nm), mass) in std::mem::take(&mut frontier) {
            if game.is_target(&s) {
                reached += mass;
            } else if (step > 0 && opts.fail_at.as_ref().is_some_and(|f| f(&s)))
                || game.is_doomed(&s)
            {
                failed += mass;
            } else if step == horizon {
                frontier.insert((s, mm, nm), mass);
            } else if mass < opts.mass_floor {
                pruned += mass;
            } else {
                expandable.push(((s, mm, nm), mass));
            }
        }
        if step == horizon {
            break;
        }
        let mut next: BTreeMap<(StateId, u64, u64), f64> = BTreeMap::new();
        for ((s, mm, nm), mass) in expandable {
            expand(
                game, sigma, pi, &s, mm, nm, step, mass, opts, &mut next, &mut pruned,
            )?;
        }
        frontier = next;
        let total: f64 = reached + failed + pruned + frontier.values().sum::<f64>();
        let delta = (total - 1.0).abs();
        if delta > 1e-9 {
            return Err(EngineError::MassLeak { step, delta });
        }
    }

    let alive: Vec<WeightedConfig> = frontier
        .into_iter()
        .map(|((state, max_mode, min_mode), mass)| WeightedConfig {
            state,
            max_mode,
            min_mode,
            time: horizon,
            mass,
        })
        .collect();
    let alive_mass: f64 = alive.iter().map(|c| c.mass).sum();
    let estimate = ReachEstimate {
        interval: ValueInterval::new(reached, (reached + alive_mass + pruned).min(1.0)),
        method: EstimateMethod::ExactSweep,
        horizon,
        episodes: None,
        pruned_mass: pruned,
        seed: None,
    };
    Ok(SweepOutcome {
        estimate,
        reached,
        failed,
        pruned,
        alive,
    })
}

/// Exact reach-probability bracket for a fixed finite-memory strategy pair.
pub fn forward_reach_exact(
    game: &Game,
    sigma: &Strategy,
    pi: &Strategy,
    start: &StateId,
    horizon: u64,
    mass_floor: f64,
) -> Result<ReachEstimate, EngineError> {
    if !(0.0..=1e-3).contains(&mass_floor) {
        return Err(EngineError::MassFloor(mass_floor));
    }
    let opts = SweepOptions {
        mass_floor,
        ..SweepOptions::default()
    };
    Ok(forward_sweep(game, sigma, pi, start, horizon, &opts)?.estimate)
}

fn check_pair(sigma: &Strategy, pi: &Strategy) -> Result<(), EngineError> {
    if sigma.owner != Player::Maximizer {
        return Err(EngineError::WrongOwner(
            sigma.name.clone(),
            Player::Maximizer,
        ));
    }
    if pi.owner != Player::Minimizer {
        return Err(EngineError::WrongOwner(pi.name.clone(), Player::Minimizer));
    }
    for s in [sigma, pi] {
        if !s.finite_memory() {
            return Err(EngineError::UnboundedMemory(s.name.clone()));
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn expand(
    game: &Game,
    sigma: &Strategy,
    pi: &Strategy,
    s: &StateId,
    mm: u64,
    nm: u64,
    time: u64,
    mass: f64,
    opts: &SweepOptions,
    next: &mut BTreeMap<(StateId, u64, u64), f64>,
    pruned: &mut f64,
) -> Result<(), EngineError> {
    // (successor, branch probability, action profile)
    let mut branches: Vec<(StateId, f64, Option<usize>, Option<usize>)> = Vec::new();
    match game.kind_of(s) {
        NodeKind::MaxTurn(_) => {
            for (mv, p) in sigma.act(s, mm, time).0 {
                if p <= 0.0 {
                    continue;
                }
                match mv {
                    Move::Succ(t) => branches.push((t, p, None, None)),
                    other => {
                        return Err(illegal(sigma, s, &other));
                    }
                }
            }
        }
        NodeKind::MinTurn(_) => {
            for (mv, p) in pi.act(s, nm, time).0 {
                if p <= 0.0 {
                    continue;
                }
                match mv {
                    Move::Succ(t) => branches.push((t, p, None, None)),
                    other => {
                        return Err(illegal(pi, s, &other));
                    }
                }
            }
        }
        NodeKind::Random(d) => {
            let (entries, cut) = d.to_weighted_f64(opts.dist_budget, opts.tail_cut, s)?;
            *pruned += mass * cut;
            for (t, p) in entries {
                if p > 0.0 {
                    branches.push((t, p, None, None));
                }
            }
        }
        NodeKind::Concurrent(node) => {
            let amix = sigma.act(s, mm, time);
            let bmix = pi.act(s, nm, time);
            for (amv, pa) in &amix.0 {
                if *pa <= 0.0 {
                    continue;
                }
                let Move::Action(a) = amv else {
                    return Err(illegal(sigma, s, amv));
                };
                for (bmv, pb) in &bmix.0 {
                    if *pb <= 0.0 {
                        continue;
                    }
                    let Move::Action(b) = bmv else {
                        return Err(illegal(pi, s, bmv));
                    };
                    let (entries, cut) =
                        node.kernel(*a, *b)
                            .to_weighted_f64(opts.dist_budget, opts.tail_cut, s)?;
                    *pruned += mass * pa * pb * cut;
                    for (t, pk) in entries {
                        let p = pa * pb * pk;
                        if p > 0.0 {
                            branches.push((t, p, Some(*a), Some(*b)));
                        }
                    }
                }
            }
        }
    }

    for (t, p, a, b) in branches {
        let trans = Transition {
            max_action: a,
            min_action: b,
            next: t.clone(),
        };
        let mu = sigma.update(s, &trans, mm, time);
        let nu = pi.update(s, &trans, nm, time);
        for (m2, pm) in &mu.0 {
            if *pm <= 0.0 {
                continue;
            }
            for (n2, pn) in &nu.0 {
                if *pn <= 0.0 {
                    continue;
                }
                *next.entry((t.clone(), *m2, *n2)).or_insert(0.0) += mass * p * pm * pn;
            }
        }
    }
    Ok(())
}

fn illegal(strategy: &Strategy, s: &StateId, mv: &Move) -> EngineError {
    EngineError::IllegalMove {
        strategy: strategy.name.clone(),
        state: s.to_string(),
        mv: mv.to_string(),
    }
}
