//! Evaluation of fixed strategy pairs: exact finite-horizon forward sweeps
//! over the induced chain, seeded Monte Carlo simulation, and the product
//! construction that turns a game with one strategy fixed into an MDP for
//! the opponent.

mod induce;
mod mc;
mod sweep;

pub use induce::{induce_mdp, InducedMdp};
pub use mc::simulate_mc;
pub use sweep::{forward_reach_exact, forward_sweep, SweepOptions, SweepOutcome};

use crate::game::{DistError, FiniteGame, FreezeOptions, Game, StateId};
use crate::numerics::{ValueInterval, SOLVER_TOL};
use crate::strategy::Player;
use std::collections::HashMap;

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("strategy {0} has unbounded memory; only simulation supports it")]
    UnboundedMemory(String),
    #[error("strategy {0} must be owned by {1:?}")]
    WrongOwner(String, Player),
    #[error("strategy {strategy} returned illegal move {mv} at {state}")]
    IllegalMove {
        strategy: String,
        state: String,
        mv: String,
    },
    #[error("mass leak of {delta:.3e} at step {step}")]
    MassLeak { step: u64, delta: f64 },
    #[error("mass floor {0} outside [0, 1e-3]")]
    MassFloor(f64),
    #[error("strategy {0} uses a step counter; clock-expand the game first")]
    StepCounter(String),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("freeze failed: {0}")]
    Freeze(#[from] crate::game::FreezeError),
}

/// How a reach probability estimate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    ExactSweep,
    MonteCarlo,
}

/// A rigorous estimate of a finite-horizon reach probability.
#[derive(Debug, Clone)]
pub struct ReachEstimate {
    pub interval: ValueInterval,
    pub method: EstimateMethod,
    pub horizon: u64,
    pub episodes: Option<u64>,
    pub pruned_mass: f64,
    pub seed: Option<u64>,
}

/// Value of every canonical state of a finite game when the remaining
/// active player plays optimally. Used to best-respond against induced MDPs;
/// value iteration starts from 0, whose least fixed point is the reach value
/// for the maximizing player and the minimal reach probability for the
/// minimizing one (cross-checked against brute force in the test suite).
pub fn best_response_value(
    mdp: &Game,
    _optimizing: Player,
) -> Result<HashMap<StateId, ValueInterval>, EngineError> {
    let fg = freeze_all(mdp)?;
    let values = crate::solver::value_iteration(&fg, SOLVER_TOL, 10_000_000);
    Ok(fg
        .states
        .iter()
        .zip(values.iter())
        .map(|(s, &v)| (s.clone(), ValueInterval::point(v)))
        .collect())
}

/// Freezes a finite game rooted at its full canonical enumeration.
pub fn freeze_all(game: &Game) -> Result<FiniteGame, EngineError> {
    let opts = FreezeOptions::default();
    let mut roots = Vec::new();
    for n in 0..opts.max_states as u64 {
        match game.canonical(n) {
            Some(s) => roots.push(s),
            None => break,
        }
    }
    Ok(FiniteGame::freeze(game, &roots, opts)?)
}
