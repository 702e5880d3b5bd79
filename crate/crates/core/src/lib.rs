//! Countably infinite stochastic 2-player reachability games: a catalog of
//! lazily represented game families, strategies with explicit memory
//! semantics, an exact/Monte-Carlo evaluation engine, and solvers that
//! bracket values of infinite games through finite truncations.

pub mod catalog;
pub mod engine;
pub mod game;
pub mod numerics;
pub mod oracle;
pub mod solver;
pub mod strategy;

pub use game::{
    frac, pow2_inv, BoundaryPolicy, Dist, FiniteGame, Game, NodeKind, Prob, StateId, Successors,
    Tag, Truncation,
};
pub use numerics::ValueInterval;
pub use strategy::{MemorySpec, Mix, Move, Player, Strategy};
