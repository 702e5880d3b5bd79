//! Truncation window builders for the catalog families.

use crate::game::{BoundaryPolicy, StateId, Tag, Truncation};

fn c(i: u32) -> StateId {
    StateId::new(Tag::C, vec![i])
}

/// Window for the big match on the naturals: positions 0..=radius plus lose.
pub fn bm_window(radius: u32, policy: BoundaryPolicy) -> Truncation {
    let mut w: Vec<StateId> = (0..=radius).map(c).collect();
    w.push(StateId::bare(Tag::Lose));
    Truncation::new(w, policy, radius)
}

/// Window for the big match on the integers proxy: every stored position
/// 0..=k_win+up (i.e. true positions -k_win..=up) plus win and lose.
pub fn bmz_window(k_win: u32, up: u32, policy: BoundaryPolicy) -> Truncation {
    let mut w: Vec<StateId> = (0..=k_win + up).map(c).collect();
    w.push(StateId::bare(Tag::Win));
    w.push(StateId::bare(Tag::Lose));
    Truncation::new(w, policy, up)
}

/// Window for the turn-based big match: positions 0..=radius with chain and
/// decision states up to commitment index j_max.
pub fn tb_window(radius: u32, j_max: u32, policy: BoundaryPolicy) -> Truncation {
    let mut w: Vec<StateId> = Vec::new();
    for i in 0..=radius {
        w.push(c(i));
    }
    w.push(StateId::bare(Tag::Lose));
    for i in 1..=radius {
        for j in 1..=j_max {
            w.push(StateId::new(Tag::Cij, vec![i, j]));
            w.push(StateId::new(Tag::D, vec![i, j]));
            w.push(StateId::new(Tag::R0, vec![i, j]));
            w.push(StateId::new(Tag::R1, vec![i, j]));
        }
    }
    Truncation::new(w, policy, radius)
}

/// Window covering exactly what the `(n+1)^2` walker started at `c_x` can
/// reach: per position `i ≤ x+N` the chain up to its commitment index, plus
/// a stub above `x+N+1` where the walker never resolves.
pub fn tb_walker_window(x: u32, n_cap: u32, policy: BoundaryPolicy) -> Truncation {
    let top = x + n_cap;
    let mut w: Vec<StateId> = (0..=top + 1).map(c).collect();
    w.push(StateId::bare(Tag::Lose));
    for i in 1..=top {
        let j = (top - i + 1) * (top - i + 1);
        for l in 1..=j {
            w.push(StateId::new(Tag::Cij, vec![i, l]));
        }
        w.push(StateId::new(Tag::D, vec![i, j]));
        w.push(StateId::new(Tag::R0, vec![i, j]));
        w.push(StateId::new(Tag::R1, vec![i, j]));
    }
    for l in 1..=2 {
        w.push(StateId::new(Tag::Cij, vec![top + 1, l]));
    }
    Truncation::new(w, policy, top)
}

/// Window for the branching-degree-two game: positions 0..=radius with both
/// commitment states per position.
pub fn tb_simple_window(radius: u32, policy: BoundaryPolicy) -> Truncation {
    let mut w: Vec<StateId> = Vec::new();
    for i in 0..=radius {
        w.push(c(i));
    }
    w.push(StateId::bare(Tag::Lose));
    for i in 1..=radius {
        for m in 0..2 {
            w.push(StateId::new(Tag::D, vec![i, m]));
            w.push(StateId::new(Tag::R0, vec![i, m]));
            w.push(StateId::new(Tag::R1, vec![i, m]));
        }
    }
    Truncation::new(w, policy, radius)
}
