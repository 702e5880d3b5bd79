//! Finite-window truncation with bracketing boundary policies.

use super::{ConcurrentNode, Dist, Game, NodeKind, StateId, Successors, Tag};
use std::collections::BTreeSet;
use std::sync::Arc;

/// How transitions leaving the window are accounted.
///
/// `OptimisticMax` counts the boundary as a target (an upper bound on the
/// value of the full game), `PessimisticMax` as a losing sink (a lower
/// bound). Together the two policies bracket the countable game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryPolicy {
    OptimisticMax,
    PessimisticMax,
}

/// A finite exploration window plus a boundary policy. The constructor takes
/// an explicit finite state list, so the explored set is finite by fiat.
#[derive(Clone)]
pub struct Truncation {
    window: Vec<StateId>,
    set: BTreeSet<StateId>,
    pub policy: BoundaryPolicy,
    /// Descriptor used by catalog truncation schedules (not interpreted here).
    pub radius: u32,
}

impl Truncation {
    pub fn new(window: Vec<StateId>, policy: BoundaryPolicy, radius: u32) -> Truncation {
        assert!(!window.is_empty(), "truncation window must be nonempty");
        let set: BTreeSet<StateId> = window.iter().cloned().collect();
        Truncation {
            window,
            set,
            policy,
            radius,
        }
    }

    pub fn inside(&self, s: &StateId) -> bool {
        self.set.contains(s)
    }

    pub fn window(&self) -> &[StateId] {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn with_policy(&self, policy: BoundaryPolicy) -> Truncation {
        Truncation {
            window: self.window.clone(),
            set: self.set.clone(),
            policy,
            radius: self.radius,
        }
    }

    /// True if `other`'s window contains this window.
    pub fn nested_in(&self, other: &Truncation) -> bool {
        self.set.is_subset(&other.set)
    }
}

/// Result of truncating: the finite game plus a degeneracy flag for windows
/// that contain no target and whose boundary is not a target either.
pub struct Truncated {
    pub game: Game,
    pub degenerate: bool,
}

pub fn boundary_state() -> StateId {
    StateId::bare(Tag::Boundary)
}

/// How many entries of an infinite successor enumeration are scanned for
/// window members. Catalog enumerations list near states first, so this is
/// generous for every window the harness builds.
const SUCC_SCAN_BUDGET: usize = 65_536;
const DIST_SCAN_BUDGET: usize = 65_536;
const DIST_TAIL_CUT: f64 = 1e-12;

/// Restricts `game` to `window ∪ {boundary}`, redirecting every transition
/// that leaves the window to the boundary sink. The boundary is a target
/// under `OptimisticMax` and a non-target absorbing sink otherwise.
pub fn truncate(game: &Game, trunc: &Truncation) -> Truncated {
    let boundary = boundary_state();
    let window = Arc::new(trunc.set.clone());
    let policy = trunc.policy;

    let degenerate = policy == BoundaryPolicy::PessimisticMax
        && !trunc.window.iter().any(|s| game.is_target(s));

    let map_succ = {
        let window = Arc::clone(&window);
        let boundary = boundary.clone();
        move |t: &StateId| -> StateId {
            if window.contains(t) {
                t.clone()
            } else {
                boundary.clone()
            }
        }
    };

    let map_list = {
        let map_succ = map_succ.clone();
        move |succ: &Successors| -> Successors {
            let raw = succ.prefix(SUCC_SCAN_BUDGET);
            let mut seen = BTreeSet::new();
            let mut out = Vec::new();
            for t in raw {
                let m = map_succ(&t);
                if seen.insert(m.clone()) {
                    out.push(m);
                }
            }
            if !succ.is_finite() && seen.insert(boundary_state()) {
                out.push(boundary_state());
            }
            Successors::Finite(out)
        }
    };

    let map_dist = {
        let map_succ = map_succ.clone();
        move |d: &Dist<StateId>| -> Dist<StateId> {
            d.map_merge(
                |t| map_succ(t),
                DIST_SCAN_BUDGET,
                DIST_TAIL_CUT,
                boundary_state(),
            )
        }
    };

    let inner = game.clone();
    let kind_of = {
        let boundary = boundary.clone();
        Arc::new(move |s: &StateId| -> NodeKind {
            if *s == boundary {
                return NodeKind::MaxTurn(Successors::Finite(vec![boundary.clone()]));
            }
            match inner.kind_of(s) {
                NodeKind::MaxTurn(succ) => NodeKind::MaxTurn(map_list(&succ)),
                NodeKind::MinTurn(succ) => NodeKind::MinTurn(map_list(&succ)),
                NodeKind::Random(d) => NodeKind::Random(map_dist(&d)),
                NodeKind::Concurrent(node) => {
                    let map_dist = map_dist.clone();
                    let kernel = node.kernel;
                    NodeKind::Concurrent(ConcurrentNode {
                        max_actions: node.max_actions,
                        min_actions: node.min_actions,
                        kernel: Arc::new(move |a, b| map_dist(&kernel(a, b))),
                    })
                }
            }
        })
    };

    let inner = game.clone();
    let is_target = {
        let boundary = boundary.clone();
        Arc::new(move |s: &StateId| -> bool {
            if *s == boundary {
                policy == BoundaryPolicy::OptimisticMax
            } else {
                inner.is_target(s)
            }
        })
    };

    let order: Arc<Vec<StateId>> = Arc::new(trunc.window.clone());
    let canonical = {
        let order = Arc::clone(&order);
        Arc::new(move |n: u64| -> Option<StateId> {
            let n = n as usize;
            if n < order.len() {
                Some(order[n].clone())
            } else if n == order.len() {
                Some(boundary_state())
            } else {
                None
            }
        })
    };

    let start_hint = game
        .start_hint()
        .filter(|s| trunc.inside(s))
        .cloned()
        .or_else(|| Some(trunc.window[0].clone()));

    Truncated {
        game: Game::new(
            format!("{}|trunc{}", game.label(), trunc.radius),
            kind_of,
            is_target,
            canonical,
            start_hint,
        ),
        degenerate,
    }
}
