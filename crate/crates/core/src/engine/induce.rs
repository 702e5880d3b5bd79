//! Product construction: fixing one player's finite-memory strategy in a
//! truncated game yields a finite MDP for the opponent, with the fixed
//! player's randomization folded into random nodes over (state, mode) pairs.

use super::EngineError;
use crate::game::{
    truncate, Dist, Game, NodeKind, Prob, StateId, Successors, Tag, Truncation,
};
use crate::strategy::{Move, Player, Strategy, Transition};
use num_rational::BigRational;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

/// The induced MDP plus the product-state codec.
pub struct InducedMdp {
    pub game: Game,
    pub modes: u64,
    states: Arc<Vec<StateId>>,
    index: Arc<HashMap<StateId, usize>>,
}

impl InducedMdp {
    /// Product state for a window state and a memory mode of the fixed
    /// strategy.
    pub fn product(&self, s: &StateId, mode: u64) -> Option<StateId> {
        let w = *self.index.get(s)?;
        if mode >= self.modes {
            return None;
        }
        Some(StateId::new(Tag::Prod, vec![w as u32, mode as u32]))
    }

    /// Base state and mode of a product state.
    pub fn base(&self, p: &StateId) -> Option<(StateId, u64)> {
        if p.tag != Tag::Prod {
            return None;
        }
        let s = self.states.get(p.param(0) as usize)?.clone();
        Some((s, p.param(1) as u64))
    }
}

/// Builds the finite opponent-MDP for `fixed` on the truncated game.
///
/// Strategies with a step counter are rejected; clock-expand the game first
/// so the stage is part of the state.
pub fn induce_mdp(
    game: &Game,
    fixed: &Strategy,
    trunc: &Truncation,
) -> Result<InducedMdp, EngineError> {
    let modes = fixed
        .spec
        .mode_count
        .bound()
        .ok_or_else(|| EngineError::UnboundedMemory(fixed.name.clone()))?;
    if fixed.spec.uses_step_counter {
        return Err(EngineError::StepCounter(fixed.name.clone()));
    }
    let base = truncate(game, trunc).game;
    let mut states: Vec<StateId> = Vec::new();
    let mut n = 0u64;
    while let Some(s) = base.canonical(n) {
        states.push(s);
        n += 1;
    }
    let states = Arc::new(states);
    let index: Arc<HashMap<StateId, usize>> = Arc::new(
        states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect(),
    );

    let ctx = Arc::new(ProductCtx {
        base: base.clone(),
        fixed: fixed.clone(),
        states: Arc::clone(&states),
        index: Arc::clone(&index),
    });

    let kind_ctx = Arc::clone(&ctx);
    let kind_of = Arc::new(move |s: &StateId| kind_ctx.kind_of(s));
    let target_ctx = Arc::clone(&ctx);
    let is_target = Arc::new(move |s: &StateId| {
        s.tag == Tag::Prod
            && target_ctx
                .states
                .get(s.param(0) as usize)
                .is_some_and(|b| target_ctx.base.is_target(b))
    });
    let n_states = states.len() as u64;
    let canonical = Arc::new(move |n: u64| -> Option<StateId> {
        if n < n_states * modes {
            Some(StateId::new(
                Tag::Prod,
                vec![(n / modes) as u32, (n % modes) as u32],
            ))
        } else {
            None
        }
    });
    let start_hint = base
        .start_hint()
        .and_then(|s| index.get(s).copied())
        .map(|w| StateId::new(Tag::Prod, vec![w as u32, fixed.spec.initial_mode as u32]));

    Ok(InducedMdp {
        game: Game::new(
            format!("{}*{}", base.label(), fixed.name),
            kind_of,
            is_target,
            canonical,
            start_hint,
        ),
        modes,
        states,
        index,
    })
}

struct ProductCtx {
    base: Game,
    fixed: Strategy,
    states: Arc<Vec<StateId>>,
    index: Arc<HashMap<StateId, usize>>,
}

impl ProductCtx {
    fn prod(&self, t: &StateId, mode: u64) -> StateId {
        let w = *self
            .index
            .get(t)
            .unwrap_or_else(|| panic!("successor {t} escapes the truncated window"));
        StateId::new(Tag::Prod, vec![w as u32, mode as u32])
    }

    fn joint(&self, s: &StateId, branches: &[(StateId, f64, Option<usize>, Option<usize>)], mode: u64) -> Dist<StateId> {
        // mixes the fixed strategy's memory update into every branch
        let mut acc: BTreeMap<StateId, f64> = BTreeMap::new();
        for (t, p, a, b) in branches {
            let trans = Transition {
                max_action: *a,
                min_action: *b,
                next: t.clone(),
            };
            for (m2, pm) in self.fixed.update(s, &trans, mode, 0).0 {
                if pm <= 0.0 || *p <= 0.0 {
                    continue;
                }
                *acc.entry(self.prod(t, m2)).or_insert(0.0) += p * pm;
            }
        }
        Dist::Finite(
            acc.into_iter()
                .map(|(t, p)| {
                    (
                        t,
                        BigRational::from_float(p).unwrap_or_else(|| Prob::from_integer(0.into())),
                    )
                })
                .collect(),
        )
    }

    fn own_moves(&self, s: &StateId, mode: u64) -> Vec<(StateId, f64)> {
        self.fixed
            .act(s, mode, 0)
            .0
            .into_iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(mv, p)| match mv {
                Move::Succ(t) => (t, p),
                Move::Action(a) => panic!("{}: action {a} at turn node {s}", self.fixed.name),
            })
            .collect()
    }

    fn kind_of(&self, p: &StateId) -> NodeKind {
        let absorbing = |p: &StateId| NodeKind::MaxTurn(Successors::Finite(vec![p.clone()]));
        match p.tag {
            Tag::Prod => {
                let (w, mode) = (p.param(0) as usize, p.param(1) as u64);
                let bs = self.states[w].clone();
                if self.base.is_target(&bs) || self.base.is_doomed(&bs) {
                    return absorbing(p);
                }
                let owner = self.fixed.owner;
                match self.base.kind_of(&bs) {
                    NodeKind::MaxTurn(succ) => {
                        if owner == Player::Maximizer {
                            let branches: Vec<_> = self
                                .own_moves(&bs, mode)
                                .into_iter()
                                .map(|(t, p)| (self.window_map(&t), p, None, None))
                                .collect();
                            NodeKind::Random(self.joint(&bs, &branches, mode))
                        } else {
                            self.opponent_turn(p, &succ, true)
                        }
                    }
                    NodeKind::MinTurn(succ) => {
                        if owner == Player::Minimizer {
                            let branches: Vec<_> = self
                                .own_moves(&bs, mode)
                                .into_iter()
                                .map(|(t, p)| (self.window_map(&t), p, None, None))
                                .collect();
                            NodeKind::Random(self.joint(&bs, &branches, mode))
                        } else {
                            self.opponent_turn(p, &succ, false)
                        }
                    }
                    NodeKind::Random(d) => {
                        let entries = d
                            .to_weighted_f64(65_536, 1e-12, &bs)
                            .expect("truncated distribution is finite")
                            .0;
                        let branches: Vec<_> = entries
                            .into_iter()
                            .map(|(t, p)| (t, p, None, None))
                            .collect();
                        NodeKind::Random(self.joint(&bs, &branches, mode))
                    }
                    NodeKind::Concurrent(node) => {
                        // the free player picks a column; resolution happens
                        // in an intermediate random node
                        let free_choices = if owner == Player::Maximizer {
                            node.min_actions
                        } else {
                            node.max_actions
                        };
                        let succs: Vec<StateId> = (0..free_choices)
                            .map(|ch| {
                                StateId::new(
                                    Tag::ProdRand,
                                    vec![w as u32, mode as u32, ch as u32],
                                )
                            })
                            .collect();
                        if owner == Player::Maximizer {
                            NodeKind::MinTurn(Successors::Finite(succs))
                        } else {
                            NodeKind::MaxTurn(Successors::Finite(succs))
                        }
                    }
                }
            }
            Tag::ProdRand => {
                let (w, mode, choice) = (
                    p.param(0) as usize,
                    p.param(1) as u64,
                    p.param(2) as usize,
                );
                let bs = self.states[w].clone();
                match self.base.kind_of(&bs) {
                    NodeKind::MaxTurn(succ) | NodeKind::MinTurn(succ) => {
                        let t = succ
                            .get(choice as u64)
                            .expect("opponent choice out of range");
                        let branches = vec![(t, 1.0, None, None)];
                        NodeKind::Random(self.joint(&bs, &branches, mode))
                    }
                    NodeKind::Concurrent(node) => {
                        let mut branches: Vec<(StateId, f64, Option<usize>, Option<usize>)> =
                            Vec::new();
                        for (mv, pa) in self.fixed.act(&bs, mode, 0).0 {
                            if pa <= 0.0 {
                                continue;
                            }
                            let own = match mv {
                                Move::Action(a) => a,
                                Move::Succ(t) => {
                                    panic!("{}: successor {t} at concurrent node", self.fixed.name)
                                }
                            };
                            let (a, b) = if self.fixed.owner == Player::Maximizer {
                                (own, choice)
                            } else {
                                (choice, own)
                            };
                            let entries = node
                                .kernel(a, b)
                                .to_weighted_f64(65_536, 1e-12, &bs)
                                .expect("truncated kernel is finite")
                                .0;
                            for (t, pk) in entries {
                                branches.push((t, pa * pk, Some(a), Some(b)));
                            }
                        }
                        NodeKind::Random(self.joint(&bs, &branches, mode))
                    }
                    NodeKind::Random(_) => unreachable!("no intermediate under random nodes"),
                }
            }
            _ => panic!("induced MDP: unknown state {p}"),
        }
    }

    fn opponent_turn(&self, p: &StateId, succ: &Successors, base_is_max: bool) -> NodeKind {
        let (w, mode) = (p.param(0), p.param(1));
        let n = match succ {
            Successors::Finite(v) => v.len(),
            Successors::Infinite(_) => {
                panic!("induced MDP over non-truncated infinite branching")
            }
        };
        let succs: Vec<StateId> = (0..n)
            .map(|ch| StateId::new(Tag::ProdRand, vec![w, mode, ch as u32]))
            .collect();
        if base_is_max {
            NodeKind::MaxTurn(Successors::Finite(succs))
        } else {
            NodeKind::MinTurn(Successors::Finite(succs))
        }
    }

    /// The fixed strategy announces successors of the original game; map
    /// them into the truncated window.
    fn window_map(&self, t: &StateId) -> StateId {
        if self.index.contains_key(t) {
            t.clone()
        } else {
            StateId::bare(Tag::Boundary)
        }
    }
}
