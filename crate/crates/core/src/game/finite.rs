//! Indexed snapshot of a finite game, the form all iterative solvers run on.

use super::{Dist, Game, NodeKind, StateId, Successors};
use std::collections::{HashMap, VecDeque};

#[derive(Debug, thiserror::Error)]
pub enum FreezeError {
    #[error("state space exceeds {0} states")]
    TooManyStates(usize),
    #[error("infinitely branching node at {0}; truncate first")]
    InfiniteBranching(String),
    #[error(transparent)]
    Dist(#[from] super::DistError),
}

#[derive(Clone, Copy)]
pub struct FreezeOptions {
    pub max_states: usize,
    pub dist_budget: usize,
    pub tail_cut: f64,
}

impl Default for FreezeOptions {
    fn default() -> Self {
        FreezeOptions {
            max_states: 2_000_000,
            dist_budget: 65_536,
            tail_cut: 1e-12,
        }
    }
}

/// Node of a frozen game; successors are indices into `FiniteGame::states`
/// and probabilities are `f64` snapshots of the exact kernels.
#[derive(Clone)]
pub enum FrozenKind {
    MaxTurn(Vec<usize>),
    MinTurn(Vec<usize>),
    Random(Vec<(usize, f64)>),
    /// `kernel[a][b]` is the successor distribution under action pair (a, b).
    Concurrent {
        max_actions: usize,
        min_actions: usize,
        kernel: Vec<Vec<Vec<(usize, f64)>>>,
    },
}

#[derive(Clone)]
pub struct FiniteGame {
    pub states: Vec<StateId>,
    pub index: HashMap<StateId, usize>,
    pub kinds: Vec<FrozenKind>,
    pub target: Vec<bool>,
    /// Total probability mass dropped when cutting countable supports.
    pub tail_slack: f64,
}

impl FiniteGame {
    /// Explores the game from `roots` (breadth-first, deterministic order)
    /// and snapshots every reached state.
    pub fn freeze(game: &Game, roots: &[StateId], opts: FreezeOptions) -> Result<FiniteGame, FreezeError> {
        let mut states: Vec<StateId> = Vec::new();
        let mut index: HashMap<StateId, usize> = HashMap::new();
        let mut queue: VecDeque<usize> = VecDeque::new();
        let mut tail_slack = 0.0f64;

        let mut intern = |s: &StateId,
                          states: &mut Vec<StateId>,
                          index: &mut HashMap<StateId, usize>,
                          queue: &mut VecDeque<usize>|
         -> usize {
            if let Some(&i) = index.get(s) {
                return i;
            }
            let i = states.len();
            states.push(s.clone());
            index.insert(s.clone(), i);
            queue.push_back(i);
            i
        };

        for r in roots {
            intern(r, &mut states, &mut index, &mut queue);
        }

        let mut kinds: Vec<Option<FrozenKind>> = Vec::new();
        while let Some(i) = queue.pop_front() {
            if states.len() > opts.max_states {
                return Err(FreezeError::TooManyStates(opts.max_states));
            }
            if kinds.len() <= i {
                kinds.resize(states.len().max(i + 1), None);
            }
            let s = states[i].clone();
            let frozen = match game.kind_of(&s) {
                NodeKind::MaxTurn(succ) => FrozenKind::MaxTurn(Self::freeze_succ(
                    &s,
                    &succ,
                    &mut intern,
                    &mut states,
                    &mut index,
                    &mut queue,
                )?),
                NodeKind::MinTurn(succ) => FrozenKind::MinTurn(Self::freeze_succ(
                    &s,
                    &succ,
                    &mut intern,
                    &mut states,
                    &mut index,
                    &mut queue,
                )?),
                NodeKind::Random(d) => {
                    let (entries, cut) = Self::freeze_dist(
                        &s,
                        &d,
                        opts,
                        &mut intern,
                        &mut states,
                        &mut index,
                        &mut queue,
                    )?;
                    tail_slack += cut;
                    FrozenKind::Random(entries)
                }
                NodeKind::Concurrent(node) => {
                    let mut kernel = Vec::with_capacity(node.max_actions);
                    for a in 0..node.max_actions {
                        let mut row = Vec::with_capacity(node.min_actions);
                        for b in 0..node.min_actions {
                            let (entries, cut) = Self::freeze_dist(
                                &s,
                                &node.kernel(a, b),
                                opts,
                                &mut intern,
                                &mut states,
                                &mut index,
                                &mut queue,
                            )?;
                            tail_slack += cut;
                            row.push(entries);
                        }
                        kernel.push(row);
                    }
                    FrozenKind::Concurrent {
                        max_actions: node.max_actions,
                        min_actions: node.min_actions,
                        kernel,
                    }
                }
            };
            if kinds.len() < states.len() {
                kinds.resize(states.len(), None);
            }
            kinds[i] = Some(frozen);
        }

        let kinds: Vec<FrozenKind> = kinds.into_iter().map(|k| k.unwrap()).collect();
        let target = states.iter().map(|s| game.is_target(s)).collect();
        Ok(FiniteGame {
            states,
            index,
            kinds,
            target,
            tail_slack,
        })
    }

    fn freeze_succ(
        s: &StateId,
        succ: &Successors,
        intern: &mut impl FnMut(
            &StateId,
            &mut Vec<StateId>,
            &mut HashMap<StateId, usize>,
            &mut VecDeque<usize>,
        ) -> usize,
        states: &mut Vec<StateId>,
        index: &mut HashMap<StateId, usize>,
        queue: &mut VecDeque<usize>,
    ) -> Result<Vec<usize>, FreezeError> {
        match succ {
            Successors::Finite(v) => Ok(v
                .iter()
                .map(|t| intern(t, states, index, queue))
                .collect()),
            Successors::Infinite(_) => Err(FreezeError::InfiniteBranching(s.to_string())),
        }
    }

    fn freeze_dist(
        s: &StateId,
        d: &Dist<StateId>,
        opts: FreezeOptions,
        intern: &mut impl FnMut(
            &StateId,
            &mut Vec<StateId>,
            &mut HashMap<StateId, usize>,
            &mut VecDeque<usize>,
        ) -> usize,
        states: &mut Vec<StateId>,
        index: &mut HashMap<StateId, usize>,
        queue: &mut VecDeque<usize>,
    ) -> Result<(Vec<(usize, f64)>, f64), FreezeError> {
        let (entries, cut) = d.to_weighted_f64(opts.dist_budget, opts.tail_cut, s)?;
        Ok((
            entries
                .into_iter()
                .map(|(t, p)| (intern(&t, states, index, queue), p))
                .collect(),
            cut,
        ))
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, s: &StateId) -> Option<usize> {
        self.index.get(s).copied()
    }
}
