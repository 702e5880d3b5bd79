//! Plastering: iteratively fixing near-optimal memoryless strategies on
//! growing regions of a two-layer game until the fixings define a public
//! 1-bit strategy that is near-optimal from every inner-layer state.

use super::nonuniform::non_uniform_core;
use super::vi::{
    best_response_against_max, value_iteration, StationaryMove, StationaryProfile,
};
use super::SolveError;
use crate::engine::freeze_all;
use crate::game::{FiniteGame, FrozenKind, Game, StateId};
use crate::numerics::SOLVER_TOL;
use crate::strategy::{MemorySpec, Mix, Move, Player, Strategy, Visibility};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

/// A Maximizer decision fixed at one layered state.
#[derive(Debug, Clone)]
pub enum FixedChoice {
    /// Mix over the layered action set of a concurrent node (index 2a + l
    /// encodes base action a and next layer l).
    Conc(Vec<f64>),
    /// Mix over resolved turn successors (base state, next layer).
    Turn(Vec<((StateId, u8), f64)>),
}

/// What one plastering round fixed.
#[derive(Debug, Clone)]
pub struct PlasterRound {
    pub s0: Vec<StateId>,
    pub s1: Vec<StateId>,
    pub f0: Vec<StateId>,
    pub f1: Vec<StateId>,
    pub epsilon: f64,
    /// Verified attainment from each start of the round's auxiliary game.
    pub attained: Vec<(StateId, f64)>,
}

pub struct PlasterLedger {
    pub rounds: Vec<PlasterRound>,
    pub eps: f64,
    pub base_order: Vec<StateId>,
    /// Accumulated memoryless strategy on the layered game.
    pub fixed: BTreeMap<StateId, FixedChoice>,
    fgl: FiniteGame,
    profile: StationaryProfile,
}

impl PlasterLedger {
    /// Checks the three ledger invariants: disjointness of the round sets in
    /// each layer, the sandwich `F_i[0] ⊆ F_i[1] ⊆ F_{i+1}[0]`, and the
    /// epsilon budget.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen0: BTreeSet<&StateId> = BTreeSet::new();
        let mut seen1: BTreeSet<&StateId> = BTreeSet::new();
        for (i, r) in self.rounds.iter().enumerate() {
            for s in &r.s0 {
                if !seen0.insert(s) {
                    return Err(format!("round {}: {s} repeated in layer-0 sets", i + 1));
                }
            }
            for s in &r.s1 {
                if !seen1.insert(s) {
                    return Err(format!("round {}: {s} repeated in layer-1 sets", i + 1));
                }
            }
        }
        for (i, r) in self.rounds.iter().enumerate() {
            let f0: BTreeSet<_> = r.f0.iter().collect();
            let f1: BTreeSet<_> = r.f1.iter().collect();
            if !f0.is_subset(&f1) {
                return Err(format!("round {}: F[0] not within F[1]", i + 1));
            }
            if let Some(next) = self.rounds.get(i + 1) {
                let nf0: BTreeSet<_> = next.f0.iter().collect();
                if !f1.is_subset(&nf0) {
                    return Err(format!("round {}: F[1] not within next F[0]", i + 1));
                }
            }
        }
        let total: f64 = self.rounds.iter().map(|r| r.epsilon).sum();
        if total > self.eps + 1e-12 {
            return Err(format!("epsilon budget exceeded: {total} > {}", self.eps));
        }
        Ok(())
    }

    /// For every base state: value of its inner-layer copy and the exact
    /// best-response attainment of the accumulated memoryless strategy.
    pub fn inner_layer_attainment(&self) -> Vec<(StateId, f64, f64)> {
        let values = value_iteration(&self.fgl, SOLVER_TOL, 10_000_000);
        let response = best_response_against_max(&self.fgl, &self.profile, SOLVER_TOL, 10_000_000);
        self.base_order
            .iter()
            .filter_map(|s| {
                let li = self.fgl.index_of(&StateId::wrap_layer(s, 0))?;
                Some((s.clone(), values[li], response[li]))
            })
            .collect()
    }

    /// Reads the fixings back as a public 1-bit strategy on the base game:
    /// the memory mode is the layer, actions are the per-layer marginals, and
    /// memory updates follow the layer component conditioned on the observed
    /// own move.
    pub fn one_bit_strategy(&self, base_game: &Game) -> Strategy {
        let fixed = Arc::new(self.fixed.clone());
        let act_fixed = Arc::clone(&fixed);
        let fallback = base_game.clone();
        let act = Arc::new(move |s: &StateId, m: u64, _: u64| -> Mix<Move> {
            let key = StateId::wrap_layer(s, m.min(1) as u8);
            match act_fixed.get(&key) {
                Some(FixedChoice::Conc(mix)) => {
                    let actions = mix.len() / 2;
                    let entries: Vec<(Move, f64)> = (0..actions)
                        .map(|a| (Move::Action(a), mix[2 * a] + mix[2 * a + 1]))
                        .filter(|(_, p)| *p > 0.0)
                        .collect();
                    Mix(entries)
                }
                Some(FixedChoice::Turn(mix)) => {
                    let mut acc: BTreeMap<StateId, f64> = BTreeMap::new();
                    for ((t, _), p) in mix {
                        *acc.entry(t.clone()).or_insert(0.0) += p;
                    }
                    Mix(acc
                        .into_iter()
                        .filter(|(_, p)| *p > 0.0)
                        .map(|(t, p)| (Move::Succ(t), p))
                        .collect())
                }
                None => super::nonuniform::default_move(&fallback, s),
            }
        });
        let upd_fixed = Arc::clone(&fixed);
        let update = Arc::new(
            move |s: &StateId, trans: &crate::strategy::Transition, m: u64, _: u64| -> Mix<u64> {
                let key = StateId::wrap_layer(s, m.min(1) as u8);
                match upd_fixed.get(&key) {
                    Some(FixedChoice::Conc(mix)) => {
                        let Some(a) = trans.max_action else {
                            return Mix::dirac(m);
                        };
                        let stay = mix.get(2 * a).copied().unwrap_or(0.0);
                        let go = mix.get(2 * a + 1).copied().unwrap_or(0.0);
                        if stay + go <= 0.0 {
                            return Mix::dirac(m);
                        }
                        Mix(vec![(0, stay / (stay + go)), (1, go / (stay + go))])
                    }
                    Some(FixedChoice::Turn(mix)) => {
                        let mut w = [0.0f64; 2];
                        for ((t, l), p) in mix {
                            if *t == trans.next {
                                w[*l as usize] += p;
                            }
                        }
                        let total = w[0] + w[1];
                        if total <= 0.0 {
                            return Mix::dirac(m);
                        }
                        Mix(vec![(0, w[0] / total), (1, w[1] / total)])
                    }
                    None => Mix::dirac(m),
                }
            },
        );
        Strategy::new(
            format!("plaster_1bit(eps={})", self.eps),
            Player::Maximizer,
            MemorySpec::finite(2, 0, Visibility::Public),
            false,
            act,
            update,
        )
    }
}

/// Runs the plastering rounds on a finite layered game (the output of
/// [`super::layer`] on a finite game). Round i applies the region-restricted
/// memoryless construction with budget `2^{-i} eps` to the auxiliary game in
/// which still-unfixed siblings are collapsed, then fixes the result in
/// layer 0 on the round's start set and in layer 1 on the adapted set.
pub fn plaster(
    layered: &Game,
    eps: f64,
    order: Option<Vec<StateId>>,
) -> Result<PlasterLedger, SolveError> {
    assert!(eps > 0.0);
    let fgl = freeze_all(layered)?;
    let n_l = fgl.len();

    // base states in canonical order
    let base_order: Vec<StateId> = match order {
        Some(o) => o,
        None => {
            let mut seen = BTreeSet::new();
            let mut out = Vec::new();
            for s in &fgl.states {
                let (base, _) = s.unwrap_layer().expect("layered state");
                if seen.insert(base.clone()) {
                    out.push(base);
                }
            }
            out
        }
    };
    let nb = base_order.len();
    let base_index: HashMap<StateId, usize> = base_order
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    let layered_of = |bi: usize, l: u8| -> Option<usize> {
        fgl.index_of(&StateId::wrap_layer(&base_order[bi], l))
    };
    let base_of: Vec<usize> = fgl
        .states
        .iter()
        .map(|s| base_index[&s.unwrap_layer().expect("layered state").0])
        .collect();

    let mut profile: StationaryProfile = vec![None; n_l];
    let mut fixed: BTreeMap<StateId, FixedChoice> = BTreeMap::new();
    let mut f0: BTreeSet<usize> = BTreeSet::new();
    let mut f1: BTreeSet<usize> = BTreeSet::new();
    let mut prev_s1: BTreeSet<usize> = BTreeSet::new();
    let mut rounds: Vec<PlasterRound> = Vec::new();

    for i in 1..=nb {
        let eps_i = eps * 0.5f64.powi(i as i32);
        let mut s0: BTreeSet<usize> = prev_s1.difference(&f0).copied().collect();
        let si = i - 1; // the i-th base state in the given order
        if !f0.contains(&si) {
            s0.insert(si);
        }
        let new_f0: BTreeSet<usize> = f0.union(&s0).copied().collect();

        if s0.is_empty() {
            let round = PlasterRound {
                s0: vec![],
                s1: vec![],
                f0: snapshot(&new_f0, &base_order),
                f1: snapshot(&f1, &base_order),
                epsilon: eps_i,
                attained: vec![],
            };
            rounds.push(round);
            f0 = new_f0;
            prev_s1 = BTreeSet::new();
            continue;
        }

        // auxiliary game: siblings of bases outside new_f0 collapse, with the
        // outer-layer copy as representative
        let aux = build_aux(&fgl, &profile, &base_of, &new_f0, layered_of);
        let starts: Vec<usize> = s0
            .iter()
            .map(|&bi| aux.aux_of[layered_of(bi, 0).expect("inner copy present")])
            .collect();
        let outcome = non_uniform_core(&aux.fg, &starts, eps_i).map_err(|e| {
            SolveError::Plaster {
                round: i,
                source: Box::new(e),
            }
        })?;

        // region base states that are still collapsed get fixed in layer 1
        let mut s1: BTreeSet<usize> = s0.difference(&f1).copied().collect();
        for &r in &outcome.region {
            let li = aux.rep_of[r];
            let bi = base_of[li];
            if !new_f0.contains(&bi) {
                s1.insert(bi);
            }
        }

        // adopt the round's strategy into the layered profile
        for &bi in &s0 {
            let li = layered_of(bi, 0).expect("inner copy present");
            adopt(
                &fgl,
                &mut profile,
                &mut fixed,
                li,
                outcome.profile[aux.aux_of[li]].clone(),
            );
        }
        for &bi in &s1 {
            let li = layered_of(bi, 1).expect("outer copy present");
            let aux_idx = if new_f0.contains(&bi) {
                aux.aux_of[li]
            } else {
                aux.aux_of[li] // collapsed slot; same entry for both layers
            };
            adopt(
                &fgl,
                &mut profile,
                &mut fixed,
                li,
                outcome.profile[aux_idx].clone(),
            );
        }

        let new_f1: BTreeSet<usize> = f1.union(&s1).copied().collect();
        rounds.push(PlasterRound {
            s0: snapshot(&s0, &base_order),
            s1: snapshot(&s1, &base_order),
            f0: snapshot(&new_f0, &base_order),
            f1: snapshot(&new_f1, &base_order),
            epsilon: eps_i,
            attained: outcome
                .attained
                .iter()
                .map(|&(a, v)| (aux.fg.states[a].clone(), v))
                .collect(),
        });
        f0 = new_f0;
        f1 = new_f1;
        prev_s1 = s1;
    }

    Ok(PlasterLedger {
        rounds,
        eps,
        base_order,
        fixed,
        fgl,
        profile,
    })
}

fn snapshot(set: &BTreeSet<usize>, order: &[StateId]) -> Vec<StateId> {
    set.iter().map(|&i| order[i].clone()).collect()
}

/// Records a stationary move as a fixing of one layered state.
fn adopt(
    fgl: &FiniteGame,
    profile: &mut StationaryProfile,
    fixed: &mut BTreeMap<StateId, FixedChoice>,
    li: usize,
    mv: Option<StationaryMove>,
) {
    let choice = match &fgl.kinds[li] {
        FrozenKind::MaxTurn(succ) => {
            if fgl.target[li] || succ.is_empty() {
                return;
            }
            let entries: Vec<(usize, f64)> = match mv {
                Some(StationaryMove::Succ(j)) => vec![(j, 1.0)],
                Some(StationaryMove::SuccMix(m)) => m,
                // default: first successor
                _ => vec![(0, 1.0)],
            };
            profile[li] = Some(if entries.len() == 1 {
                StationaryMove::Succ(entries[0].0)
            } else {
                StationaryMove::SuccMix(entries.clone())
            });
            let resolved: Vec<((StateId, u8), f64)> = entries
                .iter()
                .map(|&(j, p)| {
                    let (t, l) = fgl.states[succ[j]]
                        .unwrap_layer()
                        .expect("layered successor");
                    ((t, l), p)
                })
                .collect();
            FixedChoice::Turn(resolved)
        }
        FrozenKind::Concurrent { max_actions, .. } => {
            let mix = match mv {
                Some(StationaryMove::Mix(x)) => x,
                _ => {
                    let mut x = vec![0.0; *max_actions];
                    // default: first base action, stay in the current layer
                    let (_, l) = fgl.states[li].unwrap_layer().expect("layered state");
                    x[l as usize] = 1.0;
                    x
                }
            };
            profile[li] = Some(StationaryMove::Mix(mix.clone()));
            FixedChoice::Conc(mix)
        }
        // Minimizer and random nodes carry no Maximizer decision
        _ => return,
    };
    fixed.insert(fgl.states[li].clone(), choice);
}

struct AuxGame {
    fg: FiniteGame,
    /// layered index -> auxiliary index
    aux_of: Vec<usize>,
    /// auxiliary index -> representative layered index
    rep_of: Vec<usize>,
}

/// Builds the collapsed auxiliary game: bases fixed (or being fixed) in
/// layer 0 keep both copies; all other bases collapse to a single state whose
/// dynamics are those of the outer-layer copy. Fixings recorded so far are
/// baked in (a fixed Maximizer node loses its choice).
fn build_aux(
    fgl: &FiniteGame,
    profile: &StationaryProfile,
    base_of: &[usize],
    distinguished: &BTreeSet<usize>,
    layered_of: impl Fn(usize, u8) -> Option<usize>,
) -> AuxGame {
    let n_l = fgl.len();
    let mut aux_of: Vec<usize> = vec![usize::MAX; n_l];
    let mut rep_of: Vec<usize> = Vec::new();
    for li in 0..n_l {
        let bi = base_of[li];
        let (_, layer) = fgl.states[li].unwrap_layer().expect("layered state");
        if distinguished.contains(&bi) {
            aux_of[li] = rep_of.len();
            rep_of.push(li);
        } else if layer == 1 {
            // collapsed slot, outer copy as representative
            let slot = rep_of.len();
            aux_of[li] = slot;
            if let Some(inner) = layered_of(bi, 0) {
                aux_of[inner] = slot;
            }
            rep_of.push(li);
        }
    }
    // inner copies of collapsed bases were assigned when their outer sibling
    // was visited; any still unassigned (outer copy missing) map to themselves
    for li in 0..n_l {
        if aux_of[li] == usize::MAX {
            aux_of[li] = rep_of.len();
            rep_of.push(li);
        }
    }

    let map = |t: usize| -> usize { aux_of[t] };
    let mut kinds = Vec::with_capacity(rep_of.len());
    let mut target = Vec::with_capacity(rep_of.len());
    let mut states = Vec::with_capacity(rep_of.len());
    for &rep in &rep_of {
        states.push(fgl.states[rep].clone());
        target.push(fgl.target[rep]);
        let kind = match (&fgl.kinds[rep], &profile[rep]) {
            // previously fixed turn node: the choice becomes a random move
            (FrozenKind::MaxTurn(succ), Some(StationaryMove::Succ(j))) => {
                FrozenKind::Random(vec![(map(succ[*j]), 1.0)])
            }
            (FrozenKind::MaxTurn(succ), Some(StationaryMove::SuccMix(m))) => {
                FrozenKind::Random(m.iter().map(|&(j, p)| (map(succ[j]), p)).collect())
            }
            // previously fixed concurrent node: single convex-combination action
            (
                FrozenKind::Concurrent {
                    min_actions,
                    kernel,
                    ..
                },
                Some(StationaryMove::Mix(x)),
            ) => {
                let merged: Vec<Vec<Vec<(usize, f64)>>> = vec![(0..*min_actions)
                    .map(|b| {
                        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
                        for (a, &pa) in x.iter().enumerate() {
                            if pa <= 0.0 {
                                continue;
                            }
                            for &(t, p) in &kernel[a][b] {
                                *acc.entry(map(t)).or_insert(0.0) += pa * p;
                            }
                        }
                        acc.into_iter().collect()
                    })
                    .collect()];
                FrozenKind::Concurrent {
                    max_actions: 1,
                    min_actions: *min_actions,
                    kernel: merged,
                }
            }
            (FrozenKind::MaxTurn(succ), _) => {
                FrozenKind::MaxTurn(succ.iter().map(|&t| map(t)).collect())
            }
            (FrozenKind::MinTurn(succ), _) => {
                FrozenKind::MinTurn(succ.iter().map(|&t| map(t)).collect())
            }
            (FrozenKind::Random(entries), _) => {
                let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
                for &(t, p) in entries {
                    *acc.entry(map(t)).or_insert(0.0) += p;
                }
                FrozenKind::Random(acc.into_iter().collect())
            }
            (
                FrozenKind::Concurrent {
                    max_actions,
                    min_actions,
                    kernel,
                },
                _,
            ) => FrozenKind::Concurrent {
                max_actions: *max_actions,
                min_actions: *min_actions,
                kernel: kernel
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|entries| {
                                let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
                                for &(t, p) in entries {
                                    *acc.entry(map(t)).or_insert(0.0) += p;
                                }
                                acc.into_iter().collect()
                            })
                            .collect()
                    })
                    .collect(),
            },
        };
        kinds.push(kind);
    }
    let index: HashMap<StateId, usize> = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    AuxGame {
        fg: FiniteGame {
            states,
            index,
            kinds,
            target,
            tail_slack: fgl.tail_slack,
        },
        aux_of,
        rep_of,
    }
}
