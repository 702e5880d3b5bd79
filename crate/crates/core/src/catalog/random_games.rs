//! Seeded random game generators used by the oracle cross-checks and the
//! acyclic-construction experiments.

use crate::game::{Dist, Game, NodeKind, Prob, StateId, Successors, Tag};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn node(i: usize) -> StateId {
    StateId::new(Tag::Node, vec![i as u32])
}

fn rational(p: f64) -> Prob {
    BigRational::from_float(p).expect("finite probability")
}

#[derive(Clone, Copy)]
pub struct RandomGameShape {
    pub states: usize,
    /// Cap on Maximizer decision nodes (keeps brute force cheap).
    pub max_decisions: usize,
    pub min_decisions: usize,
    pub acyclic: bool,
}

/// Random turn-based game with the requested shape. Acyclic games point all
/// edges forward; the last two states are the target and a losing sink.
pub fn random_turn_game(seed: u64, shape: RandomGameShape) -> Game {
    let n = shape.states.max(4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target_id = n - 2;
    let sink_id = n - 1;
    let mut kinds: Vec<NodeKind> = Vec::with_capacity(n);
    let mut max_used = 0;
    let mut min_used = 0;
    for i in 0..n - 2 {
        let pool: Vec<usize> = if shape.acyclic {
            (i + 1..n).collect()
        } else {
            (0..n).filter(|&j| j != i).collect()
        };
        let pick = |rng: &mut ChaCha8Rng, pool: &[usize]| pool[rng.gen_range(0..pool.len())];
        let roll: f64 = rng.gen();
        let kind = if roll < 0.34 && max_used < shape.max_decisions {
            max_used += 1;
            let a = pick(&mut rng, &pool);
            let b = pick(&mut rng, &pool);
            NodeKind::MaxTurn(Successors::Finite(vec![node(a), node(b)]))
        } else if roll < 0.68 && min_used < shape.min_decisions {
            min_used += 1;
            let a = pick(&mut rng, &pool);
            let b = pick(&mut rng, &pool);
            NodeKind::MinTurn(Successors::Finite(vec![node(a), node(b)]))
        } else {
            let a = pick(&mut rng, &pool);
            let b = pick(&mut rng, &pool);
            let p: f64 = rng.gen_range(0.05..0.95);
            if a == b {
                NodeKind::Random(Dist::dirac(node(a)))
            } else {
                NodeKind::Random(Dist::two(node(a), rational(p), node(b)))
            }
        };
        kinds.push(kind);
    }
    kinds.push(NodeKind::MaxTurn(Successors::Finite(vec![node(target_id)])));
    kinds.push(NodeKind::MaxTurn(Successors::Finite(vec![node(sink_id)])));

    let kinds = Arc::new(kinds);
    let kind_of = {
        let kinds = Arc::clone(&kinds);
        Arc::new(move |s: &StateId| -> NodeKind {
            assert_eq!(s.tag, Tag::Node);
            kinds[s.param(0) as usize].clone()
        })
    };
    let is_target = Arc::new(move |s: &StateId| s.param(0) as usize == target_id);
    let canonical = Arc::new(move |k: u64| -> Option<StateId> {
        if (k as usize) < n {
            Some(node(k as usize))
        } else {
            None
        }
    });
    Game::new(
        format!("random_turn({seed})"),
        kind_of,
        is_target,
        canonical,
        Some(node(0)),
    )
}

/// Random acyclic turn-based game for the MD-construction experiments.
pub fn random_acyclic(seed: u64, states: usize) -> Game {
    random_turn_game(
        seed,
        RandomGameShape {
            states,
            max_decisions: 11,
            min_decisions: states,
            acyclic: true,
        },
    )
}

/// Random tiny turn-based game (possibly cyclic) for oracle cross-checks.
pub fn random_tiny(seed: u64) -> Game {
    random_turn_game(
        seed,
        RandomGameShape {
            states: 6,
            max_decisions: 4,
            min_decisions: 4,
            acyclic: false,
        },
    )
}
