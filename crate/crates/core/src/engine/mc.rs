//! Seeded Monte Carlo estimation of finite-horizon reach probabilities.
//!
//! Episodes are simulated with per-episode derived generators, so results
//! are bit-identical for a given seed regardless of thread count. Memory
//! modes are sampled rather than enumerated, which is what makes
//! unbounded-memory strategies simulable.

use super::{EngineError, EstimateMethod, ReachEstimate};
use crate::game::{Dist, Game, NodeKind, StateId};
use crate::numerics::ValueInterval;
use crate::strategy::{Move, Player, Strategy, Transition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn episode_rng(seed: u64, episode: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(episode)))
}

const SAMPLE_BUDGET: u64 = 1 << 22;

fn sample_dist(d: &Dist<StateId>, rng: &mut ChaCha8Rng) -> StateId {
    use num_traits::ToPrimitive;
    let mut u: f64 = rng.gen();
    match d {
        Dist::Finite(v) => {
            for (t, p) in v {
                let p = p.to_f64().unwrap_or(0.0);
                if u < p {
                    return t.clone();
                }
                u -= p;
            }
            v.last().expect("empty distribution").0.clone()
        }
        Dist::Countable { item, .. } => {
            let mut last = None;
            for n in 0..SAMPLE_BUDGET {
                let (t, p) = item(n);
                let p = p.to_f64().unwrap_or(0.0);
                if u < p {
                    return t;
                }
                u -= p;
                last = Some(t);
            }
            last.expect("empty countable distribution")
        }
    }
}

fn run_episode(
    game: &Game,
    sigma: &Strategy,
    pi: &Strategy,
    start: &StateId,
    horizon: u64,
    rng: &mut ChaCha8Rng,
) -> bool {
    let mut s = start.clone();
    let mut mm = sigma.spec.initial_mode;
    let mut nm = pi.spec.initial_mode;
    for t in 0..=horizon {
        if game.is_target(&s) {
            return true;
        }
        if t == horizon || game.is_doomed(&s) {
            return false;
        }
        let (next, a, b) = match game.kind_of(&s) {
            NodeKind::MaxTurn(_) => match sigma.act(&s, mm, t).sample(rng) {
                Move::Succ(n) => (n, None, None),
                Move::Action(_) => panic!("{}: action at a turn node", sigma.name),
            },
            NodeKind::MinTurn(_) => match pi.act(&s, nm, t).sample(rng) {
                Move::Succ(n) => (n, None, None),
                Move::Action(_) => panic!("{}: action at a turn node", pi.name),
            },
            NodeKind::Random(d) => (sample_dist(&d, rng), None, None),
            NodeKind::Concurrent(node) => {
                let a = match sigma.act(&s, mm, t).sample(rng) {
                    Move::Action(a) => a,
                    Move::Succ(_) => panic!("{}: successor at a concurrent node", sigma.name),
                };
                let b = match pi.act(&s, nm, t).sample(rng) {
                    Move::Action(b) => b,
                    Move::Succ(_) => panic!("{}: successor at a concurrent node", pi.name),
                };
                (sample_dist(&node.kernel(a, b), rng), Some(a), Some(b))
            }
        };
        let trans = Transition {
            max_action: a,
            min_action: b,
            next: next.clone(),
        };
        mm = sigma.update(&s, &trans, mm, t).sample(rng);
        nm = pi.update(&s, &trans, nm, t).sample(rng);
        s = next;
    }
    false
}

/// Unbiased estimate of `P(reach within horizon)` with a two-sided Hoeffding
/// interval at the given confidence. Fully reproducible from the seed.
pub fn simulate_mc(
    game: &Game,
    sigma: &Strategy,
    pi: &Strategy,
    start: &StateId,
    horizon: u64,
    episodes: u64,
    seed: u64,
    confidence: f64,
) -> Result<ReachEstimate, EngineError> {
    assert!(episodes >= 1);
    assert!((0.0..1.0).contains(&confidence) && confidence > 0.0);
    if sigma.owner != Player::Maximizer {
        return Err(EngineError::WrongOwner(
            sigma.name.clone(),
            Player::Maximizer,
        ));
    }
    if pi.owner != Player::Minimizer {
        return Err(EngineError::WrongOwner(pi.name.clone(), Player::Minimizer));
    }

    let wins: u64 = (0..episodes)
        .into_par_iter()
        .map(|ep| {
            let mut rng = episode_rng(seed, ep);
            run_episode(game, sigma, pi, start, horizon, &mut rng) as u64
        })
        .sum();

    let p_hat = wins as f64 / episodes as f64;
    let half_width = ((2.0 / (1.0 - confidence)).ln() / (2.0 * episodes as f64)).sqrt();
    Ok(ReachEstimate {
        interval: ValueInterval::new(
            (p_hat - half_width).max(0.0),
            (p_hat + half_width).min(1.0),
        ),
        method: EstimateMethod::MonteCarlo,
        horizon,
        episodes: Some(episodes),
        pruned_mass: 0.0,
        seed: Some(seed),
    })
}
