//! Value iteration on frozen finite games, plus stationary-strategy
//! extraction and best-response evaluation against a fixed stationary
//! profile.

use super::matrix::{matrix_game_value, solve_2x2, MatrixGame};
use crate::game::{FiniteGame, FrozenKind};

/// One application of the Bellman operator (least-fixed-point orientation:
/// iterate from 0). `discount` of 1.0 gives the undiscounted reach operator;
/// `discount < 1` the contraction whose optimal stationary strategies
/// guarantee at least the discounted value undiscounted.
pub fn bellman_step(fg: &FiniteGame, v: &[f64], discount: f64) -> Vec<f64> {
    let mut out = vec![0.0; fg.len()];
    for i in 0..fg.len() {
        if fg.target[i] {
            out[i] = 1.0;
            continue;
        }
        let stage = stage_value(fg, i, v);
        out[i] = discount * stage;
    }
    out
}

fn stage_value(fg: &FiniteGame, i: usize, v: &[f64]) -> f64 {
    match &fg.kinds[i] {
        FrozenKind::MaxTurn(succ) => succ.iter().map(|&t| v[t]).fold(0.0, f64::max),
        FrozenKind::MinTurn(succ) => succ.iter().map(|&t| v[t]).fold(f64::INFINITY, f64::min).min(1.0),
        FrozenKind::Random(entries) => entries.iter().map(|&(t, p)| p * v[t]).sum(),
        FrozenKind::Concurrent {
            max_actions,
            min_actions,
            kernel,
        } => {
            let entry = |a: usize, b: usize| -> f64 {
                kernel[a][b].iter().map(|&(t, p)| p * v[t]).sum::<f64>()
            };
            if *max_actions == 2 && *min_actions == 2 {
                solve_2x2([[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]]).0
            } else {
                let payoff: Vec<Vec<f64>> = (0..*max_actions)
                    .map(|a| (0..*min_actions).map(|b| entry(a, b).min(1.0)).collect())
                    .collect();
                matrix_game_value(&MatrixGame::new(payoff).expect("stage matrix in range"))
                    .expect("stage matrix solvable")
                    .0
            }
        }
    }
}

/// Least fixed point from 0; iterates are monotone non-decreasing, which is
/// asserted every sweep. This is the reach value for Maximizer-optimal nodes
/// and the minimal reach probability where Minimizer optimizes. Sweeps are
/// in place (Gauss-Seidel), which keeps the monotone-from-below property
/// while propagating along chains much faster than synchronous steps.
pub fn value_iteration(fg: &FiniteGame, tol: f64, max_iter: usize) -> Vec<f64> {
    let mut v = vec![0.0; fg.len()];
    for i in 0..fg.len() {
        if fg.target[i] {
            v[i] = 1.0;
        }
    }
    for _ in 0..max_iter {
        let mut delta = 0.0f64;
        for i in 0..fg.len() {
            if fg.target[i] {
                continue;
            }
            let next = stage_value(fg, i, &v);
            debug_assert!(next >= v[i] - 1e-12, "Bellman iterate decreased");
            delta = delta.max(next - v[i]);
            v[i] = next;
        }
        if delta < tol {
            break;
        }
    }
    v
}

/// A stationary decision of the fixed player at one state.
#[derive(Debug, Clone)]
pub enum StationaryMove {
    /// Chosen successor index at an own turn node.
    Succ(usize),
    /// Mixed successor choice at an own turn node.
    SuccMix(Vec<(usize, f64)>),
    /// Mixed action at a concurrent node.
    Mix(Vec<f64>),
}

pub type StationaryProfile = Vec<Option<StationaryMove>>;

/// Exact best-response value of the opponent when the Maximizer plays the
/// given stationary profile. Least fixed point from 0.
pub fn best_response_against_max(
    fg: &FiniteGame,
    profile: &StationaryProfile,
    tol: f64,
    max_iter: usize,
) -> Vec<f64> {
    let mut v = vec![0.0; fg.len()];
    for i in 0..fg.len() {
        if fg.target[i] {
            v[i] = 1.0;
        }
    }
    for _ in 0..max_iter {
        let mut delta = 0.0f64;
        for i in 0..fg.len() {
            if fg.target[i] {
                continue;
            }
            let next = response_stage(fg, i, profile, &v);
            delta = delta.max((next - v[i]).abs());
            v[i] = next;
        }
        if delta < tol {
            break;
        }
    }
    v
}

fn response_stage(fg: &FiniteGame, i: usize, profile: &StationaryProfile, v: &[f64]) -> f64 {
    match &fg.kinds[i] {
        FrozenKind::MaxTurn(succ) => {
            if succ.is_empty() {
                return 0.0;
            }
            match profile[i].as_ref() {
                Some(StationaryMove::Succ(j)) => v[succ[*j]],
                Some(StationaryMove::SuccMix(mix)) => {
                    mix.iter().map(|&(j, p)| p * v[succ[j]]).sum()
                }
                _ => v[succ[0]],
            }
        }
        FrozenKind::MinTurn(succ) => succ
            .iter()
            .map(|&t| v[t])
            .fold(f64::INFINITY, f64::min)
            .min(1.0),
        FrozenKind::Random(entries) => entries.iter().map(|&(t, p)| p * v[t]).sum(),
        FrozenKind::Concurrent {
            max_actions,
            min_actions,
            kernel,
        } => {
            let mix: Vec<f64> = match profile[i].as_ref() {
                Some(StationaryMove::Mix(m)) => m.clone(),
                _ => {
                    let mut m = vec![0.0; *max_actions];
                    m[0] = 1.0;
                    m
                }
            };
            (0..*min_actions)
                .map(|b| {
                    (0..*max_actions)
                        .map(|a| {
                            mix[a] * kernel[a][b].iter().map(|&(t, p)| p * v[t]).sum::<f64>()
                        })
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min)
                .min(1.0)
        }
    }
}

/// Exact best-response value of the Maximizer when the Minimizer plays the
/// given stationary profile. Least fixed point from 0.
pub fn best_response_against_min(
    fg: &FiniteGame,
    profile: &StationaryProfile,
    tol: f64,
    max_iter: usize,
) -> Vec<f64> {
    let mut v = vec![0.0; fg.len()];
    for i in 0..fg.len() {
        if fg.target[i] {
            v[i] = 1.0;
        }
    }
    for _ in 0..max_iter {
        let mut delta = 0.0f64;
        for i in 0..fg.len() {
            if fg.target[i] {
                continue;
            }
            let next = response_stage_min_fixed(fg, i, profile, &v);
            delta = delta.max((next - v[i]).abs());
            v[i] = next;
        }
        if delta < tol {
            break;
        }
    }
    v
}

fn response_stage_min_fixed(
    fg: &FiniteGame,
    i: usize,
    profile: &StationaryProfile,
    v: &[f64],
) -> f64 {
    match &fg.kinds[i] {
        FrozenKind::MaxTurn(succ) => succ.iter().map(|&t| v[t]).fold(0.0, f64::max),
        FrozenKind::MinTurn(succ) => {
            if succ.is_empty() {
                return 0.0;
            }
            match profile[i].as_ref() {
                Some(StationaryMove::Succ(j)) => v[succ[*j]],
                Some(StationaryMove::SuccMix(mix)) => {
                    mix.iter().map(|&(j, p)| p * v[succ[j]]).sum()
                }
                _ => v[succ[0]],
            }
        }
        FrozenKind::Random(entries) => entries.iter().map(|&(t, p)| p * v[t]).sum(),
        FrozenKind::Concurrent {
            max_actions,
            min_actions,
            kernel,
        } => {
            let mix: Vec<f64> = match profile[i].as_ref() {
                Some(StationaryMove::Mix(m)) => m.clone(),
                _ => {
                    let mut m = vec![0.0; *min_actions];
                    m[0] = 1.0;
                    m
                }
            };
            (0..*max_actions)
                .map(|a| {
                    (0..*min_actions)
                        .map(|b| {
                            mix[b] * kernel[a][b].iter().map(|&(t, p)| p * v[t]).sum::<f64>()
                        })
                        .sum::<f64>()
                })
                .fold(0.0, f64::max)
                .min(1.0)
        }
    }
}

/// Minimizer profile read off a fixed point: optimal column mixes at
/// concurrent nodes, value-minimal successors at Minimizer turn nodes.
pub fn extract_min_profile(fg: &FiniteGame, v: &[f64]) -> StationaryProfile {
    (0..fg.len())
        .map(|i| {
            if fg.target[i] {
                return None;
            }
            match &fg.kinds[i] {
                FrozenKind::MinTurn(succ) => {
                    if succ.is_empty() {
                        return None;
                    }
                    let pick = succ
                        .iter()
                        .enumerate()
                        .min_by(|(_, &a), (_, &b)| v[a].partial_cmp(&v[b]).unwrap())
                        .map(|(j, _)| j)
                        .unwrap_or(0);
                    Some(StationaryMove::Succ(pick))
                }
                FrozenKind::Concurrent {
                    max_actions,
                    min_actions,
                    kernel,
                } => {
                    let payoff: Vec<Vec<f64>> = (0..*max_actions)
                        .map(|a| {
                            (0..*min_actions)
                                .map(|b| {
                                    kernel[a][b]
                                        .iter()
                                        .map(|&(t, p)| p * v[t])
                                        .sum::<f64>()
                                        .min(1.0)
                                })
                                .collect()
                        })
                        .collect();
                    let (_, _, y) =
                        matrix_game_value(&MatrixGame::new(payoff).expect("entries in range"))
                            .expect("stage matrix solvable");
                    Some(StationaryMove::Mix(y))
                }
                _ => None,
            }
        })
        .collect()
}

/// Maximizer profile read off the (un)discounted fixed point: optimal stage
/// mixes at concurrent nodes, value-maximal successors with a
/// progress-distance tie break at turn nodes.
pub fn extract_max_profile(fg: &FiniteGame, v: &[f64]) -> StationaryProfile {
    let dist = progress_distance(fg, v);
    (0..fg.len())
        .map(|i| {
            if fg.target[i] {
                return None;
            }
            match &fg.kinds[i] {
                FrozenKind::MaxTurn(succ) => {
                    if succ.is_empty() {
                        return None;
                    }
                    let best_v = succ.iter().map(|&t| v[t]).fold(0.0, f64::max);
                    let pick = succ
                        .iter()
                        .enumerate()
                        .filter(|(_, &t)| v[t] >= best_v - 1e-9)
                        .min_by_key(|(_, &t)| dist[t])
                        .map(|(j, _)| j)
                        .unwrap_or(0);
                    Some(StationaryMove::Succ(pick))
                }
                FrozenKind::Concurrent {
                    max_actions,
                    min_actions,
                    kernel,
                } => {
                    let payoff: Vec<Vec<f64>> = (0..*max_actions)
                        .map(|a| {
                            (0..*min_actions)
                                .map(|b| {
                                    kernel[a][b]
                                        .iter()
                                        .map(|&(t, p)| p * v[t])
                                        .sum::<f64>()
                                        .min(1.0)
                                })
                                .collect()
                        })
                        .collect();
                    let (_, x, _) =
                        matrix_game_value(&MatrixGame::new(payoff).expect("entries in range"))
                            .expect("stage matrix solvable");
                    Some(StationaryMove::Mix(x))
                }
                _ => None,
            }
        })
        .collect()
}

/// Discounted fixed point and its stationary optimal profile; guarantees at
/// least the discounted value in the undiscounted reach game.
pub fn extract_discounted_max(
    fg: &FiniteGame,
    lambda: f64,
    max_iter: usize,
) -> (Vec<f64>, StationaryProfile) {
    let mut v = vec![0.0; fg.len()];
    let tol = 1e-14;
    for _ in 0..max_iter {
        let next = bellman_step(fg, &v, lambda);
        let delta = v
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if delta < tol {
            break;
        }
    }
    let profile = (0..fg.len())
        .map(|i| {
            if fg.target[i] {
                return None;
            }
            match &fg.kinds[i] {
                FrozenKind::MaxTurn(succ) => {
                    if succ.is_empty() {
                        return None;
                    }
                    let pick = succ
                        .iter()
                        .enumerate()
                        .max_by(|(_, &a), (_, &b)| v[a].partial_cmp(&v[b]).unwrap())
                        .map(|(j, _)| j)
                        .unwrap_or(0);
                    Some(StationaryMove::Succ(pick))
                }
                FrozenKind::Concurrent {
                    max_actions,
                    min_actions,
                    kernel,
                } => {
                    let payoff: Vec<Vec<f64>> = (0..*max_actions)
                        .map(|a| {
                            (0..*min_actions)
                                .map(|b| {
                                    (lambda
                                        * kernel[a][b]
                                            .iter()
                                            .map(|&(t, p)| p * v[t])
                                            .sum::<f64>())
                                    .min(1.0)
                                })
                                .collect()
                        })
                        .collect();
                    let (_, x, _) =
                        matrix_game_value(&MatrixGame::new(payoff).expect("entries in range"))
                            .expect("stage matrix solvable");
                    Some(StationaryMove::Mix(x))
                }
                _ => None,
            }
        })
        .collect();
    (v, profile)
}

/// Optimistic step count toward the target along value-preserving moves;
/// used only as a tie-breaking heuristic (candidates are verified by exact
/// best response afterwards).
fn progress_distance(fg: &FiniteGame, v: &[f64]) -> Vec<u32> {
    let n = fg.len();
    let mut dist = vec![u32::MAX; n];
    for i in 0..n {
        if fg.target[i] {
            dist[i] = 0;
        }
    }
    for _ in 0..=n {
        let mut changed = false;
        for i in 0..n {
            if fg.target[i] {
                continue;
            }
            let cand = match &fg.kinds[i] {
                FrozenKind::MaxTurn(succ) => {
                    let best_v = succ.iter().map(|&t| v[t]).fold(0.0, f64::max);
                    succ.iter()
                        .filter(|&&t| v[t] >= best_v - 1e-9)
                        .map(|&t| dist[t])
                        .min()
                }
                FrozenKind::MinTurn(succ) => succ.iter().map(|&t| dist[t]).max(),
                FrozenKind::Random(entries) => entries.iter().map(|&(t, _)| dist[t]).min(),
                FrozenKind::Concurrent { kernel, .. } => kernel
                    .iter()
                    .flatten()
                    .flatten()
                    .map(|&(t, _)| dist[t])
                    .min(),
            };
            if let Some(d) = cand {
                if d != u32::MAX {
                    let nd = d.saturating_add(1);
                    if nd < dist[i] {
                        dist[i] = nd;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist
}
