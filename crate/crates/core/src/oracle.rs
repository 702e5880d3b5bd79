//! Independent verification paths: exact chain solving, exhaustive
//! enumeration of deterministic memoryless responses, and a grid-search
//! matrix-game oracle. These deliberately avoid the iterative solvers they
//! cross-check.

use crate::game::{FiniteGame, FrozenKind};
use crate::solver::{StationaryMove, StationaryProfile};

/// Exact reach probabilities of a finite Markov chain, by topological back
/// substitution when the chain is acyclic and Gaussian elimination otherwise.
/// States that cannot reach the target at all are zeroed first, which keeps
/// the linear system nonsingular and selects the minimal solution.
pub fn chain_reach_exact(trans: &[Vec<(usize, f64)>], target: &[bool]) -> Vec<f64> {
    let n = trans.len();
    // states with a path to the target
    let mut can = target.to_vec();
    loop {
        let mut changed = false;
        for i in 0..n {
            if !can[i] && trans[i].iter().any(|&(t, p)| p > 0.0 && can[t]) {
                can[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    if let Some(order) = topo_order(trans, target) {
        let mut v = vec![0.0; n];
        for i in 0..n {
            if target[i] {
                v[i] = 1.0;
            }
        }
        for &i in order.iter().rev() {
            if !target[i] && can[i] {
                v[i] = trans[i].iter().map(|&(t, p)| p * v[t]).sum();
            }
        }
        return v;
    }

    // dense solve of (I - Q) x = b over the states that can reach the target
    let live: Vec<usize> = (0..n).filter(|&i| can[i] && !target[i]).collect();
    let index: std::collections::HashMap<usize, usize> =
        live.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let m = live.len();
    let mut a = vec![vec![0.0f64; m + 1]; m];
    for (k, &i) in live.iter().enumerate() {
        a[k][k] = 1.0;
        for &(t, p) in &trans[i] {
            if target[t] {
                a[k][m] += p;
            } else if let Some(&kt) = index.get(&t) {
                a[k][kt] -= p;
            }
        }
    }
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
            .unwrap();
        a.swap(col, piv);
        let d = a[col][col];
        assert!(d.abs() > 1e-14, "singular reach system");
        for j in col..=m {
            a[col][j] /= d;
        }
        for row in 0..m {
            if row != col && a[row][col].abs() > 0.0 {
                let f = a[row][col];
                for j in col..=m {
                    a[row][j] -= f * a[col][j];
                }
            }
        }
    }
    let mut v = vec![0.0; n];
    for i in 0..n {
        if target[i] {
            v[i] = 1.0;
        }
    }
    for (k, &i) in live.iter().enumerate() {
        v[i] = a[k][m].clamp(0.0, 1.0);
    }
    v
}

fn topo_order(trans: &[Vec<(usize, f64)>], target: &[bool]) -> Option<Vec<usize>> {
    let n = trans.len();
    let mut indeg = vec![0usize; n];
    for (i, row) in trans.iter().enumerate() {
        if target[i] {
            continue;
        }
        for &(t, p) in row {
            if p > 0.0 && !target[t] && t != i {
                indeg[t] += 1;
            }
        }
    }
    let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    while let Some(i) = queue.pop() {
        if seen[i] {
            continue;
        }
        seen[i] = true;
        order.push(i);
        if target[i] {
            continue;
        }
        for &(t, p) in &trans[i] {
            if p > 0.0 && !target[t] && t != i {
                indeg[t] -= 1;
                if indeg[t] == 0 {
                    queue.push(t);
                }
            }
        }
    }
    // self-loops at absorbing states are fine; anything else unsorted means a cycle
    if (0..n).all(|i| seen[i] || trans[i].iter().all(|&(t, _)| t == i)) {
        for i in 0..n {
            if !seen[i] {
                order.push(i);
            }
        }
        Some(order)
    } else {
        None
    }
}

/// All decision nodes of a turn-based finite game, as (state, #choices).
fn decision_nodes(fg: &FiniteGame, maximizer: bool) -> Vec<(usize, usize)> {
    (0..fg.len())
        .filter_map(|i| {
            if fg.target[i] {
                return None;
            }
            match (&fg.kinds[i], maximizer) {
                (FrozenKind::MaxTurn(succ), true) | (FrozenKind::MinTurn(succ), false)
                    if succ.len() > 1 =>
                {
                    Some((i, succ.len()))
                }
                (FrozenKind::Concurrent { .. }, _) => {
                    panic!("brute-force oracle is for turn-based games")
                }
                _ => None,
            }
        })
        .collect()
}

fn chain_of(
    fg: &FiniteGame,
    max_pick: &dyn Fn(usize) -> usize,
    min_pick: &dyn Fn(usize) -> usize,
) -> Vec<Vec<(usize, f64)>> {
    (0..fg.len())
        .map(|i| match &fg.kinds[i] {
            FrozenKind::MaxTurn(succ) => {
                if succ.is_empty() {
                    vec![(i, 1.0)]
                } else {
                    vec![(succ[max_pick(i).min(succ.len() - 1)], 1.0)]
                }
            }
            FrozenKind::MinTurn(succ) => {
                if succ.is_empty() {
                    vec![(i, 1.0)]
                } else {
                    vec![(succ[min_pick(i).min(succ.len() - 1)], 1.0)]
                }
            }
            FrozenKind::Random(entries) => entries.clone(),
            FrozenKind::Concurrent { .. } => unreachable!(),
        })
        .collect()
}

fn enumerate_selectors(nodes: &[(usize, usize)], mut visit: impl FnMut(&dyn Fn(usize) -> usize)) {
    let total: usize = nodes.iter().map(|&(_, k)| k).product::<usize>().max(1);
    assert!(total <= 1 << 22, "brute-force space too large: {total}");
    let mut choice: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    for code in 0..total {
        let mut c = code;
        for &(s, k) in nodes {
            choice.insert(s, c % k);
            c /= k;
        }
        let pick = |i: usize| choice.get(&i).copied().unwrap_or(0);
        visit(&pick);
    }
}

/// Game values of a tiny turn-based game by exhaustive enumeration over both
/// players' deterministic memoryless strategies and exact chain solving.
/// Valid because finite turn-based reachability games admit optimal MD
/// strategies for both players.
pub fn bruteforce_game_values(fg: &FiniteGame) -> Vec<f64> {
    let max_nodes = decision_nodes(fg, true);
    let min_nodes = decision_nodes(fg, false);
    let mut best = vec![0.0f64; fg.len()];
    enumerate_selectors(&max_nodes, |max_pick| {
        // inner: Minimizer best response to this Max selector
        let mut worst = vec![1.0f64; fg.len()];
        enumerate_selectors(&min_nodes, |min_pick| {
            let chain = chain_of(fg, max_pick, min_pick);
            let v = chain_reach_exact(&chain, &fg.target);
            for i in 0..v.len() {
                worst[i] = worst[i].min(v[i]);
            }
        });
        for i in 0..worst.len() {
            best[i] = best[i].max(worst[i]);
        }
    });
    best
}

/// Best response values of one player against a fixed stationary profile of
/// the other, by exhaustive enumeration (turn-based games only).
pub fn bruteforce_response(
    fg: &FiniteGame,
    fixed_max: Option<&StationaryProfile>,
    fixed_min: Option<&StationaryProfile>,
) -> Vec<f64> {
    assert!(fixed_max.is_some() != fixed_min.is_some());
    let optimizing_max = fixed_min.is_some();
    let nodes = decision_nodes(fg, optimizing_max);
    let fixed_pick = |profile: &StationaryProfile, i: usize| -> usize {
        match profile.get(i).and_then(|m| m.as_ref()) {
            Some(StationaryMove::Succ(j)) => *j,
            _ => 0,
        }
    };
    let mut best = vec![if optimizing_max { 0.0f64 } else { 1.0f64 }; fg.len()];
    enumerate_selectors(&nodes, |pick| {
        let chain = match (fixed_max, fixed_min) {
            (Some(pm), None) => chain_of(fg, &|i| fixed_pick(pm, i), pick),
            (None, Some(pn)) => chain_of(fg, pick, &|i| fixed_pick(pn, i)),
            _ => unreachable!(),
        };
        let v = chain_reach_exact(&chain, &fg.target);
        for i in 0..v.len() {
            best[i] = if optimizing_max {
                best[i].max(v[i])
            } else {
                best[i].min(v[i])
            };
        }
    });
    best
}

/// Grid-search value of a 2x2 matrix game: scans row mixes at the given
/// resolution and takes the best guaranteed column response.
pub fn grid_matrix_value_2x2(payoff: &[[f64; 2]; 2], resolution: f64) -> f64 {
    let steps = (1.0 / resolution).round() as usize;
    let mut best = f64::NEG_INFINITY;
    for k in 0..=steps {
        let p = k as f64 / steps as f64;
        let col0 = p * payoff[0][0] + (1.0 - p) * payoff[1][0];
        let col1 = p * payoff[0][1] + (1.0 - p) * payoff[1][1];
        best = best.max(col0.min(col1));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_solves_simple_walk() {
        // 0 -> {1 w.p. 1/2, 2 w.p. 1/2}, 1 target, 2 sink
        let trans = vec![vec![(1, 0.5), (2, 0.5)], vec![(1, 1.0)], vec![(2, 1.0)]];
        let v = chain_reach_exact(&trans, &[false, true, false]);
        assert!((v[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn chain_solves_gamblers_ruin() {
        // positions 0..=4, absorb at 0 (sink) and 4 (target), fair steps
        let mut trans = vec![vec![(0, 1.0)]; 5];
        for i in 1..4 {
            trans[i] = vec![(i - 1, 0.5), (i + 1, 0.5)];
        }
        trans[4] = vec![(4, 1.0)];
        let target = [false, false, false, false, true];
        let v = chain_reach_exact(&trans, &target);
        for i in 0..5 {
            assert!((v[i] - i as f64 / 4.0).abs() < 1e-10, "v[{i}] = {}", v[i]);
        }
    }
}
