//! Ready-made constructions of every game family the library studies, with
//! exact rational kernels and deterministic canonical enumerations.

pub mod claims;
pub mod random_games;
pub mod strategies;
pub mod windows;

use crate::game::{
    frac, pow2_inv, uncantor, ConcurrentNode, Dist, Game, NodeKind, Prob, StateId,
    Successors, Tag,
};
use num_traits::One;
use std::sync::Arc;

fn absorbing(s: &StateId) -> NodeKind {
    NodeKind::MaxTurn(Successors::Finite(vec![s.clone()]))
}

fn c(i: u32) -> StateId {
    StateId::new(Tag::C, vec![i])
}

fn cij(i: u32, j: u32) -> StateId {
    StateId::new(Tag::Cij, vec![i, j])
}

fn d(i: u32, j: u32) -> StateId {
    StateId::new(Tag::D, vec![i, j])
}

fn r0(i: u32, j: u32) -> StateId {
    StateId::new(Tag::R0, vec![i, j])
}

fn r1(i: u32, j: u32) -> StateId {
    StateId::new(Tag::R1, vec![i, j])
}

fn lose() -> StateId {
    StateId::bare(Tag::Lose)
}

fn win() -> StateId {
    StateId::bare(Tag::Win)
}

fn u_state() -> StateId {
    StateId::bare(Tag::U)
}

/// Concurrent big match on the integers, with the unbounded-descent winning
/// condition realized as a proxy: position `-k_win` is replaced by an
/// absorbing target. Positions are stored shifted by `k_win`, so `C[p]`
/// denotes position `p - k_win` and `C[k_win]` is the start position 0.
///
/// Action table at every interior position (Maximizer row, Minimizer column):
/// `(0,0) -> down`, `(0,1) -> up`, `(1,0) -> lose`, `(1,1) -> win`.
pub fn big_match_z(k_win: u32) -> Game {
    assert!(k_win >= 1);
    let kind_of = Arc::new(move |s: &StateId| -> NodeKind {
        match s.tag {
            Tag::Win | Tag::Lose => absorbing(s),
            Tag::C => {
                let p = s.param(0);
                if p == 0 {
                    // proxy target at position -k_win
                    return absorbing(s);
                }
                NodeKind::Concurrent(ConcurrentNode {
                    max_actions: 2,
                    min_actions: 2,
                    kernel: Arc::new(move |a, b| match (a, b) {
                        (0, 0) => Dist::dirac(c(p - 1)),
                        (0, 1) => Dist::dirac(c(p + 1)),
                        (1, 0) => Dist::dirac(lose()),
                        (1, 1) => Dist::dirac(win()),
                        _ => unreachable!(),
                    }),
                })
            }
            _ => panic!("big_match_z: unknown state {s}"),
        }
    });
    let is_target = Arc::new(move |s: &StateId| -> bool {
        s.tag == Tag::Win || (s.tag == Tag::C && s.param(0) == 0)
    });
    let canonical = Arc::new(move |n: u64| -> Option<StateId> {
        Some(match n {
            0 => c(k_win), // position 0
            1 => win(),
            2 => lose(),
            _ => {
                let m = n - 3;
                let half = m / 2;
                if m < 2 * k_win as u64 {
                    if m % 2 == 0 {
                        c(k_win + half as u32 + 1) // position half+1
                    } else {
                        c(k_win - half as u32 - 1) // position -(half+1)
                    }
                } else {
                    c((m - k_win as u64 + 1) as u32 + k_win)
                }
            }
        })
    });
    Game::new(
        format!("big_match_z({k_win})"),
        kind_of,
        is_target,
        canonical,
        Some(c(k_win)),
    )
}

/// Concurrent big match on the naturals: `c_0` and `lose` are absorbing and
/// the objective is to reach `c_0`. At `c_i` (i ≥ 1): `(0,0) -> c_{i-1}`,
/// `(0,1) -> c_{i+1}`, `(1,0) -> lose`, `(1,1) -> c_0`.
pub fn big_match_n() -> Game {
    let kind_of = Arc::new(move |s: &StateId| -> NodeKind {
        match s.tag {
            Tag::Lose => absorbing(s),
            Tag::C => {
                let i = s.param(0);
                if i == 0 {
                    return absorbing(s);
                }
                NodeKind::Concurrent(ConcurrentNode {
                    max_actions: 2,
                    min_actions: 2,
                    kernel: Arc::new(move |a, b| match (a, b) {
                        (0, 0) => Dist::dirac(c(i - 1)),
                        (0, 1) => Dist::dirac(c(i + 1)),
                        (1, 0) => Dist::dirac(lose()),
                        (1, 1) => Dist::dirac(c(0)),
                        _ => unreachable!(),
                    }),
                })
            }
            _ => panic!("big_match_n: unknown state {s}"),
        }
    });
    let is_target = Arc::new(|s: &StateId| s.tag == Tag::C && s.param(0) == 0);
    let canonical = Arc::new(|n: u64| -> Option<StateId> {
        Some(match n {
            0 => c(0),
            1 => c(1),
            2 => c(2),
            3 => lose(),
            _ => c((n - 1) as u32),
        })
    });
    Game::new("big_match_n", kind_of, is_target, canonical, Some(c(1)))
}

/// Turn-based big match on the naturals. Maximizer walks a chain
/// `c_i -> c_{i,1} -> ... -> c_{i,j}` and commits to `d_{i,j}`, which plays
/// action 1 with probability `1/j`; Minimizer answers 0 or 1 by selecting
/// `r^0_{i,j}` or `r^1_{i,j}`.
pub fn tb_big_match_n() -> Game {
    let kind_of = Arc::new(move |s: &StateId| tb_kind(s, None));
    let is_target = Arc::new(|s: &StateId| s.tag == Tag::C && s.param(0) == 0);
    let canonical = Arc::new(|n: u64| Some(tb_canonical(n)));
    Game::new("tb_big_match_n", kind_of, is_target, canonical, Some(c(1)))
}

/// Shared turn-based transition structure: the plain game when `redirect` is
/// `None`, the delayed variants when transitions into `c_i` detour via `b_i`.
fn tb_kind(s: &StateId, redirect: Option<&dyn Fn(u32) -> StateId>) -> NodeKind {
    let into_c = |i: u32| -> StateId {
        match redirect {
            Some(f) => f(i),
            None => c(i),
        }
    };
    match s.tag {
        Tag::Lose => absorbing(s),
        Tag::C => {
            let i = s.param(0);
            if i == 0 {
                absorbing(s)
            } else {
                NodeKind::MaxTurn(Successors::Finite(vec![cij(i, 1)]))
            }
        }
        Tag::Cij => {
            let (i, j) = (s.param(0), s.param(1));
            NodeKind::MaxTurn(Successors::Finite(vec![cij(i, j + 1), d(i, j)]))
        }
        Tag::D => {
            let (i, j) = (s.param(0), s.param(1));
            NodeKind::MinTurn(Successors::Finite(vec![r0(i, j), r1(i, j)]))
        }
        Tag::R0 => {
            let (i, j) = (s.param(0), s.param(1));
            NodeKind::Random(Dist::two(
                lose(),
                frac(1, j as i64),
                into_c(i.saturating_sub(1)),
            ))
        }
        Tag::R1 => {
            let (i, j) = (s.param(0), s.param(1));
            NodeKind::Random(Dist::two(into_c(0), frac(1, j as i64), into_c(i + 1)))
        }
        _ => panic!("turn-based big match: unknown state {s}"),
    }
}

fn tb_canonical(n: u64) -> StateId {
    match n {
        0 => c(0),
        1 => c(1),
        2 => c(2),
        3 => lose(),
        _ => {
            let m = n - 4;
            let k = m / 5;
            let (i, jm) = uncantor(k);
            let (i, j) = (i as u32, jm as u32 + 1);
            match m % 5 {
                0 => c(k as u32 + 3),
                1 => cij(i, j),
                2 => d(i, j),
                3 => r0(i, j),
                _ => r1(i, j),
            }
        }
    }
}

/// Branching-degree-two turn-based game in which Maximizer can realize only
/// the two mixes `p(i, 0)` and `p(i, 1)` at position i: moving `c_i -> d_{i,m}`
/// plays action 1 with probability `p(i, m)`.
pub fn tb_big_match_simple(p: Arc<dyn Fn(u32, u8) -> Prob + Send + Sync>) -> Game {
    let pk = Arc::clone(&p);
    let kind_of = Arc::new(move |s: &StateId| -> NodeKind {
        match s.tag {
            Tag::Lose => absorbing(s),
            Tag::C => {
                let i = s.param(0);
                if i == 0 {
                    absorbing(s)
                } else {
                    NodeKind::MaxTurn(Successors::Finite(vec![d(i, 0), d(i, 1)]))
                }
            }
            Tag::D => {
                let (i, m) = (s.param(0), s.param(1));
                NodeKind::MinTurn(Successors::Finite(vec![r0(i, m), r1(i, m)]))
            }
            Tag::R0 => {
                let (i, m) = (s.param(0), s.param(1));
                let pv = pk(i, m as u8);
                assert!(pv > Prob::from_integer(0.into()) && pv <= Prob::one());
                NodeKind::Random(Dist::two(lose(), pv, c(i.saturating_sub(1))))
            }
            Tag::R1 => {
                let (i, m) = (s.param(0), s.param(1));
                let pv = pk(i, m as u8);
                NodeKind::Random(Dist::two(c(0), pv, c(i + 1)))
            }
            _ => panic!("tb_big_match_simple: unknown state {s}"),
        }
    });
    let is_target = Arc::new(|s: &StateId| s.tag == Tag::C && s.param(0) == 0);
    let canonical = Arc::new(|n: u64| -> Option<StateId> {
        Some(match n {
            0 => c(0),
            1 => c(1),
            2 => c(2),
            3 => lose(),
            _ => {
                let m = n - 4;
                let k = m / 4;
                let (i, b) = ((k / 2) as u32, (k % 2) as u32);
                match m % 4 {
                    0 => c(k as u32 + 3),
                    1 => d(i, b),
                    2 => r0(i, b),
                    _ => r1(i, b),
                }
            }
        })
    });
    Game::new(
        "tb_big_match_simple",
        kind_of,
        is_target,
        canonical,
        Some(c(1)),
    )
}

/// Turn-based big match extended with an infinitely branching Minimizer
/// state `u` (entry `u -> c_i` for every i) and `lose -> u`, so every state
/// is almost surely winning for Maximizer while positional strategies fail.
pub fn inf_branch_no_mr() -> Game {
    let kind_of = Arc::new(move |s: &StateId| -> NodeKind {
        match s.tag {
            Tag::U => NodeKind::MinTurn(Successors::Infinite(Arc::new(|n| c(n as u32)))),
            Tag::Lose => NodeKind::MaxTurn(Successors::Finite(vec![u_state()])),
            _ => tb_kind(s, None),
        }
    });
    let is_target = Arc::new(|s: &StateId| s.tag == Tag::C && s.param(0) == 0);
    let canonical = Arc::new(|n: u64| -> Option<StateId> {
        Some(if n == 0 { u_state() } else { tb_canonical(n - 1) })
    });
    Game::new(
        "inf_branch_no_mr",
        kind_of,
        is_target,
        canonical,
        Some(u_state()),
    )
}

fn b(i: u32) -> StateId {
    StateId::new(Tag::B, vec![i])
}

fn bij(i: u32, j: u32, l: u32) -> StateId {
    StateId::new(Tag::Bij, vec![i, j, l])
}

/// Delay gadget: `b_i -> b_{i,j}` for every j ≥ 1, then a deterministic
/// chain of random states reaching `c_i` in exactly j steps.
fn delay_kind(s: &StateId, nest: &[u32]) -> NodeKind {
    let with_nest = |mut t: StateId| -> StateId {
        t.nest = nest.to_vec();
        t
    };
    match s.tag {
        Tag::B => {
            let i = s.param(0);
            let nest = nest.to_vec();
            NodeKind::MinTurn(Successors::Infinite(Arc::new(move |n| {
                let mut t = bij(i, n as u32 + 1, 0);
                t.nest = nest.clone();
                t
            })))
        }
        Tag::Bij => {
            let (i, j, l) = (s.param(0), s.param(1), s.param(2));
            let next = if l + 1 < j { bij(i, j, l + 1) } else { c(i) };
            NodeKind::Random(Dist::dirac(with_nest(next)))
        }
        _ => unreachable!(),
    }
}

/// Variant of [`inf_branch_no_mr`] in which every transition into `c_i` is
/// redirected through the delay gadget at `b_i`, letting Minimizer insert an
/// arbitrary finite delay before each position is entered.
pub fn inf_branch_no_markov() -> Game {
    let kind_of = Arc::new(move |s: &StateId| -> NodeKind {
        match s.tag {
            Tag::U => NodeKind::MinTurn(Successors::Infinite(Arc::new(|n| b(n as u32)))),
            Tag::Lose => NodeKind::MaxTurn(Successors::Finite(vec![u_state()])),
            Tag::B | Tag::Bij => delay_kind(s, &[]),
            _ => tb_kind(s, Some(&b)),
        }
    });
    let is_target = Arc::new(|s: &StateId| s.tag == Tag::C && s.param(0) == 0);
    let canonical = Arc::new(|n: u64| Some(no_markov_canonical(n, &[], false)));
    Game::new(
        "inf_branch_no_markov",
        kind_of,
        is_target,
        canonical,
        Some(u_state()),
    )
}

/// Canonical order for one copy of the delayed game, at nest path `nest`,
/// with an extra leading exit-marker slot when the copy is a subgame.
fn no_markov_canonical(n: u64, nest: &[u32], has_exit: bool) -> StateId {
    let with_nest = |mut t: StateId| -> StateId {
        t.nest = nest.to_vec();
        t
    };
    let mut n = n;
    if has_exit {
        if n == 0 {
            return with_nest(StateId::bare(Tag::WinExit));
        }
        n -= 1;
    }
    if n == 0 {
        return with_nest(u_state());
    }
    let n = n - 1;
    with_nest(match n {
        0 => c(0),
        1 => c(1),
        2 => c(2),
        3 => lose(),
        _ => {
            let m = n - 4;
            let k = m / 7;
            let (i, jm) = uncantor(k);
            let (i32_, j) = (i as u32, jm as u32 + 1);
            match m % 7 {
                0 => c(k as u32 + 3),
                1 => cij(i32_, j),
                2 => d(i32_, j),
                3 => r0(i32_, j),
                4 => r1(i32_, j),
                5 => b(k as u32),
                _ => {
                    // (j, l) pairs with l < j via (gap, l) -> j = l + gap + 1
                    let (i, rest) = uncantor(k);
                    let (gap, l) = uncantor(rest);
                    bij(i as u32, (l + gap + 1) as u32, l as u32)
                }
            }
        }
    })
}

/// Canonical order for the k-nested game restricted to nest paths that
/// extend `nest` (subgame copies interleaved with own states).
fn nested_canonical(level: u32, nest: &[u32], n: u64, has_exit: bool) -> StateId {
    if level <= 1 {
        return no_markov_canonical(n, nest, has_exit);
    }
    let mut n = n;
    if has_exit {
        if n == 0 {
            let mut t = StateId::bare(Tag::WinExit);
            t.nest = nest.to_vec();
            return t;
        }
        n -= 1;
    }
    if n % 2 == 0 {
        no_markov_canonical(n / 2, nest, false)
    } else {
        let (i, m) = uncantor(n / 2);
        let mut sub = nest.to_vec();
        sub.push(i as u32 + 1);
        nested_canonical(level - 1, &sub, m, true)
    }
}

fn nested_kind(s: &StateId, k: u32, nest_offset: usize) -> NodeKind {
    let nest = &s.nest[..];
    let depth = (nest.len() - nest_offset) as u32;
    let level = k - depth; // game G_level applies at this depth
    let with_nest = |mut t: StateId| -> StateId {
        t.nest = nest.to_vec();
        t
    };
    match s.tag {
        Tag::U => {
            let nest = nest.to_vec();
            NodeKind::MinTurn(Successors::Infinite(Arc::new(move |n| {
                let mut t = b(n as u32);
                t.nest = nest.clone();
                t
            })))
        }
        Tag::B | Tag::Bij => delay_kind(s, nest),
        Tag::Lose => NodeKind::MaxTurn(Successors::Finite(vec![with_nest(u_state())])),
        Tag::WinExit => {
            // exits subgame copy nest=[..., i] back to c_{i,1} of the parent
            let i = *nest.last().expect("exit marker at top level");
            let mut t = cij(i, 1);
            t.nest = nest[..nest.len() - 1].to_vec();
            NodeKind::MaxTurn(Successors::Finite(vec![t]))
        }
        Tag::C => {
            let i = s.param(0);
            if i == 0 {
                if depth == 0 {
                    // top-level target; combined() overrides this arm
                    return absorbing(s);
                }
                return NodeKind::MaxTurn(Successors::Finite(vec![with_nest(StateId::bare(
                    Tag::WinExit,
                ))]));
            }
            if level >= 2 {
                // Minimizer picks the subgame entry state
                let sub_level = level - 1;
                let mut sub = nest.to_vec();
                sub.push(i);
                NodeKind::MinTurn(Successors::Infinite(Arc::new(move |n| {
                    nested_canonical(sub_level, &sub, n, true)
                })))
            } else {
                NodeKind::MaxTurn(Successors::Finite(vec![with_nest(cij(i, 1))]))
            }
        }
        Tag::Cij | Tag::D | Tag::R0 | Tag::R1 => {
            let nest_vec = nest.to_vec();
            let redirect = move |i: u32| -> StateId {
                let mut t = b(i);
                t.nest = nest_vec.clone();
                t
            };
            match tb_kind(&StateId::new(s.tag, s.params.clone()), Some(&redirect)) {
                NodeKind::MaxTurn(succ) => NodeKind::MaxTurn(renest(succ, nest)),
                NodeKind::MinTurn(succ) => NodeKind::MinTurn(renest(succ, nest)),
                NodeKind::Random(dist) => NodeKind::Random(renest_dist(dist, nest)),
                k => k,
            }
        }
        _ => panic!("nested game: unknown state {s}"),
    }
}

fn renest(succ: Successors, nest: &[u32]) -> Successors {
    match succ {
        Successors::Finite(v) => Successors::Finite(
            v.into_iter()
                .map(|mut t| {
                    if t.nest.is_empty() {
                        t.nest = nest.to_vec();
                    }
                    t
                })
                .collect(),
        ),
        inf => inf,
    }
}

fn renest_dist(dist: Dist<StateId>, nest: &[u32]) -> Dist<StateId> {
    match dist {
        Dist::Finite(v) => Dist::Finite(
            v.into_iter()
                .map(|(mut t, p)| {
                    if t.nest.is_empty() {
                        t.nest = nest.to_vec();
                    }
                    (t, p)
                })
                .collect(),
        ),
        other => other,
    }
}

/// The k-nested game: at every position `c_i` (i ≥ 1) of the outer game,
/// Maximizer must first win a fresh copy of the (k-1)-nested game, entered at
/// a state of Minimizer's choosing. `nested(1)` is [`inf_branch_no_markov`].
pub fn nested(k: u32) -> Game {
    assert!(k >= 1);
    if k == 1 {
        return inf_branch_no_markov();
    }
    let kind_of = Arc::new(move |s: &StateId| nested_kind(s, k, 0));
    let is_target = Arc::new(|s: &StateId| s.tag == Tag::C && s.param(0) == 0 && s.nest.is_empty());
    let canonical = Arc::new(move |n: u64| Some(nested_canonical(k, &[], n, false)));
    Game::new(
        format!("nested({k})"),
        kind_of,
        is_target,
        canonical,
        Some(u_state()),
    )
}

/// All nested games combined: Minimizer picks the nesting depth k at the
/// initial state, and winning any `G_k` releases the play into the global
/// target `f`. States of `G_k` carry nest paths prefixed with k.
pub fn combined() -> Game {
    let kind_of = Arc::new(move |s: &StateId| -> NodeKind {
        match s.tag {
            Tag::S0 => NodeKind::MinTurn(Successors::Infinite(Arc::new(|n| {
                let mut t = u_state();
                t.nest = vec![n as u32 + 1];
                t
            }))),
            Tag::F => absorbing(s),
            _ => {
                let k = *s.nest.first().expect("combined: state outside any G_k");
                if s.tag == Tag::C && s.param(0) == 0 && s.nest.len() == 1 {
                    // top-level target of G_k releases into f
                    return NodeKind::MaxTurn(Successors::Finite(vec![StateId::bare(Tag::F)]));
                }
                nested_kind(s, k, 1)
            }
        }
    });
    let is_target = Arc::new(|s: &StateId| s.tag == Tag::F);
    let canonical = Arc::new(|n: u64| -> Option<StateId> {
        Some(match n {
            0 => StateId::bare(Tag::S0),
            1 => StateId::bare(Tag::F),
            _ => {
                let (k, m) = uncantor(n - 2);
                let k = k as u32 + 1;
                let mut s = nested_canonical(k, &[], m, false);
                let mut nest = vec![k];
                nest.extend_from_slice(&s.nest);
                s.nest = nest;
                s
            }
        })
    });
    Game::new(
        "combined",
        kind_of,
        is_target,
        canonical,
        Some(StateId::bare(Tag::S0)),
    )
}

fn sprime(i: u32) -> StateId {
    StateId::new(Tag::SPrime, vec![i])
}

fn sdprime(i: u32) -> StateId {
    StateId::new(Tag::SDoublePrime, vec![i])
}

fn resolve_node(i: u32) -> StateId {
    // shared random outcome of action a_i: target w.p. 1-2^{-i}
    StateId::new(Tag::R1, vec![i])
}

/// Concurrent (effectively alternating) game in which Maximizer has an
/// optimal strategy but needs infinite memory for it: the initial state
/// scatters geometrically over Minimizer states `s'_i`, each choosing
/// between resolving (target w.p. `1-2^{-i}`) and handing control to the
/// Maximizer-ladder `s''_1, s''_2, ...` that can resolve with any `a_j`.
pub fn conc_optmax() -> Game {
    let kind_of = Arc::new(move |s: &StateId| -> NodeKind {
        match s.tag {
            Tag::Target | Tag::Sink => absorbing(s),
            Tag::S0 => NodeKind::Random(Dist::Countable {
                item: Arc::new(|n| (sprime(n as u32 + 1), pow2_inv(n + 1))),
                tail: Arc::new(|n| 0.5f64.powi(n as i32)),
            }),
            Tag::SPrime => {
                let i = s.param(0);
                NodeKind::MinTurn(Successors::Finite(vec![resolve_node(i), sdprime(1)]))
            }
            Tag::SDoublePrime => {
                let i = s.param(0);
                NodeKind::MaxTurn(Successors::Finite(vec![sdprime(i + 1), resolve_node(i)]))
            }
            Tag::R1 => {
                let i = s.param(0);
                NodeKind::Random(Dist::two(
                    StateId::bare(Tag::Sink),
                    pow2_inv(i as u64),
                    StateId::bare(Tag::Target),
                ))
            }
            _ => panic!("conc_optmax: unknown state {s}"),
        }
    });
    let is_target = Arc::new(|s: &StateId| s.tag == Tag::Target);
    let canonical = Arc::new(|n: u64| -> Option<StateId> {
        Some(match n {
            0 => StateId::bare(Tag::S0),
            1 => StateId::bare(Tag::Target),
            2 => StateId::bare(Tag::Sink),
            _ => {
                let m = n - 3;
                let k = (m / 3) as u32;
                match m % 3 {
                    0 => sprime(k + 1),
                    1 => sdprime(k + 1),
                    _ => resolve_node(k + 1),
                }
            }
        })
    });
    Game::new(
        "conc_optmax",
        kind_of,
        is_target,
        canonical,
        Some(StateId::bare(Tag::S0)),
    )
}

/// Infinitely branching turn-based game in which Minimizer has an optimal
/// strategy but needs infinite memory: Maximizer opens with `s0 -> s'_i`
/// (target w.p. `1/2 - 2^{-i}`, else to `u`), and Minimizer must answer at
/// `u` with the matching `s''_i` (target w.p. `2^{-i}`).
pub fn infbranch_optmin() -> Game {
    let kind_of = Arc::new(move |s: &StateId| -> NodeKind {
        match s.tag {
            Tag::Target | Tag::Sink => absorbing(s),
            Tag::S0 => NodeKind::MaxTurn(Successors::Infinite(Arc::new(|n| sprime(n as u32 + 1)))),
            Tag::SPrime => {
                let i = s.param(0);
                NodeKind::Random(Dist::two(
                    StateId::bare(Tag::Target),
                    frac(1, 2) - pow2_inv(i as u64),
                    u_state(),
                ))
            }
            Tag::U => NodeKind::MinTurn(Successors::Infinite(Arc::new(|n| sdprime(n as u32 + 1)))),
            Tag::SDoublePrime => {
                let i = s.param(0);
                NodeKind::Random(Dist::two(
                    StateId::bare(Tag::Target),
                    pow2_inv(i as u64),
                    StateId::bare(Tag::Sink),
                ))
            }
            _ => panic!("infbranch_optmin: unknown state {s}"),
        }
    });
    let is_target = Arc::new(|s: &StateId| s.tag == Tag::Target);
    let canonical = Arc::new(|n: u64| -> Option<StateId> {
        Some(match n {
            0 => StateId::bare(Tag::S0),
            1 => u_state(),
            2 => StateId::bare(Tag::Target),
            3 => StateId::bare(Tag::Sink),
            _ => {
                let m = n - 4;
                let k = (m / 2) as u32;
                if m % 2 == 0 {
                    sprime(k + 1)
                } else {
                    sdprime(k + 1)
                }
            }
        })
    });
    Game::new(
        "infbranch_optmin",
        kind_of,
        is_target,
        canonical,
        Some(StateId::bare(Tag::S0)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn big_match_n_enumeration_prefix() {
        let g = big_match_n();
        assert_eq!(g.enumerate_states(3), vec![c(0), c(1), c(2)]);
        assert_eq!(g.enumerate_states(0), Vec::<StateId>::new());
    }

    #[test]
    fn big_match_n_kernel_rows() {
        let g = big_match_n();
        let NodeKind::Concurrent(node) = g.kind_of(&c(3)) else {
            panic!()
        };
        let dirac_to = |dist: Dist<StateId>| match dist {
            Dist::Finite(v) if v.len() == 1 => v[0].0.clone(),
            _ => panic!("expected dirac"),
        };
        assert_eq!(dirac_to(node.kernel(1, 1)), c(0));
        assert_eq!(dirac_to(node.kernel(0, 1)), c(4));
        assert_eq!(dirac_to(node.kernel(0, 0)), c(2));
        assert_eq!(dirac_to(node.kernel(1, 0)), lose());
        // c0 absorbing under all profiles
        assert!(matches!(g.kind_of(&c(0)), NodeKind::MaxTurn(_)));
        assert!(g.is_target(&c(0)));
    }

    #[test]
    fn big_match_z_rows_and_proxy() {
        let g = big_match_z(5);
        let pos = |i: i64| c((i + 5) as u32);
        let NodeKind::Concurrent(node) = g.kind_of(&pos(0)) else {
            panic!()
        };
        let dirac_to = |dist: Dist<StateId>| match dist {
            Dist::Finite(v) if v.len() == 1 => v[0].0.clone(),
            _ => panic!(),
        };
        assert_eq!(dirac_to(node.kernel(1, 1)), win());
        assert_eq!(dirac_to(node.kernel(0, 0)), pos(-1));
        assert!(g.is_target(&pos(-5)));
        // proxy target reached from the position above it via (0,0)
        let NodeKind::Concurrent(node) = g.kind_of(&pos(-4)) else {
            panic!()
        };
        assert_eq!(dirac_to(node.kernel(0, 0)), pos(-5));
    }

    #[test]
    fn tb_probabilities_match_formulas() {
        let g = tb_big_match_n();
        let NodeKind::Random(dist) = g.kind_of(&r0(4, 3)) else {
            panic!()
        };
        let Dist::Finite(v) = dist else { panic!() };
        // P(r0_{4,3})(c_3) = 1 - 1/3 = 2/3
        let p_c3 = v.iter().find(|(t, _)| *t == c(3)).unwrap().1.clone();
        assert_eq!(p_c3, frac(2, 3));
        let NodeKind::MinTurn(Successors::Finite(succ)) = g.kind_of(&d(4, 3)) else {
            panic!()
        };
        assert_eq!(succ, vec![r0(4, 3), r1(4, 3)]);
    }

    #[test]
    fn inf_branch_entry_enumerator() {
        let g = inf_branch_no_mr();
        let NodeKind::MinTurn(Successors::Infinite(f)) = g.kind_of(&u_state()) else {
            panic!()
        };
        assert_eq!(f(0), c(0));
        assert_eq!(f(1), c(1));
        assert_eq!(f(2), c(2));
        // lose feeds back into u
        let NodeKind::MaxTurn(Successors::Finite(succ)) = g.kind_of(&lose()) else {
            panic!()
        };
        assert_eq!(succ, vec![u_state()]);
    }

    #[test]
    fn delay_gadget_has_exact_length() {
        let g = inf_branch_no_markov();
        // from b_{i,3}: three steps to c_i
        let mut s = bij(7, 3, 0);
        let mut steps = 0;
        loop {
            let NodeKind::Random(Dist::Finite(v)) = g.kind_of(&s) else {
                panic!()
            };
            assert_eq!(v.len(), 1);
            steps += 1;
            s = v[0].0.clone();
            if s.tag == Tag::C {
                break;
            }
        }
        assert_eq!(steps, 3);
        assert_eq!(s, c(7));
    }

    #[test]
    fn nested_two_subgame_entry() {
        let g = nested(2);
        let NodeKind::MinTurn(Successors::Infinite(f)) = g.kind_of(&c(4)) else {
            panic!()
        };
        for n in 0..60 {
            let s = f(n);
            assert_eq!(s.nest, vec![4], "entry state {s} outside copy 4");
        }
        // 50 distinct states, nest length ≤ 1
        let states = g.enumerate_states(50);
        assert_eq!(states.len(), 50);
        let set: std::collections::BTreeSet<_> = states.iter().cloned().collect();
        assert_eq!(set.len(), 50);
        assert!(states.iter().all(|s| s.nest.len() <= 1));
        // subgame target exits via the marker to the outer chain
        let mut c0_sub = c(0);
        c0_sub.nest = vec![4];
        let NodeKind::MaxTurn(Successors::Finite(succ)) = g.kind_of(&c0_sub) else {
            panic!()
        };
        assert_eq!(succ[0].tag, Tag::WinExit);
        let NodeKind::MaxTurn(Successors::Finite(succ)) = g.kind_of(&succ[0]) else {
            panic!()
        };
        assert_eq!(succ[0], cij(4, 1));
        assert!(!g.is_target(&c0_sub));
    }

    #[test]
    fn combined_routes_each_depth() {
        let g = combined();
        let NodeKind::MinTurn(Successors::Infinite(f)) = g.kind_of(&StateId::bare(Tag::S0)) else {
            panic!()
        };
        let u1 = f(0);
        assert_eq!(u1.tag, Tag::U);
        assert_eq!(u1.nest, vec![1]);
        let mut c0_k2 = c(0);
        c0_k2.nest = vec![2];
        let NodeKind::MaxTurn(Successors::Finite(succ)) = g.kind_of(&c0_k2) else {
            panic!()
        };
        assert_eq!(succ, vec![StateId::bare(Tag::F)]);
    }

    #[test]
    fn opt_counterexample_kernels() {
        let g = conc_optmax();
        let NodeKind::Random(dist) = g.kind_of(&StateId::bare(Tag::S0)) else {
            panic!()
        };
        let pre = dist.prefix(3);
        assert_eq!(pre[0].1, frac(1, 2));
        assert_eq!(pre[1].1, frac(1, 4));
        assert_eq!(pre[2].1, frac(1, 8));
        assert!(dist.tail_bound(3) <= 0.125 + 1e-15);

        let g = infbranch_optmin();
        let NodeKind::Random(Dist::Finite(v)) = g.kind_of(&sdprime(3)) else {
            panic!()
        };
        let p_t = v
            .iter()
            .find(|(t, _)| t.tag == Tag::Target)
            .unwrap()
            .1
            .to_f64()
            .unwrap();
        assert_eq!(p_t, 0.125);
        let p_b = v
            .iter()
            .find(|(t, _)| t.tag == Tag::Sink)
            .unwrap()
            .1
            .to_f64()
            .unwrap();
        assert_eq!(p_b, 0.875);
    }

    #[test]
    fn canonical_enumerations_are_injective() {
        for g in [
            big_match_n(),
            big_match_z(8),
            tb_big_match_n(),
            inf_branch_no_mr(),
            inf_branch_no_markov(),
            nested(2),
            nested(3),
            combined(),
            conc_optmax(),
            infbranch_optmin(),
        ] {
            let states = g.enumerate_states(2000);
            let set: std::collections::BTreeSet<_> = states.iter().cloned().collect();
            assert_eq!(set.len(), states.len(), "duplicates in {}", g.label());
        }
    }
}
