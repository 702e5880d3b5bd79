//! The catalog's ready-made strategies and counter-strategy constructors,
//! each carrying the analytic certificates the harness checks them against.

use crate::engine::{forward_sweep, SweepOptions};
use crate::game::{Game, NodeKind, StateId, Tag};
use crate::numerics::{Convergence, SeriesOracle};
use crate::strategy::{
    AccumulationOracle, MemorySpec, Mix, ModeCount, Move, Player, Strategy, Visibility,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("certificate does not decide the series (got {0:?})")]
    UndecidedCertificate(Convergence),
    #[error("certificate {got:?} does not match the declared classification {declared:?}")]
    CertificateMismatch {
        declared: Convergence,
        got: Convergence,
    },
    #[error("strategy family {0} is not defined for game {1}")]
    WrongGame(String, String),
    #[error("no finite index beats the opponent tail value {0}")]
    NoExploitIndex(f64),
    #[error(transparent)]
    Engine(#[from] crate::engine::EngineError),
}

/// Plays action 1 with probability `1/(n+1)^2` at position `i = x+N-n`
/// (and action 0 above `x+N`, which is unreachable from `c_x` under this
/// scheme). Memoryless in the game state.
pub fn max_bm_strategy(x: u32, n_cap: u32) -> Strategy {
    Strategy::memoryless(
        format!("max_bm({x},{n_cap})"),
        Player::Maximizer,
        move |s: &StateId| -> Mix<Move> {
            if s.tag == Tag::C && s.param(0) >= 1 {
                let i = s.param(0);
                if i <= x + n_cap {
                    let n = (x + n_cap - i) as f64;
                    let p1 = 1.0 / ((n + 1.0) * (n + 1.0));
                    return Mix(vec![(Move::Action(1), p1), (Move::Action(0), 1.0 - p1)]);
                }
            }
            Mix::dirac(Move::Action(0))
        },
    )
}

/// Turn-based counterpart: walks the chain at `c_i` to commitment index
/// `j = (n+1)^2` with `n = x+N-i`, and walks forever above `x+N`. A
/// deterministic position-indexed rule, memoryless in the game state.
pub fn max_bm_strategy_tb(x: u32, n_cap: u32) -> Strategy {
    tb_walker(format!("max_bm_tb({x},{n_cap})"), move |i| {
        if i >= 1 && i <= x + n_cap {
            let n = x + n_cap - i;
            Some((n + 1) * (n + 1))
        } else {
            None
        }
    })
}

/// MD chain walker for turn-based big match shapes: at position i it commits
/// at index `j_of(i)`; `None` walks the chain forever (never resolves).
pub fn tb_walker(name: String, j_of: impl Fn(u32) -> Option<u32> + Send + Sync + 'static) -> Strategy {
    Strategy::md(name, Player::Maximizer, move |s: &StateId| -> Move {
        match s.tag {
            Tag::C => Move::Succ(StateId::with_nest(
                Tag::Cij,
                vec![s.param(0), 1],
                s.nest.clone(),
            )),
            Tag::Cij => {
                let (i, l) = (s.param(0), s.param(1));
                match j_of(i) {
                    Some(j) if l >= j => {
                        Move::Succ(StateId::with_nest(Tag::D, vec![i, l], s.nest.clone()))
                    }
                    _ => Move::Succ(StateId::with_nest(
                        Tag::Cij,
                        vec![i, l + 1],
                        s.nest.clone(),
                    )),
                }
            }
            Tag::Lose => Move::Succ(StateId::with_nest(Tag::U, vec![], s.nest.clone())),
            _ => Move::Action(0),
        }
    })
}

/// Tosses a fair coin at every concurrent decision.
pub fn min_fair_coin() -> Strategy {
    Strategy::memoryless("min_fair_coin", Player::Minimizer, |_s| {
        Mix(vec![(Move::Action(0), 0.5), (Move::Action(1), 0.5)])
    })
}

/// Always picks the given action: directly at concurrent nodes, and by
/// selecting the matching outcome state at the Minimizer decision states of
/// the turn-based shapes. At other Minimizer states picks the first
/// successor.
pub fn min_always(b: usize) -> Strategy {
    Strategy::md(format!("min_always({b})"), Player::Minimizer, move |s| {
        match s.tag {
            Tag::D => {
                let tag = if b == 0 { Tag::R0 } else { Tag::R1 };
                Move::Succ(StateId::with_nest(tag, s.params.clone(), s.nest.clone()))
            }
            _ => Move::Action(b),
        }
    })
}

/// A positional resolution profile `f` with its convergence certificate.
#[derive(Clone)]
pub struct MrFamily {
    pub f: Arc<dyn Fn(u64) -> f64 + Send + Sync>,
    pub series: SeriesOracle,
}

impl MrFamily {
    pub fn new(
        f: impl Fn(u64) -> f64 + Send + Sync + 'static,
        series: SeriesOracle,
    ) -> MrFamily {
        MrFamily {
            f: Arc::new(f),
            series,
        }
    }

    /// f(k) = 1/(k+1)^2: summable, with analytic tail bound 1/k.
    pub fn inverse_squares() -> MrFamily {
        MrFamily::new(
            |k| 1.0 / ((k + 1) as f64).powi(2),
            SeriesOracle::convergent(
                |k| 1.0 / ((k + 1) as f64).powi(2),
                |n| if n == 0 { 2.0 } else { 1.0 / n as f64 },
            ),
        )
    }

    /// Constant f, divergent with the obvious witness.
    pub fn constant(c: f64) -> MrFamily {
        assert!((0.0..=1.0).contains(&c) && c > 0.0);
        MrFamily::new(
            move |_| c,
            SeriesOracle::divergent(move |_| c, move |m| (m / c).ceil() as u64 + 1),
        )
    }

    /// Certified upper bound on `Σ_{k≥x} f(k)`.
    pub fn tail_from(&self, x: u64) -> Option<f64> {
        let m = x.max(1) + 8192;
        let head: f64 = (x.max(1)..=m).map(|k| (self.series.term)(k)).sum();
        self.series.sum_tail_bound.as_ref().map(|t| head + t(m))
    }
}

/// Memoryless Maximizer strategy playing action 1 with probability `f(i)` at
/// position i of the concurrent big match.
pub fn mr_from_f(family: &MrFamily) -> Strategy {
    let f = Arc::clone(&family.f);
    Strategy::memoryless("mr_from_f", Player::Maximizer, move |s: &StateId| {
        if s.tag == Tag::C && s.param(0) >= 1 {
            let p1 = f(s.param(0) as u64).clamp(0.0, 1.0);
            Mix(vec![(Move::Action(1), p1), (Move::Action(0), 1.0 - p1)])
        } else {
            Mix::dirac(Move::Action(0))
        }
    })
}

/// The Minimizer counter to a positional profile, chosen by the certified
/// convergence class of `Σ f`, together with the analytic attainment bound.
pub struct MinVsMr {
    pub strategy: Strategy,
    pub case: Convergence,
    /// x -> certified upper bound on the attainment from position x.
    pub bound: Arc<dyn Fn(u64) -> f64 + Send + Sync>,
}

pub fn min_vs_mr(family: &MrFamily) -> Result<MinVsMr, CatalogError> {
    let case = crate::numerics::product_positive(&family.series, 1 << 22);
    match case {
        Convergence::ConvergesPositive => {
            // summable resolution: climb forever; wins only while resolving
            let fam = family.clone();
            Ok(MinVsMr {
                strategy: min_always(1),
                case,
                bound: Arc::new(move |x| fam.tail_from(x).unwrap_or(1.0).min(1.0)),
            })
        }
        Convergence::DivergesToZero => {
            // divergent resolution: descend; survival is a thinning product
            let f = Arc::clone(&family.f);
            Ok(MinVsMr {
                strategy: min_always(0),
                case,
                bound: Arc::new(move |x| {
                    let sum: f64 = (1..=x).map(|k| f(k)).sum();
                    1.0 / (1.0 + sum)
                }),
            })
        }
        Convergence::Undecided => Err(CatalogError::UndecidedCertificate(case)),
    }
}

/// Accumulation oracle plus series data for one of the catalog's Markov
/// walker strategies on the delayed game.
pub struct MarkovFamily {
    pub strategy: Strategy,
    pub oracle: AccumulationOracle,
    pub series: SeriesOracle,
    pub classification: Convergence,
}

/// Markov chain walker: at position i entered at stage t0, commits at index
/// `j_of(i, t0)`. Uses only the step counter: the chain offset recovers the
/// entry stage.
pub fn tb_markov_walker(
    name: String,
    j_of: Arc<dyn Fn(u32, u64) -> u32 + Send + Sync>,
) -> Strategy {
    let j = Arc::clone(&j_of);
    Strategy::new(
        name,
        Player::Maximizer,
        MemorySpec::markov(),
        true,
        Arc::new(move |s: &StateId, _m, t| -> Mix<Move> {
            let mv = match s.tag {
                Tag::C => Move::Succ(StateId::with_nest(
                    Tag::Cij,
                    vec![s.param(0), 1],
                    s.nest.clone(),
                )),
                Tag::Cij => {
                    let (i, l) = (s.param(0), s.param(1));
                    // the chain position reveals the entry stage
                    let t0 = t.saturating_sub(l as u64);
                    if l >= j(i, t0).max(1) {
                        Move::Succ(StateId::with_nest(Tag::D, vec![i, l], s.nest.clone()))
                    } else {
                        Move::Succ(StateId::with_nest(
                            Tag::Cij,
                            vec![i, l + 1],
                            s.nest.clone(),
                        ))
                    }
                }
                Tag::Lose => Move::Succ(StateId::with_nest(Tag::U, vec![], s.nest.clone())),
                _ => Move::Action(0),
            };
            Mix::dirac(mv)
        }),
        Arc::new(|_, _, m, _| Mix::dirac(m)),
    )
}

/// Markov strategy whose resolution probability alternates between
/// `1/((i+1)^2)` and `1/((i+1)^2+1)` with the parity of the entry stage;
/// the accumulation point is the smaller value and the series converges.
pub fn markov_parity_summable() -> MarkovFamily {
    let jf = |i: u32, t0: u64| (i + 1) * (i + 1) + (t0 % 2) as u32;
    let f_at = move |i: u64, t: u64| 1.0 / jf(i as u32, t) as f64;
    let f_lim = |i: u64| 1.0 / (((i + 1) * (i + 1) + 1) as f64);
    MarkovFamily {
        strategy: tb_markov_walker("markov_parity_summable".into(), Arc::new(jf)),
        oracle: AccumulationOracle {
            f_limit: Arc::new(f_lim),
            f_at: Arc::new(f_at),
            witness_ge: Arc::new(|_i, _eps, t0| t0),
            witness_le: Arc::new(|_i, _eps, t0| if t0 % 2 == 1 { t0 } else { t0 + 1 }),
        },
        series: SeriesOracle::convergent(f_lim, |n| if n == 0 { 2.0 } else { 1.0 / n as f64 }),
        classification: Convergence::ConvergesPositive,
    }
}

/// Markov strategy whose resolution probability alternates between 1/2 and
/// 1/3; the accumulation point is 1/3 everywhere, a divergent series.
pub fn markov_parity_divergent() -> MarkovFamily {
    let jf = |_i: u32, t0: u64| 2 + (t0 % 2) as u32;
    let f_at = move |i: u64, t: u64| 1.0 / jf(i as u32, t) as f64;
    let f_lim = |_i: u64| 1.0 / 3.0;
    MarkovFamily {
        strategy: tb_markov_walker("markov_parity_divergent".into(), Arc::new(jf)),
        oracle: AccumulationOracle {
            f_limit: Arc::new(f_lim),
            f_at: Arc::new(f_at),
            witness_ge: Arc::new(|_i, _eps, t0| t0),
            witness_le: Arc::new(|_i, _eps, t0| if t0 % 2 == 1 { t0 } else { t0 + 1 }),
        },
        series: SeriesOracle::divergent(|_| 1.0 / 3.0, |m| (3.0 * m).ceil() as u64 + 1),
        classification: Convergence::DivergesToZero,
    }
}

/// Minimizer counter-strategy against a Markov walker on the delayed game:
/// enters at a certified index, delays every position entry to a witnessed
/// stage, then plays the single action dictated by the convergence class.
/// The per-cycle budget halves after each return to `u`.
pub fn min_vs_markov(
    oracle: &AccumulationOracle,
    series: &SeriesOracle,
    classification: Convergence,
    eps: f64,
) -> Result<Strategy, CatalogError> {
    match classification {
        Convergence::ConvergesPositive if series.sum_tail_bound.is_none() => {
            return Err(CatalogError::CertificateMismatch {
                declared: classification,
                got: Convergence::Undecided,
            })
        }
        Convergence::DivergesToZero if series.divergence_witness.is_none() => {
            return Err(CatalogError::CertificateMismatch {
                declared: classification,
                got: Convergence::Undecided,
            })
        }
        Convergence::Undecided => {
            return Err(CatalogError::UndecidedCertificate(classification))
        }
        _ => {}
    }

    const CYCLE_CAP: u64 = 32;
    let entry_memo: Arc<Mutex<HashMap<u64, u32>>> = Arc::new(Mutex::new(HashMap::new()));
    let series = series.clone();
    let oracle = oracle.clone();
    let summable = classification == Convergence::ConvergesPositive;

    let entry_for = {
        let series = series.clone();
        move |cycle: u64, memo: &Mutex<HashMap<u64, u32>>| -> u32 {
            if let Some(&i) = memo.lock().unwrap().get(&cycle) {
                return i;
            }
            let eps_l = eps * 0.5f64.powi(cycle as i32 + 1);
            let i0 = if summable {
                // smallest i with certified Σ_{k≥i} f(k) ≤ eps_l / 2
                let tail = series.sum_tail_bound.as_ref().unwrap();
                let mut i = 1u64;
                loop {
                    let m = i + 8192;
                    let head: f64 = (i..=m).map(|k| (series.term)(k)).sum();
                    if head + tail(m) <= eps_l / 2.0 {
                        break i as u32;
                    }
                    i += 1;
                }
            } else {
                // smallest i with Σ_{k≤i} f(k) ≥ 1/eps_l
                let target = 1.0 / eps_l;
                let mut sum = 0.0;
                let mut i = 0u64;
                loop {
                    i += 1;
                    sum += (series.term)(i);
                    if sum >= target {
                        break i as u32;
                    }
                }
            };
            memo.lock().unwrap().insert(cycle, i0);
            i0
        }
    };

    let memo = Arc::clone(&entry_memo);
    let act = Arc::new(move |s: &StateId, mode: u64, t: u64| -> Mix<Move> {
        let nest = s.nest.clone();
        let mv = match s.tag {
            Tag::U => {
                let i0 = entry_for(mode.min(CYCLE_CAP - 1), &memo);
                Move::Succ(StateId::with_nest(Tag::B, vec![i0], nest))
            }
            Tag::B => {
                let i = s.param(0) as u64;
                let eps_l = eps * 0.5f64.powi(mode.min(CYCLE_CAP - 1) as i32 + 1);
                // arrival stage is t + 1 + delay; pick the witnessed stage
                let t_arr = if summable {
                    (oracle.witness_le)(i, 0.5f64.powi(i.min(1000) as i32) * eps_l / 2.0, t + 2)
                } else {
                    (oracle.witness_ge)(i, 0.5f64.powi(i.min(1000) as i32), t + 2)
                };
                let delay = (t_arr - t - 1).max(1) as u32;
                Move::Succ(StateId::with_nest(
                    Tag::Bij,
                    vec![s.param(0), delay, 0],
                    nest,
                ))
            }
            Tag::D => {
                let tag = if summable { Tag::R1 } else { Tag::R0 };
                Move::Succ(StateId::with_nest(tag, s.params.clone(), nest))
            }
            _ => Move::Action(0),
        };
        Mix::dirac(mv)
    });
    let update = Arc::new(
        move |_s: &StateId, trans: &crate::strategy::Transition, mode: u64, _t: u64| -> Mix<u64> {
            if trans.next.tag == Tag::U {
                Mix::dirac((mode + 1).min(CYCLE_CAP - 1))
            } else {
                Mix::dirac(mode)
            }
        },
    );
    Ok(Strategy::new(
        format!("min_vs_markov(eps={eps})"),
        Player::Minimizer,
        MemorySpec {
            mode_count: ModeCount::Bounded(CYCLE_CAP),
            initial_mode: 0,
            visibility: Visibility::Public,
            uses_step_counter: true,
        },
        true,
        act,
        update,
    ))
}

/// Almost-surely winning Maximizer strategy for the infinitely branching
/// families: after each Minimizer entry at position x, play the bounded
/// near-optimal line for a precomputed number of effective steps (delay and
/// subgame excursions do not consume budget), then play the riskiest
/// commitment so the round ends in a win or a return to `u`. Unbounded
/// memory; simulation only.
pub fn max_as_winning(game: &Game) -> Result<Strategy, CatalogError> {
    let label = game.label().to_string();
    if !matches!(
        label.as_str(),
        "inf_branch_no_mr" | "inf_branch_no_markov" | "nested(2)" | "combined"
    ) {
        return Err(CatalogError::WrongGame("max_as_winning".into(), label));
    }

    let machine = Arc::new(CycleMachine::new());
    let game_for_act = game.clone();
    let m_act = Arc::clone(&machine);
    let act = Arc::new(move |s: &StateId, mode: u64, _t: u64| -> Mix<Move> {
        Mix::dirac(m_act.act(&game_for_act, s, mode))
    });
    let m_up = Arc::clone(&machine);
    let update = Arc::new(
        move |s: &StateId, trans: &crate::strategy::Transition, mode: u64, _t: u64| -> Mix<u64> {
            Mix::dirac(m_up.update(s, &trans.next, mode))
        },
    );
    Ok(Strategy::new(
        format!("max_as_winning({label})"),
        Player::Maximizer,
        MemorySpec::unbounded(),
        true,
        act,
        update,
    ))
}

/// Per-nesting-level phase of the almost-sure winner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Phase {
    Idle,
    Bounded { x: u32, rem: u32 },
    Risky,
}

/// Encodes phase stacks as memory modes: stacks of up to two levels pack
/// into the mode directly (the common case; it keeps simulation allocation
/// free), deeper stacks are interned.
struct CycleMachine {
    stacks: Mutex<(Vec<Vec<Phase>>, HashMap<Vec<Phase>, u64>)>,
    horizons: Mutex<HashMap<u32, u32>>,
}

/// Packed level: 2 bits phase, 10 bits position, 18 bits remaining budget.
fn pack_level(p: Phase) -> Option<u64> {
    match p {
        Phase::Idle => Some(0),
        Phase::Risky => Some(1),
        Phase::Bounded { x, rem } => {
            if x < 1 << 10 && rem < 1 << 18 {
                Some(2 | ((x as u64) << 2) | ((rem as u64) << 12))
            } else {
                None
            }
        }
    }
}

fn unpack_level(bits: u64) -> Phase {
    match bits & 3 {
        0 => Phase::Idle,
        1 => Phase::Risky,
        _ => Phase::Bounded {
            x: ((bits >> 2) & 0x3ff) as u32,
            rem: ((bits >> 12) & 0x3ffff) as u32,
        },
    }
}

const PACKED_FLAG: u64 = 1 << 63;

impl CycleMachine {
    fn new() -> CycleMachine {
        let mut stacks = (Vec::new(), HashMap::new());
        stacks.0.push(vec![]);
        stacks.1.insert(vec![], 0u64);
        CycleMachine {
            stacks: Mutex::new(stacks),
            horizons: Mutex::new(HashMap::new()),
        }
    }

    fn decode(&self, mode: u64) -> Vec<Phase> {
        if mode & PACKED_FLAG != 0 {
            let depth = ((mode >> 60) & 0b11) as usize;
            return (0..depth)
                .map(|k| unpack_level((mode >> (30 * k)) & 0x3fff_ffff))
                .collect();
        }
        self.stacks.lock().unwrap().0[mode as usize].clone()
    }

    fn encode(&self, stack: Vec<Phase>) -> u64 {
        if stack.len() <= 2 {
            let packed: Option<Vec<u64>> = stack.iter().map(|&p| pack_level(p)).collect();
            if let Some(bits) = packed {
                let mut mode = PACKED_FLAG | ((stack.len() as u64) << 60);
                for (k, b) in bits.into_iter().enumerate() {
                    mode |= b << (30 * k);
                }
                return mode;
            }
        }
        let mut guard = self.stacks.lock().unwrap();
        if let Some(&m) = guard.1.get(&stack) {
            return m;
        }
        let m = guard.0.len() as u64;
        guard.0.push(stack.clone());
        guard.1.insert(stack, m);
        m
    }

    /// Effective steps after which the bounded line from position x has
    /// secured at least probability 1/4 against every Minimizer play.
    fn horizon(&self, x: u32) -> u32 {
        if let Some(&h) = self.horizons.lock().unwrap().get(&x) {
            return h;
        }
        let h = quarter_horizon(x);
        self.horizons.lock().unwrap().insert(x, h);
        h
    }

    fn levels(s: &StateId) -> usize {
        match s.tag {
            Tag::S0 | Tag::F => 0,
            _ => s.nest.len() + 1,
        }
    }

    fn act(&self, game: &Game, s: &StateId, mode: u64) -> Move {
        let stack = self.decode(mode);
        let succ_list = match game.kind_of(s) {
            NodeKind::MaxTurn(succ) => succ.prefix(4),
            _ => return Move::Action(0),
        };
        if succ_list.is_empty() {
            return Move::Action(0);
        }
        let phase = stack.last().copied().unwrap_or(Phase::Idle);
        let pick = |idx: usize| -> Move { Move::Succ(succ_list[idx.min(succ_list.len() - 1)].clone()) };
        match (s.tag, phase) {
            (Tag::Cij, Phase::Bounded { x, .. }) => {
                let (i, l) = (s.param(0), s.param(1));
                // the bounded line commits at j = (n+1)^2 with n = x+2-i
                if i <= x + 2 {
                    let n = x + 2 - i;
                    if l >= (n + 1) * (n + 1) {
                        return pick(1);
                    }
                }
                pick(0)
            }
            // risky (and entries mid-chain): commit immediately, so the round
            // resolves or the play moves to a fresh position
            (Tag::Cij, _) => pick(1),
            _ => pick(0),
        }
    }

    fn update(&self, _s: &StateId, next: &StateId, mode: u64) -> u64 {
        let mut stack = self.decode(mode);
        let want = Self::levels(next);
        while stack.len() > want {
            // subgame exit: the parent observed one projected step
            stack.pop();
            if let Some(Phase::Bounded { x, rem }) = stack.last().copied() {
                let top = stack.len() - 1;
                stack[top] = if rem > 1 {
                    Phase::Bounded { x, rem: rem - 1 }
                } else {
                    Phase::Risky
                };
            }
        }
        while stack.len() < want {
            stack.push(Phase::Idle);
        }
        if want == 0 {
            return self.encode(stack);
        }
        let top = stack.len() - 1;
        match next.tag {
            Tag::U => stack[top] = Phase::Idle,
            // delay gadget states do not consume bounded budget
            Tag::B | Tag::Bij => {}
            Tag::C => {
                let x = next.param(0);
                if x >= 1 && stack[top] == Phase::Idle {
                    stack[top] = Phase::Bounded {
                        x,
                        rem: self.horizon(x.min(600)),
                    };
                } else {
                    self.step(&mut stack, top);
                }
            }
            _ => self.step(&mut stack, top),
        }
        self.encode(stack)
    }

    fn step(&self, stack: &mut [Phase], top: usize) {
        if let Phase::Bounded { x, rem } = stack[top] {
            stack[top] = if rem > 1 {
                Phase::Bounded { x, rem: rem - 1 }
            } else {
                Phase::Risky
            };
        }
    }
}

/// Smallest effective horizon h such that the `(n+1)^2` walker started two
/// above position x keeps `P(target within h, before u) >= 1/4` against
/// every Minimizer play. Computed by bounded value iteration on the walker's
/// chain with returns to `u` counted as misses.
fn quarter_horizon(x: u32) -> u32 {
    // local index space: per position i: chain cells 1..=j(i), then the
    // commitment; walker position states and two absorbing cells
    let j_of = |i: u32| -> u32 {
        let n = x + 2 - i.min(x + 2);
        (n + 1) * (n + 1)
    };
    // layout: id 0 = win, 1 = miss; then per i in 0..=x+2: C[i], chain l=1..=j, D, R0, R1
    let mut offsets = vec![0usize; (x + 3) as usize];
    let mut next_id = 2usize;
    for i in 0..=x + 2 {
        offsets[i as usize] = next_id;
        next_id += 1 + j_of(i) as usize + 3;
    }
    let n_states = next_id;
    let c_id = |i: u32| offsets[i as usize];
    let chain_id = |i: u32, l: u32| offsets[i as usize] + l as usize;
    let d_id = |i: u32| offsets[i as usize] + j_of(i) as usize + 1;
    let r0_id = |i: u32| d_id(i) + 1;
    let r1_id = |i: u32| d_id(i) + 2;

    let mut v = vec![0.0f64; n_states];
    v[0] = 1.0;
    let mut h = 0u32;
    loop {
        if v[c_id(x)] >= 0.25 {
            return h;
        }
        let mut next = v.clone();
        for i in 0..=x + 2 {
            let j = j_of(i);
            next[c_id(i)] = if i == 0 { 1.0 } else { v[chain_id(i, 1)] };
            for l in 1..=j {
                next[chain_id(i, l)] = if l == j {
                    v[d_id(i)]
                } else {
                    v[chain_id(i, l + 1)]
                };
            }
            next[d_id(i)] = v[r0_id(i)].min(v[r1_id(i)]);
            let pj = 1.0 / j as f64;
            // action 0: lose (back to u, a miss) w.p. 1/j, else descend
            let down = if i >= 1 { v[c_id(i - 1)] } else { 1.0 };
            next[r0_id(i)] = pj * v[1] + (1.0 - pj) * down;
            // action 1: target w.p. 1/j, else climb (capped at the top)
            let up = if i < x + 2 { v[c_id(i + 1)] } else { v[1] };
            next[r1_id(i)] = pj * v[0] + (1.0 - pj) * up;
        }
        next[0] = 1.0;
        next[1] = 0.0;
        v = next;
        h += 1;
        assert!(h < 10_000_000, "quarter-horizon search exhausted at x={x}");
    }
}

/// Maximizer's optimal strategy on the geometric-scatter game: remember
/// which resolution Minimizer refused and take exactly that one from the
/// ladder.
pub fn opt_max_conc_optmax() -> Strategy {
    let act = Arc::new(move |s: &StateId, mode: u64, _t: u64| -> Mix<Move> {
        let mv = match s.tag {
            Tag::SDoublePrime => {
                let j = s.param(0) as u64;
                let target = mode.max(1);
                if j < target {
                    Move::Succ(StateId::new(Tag::SDoublePrime, vec![s.param(0) + 1]))
                } else {
                    Move::Succ(StateId::new(Tag::R1, vec![s.param(0)]))
                }
            }
            _ => Move::Action(0),
        };
        Mix::dirac(mv)
    });
    let update = Arc::new(
        move |s: &StateId, trans: &crate::strategy::Transition, mode: u64, _t: u64| -> Mix<u64> {
            // Minimizer declining at s'_i hands the ladder to the Maximizer
            if s.tag == Tag::SPrime && trans.next.tag == Tag::SDoublePrime {
                Mix::dirac(s.param(0) as u64)
            } else {
                Mix::dirac(mode)
            }
        },
    );
    Strategy::new(
        "opt_max_conc_optmax",
        Player::Maximizer,
        MemorySpec::unbounded(),
        true,
        act,
        update,
    )
}

/// Minimizer's optimal strategy on the infinitely branching opener: answer
/// the Maximizer's opening index i with the matching ladder state.
pub fn opt_min_infbranch() -> Strategy {
    let act = Arc::new(move |s: &StateId, mode: u64, _t: u64| -> Mix<Move> {
        let mv = match s.tag {
            Tag::U => {
                let i = mode.max(1) as u32;
                Move::Succ(StateId::new(Tag::SDoublePrime, vec![i]))
            }
            _ => Move::Action(0),
        };
        Mix::dirac(mv)
    });
    let update = Arc::new(
        move |s: &StateId, trans: &crate::strategy::Transition, mode: u64, _t: u64| -> Mix<u64> {
            if s.tag == Tag::S0 && trans.next.tag == Tag::SPrime {
                Mix::dirac(trans.next.param(0) as u64)
            } else {
                Mix::dirac(mode)
            }
        },
    );
    Strategy::new(
        "opt_min_infbranch",
        Player::Minimizer,
        MemorySpec::unbounded(),
        true,
        act,
        update,
    )
}

/// Exploiter of a finite-memory opponent on the optimal-strategy
/// counterexamples, together with the analytic margin it is guaranteed to
/// win by.
pub struct ExploitFr {
    pub strategy: Strategy,
    /// Index i used by the exploit.
    pub index: u32,
    /// Guaranteed distance from the game value (positive).
    pub margin: f64,
    /// Per-mode opponent tail values X(m).
    pub mode_values: Vec<f64>,
}

pub fn exploit_fr(game: &Game, fr_opponent: &Strategy) -> Result<ExploitFr, CatalogError> {
    let modes = match fr_opponent.spec.mode_count {
        ModeCount::Bounded(k) => k,
        ModeCount::Unbounded => {
            return Err(CatalogError::WrongGame(
                "exploit_fr".into(),
                "unbounded-memory opponent".into(),
            ))
        }
    };
    match game.label() {
        "conc_optmax" => {
            assert_eq!(fr_opponent.owner, Player::Maximizer);
            // X(m): reach probability of the opponent alone from the ladder
            // bottom in mode m (upper bounds, so the margin is safe)
            let passive = passive_min();
            let ladder = StateId::new(Tag::SDoublePrime, vec![1]);
            let mut xs = Vec::new();
            for m in 0..modes {
                let est = forward_sweep(
                    game,
                    &fr_opponent.with_initial_mode(m),
                    &passive,
                    &ladder,
                    400,
                    &SweepOptions::default(),
                )?;
                xs.push(est.estimate.interval.hi);
            }
            let y = xs.iter().cloned().fold(0.0f64, f64::max);
            let mut index = None;
            for i in 1..60u32 {
                let pow = 0.5f64.powi(i as i32);
                if pow < (1.0 - y) / 2.0 {
                    index = Some(i);
                    break;
                }
            }
            let index = index.ok_or(CatalogError::NoExploitIndex(y))?;
            let pow = 0.5f64.powi(index as i32);
            let margin = pow * (1.0 - pow - y);
            let strategy = Strategy::md(
                format!("exploit_fr(i={index})"),
                Player::Minimizer,
                move |s: &StateId| match s.tag {
                    Tag::SPrime if s.param(0) == index => {
                        Move::Succ(StateId::new(Tag::SDoublePrime, vec![1]))
                    }
                    Tag::SPrime => Move::Succ(StateId::new(Tag::R1, vec![s.param(0)])),
                    _ => Move::Action(0),
                },
            );
            Ok(ExploitFr {
                strategy,
                index,
                margin,
                mode_values: xs,
            })
        }
        "infbranch_optmin" => {
            assert_eq!(fr_opponent.owner, Player::Minimizer);
            let passive = passive_max();
            let u = StateId::bare(Tag::U);
            let mut xs = Vec::new();
            for m in 0..modes {
                let est = forward_sweep(
                    game,
                    &passive,
                    &fr_opponent.with_initial_mode(m),
                    &u,
                    400,
                    &SweepOptions::default(),
                )?;
                xs.push(est.estimate.interval.lo);
            }
            let y = xs.iter().cloned().fold(1.0f64, f64::min);
            let mut index = None;
            for i in 1..60u32 {
                if 0.5f64.powi(i as i32) < y / 2.0 {
                    index = Some(i);
                    break;
                }
            }
            let index = index.ok_or(CatalogError::NoExploitIndex(y))?;
            let pow = 0.5f64.powi(index as i32);
            let margin = (0.5 + pow) * y - pow;
            let strategy = Strategy::md(
                format!("exploit_fr(i={index})"),
                Player::Maximizer,
                move |s: &StateId| match s.tag {
                    Tag::S0 => Move::Succ(StateId::new(Tag::SPrime, vec![index])),
                    _ => Move::Action(0),
                },
            );
            Ok(ExploitFr {
                strategy,
                index,
                margin,
                mode_values: xs,
            })
        }
        other => Err(CatalogError::WrongGame("exploit_fr".into(), other.into())),
    }
}

/// Upper-bound certificate for the concurrent big-match positions: the
/// candidate `(p+2)/(2p+2)` together with the column mixes
/// `q(p) = (p+2)/(2(p+1))` that equalize the Maximizer's rows at exactly the
/// candidate. All quantities are exact rationals, and the per-position
/// inequalities are rational-function identities in p, so checking a window
/// of positions decides them everywhere.
pub fn bm_value_certificate() -> crate::solver::SupermartingaleCert {
    use crate::game::{frac, Prob};
    use num_traits::{One, Zero};
    let candidate = Arc::new(|s: &StateId| -> Option<Prob> {
        match s.tag {
            Tag::C => {
                let p = s.param(0) as i64;
                Some(frac(p + 2, 2 * p + 2))
            }
            Tag::Win => Some(Prob::one()),
            Tag::Lose => Some(Prob::zero()),
            _ => None,
        }
    });
    let min_choice = Arc::new(|s: &StateId| -> Option<crate::solver::MinChoice> {
        if s.tag == Tag::C && s.param(0) >= 1 {
            let p = s.param(0) as i64;
            let q = frac(p + 2, 2 * (p + 1));
            Some(crate::solver::MinChoice::Mix(vec![
                Prob::one() - q.clone(),
                q,
            ]))
        } else {
            None
        }
    });
    crate::solver::SupermartingaleCert {
        candidate,
        min_choice,
    }
}

/// Placeholder for the player that never gets a real decision in the
/// one-player tails of the counterexample games.
pub fn passive_min() -> Strategy {
    Strategy::md("passive_min", Player::Minimizer, |_s| Move::Action(0))
}

pub fn passive_max() -> Strategy {
    Strategy::md("passive_max", Player::Maximizer, |_s| Move::Action(0))
}

fn state_hash(s: &StateId) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    let mut eat = |x: u64| {
        h ^= x;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    };
    eat(s.tag as u64);
    for &p in &s.params {
        eat(p as u64 + 1);
    }
    for &p in &s.nest {
        eat((p as u64) << 32);
    }
    h
}

/// Seeded random memoryless strategy: a fixed random mix at every decision
/// state (successors scanned up to a small budget at infinite branchings).
pub fn random_memoryless(game: &Game, owner: Player, seed: u64) -> Strategy {
    let game = game.clone();
    Strategy::memoryless(
        format!("random_mr({owner:?},{seed})"),
        owner,
        move |s: &StateId| -> Mix<Move> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ state_hash(s));
            match game.kind_of(s) {
                NodeKind::Concurrent(node) => {
                    let k = match owner {
                        Player::Maximizer => node.max_actions,
                        Player::Minimizer => node.min_actions,
                    };
                    random_mix(&mut rng, (0..k).map(Move::Action).collect())
                }
                NodeKind::MaxTurn(succ) if owner == Player::Maximizer => {
                    random_mix(&mut rng, succ.prefix(6).into_iter().map(Move::Succ).collect())
                }
                NodeKind::MinTurn(succ) if owner == Player::Minimizer => {
                    random_mix(&mut rng, succ.prefix(6).into_iter().map(Move::Succ).collect())
                }
                _ => Mix::dirac(Move::Action(0)),
            }
        },
    )
}

fn random_mix(rng: &mut ChaCha8Rng, moves: Vec<Move>) -> Mix<Move> {
    if moves.is_empty() {
        return Mix::dirac(Move::Action(0));
    }
    let weights: Vec<f64> = moves.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    Mix(moves
        .into_iter()
        .zip(weights)
        .map(|(m, w)| (m, w / total))
        .collect())
}
