//! Strategies with explicit memory, visibility, randomization, and
//! step-counter semantics.
//!
//! A strategy owns an action rule `act(state, mode, time)` and a memory
//! update rule `update(state, transition, mode, time)`. Both return finite
//! distributions; sampling happens in the engine with an explicit seeded
//! generator, never inside the strategy.

use crate::game::{Game, NodeKind, StateId};
use crate::numerics::MASS_TOL;
use rand::Rng;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    Maximizer,
    Minimizer,
}

impl Player {
    pub fn opponent(&self) -> Player {
        match self {
            Player::Maximizer => Player::Minimizer,
            Player::Minimizer => Player::Maximizer,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeCount {
    Bounded(u64),
    Unbounded,
}

impl ModeCount {
    pub fn bound(&self) -> Option<u64> {
        match self {
            ModeCount::Bounded(k) => Some(*k),
            ModeCount::Unbounded => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visibility {
    Public,
    Private,
}

/// Declared memory shape of a strategy. An MR strategy has one mode; a
/// Markov strategy has one mode and uses the step counter; a k-memory
/// strategy has at most k modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemorySpec {
    pub mode_count: ModeCount,
    pub initial_mode: u64,
    pub visibility: Visibility,
    pub uses_step_counter: bool,
}

impl MemorySpec {
    pub fn memoryless() -> MemorySpec {
        MemorySpec {
            mode_count: ModeCount::Bounded(1),
            initial_mode: 0,
            visibility: Visibility::Public,
            uses_step_counter: false,
        }
    }

    pub fn markov() -> MemorySpec {
        MemorySpec {
            uses_step_counter: true,
            ..MemorySpec::memoryless()
        }
    }

    pub fn finite(modes: u64, initial: u64, visibility: Visibility) -> MemorySpec {
        assert!(initial < modes);
        MemorySpec {
            mode_count: ModeCount::Bounded(modes),
            initial_mode: initial,
            visibility,
            uses_step_counter: false,
        }
    }

    pub fn unbounded() -> MemorySpec {
        MemorySpec {
            mode_count: ModeCount::Unbounded,
            initial_mode: 0,
            visibility: Visibility::Private,
            uses_step_counter: false,
        }
    }
}

/// What a strategy can choose: an action index at a concurrent node or a
/// successor state at one of its own turn nodes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    Action(usize),
    Succ(StateId),
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Action(a) => write!(f, "a{a}"),
            Move::Succ(s) => write!(f, "->{s}"),
        }
    }
}

/// Finite distribution with `f64` weights. Used for strategy outputs.
#[derive(Debug, Clone)]
pub struct Mix<T>(pub Vec<(T, f64)>);

impl<T: Clone + PartialEq> Mix<T> {
    pub fn dirac(x: T) -> Mix<T> {
        Mix(vec![(x, 1.0)])
    }

    pub fn uniform(items: Vec<T>) -> Mix<T> {
        let w = 1.0 / items.len() as f64;
        Mix(items.into_iter().map(|x| (x, w)).collect())
    }

    pub fn total_mass(&self) -> f64 {
        self.0.iter().map(|(_, p)| p).sum()
    }

    pub fn is_dirac(&self) -> bool {
        self.0.iter().filter(|(_, p)| *p > 0.0).count() == 1
            && (self.total_mass() - 1.0).abs() <= MASS_TOL
    }

    pub fn entries(&self) -> &[(T, f64)] {
        &self.0
    }

    pub fn sample(&self, rng: &mut impl Rng) -> T {
        let mut u: f64 = rng.gen();
        for (x, p) in &self.0 {
            if u < *p {
                return x.clone();
            }
            u -= p;
        }
        self.0
            .last()
            .map(|(x, _)| x.clone())
            .expect("sampling from empty mix")
    }

    pub fn approx_eq(&self, other: &Mix<T>) -> bool {
        self.0.len() == other.0.len()
            && self
                .0
                .iter()
                .zip(other.0.iter())
                .all(|((x, p), (y, q))| x == y && (p - q).abs() <= MASS_TOL)
    }
}

/// One observed game step: the action profile (absent entries for turn
/// moves and random states) and the successor state.
#[derive(Debug, Clone)]
pub struct Transition {
    pub max_action: Option<usize>,
    pub min_action: Option<usize>,
    pub next: StateId,
}

type ActFn = dyn Fn(&StateId, u64, u64) -> Mix<Move> + Send + Sync;
type UpdateFn = dyn Fn(&StateId, &Transition, u64, u64) -> Mix<u64> + Send + Sync;

/// A strategy for one player. Immutable and pure; safe to evaluate
/// concurrently.
#[derive(Clone)]
pub struct Strategy {
    pub name: String,
    pub owner: Player,
    pub spec: MemorySpec,
    pub deterministic: bool,
    act: Arc<ActFn>,
    update: Arc<UpdateFn>,
}

impl Strategy {
    pub fn new(
        name: impl Into<String>,
        owner: Player,
        spec: MemorySpec,
        deterministic: bool,
        act: Arc<ActFn>,
        update: Arc<UpdateFn>,
    ) -> Strategy {
        Strategy {
            name: name.into(),
            owner,
            spec,
            deterministic,
            act,
            update,
        }
    }

    /// Memoryless randomized strategy.
    pub fn memoryless(
        name: impl Into<String>,
        owner: Player,
        act: impl Fn(&StateId) -> Mix<Move> + Send + Sync + 'static,
    ) -> Strategy {
        Strategy::new(
            name,
            owner,
            MemorySpec::memoryless(),
            false,
            Arc::new(move |s, _, _| act(s)),
            Arc::new(|_, _, m, _| Mix::dirac(m)),
        )
    }

    /// Memoryless deterministic strategy.
    pub fn md(
        name: impl Into<String>,
        owner: Player,
        act: impl Fn(&StateId) -> Move + Send + Sync + 'static,
    ) -> Strategy {
        Strategy::new(
            name,
            owner,
            MemorySpec::memoryless(),
            true,
            Arc::new(move |s, _, _| Mix::dirac(act(s))),
            Arc::new(|_, _, m, _| Mix::dirac(m)),
        )
    }

    /// Markov strategy: depends on the current state and stage only.
    pub fn markov(
        name: impl Into<String>,
        owner: Player,
        act: impl Fn(&StateId, u64) -> Mix<Move> + Send + Sync + 'static,
    ) -> Strategy {
        Strategy::new(
            name,
            owner,
            MemorySpec::markov(),
            false,
            Arc::new(move |s, _, t| act(s, t)),
            Arc::new(|_, _, m, _| Mix::dirac(m)),
        )
    }

    pub fn act(&self, s: &StateId, mode: u64, time: u64) -> Mix<Move> {
        (self.act)(s, mode, time)
    }

    pub fn update(&self, s: &StateId, trans: &Transition, mode: u64, time: u64) -> Mix<u64> {
        (self.update)(s, trans, mode, time)
    }

    /// Same strategy evaluated with the step counter shifted by `t0`, i.e.
    /// the strategy as it would behave from stage `t0` on.
    pub fn offset_time(&self, t0: u64) -> Strategy {
        let act = Arc::clone(&self.act);
        let update = Arc::clone(&self.update);
        Strategy {
            name: format!("{}@t{}", self.name, t0),
            owner: self.owner,
            spec: self.spec,
            deterministic: self.deterministic,
            act: Arc::new(move |s, m, t| act(s, m, t + t0)),
            update: Arc::new(move |s, tr, m, t| update(s, tr, m, t + t0)),
        }
    }

    /// Declares a finite bound on the memory modes this strategy will
    /// actually visit, so exact sweeps accept it. The caller asserts the
    /// bound is never reached in the evaluated matchups; the behavior is
    /// unchanged.
    pub fn assume_mode_bound(&self, k: u64) -> Strategy {
        let mut out = self.clone();
        out.spec.mode_count = ModeCount::Bounded(k);
        out.name = format!("{}|modes≤{}", self.name, k);
        out
    }

    /// Same strategy started in memory mode `m0`.
    pub fn with_initial_mode(&self, m0: u64) -> Strategy {
        let mut out = self.clone();
        if let ModeCount::Bounded(k) = out.spec.mode_count {
            assert!(m0 < k);
        }
        out.spec.initial_mode = m0;
        out.name = format!("{}[m{}]", self.name, m0);
        out
    }

    pub fn finite_memory(&self) -> bool {
        self.spec.mode_count.bound().is_some()
    }
}

/// Freezes a strategy at stage `t`: the memoryless randomized strategy that
/// always plays what the original would play at time `t` in its initial mode.
pub fn restrict_time_constant(strategy: &Strategy, t: u64) -> Strategy {
    let act = Arc::clone(&strategy.act);
    let m0 = strategy.spec.initial_mode;
    Strategy::new(
        format!("{}|t={}", strategy.name, t),
        strategy.owner,
        MemorySpec::memoryless(),
        strategy.deterministic,
        Arc::new(move |s, _, _| act(s, m0, t)),
        Arc::new(|_, _, m, _| Mix::dirac(m)),
    )
}

/// Exposes an accumulation point `f(i)` of the time-indexed resolution
/// probabilities `f(i, t)` of a Markov strategy, together with witness times
/// at which `f(i, t)` is ε-close to the accumulation point.
#[derive(Clone)]
pub struct AccumulationOracle {
    /// The accumulation point f(i) (a liminf in the catalog instances).
    pub f_limit: Arc<dyn Fn(u64) -> f64 + Send + Sync>,
    /// f(i, t), the probability the tracked strategy resolves at c_i at time t.
    pub f_at: Arc<dyn Fn(u64, u64) -> f64 + Send + Sync>,
    /// Returns t ≥ t0 with f(i, t) ≥ f(i) - eps.
    pub witness_ge: Arc<dyn Fn(u64, f64, u64) -> u64 + Send + Sync>,
    /// Returns t ≥ t0 with f(i, t) ≤ f(i) + eps.
    pub witness_le: Arc<dyn Fn(u64, f64, u64) -> u64 + Send + Sync>,
}

impl AccumulationOracle {
    /// Checks both witness inequalities directly against `f_at`.
    pub fn verify(&self, i: u64, eps: f64, t0: u64) -> bool {
        let tg = (self.witness_ge)(i, eps, t0);
        let tl = (self.witness_le)(i, eps, t0);
        let f = (self.f_limit)(i);
        tg >= t0
            && tl >= t0
            && (self.f_at)(i, tg) >= f - eps - MASS_TOL
            && (self.f_at)(i, tl) <= f + eps + MASS_TOL
    }
}

/// One invariant violation found by [`validate`].
#[derive(Debug, Clone)]
pub struct Violation {
    pub state: StateId,
    pub mode: u64,
    pub time: u64,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (mode {}, t {}): {}",
            self.state, self.mode, self.time, self.message
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub states_checked: usize,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

const SAMPLE_TIMES: [u64; 4] = [0, 1, 7, 1000];
const SUCC_SCAN: usize = 4096;
const MODE_SAMPLE_CAP: u64 = 8;

/// Checks the declared memory/act/update invariants of `strategy` against
/// `game` on a sample of canonical states and times. Violations are reported,
/// not raised.
pub fn validate(
    strategy: &Strategy,
    game: &Game,
    sample_states: usize,
    sample_times: usize,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    let times = &SAMPLE_TIMES[..sample_times.clamp(1, SAMPLE_TIMES.len())];
    let modes: Vec<u64> = match strategy.spec.mode_count {
        ModeCount::Bounded(k) => (0..k.min(MODE_SAMPLE_CAP)).collect(),
        ModeCount::Unbounded => vec![strategy.spec.initial_mode],
    };
    if let ModeCount::Bounded(k) = strategy.spec.mode_count {
        if strategy.spec.initial_mode >= k {
            report.violations.push(Violation {
                state: StateId::bare(crate::game::Tag::Boundary),
                mode: strategy.spec.initial_mode,
                time: 0,
                message: format!("initial mode {} ≥ mode count {}", strategy.spec.initial_mode, k),
            });
        }
    }

    for s in game.enumerate_states(sample_states) {
        // the engine absorbs targets and dead sinks before consulting
        // strategies, so no act obligation exists there
        if game.is_target(&s) || game.is_doomed(&s) {
            continue;
        }
        report.states_checked += 1;
        let kind = game.kind_of(&s);
        let decides = match (&kind, strategy.owner) {
            (NodeKind::Concurrent(_), _) => true,
            (NodeKind::MaxTurn(_), Player::Maximizer) => true,
            (NodeKind::MinTurn(_), Player::Minimizer) => true,
            _ => false,
        };
        if !decides {
            continue;
        }
        let mut base: Option<Mix<Move>> = None;
        for &mode in &modes {
            for &t in times {
                let mix = strategy.act(&s, mode, t);
                check_act(&s, &kind, strategy, &mix, mode, t, &mut report);
                if !strategy.spec.uses_step_counter && mode == strategy.spec.initial_mode {
                    match &base {
                        None => base = Some(mix),
                        Some(b) => {
                            if !b.approx_eq(&mix) {
                                report.violations.push(Violation {
                                    state: s.clone(),
                                    mode,
                                    time: t,
                                    message: "act varies with time but no step counter declared"
                                        .into(),
                                });
                            }
                        }
                    }
                }
            }
        }
        // probe memory updates along sampled transitions
        for &mode in &modes {
            for trans in sample_transitions(&s, &kind) {
                let up = strategy.update(&s, &trans, mode, times[0]);
                if (up.total_mass() - 1.0).abs() > MASS_TOL {
                    report.violations.push(Violation {
                        state: s.clone(),
                        mode,
                        time: times[0],
                        message: format!("update mass {} ≠ 1", up.total_mass()),
                    });
                }
                if let ModeCount::Bounded(k) = strategy.spec.mode_count {
                    for (m, p) in up.entries() {
                        if *p > 0.0 && *m >= k {
                            report.violations.push(Violation {
                                state: s.clone(),
                                mode,
                                time: times[0],
                                message: format!("update puts mass on mode {m} ≥ {k}"),
                            });
                        }
                    }
                }
            }
        }
    }
    report
}

fn check_act(
    s: &StateId,
    kind: &NodeKind,
    strategy: &Strategy,
    mix: &Mix<Move>,
    mode: u64,
    t: u64,
    report: &mut ValidationReport,
) {
    let mut push = |message: String| {
        report.violations.push(Violation {
            state: s.clone(),
            mode,
            time: t,
            message,
        })
    };
    let mass = mix.total_mass();
    if (mass - 1.0).abs() > MASS_TOL {
        push(format!("act mass {mass} ≠ 1"));
    }
    if strategy.deterministic && !mix.is_dirac() {
        push("declared deterministic but act is not Dirac".into());
    }
    match kind {
        NodeKind::Concurrent(node) => {
            let own = match strategy.owner {
                Player::Maximizer => node.max_actions,
                Player::Minimizer => node.min_actions,
            };
            for (mv, p) in mix.entries() {
                if *p <= 0.0 {
                    continue;
                }
                match mv {
                    Move::Action(a) if *a < own => {}
                    other => push(format!("illegal concurrent move {other}")),
                }
            }
        }
        NodeKind::MaxTurn(succ) | NodeKind::MinTurn(succ) => {
            let legal = succ.prefix(SUCC_SCAN);
            for (mv, p) in mix.entries() {
                if *p <= 0.0 {
                    continue;
                }
                match mv {
                    Move::Succ(next) if legal.contains(next) => {}
                    other => push(format!("illegal turn move {other}")),
                }
            }
        }
        NodeKind::Random(_) => {}
    }
}

fn sample_transitions(_s: &StateId, kind: &NodeKind) -> Vec<Transition> {
    match kind {
        NodeKind::MaxTurn(succ) => succ
            .prefix(4)
            .into_iter()
            .take(4)
            .map(|next| Transition {
                max_action: None,
                min_action: None,
                next,
            })
            .collect(),
        NodeKind::MinTurn(succ) => succ
            .prefix(4)
            .into_iter()
            .take(4)
            .map(|next| Transition {
                max_action: None,
                min_action: None,
                next,
            })
            .collect(),
        NodeKind::Random(d) => d
            .prefix(4)
            .into_iter()
            .map(|(next, _)| Transition {
                max_action: None,
                min_action: None,
                next,
            })
            .collect(),
        NodeKind::Concurrent(node) => {
            let mut out = Vec::new();
            for a in 0..node.max_actions.min(2) {
                for b in 0..node.min_actions.min(2) {
                    for (next, _) in node.kernel(a, b).prefix(2) {
                        out.push(Transition {
                            max_action: Some(a),
                            min_action: Some(b),
                            next,
                        });
                    }
                }
            }
            out
        }
    }
}
