//! The lazy countable-game model: structured state identifiers, distributions
//! with exact rational weights and tail bounds, per-state node kinds, and the
//! `Game` wrapper shared by the catalog, engine, and solvers.

mod finite;
mod truncate;

pub use finite::{FiniteGame, FreezeError, FreezeOptions, FrozenKind};
pub use truncate::{truncate, BoundaryPolicy, Truncated, Truncation};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Exact probability. Catalog kernels store the defining rationals (1/j,
/// 2^{-i}, 1/(n+1)^2) without rounding; solvers convert to `f64` on demand.
pub type Prob = BigRational;

/// Builds n/d as an exact rational.
pub fn frac(n: i64, d: i64) -> Prob {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// 2^{-i} as an exact rational, valid for any `i`.
pub fn pow2_inv(i: u64) -> Prob {
    BigRational::new(BigInt::one(), BigInt::one() << i)
}

/// Cantor pairing, used by canonical state enumerations and memory encodings.
pub fn cantor(a: u64, b: u64) -> u64 {
    (a + b) * (a + b + 1) / 2 + b
}

/// Inverse of [`cantor`].
pub fn uncantor(z: u64) -> (u64, u64) {
    let w = ((((8 * z + 1) as f64).sqrt() as u64).saturating_sub(1)) / 2;
    // float sqrt can be off by one on large inputs
    let w = (w..=w + 2)
        .rev()
        .find(|&w| w * (w + 1) / 2 <= z)
        .unwrap_or(0);
    let t = w * (w + 1) / 2;
    let b = z - t;
    (w - b, b)
}

/// Role of a state inside one of the parameterized game families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u32)]
pub enum Tag {
    /// Position states c_i of the big-match families.
    C = 0,
    /// Chain states c_{i,j} of the turn-based big match.
    Cij = 1,
    /// Minimizer decision states d_{i,j}.
    D = 2,
    /// Random outcome states for action 0.
    R0 = 3,
    /// Random outcome states for action 1.
    R1 = 4,
    Lose = 5,
    Win = 6,
    /// Infinitely-branching Minimizer entry state u.
    U = 7,
    /// Delay-gadget entry states b_i.
    B = 8,
    /// Delay-chain states b_{i,j,l} (l steps already taken, l < j).
    Bij = 9,
    /// Subgame exit marker: reaching the subgame target releases the play
    /// back into the enclosing game.
    WinExit = 10,
    /// Initial state of the optimal-strategy counterexample games.
    S0 = 11,
    SPrime = 12,
    SDoublePrime = 13,
    Target = 14,
    Sink = 15,
    /// Target of the combined game.
    F = 16,
    /// Generic numbered state of generated games.
    Node = 17,
    /// Fresh state branching uniformly to a set of starts.
    Avg = 18,
    /// Reserved sink for transitions leaving a truncation window.
    Boundary = 19,
    /// Product state (window index, memory mode) of an induced MDP.
    Prod = 20,
    /// Intermediate random state of an induced MDP.
    ProdRand = 21,
    /// State of a clock-expanded game: params [time, inner tag, inner params...].
    ClockWrapped = 22,
    /// Inner-layer copy in a layered game: params [inner tag, inner params...].
    Layer0 = 23,
    /// Outer-layer copy in a layered game.
    Layer1 = 24,
}

impl Tag {
    pub fn from_ordinal(x: u32) -> Option<Tag> {
        use Tag::*;
        Some(match x {
            0 => C,
            1 => Cij,
            2 => D,
            3 => R0,
            4 => R1,
            5 => Lose,
            6 => Win,
            7 => U,
            8 => B,
            9 => Bij,
            10 => WinExit,
            11 => S0,
            12 => SPrime,
            13 => SDoublePrime,
            14 => Target,
            15 => Sink,
            16 => F,
            17 => Node,
            18 => Avg,
            19 => Boundary,
            20 => Prod,
            21 => ProdRand,
            22 => ClockWrapped,
            23 => Layer0,
            24 => Layer1,
            _ => return None,
        })
    }

    fn name(&self) -> &'static str {
        use Tag::*;
        match self {
            C => "c",
            Cij => "cij",
            D => "d",
            R0 => "r0",
            R1 => "r1",
            Lose => "lose",
            Win => "win",
            U => "u",
            B => "b",
            Bij => "bij",
            WinExit => "winexit",
            S0 => "s0",
            SPrime => "sp",
            SDoublePrime => "spp",
            Target => "t",
            Sink => "sink",
            F => "f",
            Node => "n",
            Avg => "avg",
            Boundary => "boundary",
            Prod => "prod",
            ProdRand => "prodrand",
            ClockWrapped => "clock",
            Layer0 => "layer0",
            Layer1 => "layer1",
        }
    }
}

/// Structured identifier for states of the parameterized countable games.
///
/// Equality and ordering are componentwise, so the encoding is injective and
/// `BTreeMap`s over states iterate deterministically. `nest` identifies the
/// copy path for nested subgames (empty at top level).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId {
    pub tag: Tag,
    pub params: Vec<u32>,
    pub nest: Vec<u32>,
}

impl StateId {
    pub fn new(tag: Tag, params: Vec<u32>) -> StateId {
        StateId {
            tag,
            params,
            nest: Vec::new(),
        }
    }

    pub fn bare(tag: Tag) -> StateId {
        StateId::new(tag, Vec::new())
    }

    pub fn with_nest(tag: Tag, params: Vec<u32>, nest: Vec<u32>) -> StateId {
        StateId { tag, params, nest }
    }

    pub fn param(&self, i: usize) -> u32 {
        self.params[i]
    }

    /// Wraps a state into one layer of a layered game.
    pub fn wrap_layer(inner: &StateId, layer: u8) -> StateId {
        let tag = if layer == 0 { Tag::Layer0 } else { Tag::Layer1 };
        let mut params = Vec::with_capacity(inner.params.len() + 1);
        params.push(inner.tag as u32);
        params.extend_from_slice(&inner.params);
        StateId {
            tag,
            params,
            nest: inner.nest.clone(),
        }
    }

    /// Inverse of [`StateId::wrap_layer`].
    pub fn unwrap_layer(&self) -> Option<(StateId, u8)> {
        let layer = match self.tag {
            Tag::Layer0 => 0,
            Tag::Layer1 => 1,
            _ => return None,
        };
        let tag = Tag::from_ordinal(*self.params.first()?)?;
        Some((
            StateId {
                tag,
                params: self.params[1..].to_vec(),
                nest: self.nest.clone(),
            },
            layer,
        ))
    }

    /// Wraps a state with a stage counter for clock expansion.
    pub fn wrap_clock(inner: &StateId, time: u32) -> StateId {
        let mut params = Vec::with_capacity(inner.params.len() + 2);
        params.push(time);
        params.push(inner.tag as u32);
        params.extend_from_slice(&inner.params);
        StateId {
            tag: Tag::ClockWrapped,
            params,
            nest: inner.nest.clone(),
        }
    }

    /// Inverse of [`StateId::wrap_clock`].
    pub fn unwrap_clock(&self) -> Option<(StateId, u32)> {
        if self.tag != Tag::ClockWrapped || self.params.len() < 2 {
            return None;
        }
        let time = self.params[0];
        let tag = Tag::from_ordinal(self.params[1])?;
        Some((
            StateId {
                tag,
                params: self.params[2..].to_vec(),
                nest: self.nest.clone(),
            },
            time,
        ))
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag.name())?;
        if !self.params.is_empty() {
            write!(f, "[")?;
            for (i, p) in self.params.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{p}")?;
            }
            write!(f, "]")?;
        }
        if !self.nest.is_empty() {
            write!(f, "@")?;
            for (i, p) in self.nest.iter().enumerate() {
                if i > 0 {
                    write!(f, ".")?;
                }
                write!(f, "{p}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DistError {
    #[error("distribution support needs more than {budget} terms to reach tail mass {tail_cut} (at {state})")]
    SupportBudget {
        state: String,
        budget: usize,
        tail_cut: f64,
    },
}

/// Probability distribution with a deterministic support enumeration and an
/// upper bound on the mass outside any enumerated prefix.
#[derive(Clone)]
pub enum Dist<T> {
    /// Exact finite support; probabilities sum to 1 as rationals.
    Finite(Vec<(T, Prob)>),
    /// Countable support in a fixed order. `tail(n)` bounds the mass not
    /// covered by the first `n` items and tends to 0.
    Countable {
        item: Arc<dyn Fn(u64) -> (T, Prob) + Send + Sync>,
        tail: Arc<dyn Fn(u64) -> f64 + Send + Sync>,
    },
}

impl<T: Clone> Dist<T> {
    pub fn dirac(x: T) -> Dist<T> {
        Dist::Finite(vec![(x, Prob::one())])
    }

    /// Two-point distribution; the second point gets the complement mass.
    pub fn two(a: T, pa: Prob, b: T) -> Dist<T> {
        let pb = Prob::one() - pa.clone();
        if pa.is_zero() {
            return Dist::dirac(b);
        }
        if pb.is_zero() {
            return Dist::dirac(a);
        }
        Dist::Finite(vec![(a, pa), (b, pb)])
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Dist::Finite(_))
    }

    /// First `n` support entries.
    pub fn prefix(&self, n: usize) -> Vec<(T, Prob)> {
        match self {
            Dist::Finite(v) => v.iter().take(n).cloned().collect(),
            Dist::Countable { item, .. } => (0..n as u64).map(|i| item(i)).collect(),
        }
    }

    /// Upper bound on the mass outside the first `n` support entries.
    pub fn tail_bound(&self, n: usize) -> f64 {
        match self {
            Dist::Finite(v) => {
                let covered: Prob = v.iter().take(n).map(|(_, p)| p.clone()).sum();
                (Prob::one() - covered).to_f64().unwrap_or(0.0).max(0.0)
            }
            Dist::Countable { tail, .. } => tail(n as u64).max(0.0),
        }
    }

    /// Enumerates support as `f64` weights until the tail bound drops to
    /// `tail_cut`, merging nothing. Returns the entries and the cut mass.
    pub fn to_weighted_f64(
        &self,
        budget: usize,
        tail_cut: f64,
        state: &dyn fmt::Display,
    ) -> Result<(Vec<(T, f64)>, f64), DistError> {
        match self {
            Dist::Finite(v) => Ok((
                v.iter()
                    .map(|(t, p)| (t.clone(), p.to_f64().unwrap_or(0.0)))
                    .collect(),
                0.0,
            )),
            Dist::Countable { item, tail } => {
                let mut out = Vec::new();
                for n in 0..budget as u64 {
                    if tail(n) <= tail_cut {
                        return Ok((out, tail(n).max(0.0)));
                    }
                    let (t, p) = item(n);
                    out.push((t, p.to_f64().unwrap_or(0.0)));
                }
                if tail(budget as u64) <= tail_cut {
                    Ok((out, tail(budget as u64).max(0.0)))
                } else {
                    Err(DistError::SupportBudget {
                        state: state.to_string(),
                        budget,
                        tail_cut,
                    })
                }
            }
        }
    }

    /// Applies `f` to every support item, merging collided items by summing
    /// their probabilities. Countable supports are cut at `budget` terms with
    /// the remaining mass assigned to `overflow`.
    pub fn map_merge<U: Clone + Ord >(
        &self,
        f: impl Fn(&T) -> U,
        budget: usize,
        tail_cut: f64,
        overflow: U,
    ) -> Dist<U> {
        let mut acc: BTreeMap<U, Prob> = BTreeMap::new();
        let mut order: Vec<U> = Vec::new();
        let push = |u: U, p: Prob, acc: &mut BTreeMap<U, Prob>, order: &mut Vec<U>| {
            if !acc.contains_key(&u) {
                order.push(u.clone());
            }
            *acc.entry(u).or_insert_with(Prob::zero) += p;
        };
        let mut covered = Prob::zero();
        match self {
            Dist::Finite(v) => {
                for (t, p) in v {
                    covered += p.clone();
                    push(f(t), p.clone(), &mut acc, &mut order);
                }
            }
            Dist::Countable { item, tail } => {
                for n in 0..budget as u64 {
                    if tail(n) <= tail_cut {
                        break;
                    }
                    let (t, p) = item(n);
                    covered += p.clone();
                    push(f(&t), p, &mut acc, &mut order);
                }
            }
        }
        let rest = Prob::one() - covered;
        if !rest.is_zero() {
            push(overflow, rest, &mut acc, &mut order);
        }
        Dist::Finite(
            order
                .into_iter()
                .map(|u| {
                    let p = acc[&u].clone();
                    (u, p)
                })
                .collect(),
        )
    }
}

/// Successor enumerator of a turn-based decision node. Enumerations are pure
/// functions of the index, so two traversals yield identical prefixes.
#[derive(Clone)]
pub enum Successors {
    Finite(Vec<StateId>),
    Infinite(Arc<dyn Fn(u64) -> StateId + Send + Sync>),
}

impl Successors {
    pub fn of(v: Vec<StateId>) -> Successors {
        Successors::Finite(v)
    }

    pub fn get(&self, n: u64) -> Option<StateId> {
        match self {
            Successors::Finite(v) => v.get(n as usize).cloned(),
            Successors::Infinite(f) => Some(f(n)),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Successors::Finite(_))
    }

    /// Prefix of the enumeration (the whole list for finite nodes).
    pub fn prefix(&self, budget: usize) -> Vec<StateId> {
        match self {
            Successors::Finite(v) => v.clone(),
            Successors::Infinite(f) => (0..budget as u64).map(|n| f(n)).collect(),
        }
    }
}

/// Concurrent decision node: both players pick an action index and the kernel
/// resolves the pair to a successor distribution.
#[derive(Clone)]
pub struct ConcurrentNode {
    pub max_actions: usize,
    pub min_actions: usize,
    pub kernel: Arc<dyn Fn(usize, usize) -> Dist<StateId> + Send + Sync>,
}

impl ConcurrentNode {
    pub fn kernel(&self, a: usize, b: usize) -> Dist<StateId> {
        (self.kernel)(a, b)
    }
}

/// What happens at a state.
#[derive(Clone)]
pub enum NodeKind {
    MaxTurn(Successors),
    MinTurn(Successors),
    Random(Dist<StateId>),
    Concurrent(ConcurrentNode),
}

impl NodeKind {
    pub fn kind_name(&self) -> &'static str {
        match self {
            NodeKind::MaxTurn(_) => "max",
            NodeKind::MinTurn(_) => "min",
            NodeKind::Random(_) => "random",
            NodeKind::Concurrent(_) => "concurrent",
        }
    }
}

/// A lazy countable game. Immutable after construction; all queries are pure,
/// so games are safe to share across threads.
#[derive(Clone)]
pub struct Game {
    label: String,
    kind_of: Arc<dyn Fn(&StateId) -> NodeKind + Send + Sync>,
    is_target: Arc<dyn Fn(&StateId) -> bool + Send + Sync>,
    canonical: Arc<dyn Fn(u64) -> Option<StateId> + Send + Sync>,
    start_hint: Option<StateId>,
}

impl Game {
    pub fn new(
        label: impl Into<String>,
        kind_of: Arc<dyn Fn(&StateId) -> NodeKind + Send + Sync>,
        is_target: Arc<dyn Fn(&StateId) -> bool + Send + Sync>,
        canonical: Arc<dyn Fn(u64) -> Option<StateId> + Send + Sync>,
        start_hint: Option<StateId>,
    ) -> Game {
        Game {
            label: label.into(),
            kind_of,
            is_target,
            canonical,
            start_hint,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind_of(&self, s: &StateId) -> NodeKind {
        (self.kind_of)(s)
    }

    pub fn is_target(&self, s: &StateId) -> bool {
        (self.is_target)(s)
    }

    /// n-th state of the canonical enumeration, `None` past the end of a
    /// finite game.
    pub fn canonical(&self, n: u64) -> Option<StateId> {
        (self.canonical)(n)
    }

    pub fn start_hint(&self) -> Option<&StateId> {
        self.start_hint.as_ref()
    }

    /// First `limit` states of the canonical enumeration; stable across calls.
    pub fn enumerate_states(&self, limit: usize) -> Vec<StateId> {
        (0..limit as u64)
            .map_while(|n| self.canonical(n))
            .collect()
    }

    /// True if the state cannot be left and is not a target: its mass can
    /// never contribute to reaching the objective.
    pub fn is_doomed(&self, s: &StateId) -> bool {
        if self.is_target(s) {
            return false;
        }
        match self.kind_of(s) {
            NodeKind::MaxTurn(Successors::Finite(v)) | NodeKind::MinTurn(Successors::Finite(v)) => {
                !v.is_empty() && v.iter().all(|t| t == s)
            }
            NodeKind::Random(Dist::Finite(v)) => !v.is_empty() && v.iter().all(|(t, _)| t == s),
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_round_trips() {
        for z in 0..10_000u64 {
            let (a, b) = uncantor(z);
            assert_eq!(cantor(a, b), z);
        }
        assert_eq!(cantor(0, 0), 0);
    }

    #[test]
    fn layer_wrap_round_trips() {
        let s = StateId::with_nest(Tag::Cij, vec![3, 7], vec![2]);
        for layer in [0u8, 1] {
            let w = StateId::wrap_layer(&s, layer);
            assert_eq!(w.unwrap_layer(), Some((s.clone(), layer)));
        }
    }

    #[test]
    fn clock_wrap_round_trips() {
        let s = StateId::new(Tag::C, vec![5]);
        let w = StateId::wrap_clock(&s, 42);
        assert_eq!(w.unwrap_clock(), Some((s.clone(), 42)));
        // wrapping twice stays injective
        let ww = StateId::wrap_clock(&w, 1);
        assert_eq!(ww.unwrap_clock(), Some((w, 1)));
    }

    #[test]
    fn dist_two_merges_degenerate_mass() {
        let d = Dist::two(StateId::bare(Tag::Win), Prob::one(), StateId::bare(Tag::Lose));
        match d {
            Dist::Finite(v) => assert_eq!(v.len(), 1),
            _ => panic!(),
        }
    }

    #[test]
    fn countable_dist_prefix_and_tail() {
        // geometric: item i has mass 2^{-(i+1)}
        let d: Dist<u64> = Dist::Countable {
            item: Arc::new(|i| (i, pow2_inv(i + 1))),
            tail: Arc::new(|n| 0.5f64.powi(n as i32)),
        };
        let pre = d.prefix(3);
        assert_eq!(pre.len(), 3);
        assert_eq!(pre[2].1, frac(1, 8));
        for n in 0..20 {
            let covered: f64 = d
                .prefix(n)
                .iter()
                .map(|(_, p)| p.to_f64().unwrap())
                .sum();
            assert!(d.tail_bound(n) >= 1.0 - covered - 1e-15);
        }
    }
}
