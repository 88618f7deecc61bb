//! The assignment-tree MDP built from a formula.
//!
//! A state is an `n`-tuple over `{-1, 0, 1}` whose assigned entries form a
//! prefix; the action at stage `h` fixes `x_h`. Transitions are
//! deterministic and the only nonzero reward is paid at the leaf, equal to
//! the fraction of satisfied clause instances. States are produced on demand
//! and never stored.

use std::fmt;

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cnf::{enumerate_universe, Assignment, ClauseUniverse, Formula, Valuation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Action {
    False = 0,
    True = 1,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::False, Action::True];

    pub fn from_bool(b: bool) -> Self {
        if b {
            Action::True
        } else {
            Action::False
        }
    }

    pub fn as_bool(self) -> bool {
        self == Action::True
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl From<Action> for u8 {
    fn from(a: Action) -> u8 {
        a as u8
    }
}

impl TryFrom<u8> for Action {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(Action::False),
            1 => Ok(Action::True),
            other => Err(format!("action must be 0 or 1, got {other}")),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::False => "False",
            Action::True => "True",
        })
    }
}

/// A prefix assignment: entries `0`/`1` for `x_1..x_k`, `-1` afterwards.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct State {
    values: Vec<i8>,
}

impl State {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some(v) = values.iter().find(|&&v| !(-1..=1).contains(&v)) {
            return Err(Error::InvalidParameter(format!(
                "state entry {v} not in {{-1, 0, 1}}"
            )));
        }
        let assigned = values.iter().take_while(|&&v| v != -1).count();
        if values[assigned..].iter().any(|&v| v != -1) {
            return Err(Error::InvalidParameter(format!(
                "state {values:?} is not a prefix assignment"
            )));
        }
        Ok(Self { values })
    }

    /// `s_1 = (-1, ..., -1)`.
    pub fn initial(n: usize) -> Self {
        Self {
            values: vec![-1; n],
        }
    }

    pub fn from_assignment(a: &Assignment) -> Self {
        Self {
            values: a.values().iter().map(|&v| v as i8).collect(),
        }
    }

    /// State at stage `prefix.len() + 1` with `x_1..x_k = prefix`.
    pub fn from_prefix(prefix: &[bool], n: usize) -> Self {
        assert!(prefix.len() <= n);
        let mut values = vec![-1; n];
        for (slot, &v) in values.iter_mut().zip(prefix) {
            *slot = v as i8;
        }
        Self { values }
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn assigned(&self) -> usize {
        self.values.iter().take_while(|&&v| v != -1).count()
    }

    /// `1 + (number of assigned variables)`.
    pub fn stage(&self) -> usize {
        self.assigned() + 1
    }

    pub fn is_terminal(&self) -> bool {
        self.assigned() == self.n()
    }

    pub fn to_assignment(&self) -> Option<Assignment> {
        self.is_terminal()
            .then(|| Assignment::new(self.values.iter().map(|&v| v == 1).collect()))
    }

    fn with_next(&self, action: Action) -> Self {
        let mut values = self.values.clone();
        let h = self.assigned();
        values[h] = action as i8;
        Self { values }
    }
}

impl Valuation for State {
    fn value_of(&self, var: u32) -> Option<bool> {
        match self.values.get(var as usize - 1) {
            Some(0) => Some(false),
            Some(1) => Some(true),
            _ => None,
        }
    }
}

impl TryFrom<Vec<i8>> for State {
    type Error = Error;

    fn try_from(v: Vec<i8>) -> Result<Self> {
        State::new(v)
    }
}

impl From<State> for Vec<i8> {
    fn from(s: State) -> Self {
        s.values
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// The MDP `M_φ` for one formula.
#[derive(Debug, Clone)]
pub struct MdpInstance {
    formula: Formula,
    universe: ClauseUniverse,
}

/// Number of actions per state.
pub const ACTION_COUNT: usize = 2;

pub fn build_mdp(formula: Formula) -> MdpInstance {
    let universe = enumerate_universe(formula.num_vars()).expect("formula has n >= 1");
    MdpInstance { formula, universe }
}

impl MdpInstance {
    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn universe(&self) -> &ClauseUniverse {
        &self.universe
    }

    pub fn n(&self) -> usize {
        self.formula.num_vars()
    }

    /// `H = n + 1`.
    pub fn horizon(&self) -> usize {
        self.n() + 1
    }

    /// Realizability dimension `1 + |C_total|`.
    pub fn d(&self) -> usize {
        1 + self.universe.len()
    }

    /// Policy-parameter dimension, equal to `n`.
    pub fn d_prime(&self) -> usize {
        self.n()
    }

    pub fn clause_count(&self) -> usize {
        self.formula.clause_count()
    }

    /// `2^(n+1) − 1`; `None` when that overflows.
    pub fn implied_state_count(&self) -> Option<u128> {
        1u128.checked_shl(self.horizon() as u32).map(|x| x - 1)
    }

    pub fn initial_state(&self) -> State {
        State::initial(self.n())
    }

    fn check_state(&self, state: &State) -> Result<()> {
        if state.n() != self.n() {
            return Err(Error::InvalidParameter(format!(
                "state {state} has length {}, expected {}",
                state.n(),
                self.n()
            )));
        }
        Ok(())
    }

    pub fn transition(&self, state: &State, action: Action) -> Result<State> {
        self.check_state(state)?;
        if state.is_terminal() {
            return Err(Error::TerminalState(state.to_string()));
        }
        Ok(state.with_next(action))
    }

    /// Zero before the leaf; the satisfied fraction at the leaf.
    pub fn reward(&self, state: &State) -> Rational64 {
        match state.to_assignment() {
            Some(a) => self.formula.satisfied_fraction(&a),
            None => Rational64::zero(),
        }
    }

    /// Simulator access: `(s, a) ↦ (s', R(s'))`.
    pub fn generative_query(&self, state: &State, action: Action) -> Result<(State, Rational64)> {
        let next = self.transition(state, action)?;
        let r = self.reward(&next);
        Ok((next, r))
    }

    /// All `2^(h-1)` states at stage `h`, in lexicographic prefix order.
    pub fn states_at_stage(&self, h: usize) -> impl Iterator<Item = State> + '_ {
        assert!((1..=self.horizon()).contains(&h), "stage {h} out of range");
        let k = h - 1;
        let n = self.n();
        (0..1u64 << k).map(move |bits| {
            let prefix: Vec<bool> = (0..k).map(|i| bits >> (k - 1 - i) & 1 == 1).collect();
            State::from_prefix(&prefix, n)
        })
    }

    pub fn descriptor(&self) -> InstanceDescriptor {
        InstanceDescriptor {
            n: self.n(),
            horizon: self.horizon(),
            d: self.d(),
            d_prime: self.d_prime(),
            formula: self.formula.clone(),
        }
    }
}

/// JSON summary of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDescriptor {
    pub n: usize,
    #[serde(rename = "H")]
    pub horizon: usize,
    pub d: usize,
    pub d_prime: usize,
    pub formula: Formula,
}
