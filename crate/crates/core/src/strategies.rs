//! The two focal repeated-game strategies as finite-state automata.
//!
//! Grim trigger cooperates until it sees anything other than its own
//! cooperation paired with a success signal, then defects for the rest of
//! the supergame. Because players only see `(own action, signal)`, one
//! boolean is a sufficient statistic for the whole history.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Action, Signal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Grim,
    AllD,
}

impl StrategyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Grim => "grim",
            StrategyKind::AllD => "all_d",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grim" => Ok(StrategyKind::Grim),
            "all_d" => Ok(StrategyKind::AllD),
            other => Err(Error::Parse(format!("unknown strategy `{other}`"))),
        }
    }
}

/// A repeated-game strategy driven by `(own action, signal)` feedback.
pub trait Automaton: Sized {
    fn next_action(&self) -> Action;
    fn update(&self, own: Action, signal: Signal) -> Self;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StrategyState {
    kind: StrategyKind,
    triggered: bool,
}

impl StrategyState {
    /// State at the start of a supergame.
    pub fn fresh(kind: StrategyKind) -> Self {
        StrategyState {
            kind,
            triggered: false,
        }
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    /// Only meaningful for grim; all-D is never "triggered".
    pub fn triggered(&self) -> bool {
        self.triggered
    }
}

impl Automaton for StrategyState {
    #[inline]
    fn next_action(&self) -> Action {
        match self.kind {
            StrategyKind::AllD => Action::Defect,
            StrategyKind::Grim if self.triggered => Action::Defect,
            StrategyKind::Grim => Action::Cooperate,
        }
    }

    #[inline]
    fn update(&self, own: Action, signal: Signal) -> Self {
        match self.kind {
            StrategyKind::AllD => *self,
            StrategyKind::Grim => StrategyState {
                kind: StrategyKind::Grim,
                triggered: self.triggered
                    || own != Action::Cooperate
                    || signal != Signal::Success,
            },
        }
    }
}

pub fn next_action(state: &StrategyState) -> Action {
    state.next_action()
}

pub fn update_state(state: &StrategyState, own: Action, signal: Signal) -> StrategyState {
    state.update(own, signal)
}

/// Belief/behaviour mixture `p·Grim ⊕ (1−p)·All-D`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Mixture(f64);

impl Mixture {
    pub fn new(grim_probability: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&grim_probability) {
            return Err(Error::invalid(
                "p",
                format!("mixture probability must lie in [0, 1], got {grim_probability}"),
            ));
        }
        Ok(Mixture(grim_probability))
    }

    pub fn grim_probability(self) -> f64 {
        self.0
    }

    /// Draws a strategy using exactly one uniform variate.
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> StrategyKind {
        let u: f64 = rng.random();
        if u < self.0 {
            StrategyKind::Grim
        } else {
            StrategyKind::AllD
        }
    }
}

impl TryFrom<f64> for Mixture {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Mixture::new(value)
    }
}

impl From<Mixture> for f64 {
    fn from(m: Mixture) -> f64 {
        m.0
    }
}

pub fn sample_strategy<R: Rng + ?Sized>(mixture: Mixture, rng: &mut R) -> StrategyKind {
    mixture.sample(rng)
}
