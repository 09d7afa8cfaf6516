//! Stage game: treatments, payoffs and the aggregate success/failure signal.
//!
//! A treatment is pinned down by the group size `N`, the relative cost of
//! cooperating `x`, the continuation probability `δ`, and the money scale
//! (`π0` baseline, `Δπ` premium). Every player observes only their own action
//! and a binary signal that reports success iff all `N−1` others cooperated:
//!
//! | own action | signal S          | signal F     |
//! |------------|-------------------|--------------|
//! | C          | π0 + Δπ           | π0 − x·Δπ    |
//! | D          | π0 + (1+x)·Δπ     | π0           |

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Cooperate,
    Defect,
}

impl Action {
    pub fn as_char(self) -> char {
        match self {
            Action::Cooperate => 'C',
            Action::Defect => 'D',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'C' | 'c' => Some(Action::Cooperate),
            'D' | 'd' => Some(Action::Defect),
            _ => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Signal {
    Success,
    Failure,
}

impl Signal {
    pub fn as_char(self) -> char {
        match self {
            Signal::Success => 'S',
            Signal::Failure => 'F',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'S' | 's' => Some(Signal::Success),
            'F' | 'f' => Some(Signal::Failure),
            _ => None,
        }
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// The signal a player receives: success iff every other player cooperated.
pub fn signal_of(others: &[Action]) -> Result<Signal> {
    if others.is_empty() {
        return Err(Error::EmptyOthers);
    }
    Ok(if others.iter().all(|&a| a == Action::Cooperate) {
        Signal::Success
    } else {
        Signal::Failure
    })
}

/// An exact amount of money.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Money(Rational);

impl Money {
    pub fn new(amount: Rational) -> Self {
        Money(amount)
    }

    pub fn dollars(amount: i64) -> Self {
        Money(exact::int(amount))
    }

    /// Rounds to whole cents, half away from zero.
    pub fn from_f64(amount: f64) -> Result<Self> {
        if !amount.is_finite() {
            return Err(Error::invalid("money", format!("{amount} is not finite")));
        }
        let cents = (amount * 100.0).round() as i64;
        Ok(Money(exact::ratio(cents, 100)))
    }

    pub fn parse(text: &str) -> Result<Self> {
        exact::parse_rational(text).map(Money)
    }

    pub fn amount(&self) -> &Rational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        exact::to_f64(&self.0)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&exact::format_decimal_or_ratio(&self.0))
    }
}

impl Serialize for Money {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Money::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Payoffs over (own action, signal).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PayoffTable {
    pub coop_success: Money,
    pub coop_failure: Money,
    pub defect_success: Money,
    pub defect_failure: Money,
}

impl PayoffTable {
    pub fn get(&self, action: Action, signal: Signal) -> &Money {
        match (action, signal) {
            (Action::Cooperate, Signal::Success) => &self.coop_success,
            (Action::Cooperate, Signal::Failure) => &self.coop_failure,
            (Action::Defect, Signal::Success) => &self.defect_success,
            (Action::Defect, Signal::Failure) => &self.defect_failure,
        }
    }

    /// Strict ordering π(D,S) > π(C,S) > π(D,F) > π(C,F).
    pub fn is_dilemma(&self) -> bool {
        self.defect_success > self.coop_success
            && self.coop_success > self.defect_failure
            && self.defect_failure > self.coop_failure
    }

    pub fn to_f64(&self) -> PayoffTableF64 {
        PayoffTableF64 {
            table: [
                [self.coop_success.to_f64(), self.coop_failure.to_f64()],
                [self.defect_success.to_f64(), self.defect_failure.to_f64()],
            ],
        }
    }
}

/// Float copy of a [`PayoffTable`] for hot loops.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PayoffTableF64 {
    table: [[f64; 2]; 2],
}

impl PayoffTableF64 {
    #[inline]
    pub fn get(&self, action: Action, signal: Signal) -> f64 {
        self.table[action as usize][signal as usize]
    }
}

/// A fully parameterized N-player treatment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "crate::config::TreatmentRecord", into = "crate::config::TreatmentRecord")]
pub struct Treatment {
    players: u32,
    cost: Rational,
    continuation: Rational,
    baseline: Money,
    premium: Money,
    label: String,
}

impl Treatment {
    /// Validates and builds a treatment. `cost` is the relative cost `x`;
    /// the absolute cost is `x·Δπ`.
    pub fn new(
        players: u32,
        cost: Rational,
        continuation: Rational,
        baseline: Money,
        premium: Money,
    ) -> Result<Self> {
        if players < 2 {
            return Err(Error::invalid("players", format!("need at least 2, got {players}")));
        }
        if !cost.is_positive() {
            return Err(Error::invalid("cost_x", format!("must be positive, got {cost}")));
        }
        if !continuation.is_positive() || continuation >= Rational::one() {
            return Err(Error::invalid(
                "delta",
                format!("must lie strictly between 0 and 1, got {continuation}"),
            ));
        }
        if !premium.amount().is_positive() {
            return Err(Error::invalid("delta_pi", format!("must be positive, got {premium}")));
        }
        let label = format!(
            "N={players},x={}",
            exact::format_rational(&cost)
        );
        let treatment = Treatment {
            players,
            cost,
            continuation,
            baseline,
            premium,
            label,
        };
        if !treatment.payoffs().is_dilemma() {
            return Err(Error::invalid("cost_x", "payoffs violate the dilemma ordering"));
        }
        Ok(treatment)
    }

    /// Builds a treatment from the absolute cost `X`, so that `x = X/Δπ` is exact.
    pub fn from_cost_amount(
        players: u32,
        cost_amount: Money,
        continuation: Rational,
        baseline: Money,
        premium: Money,
    ) -> Result<Self> {
        if !premium.amount().is_positive() {
            return Err(Error::invalid("delta_pi", format!("must be positive, got {premium}")));
        }
        let cost = cost_amount.amount() / premium.amount();
        Treatment::new(players, cost, continuation, baseline, premium)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn players(&self) -> u32 {
        self.players
    }

    pub fn cost(&self) -> &Rational {
        &self.cost
    }

    pub fn continuation(&self) -> &Rational {
        &self.continuation
    }

    pub fn baseline(&self) -> &Money {
        &self.baseline
    }

    pub fn premium(&self) -> &Money {
        &self.premium
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Absolute cost of cooperating, `X = x·Δπ`.
    pub fn cost_amount(&self) -> Money {
        Money(&self.cost * self.premium.amount())
    }

    pub fn cost_f64(&self) -> f64 {
        exact::to_f64(&self.cost)
    }

    pub fn continuation_f64(&self) -> f64 {
        exact::to_f64(&self.continuation)
    }

    pub fn payoffs(&self) -> PayoffTable {
        let base = self.baseline.amount();
        let prem = self.premium.amount();
        let one = Rational::one();
        PayoffTable {
            coop_success: Money(base + prem),
            coop_failure: Money(base - &self.cost * prem),
            defect_success: Money(base + (&one + &self.cost) * prem),
            defect_failure: Money(base.clone()),
        }
    }

    pub fn stage_payoff(&self, action: Action, signal: Signal) -> Money {
        self.payoffs().get(action, signal).clone()
    }
}

/// `(π − π0)/Δπ`.
pub fn normalize(payoff: &Money, baseline: &Money, premium: &Money) -> Result<Rational> {
    if !premium.amount().is_positive() {
        return Err(Error::invalid("delta_pi", "must be positive"));
    }
    Ok((payoff.amount() - baseline.amount()) / premium.amount())
}

/// Two-player prisoner's dilemma in temptation/sucker form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralPd {
    temptation: Rational,
    sucker: Rational,
    continuation: Rational,
    baseline: Money,
    premium: Money,
}

/// Payoffs indexed by (own action, other's action).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PdTable {
    pub cc: Money,
    pub cd: Money,
    pub dc: Money,
    pub dd: Money,
}

impl PdTable {
    pub fn get(&self, own: Action, other: Action) -> &Money {
        match (own, other) {
            (Action::Cooperate, Action::Cooperate) => &self.cc,
            (Action::Cooperate, Action::Defect) => &self.cd,
            (Action::Defect, Action::Cooperate) => &self.dc,
            (Action::Defect, Action::Defect) => &self.dd,
        }
    }

    pub fn is_dilemma(&self) -> bool {
        self.dc > self.cc && self.cc > self.dd && self.dd > self.cd
    }
}

impl GeneralPd {
    pub fn new(
        temptation: Rational,
        sucker: Rational,
        continuation: Rational,
        baseline: Money,
        premium: Money,
    ) -> Result<Self> {
        if !temptation.is_positive() {
            return Err(Error::invalid("g", "must be positive"));
        }
        if !sucker.is_positive() {
            return Err(Error::invalid("s", "must be positive"));
        }
        if !continuation.is_positive() || continuation >= Rational::one() {
            return Err(Error::invalid("delta", "must lie strictly between 0 and 1"));
        }
        if !premium.amount().is_positive() {
            return Err(Error::invalid("delta_pi", "must be positive"));
        }
        Ok(GeneralPd {
            temptation,
            sucker,
            continuation,
            baseline,
            premium,
        })
    }

    pub fn temptation(&self) -> &Rational {
        &self.temptation
    }

    pub fn sucker(&self) -> &Rational {
        &self.sucker
    }

    pub fn continuation(&self) -> &Rational {
        &self.continuation
    }

    pub fn payoffs(&self) -> PdTable {
        let base = self.baseline.amount();
        let prem = self.premium.amount();
        PdTable {
            cc: Money(base + prem),
            cd: Money(base - &self.sucker * prem),
            dc: Money(base + (Rational::one() + &self.temptation) * prem),
            dd: Money(base.clone()),
        }
    }
}

impl Default for Money {
    fn default() -> Self {
        Money(Rational::zero())
    }
}
