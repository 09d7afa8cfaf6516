//! Basin of attraction for always-defect.
//!
//! With the belief mixture `p·Grim ⊕ (1−p)·All-D` on every opponent, the
//! basin is the interval of beliefs `[0, p⋆]` on which All-D pays weakly
//! more than Grim. Its width `p⋆` is the measure of strategic uncertainty.
//!
//! In the N-player game collusion only pays when all `N−1` others play
//! Grim, so what matters is the joint probability `Q`. Grim and All-D are
//! indifferent at
//!
//! ```text
//! Q⋆ = (1−δ)·x / δ
//! ```
//!
//! and the two extreme belief models give the basin widths
//!
//! ```text
//! perfectly correlated opponents:  p⋆_corr = Q⋆
//! independent opponents:           p⋆_ind  = Q⋆^(1/(N−1))
//! ```
//!
//! When `x > δ/(1−δ)` grim trigger is not a subgame-perfect equilibrium and
//! every basin is defined to be 1. At equality it is a knife-edge SPE and
//! the basin is also 1.

mod design;
mod oracle;

pub use design::{
    solve_cost, solve_cost_f64, solve_players, solve_players_f64, CostSolution, PlayerBracket,
    PlayerSolution, KNIFE_EDGE_WARNING,
};
pub use oracle::{indifference_oracle, OracleEstimate};

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Pow};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, Rational, RationalPower};
use crate::game::Treatment;

fn check_unit_open(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must lie strictly between 0 and 1, got {value}")))
    }
}

fn check_positive(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be positive, got {value}")))
    }
}

/// Two-player basin for a prisoner's dilemma with temptation `g` and
/// sucker loss `s`. Returns 1 when grim is not a strict SPE.
pub fn basin_two_player(g: f64, s: f64, delta: f64) -> Result<f64> {
    check_positive("g", g)?;
    check_positive("s", s)?;
    check_unit_open("delta", delta)?;
    if g > delta / (1.0 - delta) {
        return Ok(1.0);
    }
    Ok(((1.0 - delta) * s / (delta - (1.0 - delta) * (g - s))).min(1.0))
}

/// Critical joint belief `Q⋆ = min(1, (1−δ)x/δ)`.
pub fn critical_joint_belief(x: f64, delta: f64) -> Result<f64> {
    check_positive("x", x)?;
    check_unit_open("delta", delta)?;
    Ok(((1.0 - delta) * x / delta).min(1.0))
}

/// Basin under perfectly correlated beliefs; numerically identical to `Q⋆`.
pub fn basin_corr(x: f64, delta: f64) -> Result<f64> {
    critical_joint_belief(x, delta)
}

/// Basin under independent beliefs, `min(1, Q⋆^(1/(N−1)))`.
pub fn basin_ind(x: f64, players: u32, delta: f64) -> Result<f64> {
    if players < 2 {
        return Err(Error::invalid("players", format!("need at least 2, got {players}")));
    }
    let q = critical_joint_belief(x, delta)?;
    if q >= 1.0 {
        return Ok(1.0);
    }
    Ok(if players == 2 {
        q
    } else {
        q.powf(1.0 / f64::from(players - 1))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskDominance {
    Grim,
    AllD,
    Tie,
}

impl fmt::Display for RiskDominance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RiskDominance::Grim => "grim",
            RiskDominance::AllD => "all_d",
            RiskDominance::Tie => "tie",
        })
    }
}

/// Which strategy risk-dominates, by comparing the independent basin with ½.
///
/// The comparison is exact: `Q⋆` against `(½)^(N−1)`, before any root.
pub fn risk_dominance(x: f64, players: u32, delta: f64) -> Result<RiskDominance> {
    check_positive("x", x)?;
    check_unit_open("delta", delta)?;
    if players < 2 {
        return Err(Error::invalid("players", format!("need at least 2, got {players}")));
    }
    let x = exact::rational_from_f64(x)?;
    let delta = exact::rational_from_f64(delta)?;
    Ok(risk_dominance_exact(&x, players, &delta))
}

fn risk_dominance_exact(x: &Rational, players: u32, delta: &Rational) -> RiskDominance {
    let q = q_star_uncapped(x, delta);
    if q >= Rational::one() {
        return RiskDominance::AllD;
    }
    let half_power: Rational = Pow::pow(exact::ratio(1, 2), players as i32 - 1);
    match q.cmp(&half_power) {
        Ordering::Less => RiskDominance::Grim,
        Ordering::Greater => RiskDominance::AllD,
        Ordering::Equal => RiskDominance::Tie,
    }
}

fn q_star_uncapped(x: &Rational, delta: &Rational) -> Rational {
    (Rational::one() - delta) * x / delta
}

/// Expected values of Grim and All-D against opponents who all play Grim
/// with joint probability `Q`, measured as the payment from the last round
/// of a geometrically terminated supergame (equivalently, the per-period
/// normalized discounted value).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValuePair {
    pub grim: f64,
    pub all_d: f64,
}

impl ValuePair {
    pub fn difference(&self) -> f64 {
        self.grim - self.all_d
    }
}

/// Exact counterpart of [`strategy_values`].
pub fn strategy_values_exact(q: &Rational, t: &Treatment) -> Result<(Rational, Rational)> {
    if *q < Rational::from_integer(BigInt::from(0)) || *q > Rational::one() {
        return Err(Error::invalid("q", "joint belief must lie in [0, 1]"));
    }
    let one = Rational::one();
    let delta = t.continuation();
    let stay = &one - delta;
    let p = t.payoffs();
    let base = t.baseline().amount();
    let punished = &stay * p.coop_failure.amount() + delta * base;
    let grim = q * p.coop_success.amount() + (&one - q) * punished;
    let cheat = &stay * p.defect_success.amount() + delta * base;
    let all_d = q * cheat + (&one - q) * base;
    Ok((grim, all_d))
}

pub fn strategy_values(q: f64, t: &Treatment) -> Result<ValuePair> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid("q", format!("joint belief must lie in [0, 1], got {q}")));
    }
    let delta = t.continuation_f64();
    let p = t.payoffs().to_f64();
    use crate::game::{Action::*, Signal::*};
    let base = t.baseline().to_f64();
    let grim = q * p.get(Cooperate, Success)
        + (1.0 - q) * ((1.0 - delta) * p.get(Cooperate, Failure) + delta * base);
    let all_d = q * ((1.0 - delta) * p.get(Defect, Success) + delta * base) + (1.0 - q) * base;
    Ok(ValuePair { grim, all_d })
}

/// Root of `v_grim(Q) − v_alld(Q)` found directly from the payoff table.
///
/// The difference is affine in `Q`, so two evaluations pin the root. Used
/// to check that the indifference point does not depend on the money scale.
pub fn indifference_root(t: &Treatment) -> Rational {
    let zero = Rational::from_integer(BigInt::from(0));
    let (g0, a0) = strategy_values_exact(&zero, t).expect("0 is a valid belief");
    let (g1, a1) = strategy_values_exact(&Rational::one(), t).expect("1 is a valid belief");
    let d0 = g0 - a0;
    let d1 = g1 - a1;
    -&d0 / (d1 - &d0)
}

/// Basin measures and equilibrium flags for one treatment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasinReport {
    pub label: String,
    pub players: u32,
    pub cost_x: String,
    pub delta: String,
    pub p_star_corr: f64,
    pub p_star_ind: f64,
    pub q_star: f64,
    pub p_star_corr_exact: RationalPower,
    pub p_star_ind_exact: RationalPower,
    pub q_star_exact: RationalPower,
    pub grim_is_spe: bool,
    pub knife_edge: bool,
    pub risk_dominant: RiskDominance,
}

impl BasinReport {
    pub fn new(t: &Treatment) -> Self {
        let q = q_star_uncapped(t.cost(), t.continuation());
        let one = Rational::one();
        let grim_is_spe = q <= one;
        let knife_edge = q == one;
        let (corr, ind, q_exact) = if q >= one {
            let unit = RationalPower::rational(one.clone()).expect("1 > 0");
            (unit.clone(), unit.clone(), unit)
        } else {
            let corr = RationalPower::rational(q.clone()).expect("Q⋆ > 0");
            let ind = RationalPower::new(q, Ratio::new(1, i64::from(t.players()) - 1))
                .expect("Q⋆ > 0");
            (corr.clone(), ind, corr)
        };
        BasinReport {
            label: t.label().to_string(),
            players: t.players(),
            cost_x: exact::format_rational(t.cost()),
            delta: exact::format_rational(t.continuation()),
            p_star_corr: corr.to_f64(),
            p_star_ind: ind.to_f64(),
            q_star: q_exact.to_f64(),
            p_star_corr_exact: corr,
            p_star_ind_exact: ind,
            q_star_exact: q_exact,
            grim_is_spe,
            knife_edge,
            risk_dominant: risk_dominance_exact(t.cost(), t.players(), t.continuation()),
        }
    }

    /// Aligned two-column text rendering.
    pub fn to_table(&self) -> String {
        let rows = [
            ("treatment", self.label.clone()),
            ("players N", self.players.to_string()),
            ("relative cost x", self.cost_x.clone()),
            ("continuation delta", self.delta.clone()),
            (
                "correlated basin p*_corr",
                format!("{:.4}  [{}]", self.p_star_corr, self.p_star_corr_exact),
            ),
            (
                "independent basin p*_ind",
                format!("{:.4}  [{}]", self.p_star_ind, self.p_star_ind_exact),
            ),
            (
                "critical joint belief Q*",
                format!("{:.4}  [{}]", self.q_star, self.q_star_exact),
            ),
            ("grim is SPE", self.grim_is_spe.to_string()),
            ("knife edge", self.knife_edge.to_string()),
            ("risk dominant", self.risk_dominant.to_string()),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        rows.iter()
            .map(|(k, v)| format!("{k:<width$}  {v}\n"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};
    use crate::game::Money;

    fn treatment(players: u32, x: Rational, delta: Rational) -> Treatment {
        Treatment::new(players, x, delta, Money::dollars(11), Money::dollars(9)).unwrap()
    }

    #[test]
    fn two_player_examples() {
        assert!((basin_two_player(1.0, 1.0, 0.75).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(basin_two_player(1.0, 1.0, 0.5).unwrap(), 1.0);
        assert!((basin_two_player(2.0, 1.0, 0.75).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(basin_two_player(4.0, 1.0, 0.75).unwrap(), 1.0);
        assert!(basin_two_player(0.0, 1.0, 0.75).is_err());
        assert!(basin_two_player(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn correlated_examples() {
        assert!((basin_corr(1.0, 0.75).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((basin_corr(1.0 / 9.0, 0.75).unwrap() - 1.0 / 27.0).abs() < 1e-15);
        assert_eq!(basin_corr(3.0, 0.75).unwrap(), 1.0);
        assert!(basin_corr(-1.0, 0.75).is_err());
    }

    #[test]
    fn independent_examples() {
        let third_root = 3f64.powf(-1.0 / 3.0);
        assert!((basin_ind(1.0, 4, 0.75).unwrap() - third_root).abs() < 1e-12);
        assert!((basin_ind(1.0 / 9.0, 10, 0.75).unwrap() - third_root).abs() < 1e-12);
        assert_eq!(basin_ind(1.0, 2, 0.75).unwrap(), basin_corr(1.0, 0.75).unwrap());
        assert!(basin_ind(1.0, 1, 0.75).is_err());
    }

    #[test]
    fn critical_belief_examples() {
        assert!((critical_joint_belief(1.0, 0.75).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((critical_joint_belief(1.0 / 9.0, 0.75).unwrap() - 1.0 / 27.0).abs() < 1e-15);
        for delta in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let x = delta / (1.0 - delta);
            assert!((critical_joint_belief(x, delta).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn risk_dominance_examples() {
        assert_eq!(risk_dominance(1.0, 2, 0.75).unwrap(), RiskDominance::Grim);
        assert_eq!(risk_dominance(1.0, 4, 0.75).unwrap(), RiskDominance::AllD);
        // (1−δ)x/δ = ½ with δ = ¾ needs x = 3/2.
        assert_eq!(risk_dominance(1.5, 2, 0.75).unwrap(), RiskDominance::Tie);
        // N = 3: need Q⋆ = ¼, x = ¾.
        assert_eq!(risk_dominance(0.75, 3, 0.75).unwrap(), RiskDominance::Tie);
        assert_eq!(risk_dominance(10.0, 3, 0.75).unwrap(), RiskDominance::AllD);
    }

    #[test]
    fn values_at_extremes() {
        let t = treatment(4, int(1), ratio(3, 4));
        let v = strategy_values(1.0, &t).unwrap();
        assert_eq!(v.grim, 20.0);
        assert!(v.grim > v.all_d);
        let v = strategy_values(0.0, &t).unwrap();
        assert_eq!(v.all_d, 11.0);
        assert!(v.all_d >= v.grim);
        assert!(strategy_values(1.1, &t).is_err());
    }

    #[test]
    fn values_indifferent_at_q_star() {
        for x in [ratio(1, 9), ratio(1, 2), int(1), int(2)] {
            let t = treatment(4, x.clone(), ratio(3, 4));
            let q = q_star_uncapped(&x, t.continuation());
            let (g, a) = strategy_values_exact(&q, &t).unwrap();
            assert_eq!(g, a);
            let v = strategy_values(exact::to_f64(&q), &t).unwrap();
            assert!(v.difference().abs() < 1e-12, "{v:?}");
            assert_eq!(indifference_root(&t), q);
        }
    }

    #[test]
    fn value_difference_slope() {
        // v_grim − v_alld = δ·Δπ·Q − (1−δ)·x·Δπ
        let t = treatment(3, ratio(1, 2), ratio(3, 4));
        for q in [ratio(0, 1), ratio(1, 5), ratio(1, 2), int(1)] {
            let (g, a) = strategy_values_exact(&q, &t).unwrap();
            let expected = ratio(3, 4) * int(9) * &q - ratio(1, 4) * ratio(1, 2) * int(9);
            assert_eq!(g - a, expected);
        }
    }

    #[test]
    fn report_for_reference_cells() {
        let r = BasinReport::new(&treatment(10, ratio(1, 9), ratio(3, 4)));
        assert_eq!(r.p_star_corr_exact.as_rational(), Some(ratio(1, 27)));
        assert_eq!(r.p_star_ind_exact.to_string(), "3^(-1/3)");
        assert!(r.grim_is_spe && !r.knife_edge);
        assert_eq!(r.risk_dominant, RiskDominance::AllD);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["p_star_corr_exact"], "1/27");
        assert_eq!(json["risk_dominant"], "all_d");
    }

    #[test]
    fn knife_edge_and_non_spe() {
        let r = BasinReport::new(&treatment(4, int(1), ratio(1, 2)));
        assert!(r.grim_is_spe && r.knife_edge);
        assert_eq!((r.p_star_corr, r.p_star_ind, r.q_star), (1.0, 1.0, 1.0));
        let r = BasinReport::new(&treatment(4, ratio(101, 100), ratio(1, 2)));
        assert!(!r.grim_is_spe && !r.knife_edge);
        assert_eq!((r.p_star_corr, r.p_star_ind, r.q_star), (1.0, 1.0, 1.0));
        assert_eq!(r.risk_dominant, RiskDominance::AllD);
    }
}
