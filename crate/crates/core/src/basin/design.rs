//! Treatment design by inverting the independent basin.
//!
//! Holding `p⋆_ind` at a target while trading off the cost `x` against the
//! group size `N` means solving `Q⋆(x, δ) = target^(N−1)` for whichever of
//! the two is free.

use num_traits::{One, Signed};
use serde::Serialize;

use super::basin_ind;
use crate::error::{Error, Result};
use crate::exact::{self, Rational, RationalPower};

/// Targets at or above this are reported as close to the knife edge.
pub const KNIFE_EDGE_WARNING: f64 = 0.99;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostSolution {
    /// Relative cost `x`, when the target makes it rational.
    #[serde(serialize_with = "serialize_opt_rational")]
    pub cost: Option<Rational>,
    pub cost_f64: f64,
    /// `basin_ind` evaluated at the solved cost.
    pub verification: f64,
    pub near_knife_edge: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlayerBracket {
    pub players: u32,
    pub basin: f64,
    pub basin_exact: RationalPower,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlayerSolution {
    /// Real-valued solution of `Q⋆ = target^(N−1)`.
    pub players_real: f64,
    /// Set only when an integer `N` hits the target exactly.
    pub exact: Option<u32>,
    pub lower: PlayerBracket,
    pub upper: PlayerBracket,
    pub near_knife_edge: bool,
}

fn check_target(target: &RationalPower) -> Result<f64> {
    let value = target.to_f64();
    let below_one = match target.as_rational() {
        Some(r) => r < Rational::one(),
        None => target.exponent().is_positive() == (*target.base() < Rational::one()),
    };
    if !below_one || value.is_nan() || value <= 0.0 {
        return Err(Error::invalid(
            "target",
            format!("basin target must lie strictly between 0 and 1, got {target}"),
        ));
    }
    Ok(value)
}

fn check_continuation(delta: &Rational) -> Result<()> {
    if !delta.is_positive() || *delta >= Rational::one() {
        return Err(Error::invalid("delta", "must lie strictly between 0 and 1"));
    }
    Ok(())
}

/// Cost `x = δ/(1−δ) · target^(N−1)` that puts the independent basin at `target`.
pub fn solve_cost(target: &RationalPower, players: u32, delta: &Rational) -> Result<CostSolution> {
    let target_f = check_target(target)?;
    check_continuation(delta)?;
    if players < 2 {
        return Err(Error::invalid("players", format!("need at least 2, got {players}")));
    }
    let odds = delta / (Rational::one() - delta);
    let joint = target.powi(i64::from(players) - 1);
    let cost = joint.as_rational().map(|q| &odds * q);
    let cost_f64 = match &cost {
        Some(x) => exact::to_f64(x),
        None => exact::to_f64(&odds) * joint.to_f64(),
    };
    if let Some(x) = &cost {
        if *x >= odds {
            return Err(Error::Infeasible(format!(
                "x = {} reaches δ/(1−δ) = {}; grim trigger would not be a robust equilibrium",
                exact::format_rational(x),
                exact::format_rational(&odds)
            )));
        }
    }
    let verification = basin_ind(cost_f64, players, exact::to_f64(delta))?;
    Ok(CostSolution {
        cost,
        cost_f64,
        verification,
        near_knife_edge: target_f >= KNIFE_EDGE_WARNING,
    })
}

pub fn solve_cost_f64(target: f64, players: u32, delta: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::invalid("target", "must lie strictly between 0 and 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta", "must lie strictly between 0 and 1"));
    }
    if players < 2 {
        return Err(Error::invalid("players", "need at least 2"));
    }
    Ok(delta / (1.0 - delta) * target.powi(players as i32 - 1))
}

/// Group size `N = 1 + ln Q⋆ / ln target` that puts the independent basin
/// at `target` for a fixed cost.
pub fn solve_players(target: &RationalPower, cost: &Rational, delta: &Rational) -> Result<PlayerSolution> {
    let target_f = check_target(target)?;
    check_continuation(delta)?;
    if !cost.is_positive() {
        return Err(Error::invalid("x", "must be positive"));
    }
    let q = (Rational::one() - delta) * cost / delta;
    if q >= Rational::one() {
        return Err(Error::Infeasible(format!(
            "Q⋆ = {} ≥ 1: grim trigger is not a robust equilibrium at this cost",
            exact::format_rational(&q)
        )));
    }
    let q_f = exact::to_f64(&q);
    let players_real = 1.0 + q_f.ln() / target_f.ln();
    if players_real < 2.0 - 1e-12 {
        return Err(Error::Infeasible(format!(
            "target {target} is below Q⋆ = {}; it would need N = {players_real:.4} < 2",
            exact::format_rational(&q)
        )));
    }
    if players_real > f64::from(u32::MAX) {
        return Err(Error::Infeasible(format!("N = {players_real:e} is out of range")));
    }
    let q_power = RationalPower::rational(q.clone())?;
    let nearest = players_real.round().max(2.0) as u32;
    let exact_players = (target.powi(i64::from(nearest) - 1) == q_power).then_some(nearest);
    let (lo, hi) = match exact_players {
        Some(n) => (n, n),
        None => {
            let lo = (players_real.floor() as u32).max(2);
            (lo, (players_real.ceil() as u32).max(lo))
        }
    };
    let bracket = |players: u32| -> Result<PlayerBracket> {
        let basin_exact = RationalPower::new(
            q.clone(),
            num_rational::Ratio::new(1, i64::from(players) - 1),
        )?;
        Ok(PlayerBracket {
            players,
            basin: basin_exact.to_f64(),
            basin_exact,
        })
    };
    Ok(PlayerSolution {
        players_real: exact_players.map_or(players_real, f64::from),
        exact: exact_players,
        lower: bracket(lo)?,
        upper: bracket(hi)?,
        near_knife_edge: target_f >= KNIFE_EDGE_WARNING,
    })
}

pub fn solve_players_f64(target: f64, cost: f64, delta: f64) -> Result<f64> {
    let q = super::critical_joint_belief(cost, delta)?;
    if q >= 1.0 {
        return Err(Error::Infeasible("Q⋆ ≥ 1".into()));
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::invalid("target", "must lie strictly between 0 and 1"));
    }
    let n = 1.0 + q.ln() / target.ln();
    if n < 2.0 - 1e-12 {
        return Err(Error::Infeasible(format!("N = {n} < 2")));
    }
    Ok(n)
}

impl PlayerSolution {
    pub fn is_integer(&self) -> bool {
        self.exact.is_some()
    }
}

fn serialize_opt_rational<S: serde::Serializer>(
    value: &Option<Rational>,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    match value {
        Some(r) => serializer.serialize_some(&exact::format_rational(r)),
        None => serializer.serialize_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, parse_power, ratio};

    #[test]
    fn cost_for_reference_cells() {
        let s = solve_cost(&parse_power("1/3").unwrap(), 4, &ratio(3, 4)).unwrap();
        assert_eq!(s.cost.clone(), Some(ratio(1, 9)));
        assert!((s.verification - 1.0 / 3.0).abs() < 1e-12);

        let s = solve_cost(&parse_power("3^(-1/3)").unwrap(), 10, &ratio(3, 4)).unwrap();
        assert_eq!(s.cost.clone(), Some(ratio(1, 9)));
        assert!((s.verification - 3f64.powf(-1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn cost_near_knife_edge() {
        let s = solve_cost(&parse_power("0.9999").unwrap(), 4, &ratio(3, 4)).unwrap();
        assert!(s.near_knife_edge);
        assert!((s.cost_f64 - 3.0).abs() < 1e-3);
        assert!(s.cost_f64 < 3.0);
        assert!(solve_cost(&parse_power("1").unwrap(), 4, &ratio(3, 4)).is_err());
    }

    #[test]
    fn players_for_reference_cells() {
        let s = solve_players(&parse_power("3^(-1/3)").unwrap(), &int(1), &ratio(3, 4)).unwrap();
        assert_eq!(s.exact, Some(4));
        let s = solve_players(&parse_power("3^(-1/3)").unwrap(), &ratio(1, 9), &ratio(3, 4)).unwrap();
        assert_eq!(s.exact, Some(10));
        assert_eq!(s.players_real, 10.0);
        let s = solve_players(&parse_power("1/3").unwrap(), &int(1), &ratio(3, 4)).unwrap();
        assert_eq!(s.exact, Some(2));
    }

    #[test]
    fn non_integer_players_are_bracketed() {
        let s = solve_players(&parse_power("0.5").unwrap(), &int(1), &ratio(3, 4)).unwrap();
        assert_eq!(s.exact, None);
        assert!((s.players_real - (1.0 + (1.0f64 / 3.0).ln() / 0.5f64.ln())).abs() < 1e-12);
        assert_eq!((s.lower.players, s.upper.players), (2, 3));
        assert!(s.lower.basin < 0.5 && s.upper.basin > 0.5);
    }

    #[test]
    fn infeasible_players() {
        assert!(matches!(
            solve_players(&parse_power("0.1").unwrap(), &int(1), &ratio(3, 4)),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            solve_players(&parse_power("0.5").unwrap(), &int(3), &ratio(3, 4)),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn float_versions_round_trip() {
        for n in [2u32, 3, 4, 7, 10] {
            for target in [0.05, 0.33, 0.5, 0.69, 0.95] {
                let x = solve_cost_f64(target, n, 0.75).unwrap();
                assert!((basin_ind(x, n, 0.75).unwrap() - target).abs() < 1e-12);
                let back = solve_players_f64(target, x, 0.75).unwrap();
                assert!((back - f64::from(n)).abs() < 1e-9, "{back} vs {n}");
            }
        }
    }
}
