//! Belief-threshold adaptation between supergames.
//!
//! Each agent tracks whether all of its partners cooperated in round 1 of
//! recent supergames, which is exactly what its own round-1 signal reports.
//! The smoothed frequency of such successes is its belief about joint
//! cooperation; it plays Grim when that belief exceeds `Q⋆` and All-D when
//! it falls short, keeping its previous strategy on a tie.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::exact::Rational;
use crate::strategies::{Mixture, StrategyKind};

pub const DEFAULT_ADAPTIVE_WINDOW: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveParams {
    /// Mixture used in the first supergame.
    pub initial: Mixture,
    /// Number of most recent supergames the belief looks back over.
    pub window: usize,
}

impl AdaptiveParams {
    pub fn new(initial: Mixture) -> Self {
        AdaptiveParams {
            initial,
            window: DEFAULT_ADAPTIVE_WINDOW,
        }
    }
}

/// Add-one smoothed share of round-1 successes among the last `window`
/// supergames: `(successes + 1) / (observed + 2)`.
pub fn belief(round_one_success: &[bool], window: usize) -> Rational {
    let recent = &round_one_success[round_one_success.len().saturating_sub(window)..];
    let hits = recent.iter().filter(|&&s| s).count();
    Rational::new(BigInt::from(hits + 1), BigInt::from(recent.len() + 2))
}

/// Strategy for the next supergame. `q_star` is the critical joint belief of
/// the treatment about to be played (capped at 1).
pub fn adaptive_step(
    round_one_success: &[bool],
    previous: StrategyKind,
    q_star: &Rational,
    params: &AdaptiveParams,
) -> StrategyKind {
    if round_one_success.is_empty() {
        return previous;
    }
    let b = belief(round_one_success, params.window);
    match b.cmp(q_star) {
        std::cmp::Ordering::Greater => StrategyKind::Grim,
        std::cmp::Ordering::Less => StrategyKind::AllD,
        std::cmp::Ordering::Equal => previous,
    }
}
