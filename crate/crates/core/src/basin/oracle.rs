//! Brute-force check of the indifference point.
//!
//! Each replication draws a supergame length and the `N−1` opponents'
//! strategies, then plays the supergame twice: once with a Grim focal agent
//! and once with an All-D focal agent, on the same draws. Opponents are
//! i.i.d. Grim with probability `Q^(1/(N−1))`, so they are jointly Grim
//! with probability `Q`. The focal agent is paid its last-round stage
//! payoff, and the estimate is the mean of (Grim payment − All-D payment).

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Action, Signal, Treatment};
use crate::simulator::{play_round, stream, Termination};
use crate::strategies::{Mixture, StrategyKind, StrategyState};
use crate::sum::Sum;

const CHUNK: u64 = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleEstimate {
    pub joint_belief: f64,
    pub replications: u64,
    pub mean_difference: f64,
    pub std_error: f64,
}

impl OracleEstimate {
    /// `|mean| / se`.
    pub fn z_score(&self) -> f64 {
        self.mean_difference / self.std_error
    }
}

fn last_round_payment(
    focal: StrategyKind,
    opponents: &[StrategyKind],
    length: u32,
    payoffs: &crate::game::PayoffTableF64,
    states: &mut Vec<StrategyState>,
    actions: &mut [Action],
    signals: &mut [Signal],
) -> f64 {
    states.clear();
    states.push(StrategyState::fresh(focal));
    states.extend(opponents.iter().map(|&k| StrategyState::fresh(k)));
    for _ in 0..length {
        play_round(states, actions, signals);
    }
    payoffs.get(actions[0], signals[0])
}

/// Monte Carlo estimate of `v_grim − v_alld` when opponents are jointly Grim
/// with probability `joint_belief`. Deterministic for a given seed regardless
/// of thread count: replications are split into fixed chunks, each with its
/// own random stream, and chunk sums are combined in order.
pub fn indifference_oracle(
    treatment: &Treatment,
    joint_belief: f64,
    replications: u64,
    seed: u64,
) -> Result<OracleEstimate> {
    let x = treatment.cost_f64();
    let delta = treatment.continuation_f64();
    if x > delta / (1.0 - delta) {
        return Err(Error::NotSpe {
            cost: x,
            continuation: delta,
        });
    }
    if !(0.0..=1.0).contains(&joint_belief) {
        return Err(Error::invalid("q", "joint belief must lie in [0, 1]"));
    }
    if replications < 2 {
        return Err(Error::invalid("replications", "need at least 2"));
    }
    let opponents = treatment.players() as usize - 1;
    let marginal = Mixture::new(joint_belief.powf(1.0 / opponents as f64).min(1.0))?;
    let termination = Termination::new(treatment.continuation())?;
    let payoffs = treatment.payoffs().to_f64();

    let chunks = replications.div_ceil(CHUNK);
    let partials: Vec<Result<(Sum, Sum)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, c);
            let reps = CHUNK.min(replications - c * CHUNK);
            let mut sum = Sum::default();
            let mut sum_sq = Sum::default();
            let mut kinds = vec![StrategyKind::AllD; opponents];
            let mut states = Vec::with_capacity(opponents + 1);
            let mut actions = vec![Action::Defect; opponents + 1];
            let mut signals = vec![Signal::Failure; opponents + 1];
            for _ in 0..reps {
                let length = termination.draw(&mut rng)?;
                for k in kinds.iter_mut() {
                    *k = marginal.sample(&mut rng);
                }
                let grim = last_round_payment(
                    StrategyKind::Grim, &kinds, length, &payoffs, &mut states, &mut actions, &mut signals,
                );
                let all_d = last_round_payment(
                    StrategyKind::AllD, &kinds, length, &payoffs, &mut states, &mut actions, &mut signals,
                );
                let d = grim - all_d;
                sum.add(d);
                sum_sq.add(d * d);
            }
            Ok((sum, sum_sq))
        })
        .collect();

    let mut sum = Sum::default();
    let mut sum_sq = Sum::default();
    for part in partials {
        let (s, q) = part?;
        sum.add(s.value());
        sum_sq.add(q.value());
    }
    let n = replications as f64;
    let mean = sum.value() / n;
    let var = ((sum_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(OracleEstimate {
        joint_belief,
        replications,
        mean_difference: mean,
        std_error: (var / n).sqrt(),
    })
}
