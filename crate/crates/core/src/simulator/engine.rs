use num_traits::One;
use rand::seq::SliceRandom;
use serde::Serialize;

use super::adaptive::adaptive_step;
use super::{stream, PlayMode, SessionConfig, FIRST_SUPERGAME_STREAM, TYPE_STREAM};
use crate::error::Result;
use crate::exact::Rational;
use crate::game::{Action, Signal};
use crate::strategies::{Automaton, StrategyKind, StrategyState};

/// Plays one simultaneous round for a group and advances every state.
///
/// `actions` and `signals` receive the round's play and must have the same
/// length as `states`.
#[inline]
pub fn play_round(states: &mut [StrategyState], actions: &mut [Action], signals: &mut [Signal]) {
    let mut defectors = 0usize;
    for (state, action) in states.iter().zip(actions.iter_mut()) {
        *action = state.next_action();
        defectors += (*action == Action::Defect) as usize;
    }
    for ((state, &action), signal) in states.iter_mut().zip(actions.iter()).zip(signals.iter_mut()) {
        let others_defecting = defectors - (action == Action::Defect) as usize;
        *signal = if others_defecting == 0 {
            Signal::Success
        } else {
            Signal::Failure
        };
        *state = state.update(action, *signal);
    }
}

/// Play of every subject in one round, indexed by subject id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub actions: Vec<Action>,
    pub signals: Vec<Signal>,
    /// Grim trigger state before the round was played.
    pub triggered: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupergameRecord {
    /// 1-based supergame index.
    pub index: u32,
    pub treatment_label: String,
    pub players: u32,
    pub length: u32,
    /// Subject ids of each group.
    pub groups: Vec<Vec<u32>>,
    /// Group index of each subject.
    pub group_of: Vec<u32>,
    pub strategies: Vec<StrategyKind>,
    pub rounds: Vec<RoundRecord>,
    /// Stage payoff of the last round, which is what a subject is paid for
    /// the supergame. Recorded only; automata ignore it.
    pub payments: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SessionRecord {
    pub config: SessionConfig,
    pub supergames: Vec<SupergameRecord>,
}

impl SessionRecord {
    pub fn lengths(&self) -> Vec<u32> {
        self.supergames.iter().map(|s| s.length).collect()
    }
}

pub fn run_session(config: &SessionConfig) -> Result<SessionRecord> {
    config.validate()?;
    let lengths = config.lengths()?;
    let subjects = config.subjects as usize;

    let fixed: Option<Vec<StrategyKind>> = match config.mode {
        PlayMode::FixedTypes { mixture } => {
            let mut rng = stream(config.seed, TYPE_STREAM);
            Some((0..subjects).map(|_| mixture.sample(&mut rng)).collect())
        }
        _ => None,
    };
    let mut history: Vec<Vec<bool>> = vec![Vec::new(); subjects];
    let mut previous: Vec<StrategyKind> = Vec::new();
    let mut records = Vec::with_capacity(config.supergames as usize);

    for (k, &length) in lengths.iter().enumerate() {
        let index = k as u32 + 1;
        let treatment = config.treatment_for(index);
        let players = treatment.players() as usize;
        let payoffs = treatment.payoffs().to_f64();
        let mut rng = stream(config.seed, FIRST_SUPERGAME_STREAM + k as u64);

        let mut order: Vec<u32> = (0..config.subjects).collect();
        order.shuffle(&mut rng);
        let groups: Vec<Vec<u32>> = order.chunks(players).map(<[u32]>::to_vec).collect();
        let mut group_of = vec![0u32; subjects];
        for (g, members) in groups.iter().enumerate() {
            for &s in members {
                group_of[s as usize] = g as u32;
            }
        }

        let strategies: Vec<StrategyKind> = match (&config.mode, &fixed) {
            (_, Some(types)) => types.clone(),
            (PlayMode::Static { mixture }, None) => {
                (0..subjects).map(|_| mixture.sample(&mut rng)).collect()
            }
            (PlayMode::Adaptive(params), None) if k == 0 => {
                (0..subjects).map(|_| params.initial.sample(&mut rng)).collect()
            }
            (PlayMode::Adaptive(params), None) => {
                let q = treatment_q_star(treatment);
                (0..subjects)
                    .map(|s| adaptive_step(&history[s], previous[s], &q, params))
                    .collect()
            }
            (PlayMode::FixedTypes { .. }, None) => unreachable!("fixed types are drawn up front"),
        };

        let mut states: Vec<StrategyState> =
            strategies.iter().map(|&kind| StrategyState::fresh(kind)).collect();
        let mut rounds = Vec::with_capacity(length as usize);
        let mut group_states = vec![StrategyState::fresh(StrategyKind::AllD); players];
        let mut group_actions = vec![Action::Defect; players];
        let mut group_signals = vec![Signal::Failure; players];
        for _ in 0..length {
            let mut round = RoundRecord {
                actions: vec![Action::Defect; subjects],
                signals: vec![Signal::Failure; subjects],
                triggered: states.iter().map(StrategyState::triggered).collect(),
            };
            for members in &groups {
                for (slot, &s) in members.iter().enumerate() {
                    group_states[slot] = states[s as usize];
                }
                play_round(&mut group_states, &mut group_actions, &mut group_signals);
                for (slot, &s) in members.iter().enumerate() {
                    let s = s as usize;
                    states[s] = group_states[slot];
                    round.actions[s] = group_actions[slot];
                    round.signals[s] = group_signals[slot];
                }
            }
            rounds.push(round);
        }

        let last = rounds.last().expect("lengths are at least 1");
        let payments = (0..subjects)
            .map(|s| payoffs.get(last.actions[s], last.signals[s]))
            .collect();
        for (s, h) in history.iter_mut().enumerate() {
            h.push(rounds[0].signals[s] == Signal::Success);
        }
        previous = strategies.clone();

        records.push(SupergameRecord {
            index,
            treatment_label: treatment.label().to_string(),
            players: treatment.players(),
            length,
            groups,
            group_of,
            strategies,
            rounds,
            payments,
        });
    }

    Ok(SessionRecord {
        config: config.clone(),
        supergames: records,
    })
}

fn treatment_q_star(t: &crate::game::Treatment) -> Rational {
    let q = (Rational::one() - t.continuation()) * t.cost() / t.continuation();
    q.min(Rational::one())
}
