//! Monte Carlo session engine.
//!
//! A session mirrors a laboratory session: `subjects` automata play a
//! sequence of supergames, each randomly terminated, and are rematched into
//! fresh groups of `N` before every supergame (stranger design). Strategy
//! states reset between supergames.
//!
//! # Random streams
//!
//! Every random draw comes from a ChaCha8 generator keyed by the session
//! seed. Independent streams of that generator are used for each purpose:
//!
//! | stream    | used for                                        |
//! |-----------|-------------------------------------------------|
//! | 0         | supergame lengths                               |
//! | 1         | fixed types (drawn once per session)            |
//! | 2 + k     | rematching and strategy draws in supergame `k`  |
//!
//! (`k` counts from zero.) A supergame's draws therefore do not depend on
//! what happened before it, and a supplied length schedule leaves every
//! other draw untouched.

mod adaptive;
mod engine;
mod export;
mod lengths;
mod stats;

pub use adaptive::{adaptive_step, belief, AdaptiveParams};
pub use engine::{play_round, run_session, RoundRecord, SessionRecord, SupergameRecord};
pub use export::{lengths_from_sidecar, observations, render_panel_a, Phase, SessionSidecar};
pub use lengths::{draw_lengths, Termination, MAX_SUPERGAME_LENGTH};
pub use stats::{compute_stats, expected_success, CoopStats, Measure, Rate, StatsAccumulator};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::Treatment;
use crate::strategies::Mixture;

pub const DEFAULT_SUPERGAMES: u32 = 20;

const LENGTH_STREAM: u64 = 0;
const TYPE_STREAM: u64 = 1;
const FIRST_SUPERGAME_STREAM: u64 = 2;

pub(crate) fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// How agents pick their strategy for each supergame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlayMode {
    /// Fresh i.i.d. draw from the mixture every supergame.
    Static { mixture: Mixture },
    /// One draw per subject for the whole session.
    FixedTypes { mixture: Mixture },
    /// Start from the mixture, then follow the belief-threshold rule.
    Adaptive(AdaptiveParams),
}

impl PlayMode {
    pub fn static_mixture(p: f64) -> Result<Self> {
        Ok(PlayMode::Static {
            mixture: Mixture::new(p)?,
        })
    }
}

/// Inclusive, 1-based range of supergames used for summary statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricWindow {
    pub first: u32,
    pub last: u32,
}

impl MetricWindow {
    pub fn new(first: u32, last: u32) -> Result<Self> {
        if first == 0 || last < first {
            return Err(Error::Config(format!("metric window {first}-{last} is empty or not 1-based")));
        }
        Ok(MetricWindow { first, last })
    }

    /// The last five supergames, or all of them when there are fewer.
    pub fn last_five(supergames: u32) -> Self {
        MetricWindow {
            first: supergames.saturating_sub(4).max(1),
            last: supergames.max(1),
        }
    }

    pub fn all(supergames: u32) -> Self {
        MetricWindow {
            first: 1,
            last: supergames.max(1),
        }
    }

    pub fn contains(&self, supergame: u32) -> bool {
        (self.first..=self.last).contains(&supergame)
    }

    /// Parses `"16-20"` or a single index.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Config(format!("metric window `{text}` is not of the form a-b"));
        let (a, b) = match text.split_once('-') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (text.trim(), text.trim()),
        };
        MetricWindow::new(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?)
    }
}

impl std::fmt::Display for MetricWindow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{}", self.first, self.last)
    }
}

/// Replaces the treatment from a given supergame onwards (within-subject designs).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreatmentSwap {
    /// First supergame (1-based) played under the new treatment.
    pub from_supergame: u32,
    pub treatment: Treatment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub session_id: String,
    pub treatment: Treatment,
    pub subjects: u32,
    pub supergames: u32,
    pub mode: PlayMode,
    /// Pre-drawn supergame lengths, e.g. to match lengths across treatments.
    pub length_schedule: Option<Vec<u32>>,
    pub seed: u64,
    pub metric_window: MetricWindow,
    pub swap: Option<TreatmentSwap>,
}

impl SessionConfig {
    /// Twenty supergames, last-five metric window, no schedule or swap.
    pub fn new(treatment: Treatment, subjects: u32, mode: PlayMode, seed: u64) -> Self {
        SessionConfig {
            session_id: format!("session-{seed}"),
            treatment,
            subjects,
            supergames: DEFAULT_SUPERGAMES,
            mode,
            length_schedule: None,
            seed,
            metric_window: MetricWindow::last_five(DEFAULT_SUPERGAMES),
            swap: None,
        }
    }

    /// Sets the number of supergames and resets the window to the last five.
    pub fn with_supergames(mut self, supergames: u32) -> Self {
        self.supergames = supergames;
        self.metric_window = MetricWindow::last_five(supergames);
        self
    }

    pub fn with_schedule(mut self, lengths: Vec<u32>) -> Self {
        self.length_schedule = Some(lengths);
        self
    }

    pub fn with_window(mut self, window: MetricWindow) -> Self {
        self.metric_window = window;
        self
    }

    pub fn with_session_id(mut self, id: impl Into<String>) -> Self {
        self.session_id = id.into();
        self
    }

    pub fn with_swap(mut self, swap: TreatmentSwap) -> Self {
        self.swap = Some(swap);
        self
    }

    /// Treatment in effect during supergame `index` (1-based).
    pub fn treatment_for(&self, index: u32) -> &Treatment {
        match &self.swap {
            Some(swap) if index >= swap.from_supergame => &swap.treatment,
            _ => &self.treatment,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.supergames == 0 {
            return Err(Error::Config("supergames must be at least 1".into()));
        }
        if self.subjects == 0 {
            return Err(Error::Config("subjects must be at least 1".into()));
        }
        let check_divisible = |t: &Treatment| {
            if !self.subjects.is_multiple_of(t.players()) {
                Err(Error::Config(format!(
                    "subjects ({}) must be a multiple of the group size N = {}",
                    self.subjects,
                    t.players()
                )))
            } else {
                Ok(())
            }
        };
        check_divisible(&self.treatment)?;
        if let Some(swap) = &self.swap {
            if swap.from_supergame < 2 || swap.from_supergame > self.supergames {
                return Err(Error::Config(format!(
                    "treatment swap at supergame {} must lie in 2..={}",
                    swap.from_supergame, self.supergames
                )));
            }
            check_divisible(&swap.treatment)?;
        }
        let w = self.metric_window;
        if w.first < 1 || w.last > self.supergames || w.first > w.last {
            return Err(Error::Config(format!(
                "metric window {w} must lie within 1-{}",
                self.supergames
            )));
        }
        if let Some(schedule) = &self.length_schedule {
            if schedule.len() != self.supergames as usize {
                return Err(Error::Config(format!(
                    "length schedule has {} entries for {} supergames",
                    schedule.len(),
                    self.supergames
                )));
            }
            if let Some(bad) = schedule.iter().find(|&&l| l == 0 || l > MAX_SUPERGAME_LENGTH) {
                return Err(Error::Config(format!(
                    "supergame length {bad} is outside 1..={MAX_SUPERGAME_LENGTH}"
                )));
            }
        }
        if let PlayMode::Adaptive(params) = &self.mode {
            if params.window == 0 {
                return Err(Error::Config("adaptive window must be at least 1".into()));
            }
        }
        Ok(())
    }

    /// Lengths this session will use: the supplied schedule or fresh draws.
    pub fn lengths(&self) -> Result<Vec<u32>> {
        if let Some(schedule) = &self.length_schedule {
            return Ok(schedule.clone());
        }
        let mut rng = stream(self.seed, LENGTH_STREAM);
        (1..=self.supergames)
            .map(|k| Termination::new(self.treatment_for(k).continuation())?.draw(&mut rng))
            .collect()
    }
}
