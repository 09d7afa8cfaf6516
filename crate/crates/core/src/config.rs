//! TOML configuration files.
//!
//! ```toml
//! [treatment]
//! players = 4
//! cost_x = "1/9"      # integer, decimal, or "a/b"
//! delta = "3/4"
//! pi0 = 11
//! delta_pi = 9
//! label = "N=4, X=$1"  # optional
//!
//! [session]           # only needed to simulate
//! subjects = 40
//! seed = 7
//! grim_probability = 0.5
//! mode = "static"     # static | fixed_types | adaptive
//! supergames = 20     # optional
//! window = "16-20"    # optional, defaults to the last five
//!
//! [swap]              # optional change of treatment mid-session
//! from_supergame = 11
//! [swap.treatment]
//! players = 2
//! cost_x = 1
//! delta = 0.75
//! pi0 = 11
//! delta_pi = 9
//! ```
//!
//! Rationals survive a round trip exactly: integers are written as TOML
//! integers and everything else as a terminating decimal or `"a/b"` string.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{format_decimal_or_ratio, parse_rational, rational_from_f64, Rational};
use crate::game::{Money, Treatment};
use crate::simulator::{
    AdaptiveParams, MetricWindow, PlayMode, SessionConfig, TreatmentSwap, DEFAULT_SUPERGAMES,
};
use crate::strategies::Mixture;

/// A number as written in a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Number {
    pub fn from_rational(value: &Rational) -> Self {
        if value.is_integer() {
            if let Ok(v) = i64::try_from(value.numer().clone()) {
                return Number::Int(v);
            }
        }
        Number::Text(format_decimal_or_ratio(value))
    }

    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            Number::Int(v) => Ok(Rational::from_integer((*v).into())),
            Number::Float(v) => rational_from_f64(*v),
            Number::Text(t) => parse_rational(t),
        }
    }
}

/// Serialized form of a [`Treatment`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreatmentRecord {
    pub players: u32,
    pub cost_x: Number,
    pub delta: Number,
    pub pi0: Number,
    pub delta_pi: Number,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

fn field(name: &'static str, n: &Number) -> Result<Rational> {
    n.to_rational().map_err(|e| Error::invalid(name, e.to_string()))
}

impl TryFrom<TreatmentRecord> for Treatment {
    type Error = Error;

    fn try_from(r: TreatmentRecord) -> Result<Self> {
        let t = Treatment::new(
            r.players,
            field("cost_x", &r.cost_x)?,
            field("delta", &r.delta)?,
            Money::new(field("pi0", &r.pi0)?),
            Money::new(field("delta_pi", &r.delta_pi)?),
        )?;
        Ok(match r.label {
            Some(label) => t.with_label(label),
            None => t,
        })
    }
}

impl From<Treatment> for TreatmentRecord {
    fn from(t: Treatment) -> Self {
        TreatmentRecord {
            players: t.players(),
            cost_x: Number::from_rational(t.cost()),
            delta: Number::from_rational(t.continuation()),
            pi0: Number::from_rational(t.baseline().amount()),
            delta_pi: Number::from_rational(t.premium().amount()),
            label: Some(t.label().to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    #[default]
    Static,
    FixedTypes,
    Adaptive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
    pub subjects: u32,
    #[serde(default = "default_supergames")]
    pub supergames: u32,
    pub seed: u64,
    #[serde(default)]
    pub mode: ModeName,
    /// Mixture probability; the first-supergame mixture in adaptive mode.
    pub grim_probability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive_window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_schedule: Option<Vec<u32>>,
}

fn default_supergames() -> u32 {
    DEFAULT_SUPERGAMES
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwapSection {
    pub from_supergame: u32,
    pub treatment: Treatment,
}

/// A whole config file: the treatment plus optional session and swap tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub treatment: Treatment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session: Option<SessionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swap: Option<SwapSection>,
}

impl ConfigDocument {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    /// Builds and validates the session described by the document.
    pub fn into_session_config(self) -> Result<SessionConfig> {
        let s = self
            .session
            .ok_or_else(|| Error::Config("missing table `[session]`".into()))?;
        let mixture = Mixture::new(s.grim_probability).map_err(|_| {
            Error::Config(format!(
                "`session.grim_probability` must lie in [0, 1], got {}",
                s.grim_probability
            ))
        })?;
        if s.adaptive_window.is_some() && s.mode != ModeName::Adaptive {
            return Err(Error::Config("`session.adaptive_window` requires mode = \"adaptive\"".into()));
        }
        let mode = match s.mode {
            ModeName::Static => PlayMode::Static { mixture },
            ModeName::FixedTypes => PlayMode::FixedTypes { mixture },
            ModeName::Adaptive => {
                let mut params = AdaptiveParams::new(mixture);
                if let Some(w) = s.adaptive_window {
                    params.window = w;
                }
                PlayMode::Adaptive(params)
            }
        };
        let mut cfg = SessionConfig::new(self.treatment, s.subjects, mode, s.seed).with_supergames(s.supergames);
        if let Some(id) = s.session_id {
            cfg = cfg.with_session_id(id);
        }
        if let Some(w) = s.window {
            let window = MetricWindow::parse(&w).map_err(|e| Error::Config(format!("`session.window`: {e}")))?;
            cfg = cfg.with_window(window);
        }
        if let Some(schedule) = s.length_schedule {
            cfg = cfg.with_schedule(schedule);
        }
        if let Some(swap) = self.swap {
            cfg = cfg.with_swap(TreatmentSwap {
                from_supergame: swap.from_supergame,
                treatment: swap.treatment,
            });
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Reads the `[treatment]` table, ignoring any session settings.
pub fn parse_treatment(text: &str) -> Result<Treatment> {
    ConfigDocument::parse(text).map(|c| c.treatment)
}

pub fn parse_session(text: &str) -> Result<SessionConfig> {
    ConfigDocument::parse(text)?.into_session_config()
}

pub fn treatment_to_toml(t: &Treatment) -> String {
    let file = ConfigDocument {
        treatment: t.clone(),
        session: None,
        swap: None,
    };
    toml::to_string(&file).expect("treatment serializes")
}

pub fn session_to_toml(cfg: &SessionConfig) -> String {
    let (mode, mixture, adaptive_window) = match cfg.mode {
        PlayMode::Static { mixture } => (ModeName::Static, mixture, None),
        PlayMode::FixedTypes { mixture } => (ModeName::FixedTypes, mixture, None),
        PlayMode::Adaptive(p) => (ModeName::Adaptive, p.initial, Some(p.window)),
    };
    let file = ConfigDocument {
        treatment: cfg.treatment.clone(),
        session: Some(SessionSection {
            session_id: Some(cfg.session_id.clone()),
            subjects: cfg.subjects,
            supergames: cfg.supergames,
            seed: cfg.seed,
            mode,
            grim_probability: mixture.grim_probability(),
            adaptive_window,
            window: Some(cfg.metric_window.to_string()),
            length_schedule: cfg.length_schedule.clone(),
        }),
        swap: cfg.swap.as_ref().map(|s| SwapSection {
            from_supergame: s.from_supergame,
            treatment: s.treatment.clone(),
        }),
    };
    toml::to_string(&file).expect("session config serializes")
}
