//! Cooperation and success rates with subject-clustered standard errors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::engine::SessionRecord;
use super::MetricWindow;
use crate::error::{Error, Result};
use crate::game::{Action, Signal};

/// Expected success rate when each partner independently cooperates with
/// probability `q`: `q^(N−1)`.
pub fn expected_success(q: f64, players: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid("q", format!("must lie in [0, 1], got {q}")));
    }
    if players < 2 {
        return Err(Error::invalid("players", "need at least 2"));
    }
    Ok(q.powi(players as i32 - 1))
}

/// A proportion with its cluster-robust standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub rate: f64,
    pub se: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Measure {
    InitialCoop,
    OngoingCoop,
    InitialSuccess,
    OngoingSuccess,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoopStats {
    pub window: MetricWindow,
    pub initial_coop: Rate,
    /// Absent when no supergame in the window lasted beyond round 1.
    pub ongoing_coop: Option<Rate>,
    pub initial_success: f64,
    pub ongoing_success: Option<f64>,
    pub n_subjects: usize,
    pub n_decisions: usize,
    pub n_initial: usize,
    pub n_ongoing: usize,
}

#[derive(Clone, Copy, Debug, Default)]
struct Counts {
    coop: [u64; 2],
    success: [u64; 2],
    decisions: [u64; 2],
}

/// Accumulates per-subject counts across one or more sessions; clusters are
/// `(session, subject)` pairs.
#[derive(Clone, Debug, Default)]
pub struct StatsAccumulator {
    clusters: BTreeMap<(usize, u32), Counts>,
    sessions: usize,
}

impl StatsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds the supergames of `record` that fall inside `window`.
    pub fn add(&mut self, record: &SessionRecord, window: MetricWindow) {
        let session = self.sessions;
        self.sessions += 1;
        for sg in record.supergames.iter().filter(|sg| window.contains(sg.index)) {
            for (t, round) in sg.rounds.iter().enumerate() {
                let phase = usize::from(t > 0);
                for (s, (&a, &sig)) in round.actions.iter().zip(&round.signals).enumerate() {
                    let c = self.clusters.entry((session, s as u32)).or_default();
                    c.decisions[phase] += 1;
                    c.coop[phase] += u64::from(a == Action::Cooperate);
                    c.success[phase] += u64::from(sig == Signal::Success);
                }
            }
        }
    }

    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Rate and clustered standard error for one measure, or `None` when the
    /// measure has no decisions.
    ///
    /// `se² = G/(G−1) · Σ_g (y_g − r·n_g)² / n²` over clusters `g` with
    /// `y_g` successes in `n_g` decisions.
    pub fn rate(&self, measure: Measure) -> Option<Rate> {
        let (phase, pick): (usize, fn(&Counts, usize) -> u64) = match measure {
            Measure::InitialCoop => (0, |c, p| c.coop[p]),
            Measure::OngoingCoop => (1, |c, p| c.coop[p]),
            Measure::InitialSuccess => (0, |c, p| c.success[p]),
            Measure::OngoingSuccess => (1, |c, p| c.success[p]),
        };
        let mut hits = 0u64;
        let mut total = 0u64;
        let mut groups = 0usize;
        for c in self.clusters.values() {
            if c.decisions[phase] > 0 {
                hits += pick(c, phase);
                total += c.decisions[phase];
                groups += 1;
            }
        }
        if total == 0 {
            return None;
        }
        let rate = hits as f64 / total as f64;
        let se = if groups < 2 {
            f64::NAN
        } else {
            let ss: f64 = self
                .clusters
                .values()
                .filter(|c| c.decisions[phase] > 0)
                .map(|c| {
                    let resid = pick(c, phase) as f64 - rate * c.decisions[phase] as f64;
                    resid * resid
                })
                .sum();
            let g = groups as f64;
            (g / (g - 1.0) * ss).sqrt() / total as f64
        };
        Some(Rate { rate, se })
    }

    pub fn stats(&self, window: MetricWindow) -> Result<CoopStats> {
        let initial_coop = self
            .rate(Measure::InitialCoop)
            .ok_or_else(|| Error::EmptyWindow(format!("no supergames in window {window}")))?;
        let n_initial: u64 = self.clusters.values().map(|c| c.decisions[0]).sum();
        let n_ongoing: u64 = self.clusters.values().map(|c| c.decisions[1]).sum();
        Ok(CoopStats {
            window,
            initial_coop,
            ongoing_coop: self.rate(Measure::OngoingCoop),
            initial_success: self.rate(Measure::InitialSuccess).map_or(0.0, |r| r.rate),
            ongoing_success: self.rate(Measure::OngoingSuccess).map(|r| r.rate),
            n_subjects: self.clusters.len(),
            n_decisions: (n_initial + n_ongoing) as usize,
            n_initial: n_initial as usize,
            n_ongoing: n_ongoing as usize,
        })
    }
}

/// Summary rates over `window` for a single session.
pub fn compute_stats(record: &SessionRecord, window: MetricWindow) -> Result<CoopStats> {
    let mut acc = StatsAccumulator::new();
    acc.add(record, window);
    acc.stats(window)
}

impl CoopStats {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("stats serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};
    use crate::game::{Money, Treatment};
    use crate::simulator::{run_session, PlayMode, SessionConfig};

    fn config(n: u32, p: f64, subjects: u32, seed: u64) -> SessionConfig {
        let t = Treatment::new(n, int(1), ratio(3, 4), Money::dollars(11), Money::dollars(9)).unwrap();
        SessionConfig::new(t, subjects, PlayMode::static_mixture(p).unwrap(), seed)
    }

    #[test]
    fn expected_success_values() {
        assert!((expected_success(0.503, 2).unwrap() - 0.503).abs() < 1e-15);
        assert!((expected_success(0.792, 4).unwrap() - 0.497).abs() < 5e-4);
        // 0.035³ = 4.2875e-5; the reference figure 4.2e-5 is truncated.
        assert!((expected_success(0.035, 4).unwrap() - 4.2e-5).abs() < 1e-6);
        assert_eq!(expected_success(1.0, 7).unwrap(), 1.0);
        assert!(expected_success(1.2, 2).is_err());
    }

    #[test]
    fn all_grim_rates_are_one() {
        let cfg = config(4, 1.0, 40, 1);
        let rec = run_session(&cfg).unwrap();
        let s = compute_stats(&rec, cfg.metric_window).unwrap();
        assert_eq!(s.initial_coop.rate, 1.0);
        assert_eq!(s.ongoing_coop.map(|r| r.rate), Some(1.0));
        assert_eq!(s.initial_success, 1.0);
        assert_eq!(s.ongoing_success, Some(1.0));
        assert_eq!(s.initial_coop.se, 0.0);
    }

    #[test]
    fn single_round_supergames_have_no_ongoing_rates() {
        let cfg = config(2, 0.5, 20, 2).with_schedule(vec![1; 20]);
        let rec = run_session(&cfg).unwrap();
        let s = compute_stats(&rec, cfg.metric_window).unwrap();
        assert!(s.ongoing_coop.is_none());
        assert!(s.ongoing_success.is_none());
        assert_eq!(s.n_ongoing, 0);
    }

    #[test]
    fn window_outside_record_is_empty() {
        let cfg = config(2, 0.5, 20, 3).with_supergames(4);
        let rec = run_session(&cfg).unwrap();
        let err = compute_stats(&rec, MetricWindow::new(10, 12).unwrap()).unwrap_err();
        assert!(matches!(err, Error::EmptyWindow(_)));
    }

    #[test]
    fn two_player_success_equals_partner_cooperation() {
        let cfg = config(2, 0.503, 2000, 4);
        let rec = run_session(&cfg).unwrap();
        let s = compute_stats(&rec, cfg.metric_window).unwrap();
        // With pairs, success is the partner's cooperation: same population rate.
        assert!((s.initial_success - s.initial_coop.rate).abs() < 1e-12);
        assert!((s.initial_success - 0.503).abs() < 3.0 * s.initial_coop.se);
    }

    #[test]
    fn clustered_se_matches_hand_computation() {
        let cfg = config(2, 0.5, 4, 5).with_supergames(3);
        let rec = run_session(&cfg).unwrap();
        let s = compute_stats(&rec, MetricWindow::all(3)).unwrap();
        let mut per_subject = [(0.0f64, 0.0f64); 4];
        for sg in &rec.supergames {
            for (subject, a) in sg.rounds[0].actions.iter().enumerate() {
                per_subject[subject].0 += f64::from(u8::from(*a == Action::Cooperate));
                per_subject[subject].1 += 1.0;
            }
        }
        let total: f64 = per_subject.iter().map(|p| p.1).sum();
        let rate = per_subject.iter().map(|p| p.0).sum::<f64>() / total;
        let ss: f64 = per_subject.iter().map(|p| (p.0 - rate * p.1).powi(2)).sum();
        let se = (4.0 / 3.0 * ss).sqrt() / total;
        assert!((s.initial_coop.rate - rate).abs() < 1e-15);
        assert!((s.initial_coop.se - se).abs() < 1e-15);
    }
}
