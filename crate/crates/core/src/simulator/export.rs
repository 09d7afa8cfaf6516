use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::engine::SessionRecord;
use super::stats::CoopStats;
use super::{MetricWindow, SessionConfig};
use crate::basin::BasinReport;
use crate::error::{Error, Result};
use crate::estimation::Observation;
use crate::game::Action;

pub const SESSION_CSV_HEADER: &str =
    "session_id,treatment_label,supergame,round,subject,group,strategy,action,signal";

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

impl SessionRecord {
    /// One row per subject per round, ordered by supergame, round, subject.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{SESSION_CSV_HEADER}")?;
        let session = csv_field(&self.config.session_id);
        for sg in &self.supergames {
            let label = csv_field(&sg.treatment_label);
            for (t, round) in sg.rounds.iter().enumerate() {
                for (s, (action, signal)) in round.actions.iter().zip(&round.signals).enumerate() {
                    writeln!(
                        out,
                        "{session},{label},{},{},{s},{},{},{action},{signal}",
                        sg.index,
                        t + 1,
                        sg.group_of[s],
                        sg.strategies[s],
                    )?;
                }
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }

    pub fn sidecar(&self) -> SessionSidecar {
        SessionSidecar {
            session_id: self.config.session_id.clone(),
            seed: self.config.seed,
            lengths: self.lengths(),
            config: self.config.clone(),
            manifest: None,
        }
    }
}

/// JSON companion of the session CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionSidecar {
    pub session_id: String,
    pub seed: u64,
    pub lengths: Vec<u32>,
    pub config: SessionConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<serde_json::Value>,
}

/// Reads the supergame lengths out of a sidecar, for matched-length runs.
pub fn lengths_from_sidecar(json: &str) -> Result<Vec<u32>> {
    #[derive(Deserialize)]
    struct Lengths {
        lengths: Vec<u32>,
    }
    serde_json::from_str::<Lengths>(json)
        .map(|l| l.lengths)
        .map_err(|e| Error::Parse(format!("session sidecar: {e}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Round 1 of each supergame.
    Initial,
    /// Rounds 2 and later.
    Ongoing,
}

/// Individual cooperation decisions in `window` as estimation observations,
/// clustered by subject and tagged with the independent basin size of the
/// treatment each supergame was played under.
pub fn observations(record: &SessionRecord, window: MetricWindow, phase: Phase) -> Vec<Observation> {
    let mut out = Vec::new();
    for sg in record.supergames.iter().filter(|sg| window.contains(sg.index)) {
        let p_star = BasinReport::new(record.config.treatment_for(sg.index)).p_star_ind;
        for (t, round) in sg.rounds.iter().enumerate() {
            if (t == 0) != (phase == Phase::Initial) {
                continue;
            }
            for (s, &a) in round.actions.iter().enumerate() {
                out.push(Observation {
                    cooperated: a == Action::Cooperate,
                    p_star,
                    cluster_id: format!("{}:{s}", record.config.session_id),
                    weight: 1.0,
                });
            }
        }
    }
    out
}

fn fmt_rate(rate: f64, se: Option<f64>) -> String {
    match se {
        Some(se) if se.is_finite() => format!("{rate:.3} ({se:.3})"),
        _ => format!("{rate:.3}"),
    }
}

/// Aligned text table with one column per labelled stats block: initial and
/// ongoing cooperation (with clustered standard errors) over initial and
/// ongoing success rates.
pub fn render_panel_a(columns: &[(String, CoopStats)]) -> String {
    let na = || "n/a".to_string();
    let rows: Vec<(&str, Vec<String>)> = vec![
        (
            "Initial coop.",
            columns.iter().map(|(_, s)| fmt_rate(s.initial_coop.rate, Some(s.initial_coop.se))).collect(),
        ),
        (
            "Ongoing coop.",
            columns
                .iter()
                .map(|(_, s)| s.ongoing_coop.map_or_else(na, |r| fmt_rate(r.rate, Some(r.se))))
                .collect(),
        ),
        (
            "Initial success",
            columns.iter().map(|(_, s)| fmt_rate(s.initial_success, None)).collect(),
        ),
        (
            "Ongoing success",
            columns
                .iter()
                .map(|(_, s)| s.ongoing_success.map_or_else(na, |r| fmt_rate(r, None)))
                .collect(),
        ),
    ];
    let label_width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
    let widths: Vec<usize> = columns
        .iter()
        .enumerate()
        .map(|(i, (name, _))| rows.iter().map(|(_, v)| v[i].len()).max().unwrap_or(0).max(name.len()))
        .collect();
    let mut out = String::new();
    out.push_str(&format!("{:<label_width$}", "Panel A. Action and signal rates"));
    out.push('\n');
    out.push_str(&" ".repeat(label_width));
    for ((name, _), w) in columns.iter().zip(&widths) {
        out.push_str(&format!("  {name:>w$}"));
    }
    out.push('\n');
    for (label, values) in &rows {
        out.push_str(&format!("{label:<label_width$}"));
        for (v, w) in values.iter().zip(&widths) {
            out.push_str(&format!("  {v:>w$}"));
        }
        out.push('\n');
    }
    if let Some((_, first)) = columns.first() {
        out.push_str(&format!(
            "Supergames {}; standard errors clustered by subject.\n",
            first.window
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};
    use crate::game::{Money, Treatment};
    use crate::simulator::{compute_stats, run_session, PlayMode};

    fn record(seed: u64) -> SessionRecord {
        let t = Treatment::new(4, int(1), ratio(3, 4), Money::dollars(11), Money::dollars(9))
            .unwrap()
            .with_label("N=4, X=$9");
        let cfg = SessionConfig::new(t, 8, PlayMode::static_mixture(0.5).unwrap(), seed).with_supergames(3);
        run_session(&cfg).unwrap()
    }

    #[test]
    fn csv_layout() {
        let rec = record(1);
        let csv = rec.to_csv_string();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(SESSION_CSV_HEADER));
        let rows: usize = rec.supergames.iter().map(|s| s.length as usize * 8).sum();
        assert_eq!(csv.lines().count(), rows + 1);
        let first = lines.next().unwrap();
        assert!(first.starts_with("session-1,\"N=4, X=$9\",1,1,0,"), "{first}");
        assert_eq!(first.split(',').count(), 10); // quoted label holds one comma
    }

    #[test]
    fn csv_is_deterministic() {
        assert_eq!(record(5).to_csv_string(), record(5).to_csv_string());
        assert_ne!(record(5).to_csv_string(), record(6).to_csv_string());
    }

    #[test]
    fn sidecar_round_trips_lengths() {
        let rec = record(2);
        let json = serde_json::to_string(&rec.sidecar()).unwrap();
        assert_eq!(lengths_from_sidecar(&json).unwrap(), rec.lengths());
        let back: SessionSidecar = serde_json::from_str(&json).unwrap();
        assert_eq!(back.config, rec.config);
    }

    #[test]
    fn observations_follow_phase() {
        let rec = record(3);
        let window = MetricWindow::all(3);
        let initial = observations(&rec, window, Phase::Initial);
        assert_eq!(initial.len(), 3 * 8);
        let ongoing = observations(&rec, window, Phase::Ongoing);
        let expected: usize = rec.supergames.iter().map(|s| (s.length as usize - 1) * 8).sum();
        assert_eq!(ongoing.len(), expected);
        let p = 3f64.powf(-1.0 / 3.0);
        assert!(initial.iter().all(|o| (o.p_star - p).abs() < 1e-12 && o.cluster_id.starts_with("session-3:")));
    }

    #[test]
    fn panel_a_layout() {
        let rec = record(4);
        let stats = compute_stats(&rec, MetricWindow::all(3)).unwrap();
        let table = render_panel_a(&[("N=4,X=$9".into(), stats.clone()), ("copy".into(), stats)]);
        let lines: Vec<&str> = table.lines().collect();
        assert!(lines[2].starts_with("Initial coop."));
        assert!(lines[3].starts_with("Ongoing coop."));
        assert!(lines[4].starts_with("Initial success"));
        assert!(lines[5].starts_with("Ongoing success"));
        assert_eq!(lines[2].len(), lines[3].len());
    }
}
