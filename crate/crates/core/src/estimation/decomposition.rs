//! Two-dummy probit over a 2×2 basin design.
//!
//! One dummy marks the cells where the correlated basin falls (low cost),
//! the other the cells where the independent basin rises (the larger group
//! within each cost level). The reported quantities are the predicted rate
//! with both dummies off and the discrete change from switching each dummy
//! on alone.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::normal;
use super::probit::{fit_probit, quad_form, ProbitDesign, ProbitFit, ProbitOptions};
use crate::basin::{basin_corr, basin_ind};
use crate::error::{Error, Result};
use crate::simulator::Rate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DesignCell {
    pub corr_decrease: bool,
    pub ind_increase: bool,
}

impl DesignCell {
    pub const ALL: [DesignCell; 4] = [
        DesignCell::new(false, false),
        DesignCell::new(false, true),
        DesignCell::new(true, false),
        DesignCell::new(true, true),
    ];

    pub const fn new(corr_decrease: bool, ind_increase: bool) -> Self {
        Self {
            corr_decrease,
            ind_increase,
        }
    }
}

impl fmt::Display for DesignCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "corr_decrease={},ind_increase={}",
            u8::from(self.corr_decrease),
            u8::from(self.ind_increase)
        )
    }
}

/// A cooperation decision tagged with its design cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellObservation {
    pub cooperated: bool,
    pub cell: DesignCell,
    pub cluster_id: String,
    pub weight: f64,
}

impl CellObservation {
    pub fn new(cooperated: bool, cell: DesignCell, cluster_id: impl Into<String>) -> Self {
        Self {
            cooperated,
            cell,
            cluster_id: cluster_id.into(),
            weight: 1.0,
        }
    }
}

pub const DUMMY_NAMES: [&str; 3] = ["const", "ind_increase", "corr_decrease"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DummyDecomposition {
    /// `Φ(β0)`.
    pub baseline: Rate,
    /// `Φ(β0 + β_ind) − Φ(β0)`.
    pub effect_ind_increase: Rate,
    /// `Φ(β0 + β_corr) − Φ(β0)`.
    pub effect_corr_decrease: Rate,
    pub fit: ProbitFit,
}

pub fn dummy_decomposition(data: &[CellObservation]) -> Result<DummyDecomposition> {
    dummy_decomposition_with(data, &ProbitOptions::default())
}

pub fn dummy_decomposition_with(data: &[CellObservation], options: &ProbitOptions) -> Result<DummyDecomposition> {
    for cell in DesignCell::ALL {
        if !data.iter().any(|o| o.cell == cell) {
            return Err(Error::MissingCell(cell.to_string()));
        }
    }
    let mut design = ProbitDesign::new(DUMMY_NAMES);
    for o in data {
        let row = [1.0, f64::from(u8::from(o.cell.ind_increase)), f64::from(u8::from(o.cell.corr_decrease))];
        design.push(&row, o.cooperated, o.weight, &o.cluster_id)?;
    }
    let fit = fit_probit(&design, options)?;
    let b = &fit.coefficients;
    let baseline = Rate {
        rate: normal::cdf(b[0]),
        se: normal::pdf(b[0]) * fit.vcov[0][0].max(0.0).sqrt(),
    };
    let effect = |j: usize| {
        let on = b[0] + b[j];
        let mut grad = [normal::pdf(on) - normal::pdf(b[0]), 0.0, 0.0];
        grad[j] = normal::pdf(on);
        Rate {
            rate: normal::cdf(on) - normal::cdf(b[0]),
            se: quad_form(&fit.vcov, &grad).max(0.0).sqrt(),
        }
    };
    Ok(DummyDecomposition {
        baseline,
        effect_ind_increase: effect(1),
        effect_corr_decrease: effect(2),
        fit,
    })
}

/// Basin sizes printed in the column headers of the decomposition table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PanelBHeader {
    pub baseline: f64,
    pub ind_increase_to: f64,
    pub corr_decrease_to: f64,
}

impl PanelBHeader {
    /// Headers for a 2×2 design with costs `x_high > x_low`, group sizes
    /// `n_small < n_large` (at the high cost) and continuation `delta`.
    pub fn from_design(x_high: f64, x_low: f64, n_small: u32, n_large: u32, delta: f64) -> Result<Self> {
        Ok(Self {
            baseline: basin_ind(x_high, n_small, delta)?,
            ind_increase_to: basin_ind(x_high, n_large, delta)?,
            corr_decrease_to: basin_corr(x_low, delta)?,
        })
    }

    /// The four treatments `x ∈ {1, 1/9}`, `N ∈ {2, 4}` / `{4, 10}`, `δ = ¾`.
    pub fn reference() -> Self {
        Self::from_design(1.0, 1.0 / 9.0, 2, 4, 0.75).expect("reference design is valid")
    }
}

fn est(r: &Rate, signed: bool) -> String {
    if signed {
        format!("{:+.3} ({:.3})", r.rate, r.se)
    } else {
        format!("{:.3} ({:.3})", r.rate, r.se)
    }
}

/// Text table with one row per outcome (e.g. initial and ongoing
/// cooperation): the baseline level, then the two marginal effects.
pub fn render_panel_b(header: &PanelBHeader, rows: &[(String, DummyDecomposition)]) -> String {
    let cols = [
        format!("p0=[{:.2}]", header.baseline),
        format!("Ind. basin increase to [{:.2}]", header.ind_increase_to),
        format!("Corr. basin decrease to [{:.2}]", header.corr_decrease_to),
    ];
    let cells: Vec<[String; 3]> = rows
        .iter()
        .map(|(_, d)| {
            [
                est(&d.baseline, false),
                est(&d.effect_ind_increase, true),
                est(&d.effect_corr_decrease, true),
            ]
        })
        .collect();
    let label_width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(13);
    let widths: Vec<usize> = (0..3)
        .map(|j| cells.iter().map(|c| c[j].len()).max().unwrap_or(0).max(cols[j].len()))
        .collect();
    let mut out = String::from("Panel B. Cooperation decomposition\n");
    out.push_str(&format!("{:label_width$}", ""));
    out.push_str(&format!("  {:>w$}", "", w = widths[0]));
    out.push_str(&format!(
        "  {:^w$}\n",
        "Marginal effect from:",
        w = widths[1] + widths[2] + 2
    ));
    out.push_str(&format!("{:label_width$}", ""));
    for (c, w) in cols.iter().zip(&widths) {
        out.push_str(&format!("  {c:>w$}"));
    }
    out.push('\n');
    for ((label, _), row) in rows.iter().zip(&cells) {
        out.push_str(&format!("{label:<label_width$}"));
        for (c, w) in row.iter().zip(&widths) {
            out.push_str(&format!("  {c:>w$}"));
        }
        out.push('\n');
    }
    out.push_str("Probit marginal effects; standard errors clustered by subject.\n");
    out
}
