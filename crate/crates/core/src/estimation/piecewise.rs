//! Probit of cooperation on basin size with a kink at the risk-dominance
//! point `p⋆ = ½`.
//!
//! The index is `η = β0 + β1·z1 + β2·z2` with `z1 = min(p⋆, ½)` and
//! `z2 = max(p⋆ − ½, 0)`, so `β1` is the slope below the knot, `β2` the
//! slope above it, and the index is continuous at ½ by construction.

use serde::{Deserialize, Serialize};

use super::normal;
use super::probit::{fit_probit, ProbitDesign, ProbitFit, ProbitOptions};
use crate::error::{Error, Result};

pub const KNOT: f64 = 0.5;
pub const PIECEWISE_NAMES: [&str; 3] = ["const", "below_knot", "above_knot"];

/// One cooperation decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub cooperated: bool,
    /// Basin size of the decision's treatment, in (0, 1].
    pub p_star: f64,
    pub cluster_id: String,
    #[serde(default = "one")]
    pub weight: f64,
}

fn one() -> f64 {
    1.0
}

impl Observation {
    pub fn new(cooperated: bool, p_star: f64, cluster_id: impl Into<String>) -> Self {
        Self {
            cooperated,
            p_star,
            cluster_id: cluster_id.into(),
            weight: 1.0,
        }
    }
}

fn check_p_star(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("p_star", format!("must lie in (0, 1], got {p}")))
    }
}

/// `(min(p⋆, ½), max(p⋆ − ½, 0))`.
pub fn basin_covariates(p_star: f64) -> Result<(f64, f64)> {
    check_p_star(p_star)?;
    Ok((p_star.min(KNOT), (p_star - KNOT).max(0.0)))
}

pub fn fit_piecewise_probit(data: &[Observation]) -> Result<ProbitFit> {
    fit_piecewise_probit_with(data, &ProbitOptions::default())
}

pub fn fit_piecewise_probit_with(data: &[Observation], options: &ProbitOptions) -> Result<ProbitFit> {
    let mut design = ProbitDesign::new(PIECEWISE_NAMES);
    for obs in data {
        let (z1, z2) = basin_covariates(obs.p_star)?;
        design.push(&[1.0, z1, z2], obs.cooperated, obs.weight, &obs.cluster_id)?;
    }
    fit_probit(&design, options)
}

/// Predicted cooperation rate with a delta-method standard error and a 95%
/// band computed on the index scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub p_star: f64,
    pub index: f64,
    pub rate: f64,
    pub se: f64,
    pub lower: f64,
    pub upper: f64,
}

const Z_95: f64 = 1.959_963_984_540_054;

pub fn predict_rate(fit: &ProbitFit, p_star: f64) -> Result<Prediction> {
    if !fit.converged {
        return Err(Error::NotConverged {
            iterations: fit.iterations,
            gradient_norm: fit.gradient_norm,
        });
    }
    if fit.names != PIECEWISE_NAMES {
        return Err(Error::invalid("fit", "not a piecewise basin probit"));
    }
    let (z1, z2) = basin_covariates(p_star)?;
    let (eta, var) = fit.index(&[1.0, z1, z2]);
    let sd = var.max(0.0).sqrt();
    Ok(Prediction {
        p_star,
        index: eta,
        rate: normal::cdf(eta),
        se: normal::pdf(eta) * sd,
        lower: normal::cdf(eta - Z_95 * sd),
        upper: normal::cdf(eta + Z_95 * sd),
    })
}

/// Predictions on the grid `p⋆ = i/points`, `i = 1..=points`.
pub fn curve(fit: &ProbitFit, points: usize) -> Result<Vec<Prediction>> {
    if points == 0 {
        return Err(Error::invalid("points", "need at least one grid point"));
    }
    (1..=points).map(|i| predict_rate(fit, i as f64 / points as f64)).collect()
}

/// Ongoing cooperation implied by initial cooperation `p` when cooperation
/// survives round 1 only in fully cooperative groups: `p^N`.
pub fn ongoing_from_initial(p_init: f64, players: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_init) {
        return Err(Error::invalid("p_init", format!("must lie in [0, 1], got {p_init}")));
    }
    if players < 2 {
        return Err(Error::invalid("players", "need at least 2"));
    }
    Ok(p_init.powi(players as i32))
}
