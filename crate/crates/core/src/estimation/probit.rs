//! Binary probit by damped Newton ascent with cluster-robust covariance.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::normal;
use crate::error::{Error, Result};
use crate::sum::Sum;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbitOptions {
    /// Multiply the sandwich by `G/(G−1)`.
    pub small_sample_correction: bool,
    /// Convergence threshold on the gradient max-norm.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Largest allowed `|β_j|·sd(x_j)` before the data are declared separated.
    pub separation_bound: f64,
}

impl Default for ProbitOptions {
    fn default() -> Self {
        Self {
            small_sample_correction: true,
            tolerance: 1e-10,
            max_iterations: 200,
            separation_bound: 50.0,
        }
    }
}

/// Design matrix, outcomes, weights and cluster labels.
#[derive(Clone, Debug, Default)]
pub struct ProbitDesign {
    names: Vec<String>,
    rows: Vec<f64>,
    outcomes: Vec<bool>,
    weights: Vec<f64>,
    clusters: Vec<usize>,
    cluster_index: HashMap<String, usize>,
}

impl ProbitDesign {
    /// An empty design with the given coefficient names. Rows must include
    /// the intercept column themselves if one is wanted.
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        Self {
            names: names.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: &[f64], outcome: bool, weight: f64, cluster: &str) -> Result<()> {
        if row.len() != self.names.len() {
            return Err(Error::invalid(
                "row",
                format!("expected {} covariates, got {}", self.names.len(), row.len()),
            ));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("row", "covariates must be finite"));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::invalid("weight", format!("must be positive, got {weight}")));
        }
        let next = self.cluster_index.len();
        let c = *self.cluster_index.entry(cluster.to_string()).or_insert(next);
        self.rows.extend_from_slice(row);
        self.outcomes.push(outcome);
        self.weights.push(weight);
        self.clusters.push(c);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn n_clusters(&self) -> usize {
        self.cluster_index.len()
    }

    fn k(&self) -> usize {
        self.names.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        let k = self.k();
        &self.rows[i * k..(i + 1) * k]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbitFit {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    /// Cluster-robust sandwich covariance.
    pub vcov: Vec<Vec<f64>>,
    /// Inverse of the negative Hessian at the optimum.
    pub vcov_model: Vec<Vec<f64>>,
    pub log_likelihood: f64,
    pub n_obs: usize,
    pub n_clusters: usize,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub small_sample_correction: bool,
    /// Log-likelihood after each accepted step, starting value first.
    pub trace: Vec<f64>,
}

impl ProbitFit {
    pub fn std_errors(&self) -> Vec<f64> {
        (0..self.coefficients.len()).map(|j| self.vcov[j][j].sqrt()).collect()
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|j| self.coefficients[j])
    }

    /// Linear index `xᵀβ` and its delta-method variance `xᵀVx`.
    pub fn index(&self, x: &[f64]) -> (f64, f64) {
        let eta = x.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum();
        (eta, quad_form(&self.vcov, x))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("fit serializes")
    }
}

pub(crate) fn quad_form(m: &[Vec<f64>], x: &[f64]) -> f64 {
    let mut s = 0.0;
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            s += x[i] * v * x[j];
        }
    }
    s
}

struct Eval {
    ll: f64,
    grad: DVector<f64>,
    info: DMatrix<f64>,
}

fn evaluate(d: &ProbitDesign, beta: &DVector<f64>) -> Eval {
    let k = d.k();
    let mut ll = Sum::default();
    let mut grad = vec![Sum::default(); k];
    let mut info = vec![Sum::default(); k * k];
    for i in 0..d.len() {
        let x = d.row(i);
        let w = d.weights[i];
        let q = if d.outcomes[i] { 1.0 } else { -1.0 };
        let eta: f64 = x.iter().zip(beta.iter()).map(|(a, b)| a * b).sum();
        let qe = q * eta;
        ll.add(w * normal::ln_cdf(qe));
        let lambda = normal::mills(qe);
        let s = w * q * lambda;
        let h = w * lambda * (lambda + qe);
        for a in 0..k {
            grad[a].add(s * x[a]);
            for b in 0..=a {
                info[a * k + b].add(h * x[a] * x[b]);
            }
        }
    }
    let mut m = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..=a {
            let v = info[a * k + b].value();
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    Eval {
        ll: ll.value(),
        grad: DVector::from_iterator(k, grad.iter().map(Sum::value)),
        info: m,
    }
}

fn max_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn weighted_sd(d: &ProbitDesign, j: usize) -> f64 {
    let mut w = Sum::default();
    let mut m = Sum::default();
    for i in 0..d.len() {
        w.add(d.weights[i]);
        m.add(d.weights[i] * d.row(i)[j]);
    }
    let mean = m.value() / w.value();
    let mut v = Sum::default();
    for i in 0..d.len() {
        let r = d.row(i)[j] - mean;
        v.add(d.weights[i] * r * r);
    }
    (v.value() / w.value()).sqrt()
}

fn invert(info: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    info.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::invalid("design", "information matrix is singular; covariates are collinear"))
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Maximum-likelihood probit fit.
///
/// The first column is assumed to be the intercept for the starting value
/// `β = (Φ⁻¹(ȳ), 0, …)`. Each Newton step is halved until the
/// log-likelihood does not fall (up to rounding of the compensated sum).
pub fn fit_probit(design: &ProbitDesign, options: &ProbitOptions) -> Result<ProbitFit> {
    let k = design.k();
    let n = design.len();
    if k == 0 {
        return Err(Error::invalid("design", "no covariates"));
    }
    if n < k.max(3) {
        return Err(Error::invalid("data", format!("need at least {} observations, got {n}", k.max(3))));
    }
    let groups = design.n_clusters();
    if groups < 2 {
        return Err(Error::TooFewClusters { found: groups });
    }
    let total: f64 = design.weights.iter().sum();
    let ones: f64 = design
        .weights
        .iter()
        .zip(&design.outcomes)
        .filter(|(_, &y)| y)
        .map(|(w, _)| w)
        .sum();
    if ones == 0.0 || ones == total {
        return Err(Error::Separation("every outcome takes the same value".into()));
    }
    let scales: Vec<f64> = (0..k)
        .map(|j| {
            let sd = weighted_sd(design, j);
            if sd > 0.0 {
                sd
            } else {
                1.0
            }
        })
        .collect();

    let mut beta = DVector::zeros(k);
    beta[0] = normal::inv_cdf(ones / total);
    let mut current = evaluate(design, &beta);
    let mut trace = vec![current.ll];
    let mut iterations = 0;
    let mut converged = false;
    while iterations <= options.max_iterations {
        if max_norm(&current.grad) < options.tolerance {
            converged = true;
            break;
        }
        if iterations == options.max_iterations {
            break;
        }
        iterations += 1;
        let step = current
            .info
            .clone()
            .cholesky()
            .ok_or_else(|| Error::invalid("design", "information matrix is singular; covariates are collinear"))?
            .solve(&current.grad);
        let noise = 16.0 * f64::EPSILON * current.ll.abs();
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let candidate = &beta + &step * t;
            let eval = evaluate(design, &candidate);
            if eval.ll.is_finite() && eval.ll >= current.ll - noise {
                accepted = Some((candidate, eval));
                break;
            }
            t *= 0.5;
        }
        let Some((b, eval)) = accepted else {
            return Err(Error::NotConverged {
                iterations,
                gradient_norm: max_norm(&current.grad),
            });
        };
        beta = b;
        current = eval;
        trace.push(current.ll);
        if let Some(j) = (0..k).find(|&j| (beta[j] * scales[j]).abs() > options.separation_bound) {
            return Err(Error::Separation(format!(
                "coefficient `{}` diverged past {} on the standardized scale",
                design.names[j], options.separation_bound
            )));
        }
    }
    if !converged {
        return Err(Error::NotConverged {
            iterations,
            gradient_norm: max_norm(&current.grad),
        });
    }

    let bread = invert(&current.info)?;
    let mut cluster_scores = vec![vec![Sum::default(); k]; groups];
    for i in 0..n {
        let x = design.row(i);
        let q = if design.outcomes[i] { 1.0 } else { -1.0 };
        let eta: f64 = x.iter().zip(beta.iter()).map(|(a, b)| a * b).sum();
        let s = design.weights[i] * q * normal::mills(q * eta);
        for (acc, xa) in cluster_scores[design.clusters[i]].iter_mut().zip(x) {
            acc.add(s * xa);
        }
    }
    let mut meat = DMatrix::zeros(k, k);
    for u in &cluster_scores {
        let u = DVector::from_iterator(k, u.iter().map(Sum::value));
        meat += &u * u.transpose();
    }
    let mut vcov = &bread * meat * &bread;
    if options.small_sample_correction {
        vcov *= groups as f64 / (groups as f64 - 1.0);
    }
    vcov = (&vcov + vcov.transpose()) * 0.5;

    Ok(ProbitFit {
        names: design.names.clone(),
        coefficients: beta.iter().copied().collect(),
        vcov: to_rows(&vcov),
        vcov_model: to_rows(&bread),
        log_likelihood: current.ll,
        n_obs: n,
        n_clusters: groups,
        converged,
        iterations,
        gradient_norm: max_norm(&current.grad),
        small_sample_correction: options.small_sample_correction,
        trace,
    })
}
