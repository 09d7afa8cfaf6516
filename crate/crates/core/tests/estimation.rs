use coopbasin::estimation::normal::{cdf, pdf};
use coopbasin::estimation::{
    basin_covariates, fit_piecewise_probit, fit_piecewise_probit_with, fit_probit, ongoing_from_initial, Observation,
    ProbitDesign, ProbitOptions,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn synthetic(beta: [f64; 3], n: usize, clusters: usize, seed: u64) -> Vec<Observation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let p: f64 = rng.random_range(0.02..1.0);
            let eta = beta[0] + beta[1] * p.min(0.5) + beta[2] * (p - 0.5).max(0.0);
            let y = rng.random::<f64>() < cdf(eta);
            Observation::new(y, p, format!("g{}", i % clusters))
        })
        .collect()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn reparameterization_identity() {
    let data = synthetic([0.8, -2.0, -0.7], 4000, 40, 1);
    let fit = fit_piecewise_probit(&data).unwrap();

    // min(p, ½) = p − max(p − ½, 0), so (z1, z2) ↦ (p, z2) maps β to (β0, β1, β2 − β1).
    let mut design = ProbitDesign::new(["const", "p_star", "above_knot"]);
    for o in &data {
        let (_, z2) = basin_covariates(o.p_star).unwrap();
        design.push(&[1.0, o.p_star, z2], o.cooperated, 1.0, &o.cluster_id).unwrap();
    }
    let alt = fit_probit(&design, &ProbitOptions::default()).unwrap();
    let b = &fit.coefficients;
    let mapped = [b[0], b[1], b[2] - b[1]];
    for (got, want) in alt.coefficients.iter().zip(mapped) {
        assert!((got - want).abs() <= 1e-8, "{got} vs {want}");
    }
    assert!(rel_close(alt.log_likelihood, fit.log_likelihood, 1e-12));
}

/// Observed-information inverse, computed directly from the probit
/// second derivatives.
fn inverse_hessian(data: &[Observation], beta: &[f64]) -> DMatrix<f64> {
    let mut h = DMatrix::<f64>::zeros(3, 3);
    for o in data {
        let (z1, z2) = basin_covariates(o.p_star).unwrap();
        let x = DVector::from_vec(vec![1.0, z1, z2]);
        let eta = beta[0] + beta[1] * z1 + beta[2] * z2;
        let q = if o.cooperated { 1.0 } else { -1.0 };
        let lambda = pdf(q * eta) / cdf(q * eta);
        h += lambda * (lambda + q * eta) * &x * x.transpose();
    }
    h.try_inverse().unwrap()
}

#[test]
fn model_covariance_is_the_inverse_hessian() {
    let data = synthetic([0.5, -1.5, -0.5], 3000, 3000, 2);
    let options = ProbitOptions {
        small_sample_correction: false,
        ..ProbitOptions::default()
    };
    let fit = fit_piecewise_probit_with(&data, &options).unwrap();
    let inv = inverse_hessian(&data, &fit.coefficients);
    for a in 0..3 {
        for b in 0..3 {
            assert!(rel_close(fit.vcov_model[a][b], inv[(a, b)], 1e-8), "({a},{b})");
        }
    }
}

#[test]
fn singleton_clusters_give_the_outer_product_sandwich() {
    let data = synthetic([0.5, -1.5, -0.5], 3000, 3000, 3);
    let options = ProbitOptions {
        small_sample_correction: false,
        ..ProbitOptions::default()
    };
    let fit = fit_piecewise_probit_with(&data, &options).unwrap();
    let beta = &fit.coefficients;
    let mut meat = DMatrix::<f64>::zeros(3, 3);
    for o in &data {
        let (z1, z2) = basin_covariates(o.p_star).unwrap();
        let x = DVector::from_vec(vec![1.0, z1, z2]);
        let q = if o.cooperated { 1.0 } else { -1.0 };
        let eta = beta[0] + beta[1] * z1 + beta[2] * z2;
        let s = q * pdf(q * eta) / cdf(q * eta);
        meat += s * s * &x * x.transpose();
    }
    let bread = inverse_hessian(&data, beta);
    let sandwich = &bread * meat * &bread;
    for a in 0..3 {
        for b in 0..3 {
            assert!(rel_close(fit.vcov[a][b], sandwich[(a, b)], 1e-8), "({a},{b})");
        }
    }
    // Under a correct model the two agree only in expectation.
    for a in 0..3 {
        let ratio = fit.vcov[a][a] / fit.vcov_model[a][a];
        assert!((0.8..1.25).contains(&ratio), "variance ratio {ratio}");
    }
}

#[test]
fn null_effect_is_not_detected() {
    for seed in 10..15 {
        let data = synthetic([0.3, 0.0, 0.0], 4000, 40, seed);
        let fit = fit_piecewise_probit(&data).unwrap();
        let se = fit.std_errors();
        for (j, (b, s)) in fit.coefficients.iter().zip(&se).enumerate().skip(1) {
            assert!(b.abs() < 3.0 * s, "seed {seed}, coefficient {j}");
        }
    }
}

#[test]
fn ongoing_law_for_pairs_is_squaring() {
    for i in 0..=100 {
        let p = f64::from(i) / 100.0;
        assert_eq!(ongoing_from_initial(p, 2).unwrap(), p * p);
    }
}
