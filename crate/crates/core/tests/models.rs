use tmes_core::models::{
    arma_recursion, copula_couple, frechet_from_uniform, frechet_sample, garch_recursion, simulate,
    simulate_arma_frechet, simulate_garch, simulate_mma_pair, Copula, ModelKind, ModelSpec,
};
use tmes_core::oracles::mma_marginal_cdf;
use tmes_core::rng::{open_unit, substream};
use tmes_core::stats;

#[test]
fn frechet_inverse_spot_values() {
    assert_eq!(frechet_from_uniform((-1.0f64).exp(), 4.0), 1.0);
    assert_eq!(frechet_from_uniform((-1.0f64).exp(), 0.7), 1.0);
    assert!((frechet_from_uniform((-16.0f64).exp(), 4.0) - 0.5).abs() < 1e-15);
}

#[test]
fn frechet_draws_match_cdf() {
    let mut rng = substream(1, &[]);
    let xi = 4.0;
    let draws: Vec<f64> = (0..1_000_000).map(|_| frechet_sample(xi, &mut rng)).collect();
    let d = stats::ks_statistic(&draws, |x| (-x.powf(-xi)).exp());
    assert!(d < 0.002, "KS = {d}");
}

#[test]
fn mma_marginal_matches_closed_form() {
    let (xi, phi) = (4.0, 0.8);
    // Independent short paths keep the sample close to iid.
    let mut xs = Vec::new();
    for p in 0..100 {
        let ts = simulate_mma_pair(xi, phi, None, 1000, p).unwrap();
        xs.extend_from_slice(ts.x());
    }
    let d = stats::ks_statistic(&xs, |x| mma_marginal_cdf(x, xi, phi));
    assert!(d < 0.01, "KS = {d}");
}

/// Means agree at the default tail index. The sample variance at xi = 4 has
/// an infinite-variance numerator, so halves are compared at xi = 8 instead.
#[test]
fn mma_halves_look_alike() {
    let rel = |u: f64, v: f64| (u - v).abs() / u.abs().max(v.abs());
    let ts = simulate_mma_pair(4.0, 0.8, None, 200_000, 3).unwrap();
    let (a, b) = ts.x().split_at(100_000);
    assert!(rel(stats::mean(a), stats::mean(b)) < 0.05);
    let ts = simulate_mma_pair(8.0, 0.8, None, 200_000, 3).unwrap();
    let (a, b) = ts.x().split_at(100_000);
    assert!(rel(stats::mean(a), stats::mean(b)) < 0.05);
    assert!(rel(stats::variance(a), stats::variance(b)) < 0.05);
}

#[test]
fn arma_with_unit_innovations_converges_to_fixed_point() {
    let y = arma_recursion(&[1.0; 200], 0.2, 0.8);
    assert!((y[198] - 2.25).abs() < 1e-12);
    let z: Vec<f64> = (1..=50).map(f64::from).collect();
    assert_eq!(arma_recursion(&z, 0.0, 0.0), z[1..].to_vec());
}

#[test]
fn arma_tail_grows_with_sample_size() {
    let short = simulate_arma_frechet(0.2, 0.8, 6.0, 1_000, 500, 2).unwrap();
    let long = simulate_arma_frechet(0.2, 0.8, 6.0, 100_000, 500, 2).unwrap();
    let max = |v: &[f64]| v.iter().copied().fold(f64::MIN, f64::max);
    assert!(max(&long) > max(&short));
}

#[test]
fn garch_variance_and_positivity() {
    let y = simulate_garch(0.2, 0.3, 0.3, 1_000_000, 500, 5).unwrap();
    let v = stats::variance(&y);
    assert!((0.47..=0.53).contains(&v), "variance {v}");

    let mut rng = substream(6, &[]);
    let shocks: Vec<f64> = (0..10_000_000).map(|_| stats::norm_inv(open_unit(&mut rng))).collect();
    let (y, s2) = garch_recursion(&shocks, 0.2, 0.3, 0.3).unwrap();
    assert!(y.iter().all(|v| v.is_finite()));
    assert!(s2.iter().all(|&s| s.is_finite() && s >= 0.2));
}

#[test]
fn garch_without_feedback_is_iid_normal() {
    let y = simulate_garch(0.5, 0.0, 0.0, 100_000, 0, 1).unwrap();
    let d = stats::ks_statistic(&y, |v| stats::norm_cdf(v / 0.5f64.sqrt()));
    assert!(d < 0.005, "KS = {d}");
}

#[test]
fn garch_rejects_nonstationary_parameters() {
    assert!(simulate_garch(0.2, 0.6, 0.5, 10, 0, 0).is_err());
}

fn frechet_y(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = substream(seed, &[]);
    (0..n).map(|_| frechet_sample(6.0, &mut rng)).collect()
}

#[test]
fn gaussian_copula_rank_correlation() {
    let y = frechet_y(100_000, 7);
    let x = copula_couple(&y, &Copula::Gaussian { rho: 0.6 }, 8).unwrap();
    let target = 6.0 / std::f64::consts::PI * (0.3f64).asin();
    let s = stats::spearman(&x, &y);
    assert!((s - target).abs() < 0.01, "spearman {s} vs {target}");
    let d = stats::ks_statistic(&x, stats::norm_cdf);
    assert!(d < 0.005, "KS = {d}");
}

#[test]
fn copula_limits() {
    let n = 10_000;
    let y = frechet_y(n, 9);
    let x = copula_couple(&y, &Copula::Gaussian { rho: 0.0 }, 1).unwrap();
    assert!(stats::pearson(&x, &y).abs() < 3.0 / (n as f64).sqrt());
    let x = copula_couple(&y, &Copula::Gaussian { rho: 1.0 }, 1).unwrap();
    assert_eq!(stats::ranks(&x), stats::ranks(&y));
}

#[test]
fn t_copula_has_normal_margin_and_positive_dependence() {
    let y = frechet_y(100_000, 10);
    let x = copula_couple(&y, &Copula::StudentT { rho: 0.7, df: 3.0 }, 2).unwrap();
    assert!(stats::ks_statistic(&x, stats::norm_cdf) < 0.005);
    assert!(stats::spearman(&x, &y) > 0.5);
}

#[test]
fn simulation_is_seed_deterministic() {
    for kind in [ModelKind::mma(), ModelKind::arma_gaussian(), ModelKind::garch_t()] {
        let spec = ModelSpec::new(kind, 300, 17);
        assert_eq!(simulate(&spec).unwrap(), simulate(&spec).unwrap());
        assert_ne!(simulate(&spec).unwrap(), simulate(&spec.with_seed(18)).unwrap());
    }
}
