use tmes_core::models::{Copula, ModelKind, ModelSpec};
use tmes_core::oracles::{
    arma_extremogram_closed_form, copula_tmes_from_extremogram, mma_tmes_oracle, monte_carlo_delta0,
    monte_carlo_tmes, IntegrationGrid,
};
use tmes_core::{stats, OracleMethod};

fn arma_with(copula: Copula) -> ModelSpec {
    ModelSpec::new(
        ModelKind::ArmaCopula { phi: 0.2, theta_ma: 0.8, xi: 6.0, copula },
        2000,
        0,
    )
}

#[test]
fn comonotone_delta0_is_truncated_normal_mean() {
    let z = stats::norm_inv(0.95);
    let target = stats::norm_pdf(z) / 0.05;
    assert!((target - 2.0627).abs() < 1e-4);
    let r = monte_carlo_delta0(&arma_with(Copula::Gaussian { rho: 1.0 }), 20, 20, 2000, 1).unwrap();
    assert_eq!(r.method, OracleMethod::MonteCarlo);
    // With rho = 1 the exceedances carry exactly the normal scores of the
    // top 100 ranks out of 2000, mean(norm_inv(r / 2001), r = 1901..=2000),
    // frozen from an independent evaluation.
    assert!((r.value - 2.052280006542733).abs() < 1e-9, "{}", r.value);
    assert!((r.value - target).abs() < 0.015);
}

#[test]
fn independent_delta0_is_zero() {
    let r = monte_carlo_delta0(&arma_with(Copula::Gaussian { rho: 0.0 }), 20, 100, 2000, 2).unwrap();
    let se = r.error_estimate.unwrap();
    assert!(se > 0.0);
    assert!(r.value.abs() < 3.0 * se, "{} with SE {se}", r.value);
}

#[test]
fn monte_carlo_reproduces_and_standard_error_scales() {
    let model = arma_with(Copula::Gaussian { rho: 0.6 });
    let a = monte_carlo_tmes(&model, 20, 1, 10, 2000, 3).unwrap();
    let b = monte_carlo_tmes(&model, 20, 1, 10, 2000, 3).unwrap();
    assert_eq!(a, b);

    let paths = [10usize, 100, 1000, 10_000];
    let se: Vec<f64> = paths
        .iter()
        .map(|&p| monte_carlo_tmes(&model, 20, 1, p, 2000, 4).unwrap().error_estimate.unwrap())
        .collect();
    let lx: Vec<f64> = paths.iter().map(|&p| (p as f64).ln()).collect();
    let ly: Vec<f64> = se.iter().map(|s| s.ln()).collect();
    let (mx, my) = (stats::mean(&lx), stats::mean(&ly));
    let slope = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope + 0.5).abs() <= 0.1, "slope {slope}, SEs {se:?}");

    // Quadrupling the path count halves the standard error.
    let s1 = monte_carlo_tmes(&model, 20, 1, 250, 2000, 5).unwrap().error_estimate.unwrap();
    let s4 = monte_carlo_tmes(&model, 20, 1, 1000, 2000, 5).unwrap().error_estimate.unwrap();
    assert!((s1 / s4 / 2.0 - 1.0).abs() < 0.2, "{s1} / {s4}");
}

#[test]
fn too_few_exceedances_is_an_error() {
    assert!(monte_carlo_delta0(&arma_with(Copula::Gaussian { rho: 0.6 }), 20, 2, 2000, 0).is_err());
}

#[test]
fn mma_oracle_agrees_with_simulated_conditional_means() {
    let (xi, phi, m_n) = (4.0, 0.8, 20);
    let model = ModelSpec::new(ModelKind::Mma { xi, phi, trunc: None }, 5000, 0);
    for h in [0, 1, 5] {
        let oracle = mma_tmes_oracle(h, xi, phi, m_n, IntegrationGrid::default()).unwrap().value;
        let mc = monte_carlo_tmes(&model, m_n, h, 200, 5000, 6).unwrap();
        let se = mc.error_estimate.unwrap();
        assert!((oracle - mc.value).abs() < 4.0 * se, "h={h}: oracle {oracle}, MC {} (SE {se})", mc.value);
    }
}

#[test]
fn copula_decomposition_endpoints_and_arma_values() {
    assert_eq!(copula_tmes_from_extremogram(0.0, 0.3, 2.0).unwrap(), 0.3);
    assert_eq!(copula_tmes_from_extremogram(1.0, 0.3, 2.0).unwrap(), 2.0);
    let rho1 = arma_extremogram_closed_form(1, 0.2, 0.8, 6.0).unwrap();
    assert!((rho1 - 0.500016).abs() < 1e-6);
    let rho2 = arma_extremogram_closed_form(2, 0.2, 0.8, 6.0).unwrap();
    assert!((rho2 - 3.2e-5).abs() < 1e-6);
    assert!((copula_tmes_from_extremogram(rho1, 0.0, 2.0).unwrap() - 2.0 * rho1).abs() < 1e-15);
    let mut prev = 1.0;
    for h in 0..20 {
        let r = arma_extremogram_closed_form(h, 0.2, 0.8, 6.0).unwrap();
        assert!((0.0..=1.0).contains(&r) && r <= prev);
        prev = r;
    }
}
