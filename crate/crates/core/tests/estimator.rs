use proptest::prelude::*;
use tmes_core::extremal::{
    default_s_max, empirical_tmes, plugin_variance_terms, sample_extremogram, select_threshold, TimeSeriesPair,
};
use tmes_core::oracles::brute_force_tmes;
use tmes_core::rng::{open_unit, substream};
use tmes_core::stats;

fn pair_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, usize, usize)> {
    (2usize..120).prop_flat_map(|n| {
        (
            prop::collection::vec(-100.0f64..100.0, n),
            prop::collection::vec(prop_oneof![0.0f64..50.0, (0i32..5).prop_map(f64::from)], n),
            1usize..=n,
            0usize..n.min(12),
        )
    })
}

proptest! {
    #[test]
    fn matches_double_loop((x, y, m_n, h) in pair_strategy()) {
        let ts = TimeSeriesPair::new(x, y).unwrap();
        let spec = select_threshold(ts.y(), m_n).unwrap();
        let a = empirical_tmes(&ts, &spec, h).unwrap();
        let b = brute_force_tmes(&ts, &spec, h).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn linear_in_x((x, y, m_n, h) in pair_strategy(), c in -10.0f64..10.0) {
        let ts = TimeSeriesPair::new(x.clone(), y.clone()).unwrap();
        let scaled = TimeSeriesPair::new(x.iter().map(|v| c * v).collect(), y).unwrap();
        let spec = select_threshold(ts.y(), m_n).unwrap();
        let a = empirical_tmes(&ts, &spec, h).unwrap();
        let b = empirical_tmes(&scaled, &spec, h).unwrap();
        prop_assert!((c * a - b).abs() <= 1e-9 * (1.0 + b.abs()));
    }

    #[test]
    fn monotone_transform_of_y_keeps_the_estimate((x, y, m_n, h) in pair_strategy()) {
        let ts = TimeSeriesPair::new(x.clone(), y.clone()).unwrap();
        let moved = TimeSeriesPair::new(x, y.iter().map(|v| 3.0 * v + 7.0).collect()).unwrap();
        let a = empirical_tmes(&ts, &select_threshold(ts.y(), m_n).unwrap(), h).unwrap();
        let b = empirical_tmes(&moved, &select_threshold(moved.y(), m_n).unwrap(), h).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn indicator_x_reduces_to_extremogram() {
    let mut rng = substream(3, &[]);
    let n = 1000;
    let m_n = 25;
    let y: Vec<f64> = (0..n).map(|_| open_unit(&mut rng)).collect();
    let spec = select_threshold(&y, m_n).unwrap();
    let k = spec.k as f64;
    let scale = n as f64 / (m_n as f64 * k);
    let x: Vec<f64> = y.iter().map(|&v| if v > spec.a { scale } else { 0.0 }).collect();
    let ts = TimeSeriesPair::new(x, y.clone()).unwrap();
    let rho = sample_extremogram(&y, &spec, 5).unwrap();
    for (h, r) in rho.iter().enumerate() {
        let d = empirical_tmes(&ts, &spec, h).unwrap();
        assert!((d - r).abs() < 1e-12, "h={h}: {d} vs {r}");
    }
}

/// iid data with `x_t = I_t` at lag 1: the plug-in variance against the
/// simulated `(n/m_n) var(delta_hat)`. With exactly `k` exceedances the pair
/// count varies less than at a fixed level (by about `1 - 4/m_n`), so a high
/// level keeps that effect well inside the tolerance.
#[test]
fn plugin_variance_tracks_monte_carlo_on_iid_indicators() {
    let (n, m_n, h, paths) = (5000, 50, 1, 1000u64);
    let mut deltas = Vec::new();
    let mut plug = Vec::new();
    for p in 0..paths {
        let mut rng = substream(9, &[p]);
        let y: Vec<f64> = (0..n).map(|_| open_unit(&mut rng)).collect();
        let spec = select_threshold(&y, m_n).unwrap();
        let x: Vec<f64> = y.iter().map(|&v| if v > spec.a { 1.0 } else { 0.0 }).collect();
        let ts = TimeSeriesPair::new(x, y).unwrap();
        deltas.push(empirical_tmes(&ts, &spec, h).unwrap());
        plug.push(plugin_variance_terms(&ts, &spec, h, default_s_max(m_n)).unwrap().centered);
    }
    let mc = n as f64 / m_n as f64 * stats::variance(&deltas);
    let est = stats::mean(&plug);
    assert!((est - mc).abs() / mc < 0.20, "plug-in {est} vs Monte Carlo {mc}");
}

#[test]
fn threshold_errors_are_reported() {
    assert!(select_threshold(&[1.0, 2.0], 0).is_err());
    assert!(select_threshold(&[1.0, 2.0], 3).is_err());
    let ts = TimeSeriesPair::new(vec![1.0; 4], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    let spec = select_threshold(ts.y(), 2).unwrap();
    assert!(empirical_tmes(&ts, &spec, 4).is_err());
}
