//! Deterministic extremal estimators.
//!
//! The threshold is the `(k+1)`-th largest observation of `y` with
//! `k = floor(n / m_n)`, so that (for distinct values) exactly `k` points
//! exceed it strictly. Given the threshold, the empirical TMES at lag `h` is
//!
//! ```text
//! delta_hat(h) = (m_n / n) * sum_{t = h+1}^{n} x_t * 1(y_{t-h} > a)
//! ```
//!
//! Only in-sample pairs enter the sum; no wraparound is applied.

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Result, TmesError};
use crate::stats;

/// Aligned observations `(x_t, y_t)`: `x` is the response, `y` the series
/// whose extremes define the conditioning event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesPair {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl TimeSeriesPair {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(TmesError::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        if x.len() < 2 {
            return Err(TmesError::TooShort {
                min: 2,
                got: x.len(),
            });
        }
        if let Some(index) = x.iter().chain(&y).position(|v| !v.is_finite()) {
            return Err(TmesError::NonFinite {
                index: index % x.len(),
            });
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Contiguous sub-series `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        Self::new(self.x[start..end].to_vec(), self.y[start..end].to_vec())
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.x, self.y)
    }
}

/// The extremal level `m_n` bound to a concrete threshold `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    pub m_n: usize,
    /// Target exceedance count `floor(n / m_n)`.
    pub k: usize,
    pub a: f64,
}

/// Exceedance indicators `I_t = 1(y_t > a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSeries {
    pub bits: Vec<bool>,
    pub threshold: ThresholdSpec,
}

impl IndicatorSeries {
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// TMES estimates over lags `0..=h_max`, optionally with confidence bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmesCurve {
    pub lags: Vec<usize>,
    pub values: Vec<f64>,
    pub centered: bool,
    pub bands: Option<Vec<(f64, f64)>>,
    pub level: Option<f64>,
}

impl TmesCurve {
    pub fn h_max(&self) -> usize {
        self.lags.len().saturating_sub(1)
    }
}

pub fn select_threshold(y: &[f64], m_n: usize) -> Result<ThresholdSpec> {
    let n = y.len();
    if n < 2 {
        return Err(TmesError::TooShort { min: 2, got: n });
    }
    if m_n < 1 || m_n > n {
        return Err(TmesError::InvalidLevel { m_n, n });
    }
    let k = n / m_n;
    let a = if k < n {
        let mut desc = y.to_vec();
        // (k+1)-th largest sits at index k of the descending order.
        let (_, kth, _) = desc.select_nth_unstable_by(k, |p, q| q.total_cmp(p));
        *kth
    } else {
        y.iter().copied().fold(f64::INFINITY, f64::min) - 1.0
    };
    Ok(ThresholdSpec { m_n, k, a })
}

pub fn exceedance_indicators(y: &[f64], spec: &ThresholdSpec) -> IndicatorSeries {
    IndicatorSeries {
        bits: y.iter().map(|&v| v > spec.a).collect(),
        threshold: *spec,
    }
}

fn check_lag(h: usize, n: usize) -> Result<()> {
    if h >= n {
        Err(TmesError::LagOutOfRange { h, n })
    } else {
        Ok(())
    }
}

/// Empirical TMES from precomputed indicators.
pub fn tmes_from_indicators(x: &[f64], ind: &IndicatorSeries, h: usize) -> Result<f64> {
    let n = x.len();
    if ind.len() != n {
        return Err(TmesError::LengthMismatch {
            left: n,
            right: ind.len(),
        });
    }
    check_lag(h, n)?;
    let mut sum = 0.0;
    for (xt, &hit) in x[h..].iter().zip(&ind.bits[..n - h]) {
        if hit {
            sum += xt;
        }
    }
    Ok(ind.threshold.m_n as f64 / n as f64 * sum)
}

pub fn empirical_tmes(ts: &TimeSeriesPair, spec: &ThresholdSpec, h: usize) -> Result<f64> {
    check_lag(h, ts.len())?;
    let ind = exceedance_indicators(ts.y(), spec);
    tmes_from_indicators(ts.x(), &ind, h)
}

/// Empirical TMES minus the plain sample mean of `x`.
pub fn centered_empirical_tmes(ts: &TimeSeriesPair, spec: &ThresholdSpec, h: usize) -> Result<f64> {
    Ok(empirical_tmes(ts, spec, h)? - stats::mean(ts.x()))
}

/// TMES curve over lags `0..=h_max` without bands.
pub fn tmes_curve(
    ts: &TimeSeriesPair,
    spec: &ThresholdSpec,
    h_max: usize,
    centered: bool,
) -> Result<TmesCurve> {
    check_lag(h_max, ts.len())?;
    let ind = exceedance_indicators(ts.y(), spec);
    let shift = if centered { stats::mean(ts.x()) } else { 0.0 };
    let values = (0..=h_max)
        .map(|h| tmes_from_indicators(ts.x(), &ind, h).map(|v| v - shift))
        .collect::<Result<Vec<_>>>()?;
    Ok(TmesCurve {
        lags: (0..=h_max).collect(),
        values,
        centered,
        bands: None,
        level: None,
    })
}

/// Sample extremogram `sum_t I_t I_{t+h} / sum_t I_t` for `h = 0..=h_max`.
pub fn sample_extremogram(y: &[f64], spec: &ThresholdSpec, h_max: usize) -> Result<Vec<f64>> {
    let ind = exceedance_indicators(y, spec);
    extremogram_from_indicators(&ind.bits, h_max)
}

pub(crate) fn extremogram_from_indicators(bits: &[bool], h_max: usize) -> Result<Vec<f64>> {
    let n = bits.len();
    check_lag(h_max, n)?;
    let total = bits.iter().filter(|&&b| b).count();
    if total == 0 {
        return Err(TmesError::UndefinedExtremogram);
    }
    Ok((0..=h_max)
        .map(|h| {
            let joint = bits[..n - h]
                .iter()
                .zip(&bits[h..])
                .filter(|(&a, &b)| a && b)
                .count();
            joint as f64 / total as f64
        })
        .collect())
}

/// Breakdown of the plug-in asymptotic variance of `delta_hat(h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PluginVariance {
    /// `tau_hat(0) + 2 sum_{s=1}^{s_max} rho_hat(s) tau_hat(s)`.
    pub raw: f64,
    /// `raw` with the squared-mean term `delta_hat(h)^2 / m_n` removed at
    /// every included lag, floored at zero. This is the scaled long-run
    /// variance of `x_t I_{t-h}` and is what the bootstrap estimates.
    pub centered: f64,
    /// `tau_hat(s)` for `s = 0..=s_max`; `None` where no joint exceedances exist.
    pub tau: Vec<Option<f64>>,
    pub rho: Vec<f64>,
    pub delta: f64,
}

/// Default truncation lag for [`plugin_variance`].
pub fn default_s_max(m_n: usize) -> usize {
    2 * m_n
}

pub fn plugin_variance_terms(
    ts: &TimeSeriesPair,
    spec: &ThresholdSpec,
    h: usize,
    s_max: usize,
) -> Result<PluginVariance> {
    let n = ts.len();
    check_lag(h, n)?;
    if 2 * s_max >= n || s_max + h >= n {
        return Err(TmesError::InvalidParameter {
            name: "s_max",
            value: s_max as f64,
            bound: "must satisfy s_max < n/2 and s_max + h < n",
        });
    }
    let ind = exceedance_indicators(ts.y(), spec);
    let rho = extremogram_from_indicators(&ind.bits, s_max)
        .map_err(|_| TmesError::UndefinedVariance { h })?;
    let x = ts.x();
    let bits = &ind.bits;

    let tau: Vec<Option<f64>> = (0..=s_max)
        .map(|s| {
            let mut num = 0.0;
            let mut den = 0usize;
            for t in h..n - s {
                if bits[t - h] && bits[t + s - h] {
                    num += x[t] * x[t + s];
                    den += 1;
                }
            }
            (den > 0).then(|| num / den as f64)
        })
        .collect();

    let tau0 = tau[0].ok_or(TmesError::UndefinedVariance { h })?;
    let delta = tmes_from_indicators(x, &ind, h)?;
    let mean_sq = delta * delta / spec.m_n as f64;

    let mut raw = tau0;
    let mut lags_used = 1usize;
    for s in 1..=s_max {
        if let Some(t) = tau[s] {
            raw += 2.0 * rho[s] * t;
            lags_used += 2;
        }
    }
    let centered = (raw - lags_used as f64 * mean_sq).max(0.0);
    Ok(PluginVariance {
        raw,
        centered,
        tau,
        rho,
        delta,
    })
}

/// Plug-in estimate of `sigma_h^2`, the limit of `(n/m_n) var(delta_hat(h))`.
pub fn plugin_variance(
    ts: &TimeSeriesPair,
    spec: &ThresholdSpec,
    h: usize,
    s_max: usize,
) -> Result<f64> {
    plugin_variance_terms(ts, spec, h, s_max).map(|v| v.centered)
}

pub(crate) fn check_level(level: f64) -> Result<()> {
    check_range("level", level, level > 0.0 && level < 1.0, "must lie in (0, 1)")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_to_ten() -> TimeSeriesPair {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        TimeSeriesPair::new(v.clone(), v).unwrap()
    }

    #[test]
    fn threshold_on_one_to_ten() {
        let y: Vec<f64> = (1..=10).map(f64::from).collect();
        let spec = select_threshold(&y, 5).unwrap();
        assert_eq!(spec.k, 2);
        assert_eq!(spec.a, 8.0);
        let ind = exceedance_indicators(&y, &spec);
        assert_eq!(ind.count(), 2);
        assert!(ind.bits[8] && ind.bits[9]);
    }

    #[test]
    fn constant_series_has_no_exceedances() {
        let y = vec![3.5; 40];
        for m in [1, 2, 7, 40] {
            let spec = select_threshold(&y, m).unwrap();
            let expected = if m == 1 { 40 } else { 0 };
            assert_eq!(exceedance_indicators(&y, &spec).count(), expected);
            if m > 1 {
                assert_eq!(spec.a, 3.5);
            }
        }
    }

    #[test]
    fn level_one_uses_all_points() {
        let y = [4.0, 2.0, 9.0];
        let spec = select_threshold(&y, 1).unwrap();
        assert_eq!(spec.k, 3);
        assert_eq!(spec.a, 1.0);
        assert_eq!(exceedance_indicators(&y, &spec).count(), 3);
    }

    #[test]
    fn threshold_preconditions() {
        assert!(matches!(select_threshold(&[5.0], 1), Err(TmesError::TooShort { .. })));
        assert!(matches!(
            select_threshold(&[1.0, 2.0], 0),
            Err(TmesError::InvalidLevel { .. })
        ));
        assert!(matches!(
            select_threshold(&[1.0, 2.0], 3),
            Err(TmesError::InvalidLevel { .. })
        ));
    }

    #[test]
    fn indicators_use_strict_comparison() {
        let spec = ThresholdSpec { m_n: 1, k: 2, a: 5.0 };
        let ind = exceedance_indicators(&[0.0, 0.0, 10.0, 0.0, 10.0], &spec);
        assert_eq!(ind.bits, vec![false, false, true, false, true]);
        let ind = exceedance_indicators(&[5.0, 5.0, 1.0], &spec);
        assert_eq!(ind.count(), 0);
    }

    #[test]
    fn tmes_hand_values() {
        let ts = one_to_ten();
        let spec = select_threshold(ts.y(), 5).unwrap();
        assert_eq!(empirical_tmes(&ts, &spec, 0).unwrap(), 9.5);
        assert_eq!(empirical_tmes(&ts, &spec, 1).unwrap(), 5.0);
        assert_eq!(centered_empirical_tmes(&ts, &spec, 0).unwrap(), 4.0);
        assert!(matches!(
            empirical_tmes(&ts, &spec, 10),
            Err(TmesError::LagOutOfRange { h: 10, n: 10 })
        ));
    }

    #[test]
    fn tmes_without_exceedances_is_zero() {
        let ts = TimeSeriesPair::new(vec![1.0, -2.0, 3.0], vec![0.0, 0.0, 0.0]).unwrap();
        let spec = ThresholdSpec { m_n: 3, k: 1, a: 1.0 };
        for h in 0..3 {
            assert_eq!(empirical_tmes(&ts, &spec, h).unwrap(), 0.0);
        }
    }

    #[test]
    fn centered_equals_uncentered_for_zero_mean_x() {
        let x = vec![1.0, -1.0, 2.0, -2.0, 0.5, -0.5];
        let y = vec![3.0, 1.0, 4.0, 1.5, 5.0, 9.0];
        let ts = TimeSeriesPair::new(x, y).unwrap();
        let spec = select_threshold(ts.y(), 2).unwrap();
        for h in 0..4 {
            assert_eq!(
                empirical_tmes(&ts, &spec, h).unwrap(),
                centered_empirical_tmes(&ts, &spec, h).unwrap()
            );
        }
    }

    #[test]
    fn extremogram_hand_values() {
        let y = [0.0, 0.0, 10.0, 0.0, 10.0];
        let spec = ThresholdSpec { m_n: 2, k: 2, a: 5.0 };
        let rho = sample_extremogram(&y, &spec, 3).unwrap();
        assert_eq!(rho, vec![1.0, 0.0, 0.5, 0.0]);
    }

    #[test]
    fn isolated_exceedance_has_zero_extremogram() {
        let mut y = vec![0.0; 30];
        y[12] = 5.0;
        let spec = ThresholdSpec { m_n: 30, k: 1, a: 1.0 };
        let rho = sample_extremogram(&y, &spec, 10).unwrap();
        assert_eq!(rho[0], 1.0);
        assert!(rho[1..].iter().all(|&r| r == 0.0));
    }

    #[test]
    fn extremogram_without_exceedances_errors() {
        let spec = ThresholdSpec { m_n: 2, k: 1, a: 100.0 };
        assert!(matches!(
            sample_extremogram(&[1.0, 2.0, 3.0], &spec, 1),
            Err(TmesError::UndefinedExtremogram)
        ));
    }

    #[test]
    fn single_exceedance_variance_is_tau_zero() {
        let mut y = vec![0.0; 40];
        y[10] = 5.0;
        let x: Vec<f64> = (0..40).map(|t| 0.1 * t as f64).collect();
        let ts = TimeSeriesPair::new(x.clone(), y).unwrap();
        let spec = ThresholdSpec { m_n: 40, k: 1, a: 1.0 };
        for h in [0, 2] {
            let v = plugin_variance_terms(&ts, &spec, h, 5).unwrap();
            let tau0 = x[10 + h] * x[10 + h];
            assert_eq!(v.raw, tau0);
            assert!(v.tau[1..].iter().all(Option::is_none));
            let delta = 40.0 / 40.0 * x[10 + h];
            assert!((v.centered - (tau0 - delta * delta / 40.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn variance_requires_exceedances_and_small_truncation() {
        let ts = TimeSeriesPair::new(vec![1.0; 10], vec![0.0; 10]).unwrap();
        let spec = ThresholdSpec { m_n: 5, k: 2, a: 1.0 };
        assert!(matches!(
            plugin_variance(&ts, &spec, 0, 2),
            Err(TmesError::UndefinedVariance { h: 0 })
        ));
        assert!(matches!(
            plugin_variance(&ts, &spec, 0, 5),
            Err(TmesError::InvalidParameter { name: "s_max", .. })
        ));
    }

    #[test]
    fn pair_validation() {
        assert!(TimeSeriesPair::new(vec![1.0, 2.0], vec![1.0]).is_err());
        assert!(TimeSeriesPair::new(vec![1.0], vec![1.0]).is_err());
        assert!(matches!(
            TimeSeriesPair::new(vec![1.0, f64::NAN], vec![1.0, 2.0]),
            Err(TmesError::NonFinite { index: 1 })
        ));
        assert!(matches!(
            TimeSeriesPair::new(vec![1.0, 2.0], vec![f64::INFINITY, 2.0]),
            Err(TmesError::NonFinite { index: 0 })
        ));
    }
}
