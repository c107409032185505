//! Stationary bootstrap for the empirical TMES.
//!
//! The threshold and indicators are fixed on the original sample. The
//! product series `W_t = x_t * I_{t-h}` is then resampled in blocks with
//! uniform random starts and geometric lengths (mean `1/theta`), wrapping
//! around the end of the sample, and each resample yields a replicate
//! `delta*(h) = (m_n/n) * sum_t W*_t`.
//!
//! Replicate `b` draws from its own substream of `seed`, so the replicate
//! vector is identical regardless of how many worker threads run.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Result, TmesError};
use crate::extremal::{
    check_level, exceedance_indicators, IndicatorSeries, ThresholdSpec, TimeSeriesPair,
};
use crate::rng::{open_unit, substream};
use crate::stats;

/// Block starts (0-based) and lengths of one stationary-bootstrap resample.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPlan {
    pub starts: Vec<usize>,
    pub lengths: Vec<usize>,
    pub n: usize,
    pub theta: f64,
}

impl BlockPlan {
    pub fn num_blocks(&self) -> usize {
        self.starts.len()
    }
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    check_range("theta", theta, theta > 0.0 && theta < 1.0, "must lie in (0, 1)")
}

/// Geometric length on `{1, 2, ...}` with success probability `theta`, by
/// inversion: `ceil(ln U / ln(1 - theta))`.
pub fn geometric_length<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> usize {
    let u = open_unit(rng);
    let l = (u.ln() / (-theta).ln_1p()).ceil();
    // `as` saturates for huge values.
    (l as usize).max(1)
}

pub fn make_block_plan<R: Rng + ?Sized>(n: usize, theta: f64, rng: &mut R) -> Result<BlockPlan> {
    check_theta(theta)?;
    if n == 0 {
        return Err(TmesError::TooShort { min: 1, got: 0 });
    }
    let mut starts = Vec::new();
    let mut lengths = Vec::new();
    let mut total = 0usize;
    while total < n {
        starts.push(rng.random_range(0..n));
        let l = geometric_length(theta, rng);
        lengths.push(l);
        total = total.saturating_add(l);
    }
    Ok(BlockPlan {
        starts,
        lengths,
        n,
        theta,
    })
}

/// Concatenates the planned blocks of `w` (indices wrap modulo `n`) and
/// truncates to exactly `n` values.
pub fn resample_series(w: &[f64], plan: &BlockPlan) -> Result<Vec<f64>> {
    let n = plan.n;
    if w.len() != n {
        return Err(TmesError::LengthMismatch {
            left: w.len(),
            right: n,
        });
    }
    let mut out = Vec::with_capacity(n);
    'blocks: for (&start, &len) in plan.starts.iter().zip(&plan.lengths) {
        for j in 0..len {
            if out.len() == n {
                break 'blocks;
            }
            out.push(w[(start + j) % n]);
        }
    }
    Ok(out)
}

/// Sum of one stationary-bootstrap resample of `w`, drawn without
/// materialising the resample.
fn resampled_sum<R: Rng + ?Sized>(w: &[f64], theta: f64, rng: &mut R) -> f64 {
    let n = w.len();
    let mut remaining = n;
    let mut sum = 0.0;
    while remaining > 0 {
        let start = rng.random_range(0..n);
        let len = geometric_length(theta, rng).min(remaining);
        let mut idx = start;
        for _ in 0..len {
            sum += w[idx];
            idx += 1;
            if idx == n {
                idx = 0;
            }
        }
        remaining -= len;
    }
    sum
}

/// `B` resampled sums of `w`; replicate `b` uses substream `(seed, b)`.
pub fn replicate_sums(w: &[f64], theta: f64, b: usize, seed: u64) -> Result<Vec<f64>> {
    check_theta(theta)?;
    if w.is_empty() {
        return Err(TmesError::TooShort { min: 1, got: 0 });
    }
    Ok((0..b as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, &[i]);
            resampled_sum(w, theta, &mut rng)
        })
        .collect())
}

/// The product series `W_t = x_t I_{t-h}`, zero for `t < h`.
pub fn product_series(x: &[f64], ind: &IndicatorSeries, h: usize) -> Vec<f64> {
    let mut w = vec![0.0; x.len()];
    for t in h..x.len() {
        if ind.bits[t - h] {
            w[t] = x[t];
        }
    }
    w
}

/// Bootstrap replicates of `delta_hat(h)` for one lag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReplicates {
    pub lag: usize,
    pub values: Vec<f64>,
    /// The point estimate `delta_hat(h)` on the original sample.
    pub point: f64,
    pub theta: f64,
    pub seed: u64,
}

impl BootstrapReplicates {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Shifts the point estimate and every replicate by `-c`.
    pub fn shifted(mut self, c: f64) -> Self {
        self.point -= c;
        for v in &mut self.values {
            *v -= c;
        }
        self
    }
}

pub fn bootstrap_tmes_replicates(
    ts: &TimeSeriesPair,
    spec: &ThresholdSpec,
    h: usize,
    theta: f64,
    b: usize,
    seed: u64,
) -> Result<BootstrapReplicates> {
    let n = ts.len();
    if h >= n {
        return Err(TmesError::LagOutOfRange { h, n });
    }
    if b == 0 {
        return Err(TmesError::InvalidParameter {
            name: "B",
            value: 0.0,
            bound: "must be at least 1",
        });
    }
    let ind = exceedance_indicators(ts.y(), spec);
    let w = product_series(ts.x(), &ind, h);
    let scale = spec.m_n as f64 / n as f64;
    let point = crate::extremal::tmes_from_indicators(ts.x(), &ind, h)?;
    let values = replicate_sums(&w, theta, b, seed)?
        .into_iter()
        .map(|s| scale * s)
        .collect();
    Ok(BootstrapReplicates {
        lag: h,
        values,
        point,
        theta,
        seed,
    })
}

/// Confidence interval construction from bootstrap replicates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CiMethod {
    #[default]
    Percentile,
    /// `(2 delta_hat - q_hi, 2 delta_hat - q_lo)`.
    Basic,
}

impl CiMethod {
    pub fn interval(self, reps: &BootstrapReplicates, level: f64) -> Result<(f64, f64)> {
        let (lo, hi) = percentile_ci(reps, level)?;
        Ok(match self {
            CiMethod::Percentile => (lo, hi),
            CiMethod::Basic => (2.0 * reps.point - hi, 2.0 * reps.point - lo),
        })
    }
}

impl std::str::FromStr for CiMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "percentile" => Ok(CiMethod::Percentile),
            "basic" => Ok(CiMethod::Basic),
            other => Err(format!("unknown CI method `{other}` (percentile|basic)")),
        }
    }
}

/// Percentile interval at `level`, interpolating linearly between order
/// statistics.
pub fn percentile_ci(reps: &BootstrapReplicates, level: f64) -> Result<(f64, f64)> {
    check_level(level)?;
    if reps.values.is_empty() {
        return Err(TmesError::TooShort { min: 1, got: 0 });
    }
    let s = stats::sorted(&reps.values);
    let alpha = (1.0 - level) / 2.0;
    Ok((stats::quantile_sorted(&s, alpha), stats::quantile_sorted(&s, 1.0 - alpha)))
}

/// Standardized replicates (own mean and SD), sorted, paired with standard
/// normal quantiles at plotting positions `(i - 0.5)/B`.
pub fn qq_against_normal(reps: &BootstrapReplicates) -> Result<Vec<(f64, f64)>> {
    qq_pairs(&reps.values)
}

pub fn qq_pairs(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    let b = values.len();
    if b < 3 {
        return Err(TmesError::TooShort { min: 3, got: b });
    }
    let m = stats::mean(values);
    let sd = stats::std_dev(values);
    if sd.is_nan() || sd <= 0.0 {
        return Err(TmesError::DegenerateDistribution);
    }
    let z = stats::sorted(values);
    Ok(z.into_iter()
        .enumerate()
        .map(|(i, v)| {
            let p = (i as f64 + 0.5) / b as f64;
            (stats::norm_inv(p), (v - m) / sd)
        })
        .collect())
}

/// Pearson correlation of the QQ pairs.
pub fn qq_correlation(pairs: &[(f64, f64)]) -> f64 {
    let (a, b): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    stats::pearson(&a, &b)
}
