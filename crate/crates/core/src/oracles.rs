//! Ground-truth values for validating the estimators.
//!
//! All "theoretical" TMES values are evaluated at the finite level
//! `1 - 1/m_n` rather than in the `u -> infinity` limit, which is what the
//! estimator targets at a fixed `m_n`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use statrs::function::gamma::gamma;

use crate::error::{check_range, Result, TmesError};
use crate::extremal::{select_threshold, ThresholdSpec, TimeSeriesPair};
use crate::models::{simulate, ModelSpec};
use crate::rng::derive_seed;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    ClosedForm,
    NumericIntegral,
    MonteCarlo,
    BruteForce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub value: f64,
    pub method: OracleMethod,
    pub error_estimate: Option<f64>,
    pub params: serde_json::Value,
}

// ---------------------------------------------------------------------------
// Max-moving-average distribution functions

/// `1 + sum_{j>0} 4 j phi^{xi j}`, summed in closed form.
pub fn mma_marginal_constant(xi: f64, phi: f64) -> f64 {
    let q = phi.powf(xi);
    1.0 + 4.0 * q / ((1.0 - q) * (1.0 - q))
}

/// Marginal CDF of the max-moving average: `exp(-c x^{-xi})`; zero for `x <= 0`.
pub fn mma_marginal_cdf(x: f64, xi: f64, phi: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (-mma_marginal_constant(xi, phi) * x.powf(-xi)).exp()
}

/// Closed-form marginal mean `c^{1/xi} Gamma(1 - 1/xi)` (finite for `xi > 1`).
pub fn mma_marginal_mean(xi: f64, phi: f64) -> Result<f64> {
    check_range("xi", xi, xi > 1.0, "mean is finite only for xi > 1")?;
    Ok(mma_marginal_constant(xi, phi).powf(1.0 / xi) * gamma(1.0 - 1.0 / xi))
}

/// `(1 - 1/m_n)` quantile of the marginal.
pub fn mma_level_threshold(m_n: usize, xi: f64, phi: f64) -> f64 {
    let p = 1.0 / m_n as f64;
    (mma_marginal_constant(xi, phi) / -(-p).ln_1p()).powf(1.0 / xi)
}

/// Lattice truncation for the joint CDF: discarded rates fall below `1e-10`.
pub fn default_lattice_trunc(xi: f64, phi: f64) -> usize {
    (10.0 * std::f64::consts::LN_10 / (xi * (1.0 / phi).ln())).ceil() as usize
}

/// Lattice rectangle covering both weight diamonds: `i1 in -T..=T+1`,
/// `i2 in -T-h..=T`.
fn lattice(trunc: usize, h: usize) -> impl Iterator<Item = (i64, i64)> {
    let t = trunc as i64;
    let h = h as i64;
    (-t..=t + 1).flat_map(move |i1| (-t - h..=t).map(move |i2| (i1, i2)))
}

/// Joint CDF `P(X_t <= x, Y_{t-h} <= y)` of the max-moving average:
/// `exp(-sum max(x^{-xi} phi^{xi(|i1|+|i2|)}, y^{-xi} phi^{xi(|i1-1|+|i2+h|)}))`.
pub fn mma_joint_cdf(x: f64, y: f64, h: usize, xi: f64, phi: f64, trunc: Option<usize>) -> f64 {
    if x <= 0.0 || y <= 0.0 {
        return 0.0;
    }
    let trunc = trunc.unwrap_or_else(|| default_lattice_trunc(xi, phi));
    let q = phi.powf(xi);
    let rx = x.powf(-xi);
    let ry = if y.is_infinite() { 0.0 } else { y.powf(-xi) };
    let exponent: f64 = lattice(trunc, h)
        .map(|(i1, i2)| {
            let d1 = (i1.abs() + i2.abs()) as i32;
            let d2 = ((i1 - 1).abs() + (i2 + h as i64).abs()) as i32;
            (rx * q.powi(d1)).max(ry * q.powi(d2))
        })
        .sum();
    (-exponent).exp()
}

/// Joint exponent for a fixed `y = a` and lag, evaluated fast in `x`.
///
/// Cells are grouped by `d2 - d1`: a cell takes the `x` rate exactly when
/// `(a/x)^xi > q^{d2-d1}`, so sorting the groups gives prefix sums.
struct JointExponent {
    a_rate: f64,
    /// `q^{d2 - d1}` thresholds, ascending.
    cuts: Vec<f64>,
    /// `prefix_x[j]`: total x-weight of the first `j` groups.
    prefix_x: Vec<f64>,
    /// `suffix_y[j]`: total y-weight of groups `j..`.
    suffix_y: Vec<f64>,
    xi: f64,
    a: f64,
}

impl JointExponent {
    fn new(a: f64, h: usize, xi: f64, phi: f64, trunc: usize) -> Self {
        let q = phi.powf(xi);
        let mut groups: std::collections::BTreeMap<i64, (f64, f64)> = Default::default();
        for (i1, i2) in lattice(trunc, h) {
            let d1 = i1.abs() + i2.abs();
            let d2 = (i1 - 1).abs() + (i2 + h as i64).abs();
            let g = groups.entry(d2 - d1).or_default();
            g.0 += q.powi(d1 as i32);
            g.1 += q.powi(d2 as i32);
        }
        // Larger d2 - d1 means a smaller cut; iterate descending keys.
        let mut cuts = Vec::new();
        let mut wx = Vec::new();
        let mut wy = Vec::new();
        for (&delta, &(sx, sy)) in groups.iter().rev() {
            cuts.push(q.powi(delta as i32));
            wx.push(sx);
            wy.push(sy);
        }
        let mut prefix_x = vec![0.0];
        for w in &wx {
            prefix_x.push(prefix_x.last().unwrap() + w);
        }
        let mut suffix_y = vec![0.0; wy.len() + 1];
        for j in (0..wy.len()).rev() {
            suffix_y[j] = suffix_y[j + 1] + wy[j];
        }
        Self {
            a_rate: a.powf(-xi),
            cuts,
            prefix_x,
            suffix_y,
            xi,
            a,
        }
    }

    /// `-ln P(X_t <= x, Y_{t-h} <= a)`.
    fn eval(&self, x: f64) -> f64 {
        let t = (self.a / x).powf(self.xi);
        let j = self.cuts.partition_point(|&c| c < t);
        x.powf(-self.xi) * self.prefix_x[j] + self.a_rate * self.suffix_y[j]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegrationGrid {
    /// Trapezoid step; defaults to `1e-3 * a`.
    pub step: Option<f64>,
    /// Upper limit; defaults to where the integrand falls below `1e-8`.
    pub cutoff: Option<f64>,
    /// Lattice truncation; defaults to [`default_lattice_trunc`].
    pub trunc: Option<usize>,
}

/// TMES of the max-moving average at lag `h` and level `1 - 1/m_n`:
/// `int_0^inf P(X_{t+h} > x | Y_t > a) dx`, by the trapezoid rule.
pub fn mma_tmes_oracle(
    h: usize,
    xi: f64,
    phi: f64,
    m_n: usize,
    grid: IntegrationGrid,
) -> Result<OracleResult> {
    check_range("phi", phi, phi > 0.0 && phi < 1.0, "must lie in (0, 1)")?;
    check_range("xi", xi, xi > 0.0, "must be > 0")?;
    if m_n < 2 {
        return Err(TmesError::InvalidLevel { m_n, n: usize::MAX });
    }
    if xi <= 1.0 {
        return Err(TmesError::IntegrationFailure(format!(
            "integrand decays like x^-{xi}; the integral diverges for xi <= 1"
        )));
    }
    let c = mma_marginal_constant(xi, phi);
    let a = mma_level_threshold(m_n, xi, phi);
    let p = 1.0 / m_n as f64;
    let trunc = grid.trunc.unwrap_or_else(|| default_lattice_trunc(xi, phi));
    let joint = JointExponent::new(a, h, xi, phi, trunc);
    let ea = c * a.powf(-xi);

    // P(X > x, Y > a) / P(Y > a), arranged to avoid cancellation near 1.
    let integrand = |x: f64| -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let ex = c * x.powf(-xi);
        let e = joint.eval(x);
        let num = -(-ex).exp_m1() + (-ea).exp() * (-(e - ea)).exp_m1();
        (num / p).clamp(0.0, 1.0)
    };

    let cutoff = match grid.cutoff {
        Some(c) => c,
        None => {
            let mut x = a;
            while integrand(x) >= 1e-8 {
                x *= 2.0;
                if x > a * 1e12 {
                    return Err(TmesError::IntegrationFailure(
                        "integrand does not decay below 1e-8".into(),
                    ));
                }
            }
            x
        }
    };
    let step = grid.step.unwrap_or(1e-3 * a);
    check_range("step", step, step > 0.0, "must be > 0")?;
    let intervals = (cutoff / step).ceil().max(1.0) as usize;
    let dx = cutoff / intervals as f64;

    let mut coarse = 0.5 * (integrand(0.0) + integrand(cutoff));
    for i in 1..intervals {
        coarse += integrand(i as f64 * dx);
    }
    coarse *= dx;
    let mut mid = 0.0;
    for i in 0..intervals {
        mid += integrand((i as f64 + 0.5) * dx);
    }
    let fine = 0.5 * coarse + 0.5 * dx * mid;

    // Tail beyond the cutoff decays like x^{-xi}.
    let tail = cutoff * integrand(cutoff) / (xi - 1.0);
    Ok(OracleResult {
        value: fine + tail,
        method: OracleMethod::NumericIntegral,
        error_estimate: Some((fine - coarse).abs() + tail),
        params: json!({
            "h": h, "xi": xi, "phi": phi, "m_n": m_n,
            "threshold": a, "step": dx / 2.0, "cutoff": cutoff, "trunc": trunc,
        }),
    })
}

// ---------------------------------------------------------------------------
// Copula-based models

/// Extremogram of the Fréchet ARMA(1,1) in closed form; `rho(0) = 1`.
pub fn arma_extremogram_closed_form(h: usize, phi: f64, theta_ma: f64, xi: f64) -> Result<f64> {
    check_range("xi", xi, xi > 0.0, "must be > 0")?;
    check_range("phi", phi, phi > 0.0 && phi < 1.0, "must lie in (0, 1)")?;
    let q = phi.powf(xi);
    check_range("phi^xi", q, q < 1.0, "must be < 1")?;
    if h == 0 {
        return Ok(1.0);
    }
    let s = (theta_ma + phi).powf(xi);
    let hf = h as f64;
    let num = phi.powf(xi * (hf - 1.0)) * s + phi.powf(xi * hf) * s / (1.0 - q);
    let den = 1.0 + s / (1.0 - q);
    Ok(num / den)
}

/// `(1 - rho(h)) E[X] + rho(h) delta(0)`.
pub fn copula_tmes_from_extremogram(rho_h: f64, mean_x: f64, delta0: f64) -> Result<f64> {
    check_range("rho_h", rho_h, (0.0..=1.0).contains(&rho_h), "must lie in [0, 1]")?;
    Ok((1.0 - rho_h) * mean_x + rho_h * delta0)
}

/// Centered form: `rho(h) * delta_0(0)`.
pub fn copula_centered_tmes(rho_h: f64, centered_delta0: f64) -> Result<f64> {
    check_range("rho_h", rho_h, (0.0..=1.0).contains(&rho_h), "must lie in [0, 1]")?;
    Ok(rho_h * centered_delta0)
}

/// Monte-Carlo `E[X_{t+h} | Y_t > a]` at level `1 - 1/m_n`, pooling
/// exceedances of each path's own order-statistic threshold. The standard
/// error is the between-path spread of per-path means.
pub fn monte_carlo_tmes(
    model: &ModelSpec,
    m_n: usize,
    h: usize,
    paths: usize,
    path_len: usize,
    seed: u64,
) -> Result<OracleResult> {
    if paths < 2 {
        return Err(TmesError::InvalidParameter {
            name: "paths",
            value: paths as f64,
            bound: "must be at least 2",
        });
    }
    if h >= path_len {
        return Err(TmesError::LagOutOfRange { h, n: path_len });
    }
    let per_path: Vec<(f64, usize)> = (0..paths as u64)
        .into_par_iter()
        .map(|p| {
            let spec = ModelSpec {
                n: path_len,
                seed: derive_seed(seed, &[p]),
                ..*model
            };
            let ts = simulate(&spec)?;
            let thr = select_threshold(ts.y(), m_n)?;
            let (x, y) = (ts.x(), ts.y());
            let mut sum = 0.0;
            let mut count = 0usize;
            for t in 0..path_len - h {
                if y[t] > thr.a {
                    sum += x[t + h];
                    count += 1;
                }
            }
            Ok((sum, count))
        })
        .collect::<Result<_>>()?;

    let total: usize = per_path.iter().map(|p| p.1).sum();
    if total < 1000 {
        return Err(TmesError::InsufficientSample {
            got: total,
            need: 1000,
        });
    }
    let value = per_path.iter().map(|p| p.0).sum::<f64>() / total as f64;
    let means: Vec<f64> = per_path
        .iter()
        .filter(|p| p.1 > 0)
        .map(|p| p.0 / p.1 as f64)
        .collect();
    let se = stats::std_dev(&means) / (means.len() as f64).sqrt();
    Ok(OracleResult {
        value,
        method: OracleMethod::MonteCarlo,
        error_estimate: Some(se),
        params: json!({
            "model": model, "m_n": m_n, "h": h,
            "paths": paths, "path_len": path_len, "seed": seed,
            "exceedances": total,
        }),
    })
}

/// Monte-Carlo `delta(0) = E[X_t | Y_t > a]`.
pub fn monte_carlo_delta0(
    model: &ModelSpec,
    m_n: usize,
    paths: usize,
    path_len: usize,
    seed: u64,
) -> Result<OracleResult> {
    monte_carlo_tmes(model, m_n, 0, paths, path_len, seed)
}

// ---------------------------------------------------------------------------
// Brute force

/// Naive double-loop evaluation of the empirical TMES, sharing no code with
/// the estimator.
#[allow(clippy::needless_range_loop)]
pub fn brute_force_tmes(ts: &TimeSeriesPair, spec: &ThresholdSpec, h: usize) -> Result<f64> {
    let x = ts.x();
    let y = ts.y();
    let n = x.len();
    if h >= n {
        return Err(TmesError::LagOutOfRange { h, n });
    }
    let mut acc = 0.0;
    for t in 0..n {
        for s in 0..n {
            if s + h == t && y[s] > spec.a {
                acc += x[t];
            }
        }
    }
    Ok(spec.m_n as f64 / n as f64 * acc)
}
