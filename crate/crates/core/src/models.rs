//! Seeded simulators for the three model classes:
//!
//! * max-moving averages of an iid Fréchet field on the integer lattice,
//!   read off along two neighbouring rows;
//! * an ARMA(1,1) recursion with Fréchet innovations, coupled to a
//!   standard-normal `x` through a Gaussian or Student-t copula;
//! * a GARCH(1,1) recursion with Gaussian innovations, coupled the same way.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{check_range, Result, TmesError};
use crate::extremal::TimeSeriesPair;
use crate::rng::{derive_seed, open_unit, substream};
use crate::stats;

/// Default cap on the number of Fréchet field cells one MMA path may allocate.
pub const DEFAULT_FIELD_BUDGET: usize = 64_000_000;

pub const DEFAULT_BURN_IN: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Copula {
    Gaussian { rho: f64 },
    StudentT { rho: f64, df: f64 },
}

impl Copula {
    pub fn validate(&self) -> Result<()> {
        let rho = match *self {
            Copula::Gaussian { rho } => rho,
            Copula::StudentT { rho, df } => {
                check_range("df", df, df > 0.0, "must be > 0")?;
                rho
            }
        };
        check_range("rho", rho, (-1.0..=1.0).contains(&rho), "must lie in [-1, 1]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelKind {
    /// Max-moving average with weights `phi^{|s1|+|s2|}` on `|s1|+|s2| <= L`.
    /// `trunc = None` selects the effective radius for `L = infinity`.
    Mma {
        xi: f64,
        phi: f64,
        trunc: Option<usize>,
    },
    ArmaCopula {
        phi: f64,
        theta_ma: f64,
        xi: f64,
        copula: Copula,
    },
    GarchCopula {
        omega: f64,
        alpha: f64,
        beta: f64,
        copula: Copula,
    },
}

impl ModelKind {
    pub fn mma() -> Self {
        ModelKind::Mma {
            xi: 4.0,
            phi: 0.8,
            trunc: None,
        }
    }

    pub fn arma_gaussian() -> Self {
        ModelKind::ArmaCopula {
            phi: 0.2,
            theta_ma: 0.8,
            xi: 6.0,
            copula: Copula::Gaussian { rho: 0.6 },
        }
    }

    pub fn garch_t() -> Self {
        ModelKind::GarchCopula {
            omega: 0.2,
            alpha: 0.3,
            beta: 0.3,
            copula: Copula::StudentT { rho: 0.7, df: 3.0 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelKind::Mma { xi, phi, .. } => {
                check_range("xi", xi, xi > 0.0, "must be > 0")?;
                check_range("phi", phi, phi > 0.0 && phi < 1.0, "must lie in (0, 1)")
            }
            ModelKind::ArmaCopula {
                phi,
                theta_ma,
                xi,
                copula,
            } => {
                check_range("phi", phi, phi.abs() < 1.0, "must satisfy |phi| < 1")?;
                check_range("theta_ma", theta_ma, true, "must be finite")?;
                check_range("xi", xi, xi > 0.0, "must be > 0")?;
                copula.validate()
            }
            ModelKind::GarchCopula {
                omega,
                alpha,
                beta,
                copula,
            } => {
                check_garch(omega, alpha, beta)?;
                copula.validate()
            }
        }
    }
}

/// A model together with sample length, burn-in and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub kind: ModelKind,
    pub n: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, n: usize, seed: u64) -> Self {
        Self {
            kind,
            n,
            burn_in: DEFAULT_BURN_IN,
            seed,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(TmesError::TooShort {
                min: 2,
                got: self.n,
            });
        }
        self.kind.validate()
    }
}

/// Simulates one `(x, y)` path of the model.
pub fn simulate(spec: &ModelSpec) -> Result<TimeSeriesPair> {
    spec.validate()?;
    match spec.kind {
        ModelKind::Mma { xi, phi, trunc } => simulate_mma_pair(xi, phi, trunc, spec.n, spec.seed),
        ModelKind::ArmaCopula {
            phi,
            theta_ma,
            xi,
            copula,
        } => {
            let y = simulate_arma_frechet(phi, theta_ma, xi, spec.n, spec.burn_in, spec.seed)?;
            let x = copula_couple(&y, &copula, derive_seed(spec.seed, &[1]))?;
            TimeSeriesPair::new(x, y)
        }
        ModelKind::GarchCopula {
            omega,
            alpha,
            beta,
            copula,
        } => {
            let y = simulate_garch(omega, alpha, beta, spec.n, spec.burn_in, spec.seed)?;
            let x = copula_couple(&y, &copula, derive_seed(spec.seed, &[1]))?;
            TimeSeriesPair::new(x, y)
        }
    }
}

/// Fréchet(xi) quantile function: `(-ln u)^{-1/xi}`.
#[inline]
pub fn frechet_from_uniform(u: f64, xi: f64) -> f64 {
    (-u.ln()).powf(-1.0 / xi)
}

pub fn frechet_sample<R: Rng + ?Sized>(xi: f64, rng: &mut R) -> f64 {
    frechet_from_uniform(open_unit(rng), xi)
}

// ---------------------------------------------------------------------------
// Max-moving averages

/// Truncation radius beyond which all weights fall below `1e-6`.
pub fn effective_radius(phi: f64) -> usize {
    (6.0 * std::f64::consts::LN_10 / (1.0 / phi).ln()).ceil() as usize
}

/// Innovation field on rows `-L..=1+L` and columns `1-L..=n+L`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FrechetField {
    pub radius: usize,
    pub n: usize,
    pub values: Vec<f64>,
}

impl FrechetField {
    pub fn rows(radius: usize) -> usize {
        2 * radius + 2
    }

    pub fn cols(radius: usize, n: usize) -> usize {
        n + 2 * radius
    }

    /// Value of `Z_{i, t}` for lattice row `i` and time `t` (1-based).
    pub fn get(&self, i: i64, t: i64) -> f64 {
        let l = self.radius as i64;
        let r = (i + l) as usize;
        let c = (t + l - 1) as usize;
        self.values[r * Self::cols(self.radius, self.n) + c]
    }

    pub fn set(&mut self, i: i64, t: i64, v: f64) {
        let l = self.radius as i64;
        let r = (i + l) as usize;
        let c = (t + l - 1) as usize;
        let cols = Self::cols(self.radius, self.n);
        self.values[r * cols + c] = v;
    }

    pub fn sample<R: Rng + ?Sized>(
        xi: f64,
        radius: usize,
        n: usize,
        budget: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let cells = Self::rows(radius).saturating_mul(Self::cols(radius, n));
        if cells > budget {
            return Err(TmesError::MemoryBudget { cells, budget });
        }
        let values = (0..cells).map(|_| frechet_sample(xi, rng)).collect();
        Ok(Self { radius, n, values })
    }
}

/// Evaluates `max_{|s1|+|s2| <= L} phi^{|s1|+|s2|} Z_{i-s1, t-s2}` for rows
/// `i = 0` (x) and `i = 1` (y), `t = 1..=n`.
pub fn mma_from_field(field: &FrechetField, phi: f64) -> (Vec<f64>, Vec<f64>) {
    let l = field.radius as i64;
    let n = field.n;
    let cols = FrechetField::cols(field.radius, n);
    let mut out = [vec![0.0f64; n], vec![0.0f64; n]];
    for s1 in -l..=l {
        let rest = l - s1.abs();
        for s2 in -rest..=rest {
            let w = phi.powi((s1.abs() + s2.abs()) as i32);
            for (i0, row_out) in out.iter_mut().enumerate() {
                let r = (i0 as i64 - s1 + l) as usize;
                let c0 = (l - s2) as usize;
                let src = &field.values[r * cols + c0..r * cols + c0 + n];
                for (o, &z) in row_out.iter_mut().zip(src) {
                    let v = w * z;
                    if v > *o {
                        *o = v;
                    }
                }
            }
        }
    }
    let [x, y] = out;
    (x, y)
}

pub fn simulate_mma_pair(
    xi: f64,
    phi: f64,
    trunc: Option<usize>,
    n: usize,
    seed: u64,
) -> Result<TimeSeriesPair> {
    simulate_mma_pair_with_budget(xi, phi, trunc, n, seed, DEFAULT_FIELD_BUDGET)
}

pub fn simulate_mma_pair_with_budget(
    xi: f64,
    phi: f64,
    trunc: Option<usize>,
    n: usize,
    seed: u64,
    budget: usize,
) -> Result<TimeSeriesPair> {
    ModelKind::Mma { xi, phi, trunc }.validate()?;
    let radius = trunc.unwrap_or_else(|| effective_radius(phi));
    let mut rng = substream(seed, &[0]);
    let field = FrechetField::sample(xi, radius, n, budget, &mut rng)?;
    let (x, y) = mma_from_field(&field, phi);
    TimeSeriesPair::new(x, y)
}

// ---------------------------------------------------------------------------
// ARMA(1,1) with Fréchet innovations

/// Runs `Y_t = phi Y_{t-1} + Z_t + theta Z_{t-1}` from `Y_0 = 0` over the
/// innovations `Z_0, Z_1, ...`, returning `Y_1, Y_2, ...`.
pub fn arma_recursion(innovations: &[f64], phi: f64, theta_ma: f64) -> Vec<f64> {
    let mut y_prev = 0.0;
    innovations
        .windows(2)
        .map(|z| {
            let y = phi * y_prev + z[1] + theta_ma * z[0];
            y_prev = y;
            y
        })
        .collect()
}

pub fn simulate_arma_frechet(
    phi: f64,
    theta_ma: f64,
    xi: f64,
    n: usize,
    burn_in: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_range("phi", phi, phi.abs() < 1.0, "must satisfy |phi| < 1")?;
    check_range("theta_ma", theta_ma, true, "must be finite")?;
    check_range("xi", xi, xi > 0.0, "must be > 0")?;
    let mut rng = substream(seed, &[0]);
    let z: Vec<f64> = (0..=burn_in + n).map(|_| frechet_sample(xi, &mut rng)).collect();
    let mut y = arma_recursion(&z, phi, theta_ma);
    Ok(y.split_off(burn_in))
}

// ---------------------------------------------------------------------------
// GARCH(1,1)

fn check_garch(omega: f64, alpha: f64, beta: f64) -> Result<()> {
    check_range("omega", omega, omega > 0.0, "must be > 0")?;
    check_range("alpha", alpha, alpha >= 0.0, "must be >= 0")?;
    check_range("beta", beta, beta >= 0.0, "must be >= 0")?;
    check_range(
        "alpha + beta",
        alpha + beta,
        alpha + beta < 1.0,
        "must be < 1 for stationarity",
    )
}

/// Unconditional variance `omega / (1 - alpha - beta)`.
pub fn garch_unconditional_variance(omega: f64, alpha: f64, beta: f64) -> Result<f64> {
    check_garch(omega, alpha, beta)?;
    Ok(omega / (1.0 - alpha - beta))
}

/// Runs the GARCH(1,1) recursion over standard-normal shocks, starting from
/// the unconditional variance. Returns `(y_t, sigma_t^2)`.
pub fn garch_recursion(shocks: &[f64], omega: f64, alpha: f64, beta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut s2 = garch_unconditional_variance(omega, alpha, beta)?;
    let mut y = Vec::with_capacity(shocks.len());
    let mut sig = Vec::with_capacity(shocks.len());
    for &z in shocks {
        let yt = s2.sqrt() * z;
        y.push(yt);
        sig.push(s2);
        s2 = omega + alpha * yt * yt + beta * s2;
    }
    Ok((y, sig))
}

pub fn simulate_garch(
    omega: f64,
    alpha: f64,
    beta: f64,
    n: usize,
    burn_in: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_garch(omega, alpha, beta)?;
    let mut rng = substream(seed, &[0]);
    let shocks: Vec<f64> = (0..burn_in + n)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let (mut y, _) = garch_recursion(&shocks, omega, alpha, beta)?;
    Ok(y.split_off(burn_in))
}

// ---------------------------------------------------------------------------
// Copula coupling

/// Draws `x` with standard-normal margin so that `(x_t, y_t)` follows the
/// copula, using rank-based uniforms `u_t = rank(y_t)/(n+1)`.
pub fn copula_couple(y: &[f64], copula: &Copula, seed: u64) -> Result<Vec<f64>> {
    copula.validate()?;
    if let Some(index) = y.iter().position(|v| !v.is_finite()) {
        return Err(TmesError::NonFinite { index });
    }
    let n = y.len();
    let mut rng = substream(seed, &[0]);
    let u = stats::ranks(y)
        .into_iter()
        .map(|r| r as f64 / (n + 1) as f64);
    match *copula {
        Copula::Gaussian { rho } => {
            let s = (1.0 - rho * rho).max(0.0).sqrt();
            Ok(u
                .map(|u| {
                    let eps: f64 = StandardNormal.sample(&mut rng);
                    rho * stats::norm_inv(u) + s * eps
                })
                .collect())
        }
        Copula::StudentT { rho, df } => {
            let marginal = StudentsT::new(0.0, 1.0, df).map_err(|_| TmesError::InvalidParameter {
                name: "df",
                value: df,
                bound: "must be > 0",
            })?;
            let cond = StudentT::new(df + 1.0).map_err(|_| TmesError::InvalidParameter {
                name: "df",
                value: df,
                bound: "must be > 0",
            })?;
            let s = (1.0 - rho * rho).max(0.0);
            Ok(u
                .map(|u| {
                    let a = marginal.inverse_cdf(u);
                    let scale = ((df + a * a) * s / (df + 1.0)).sqrt();
                    let t: f64 = cond.sample(&mut rng);
                    let b = rho * a + scale * t;
                    // Work in the lower tail to keep precision for large |b|.
                    if b > 0.0 {
                        -stats::norm_inv(marginal.cdf(-b))
                    } else {
                        stats::norm_inv(marginal.cdf(b))
                    }
                })
                .collect())
        }
    }
}
