//! Estimation of the time-lagged marginal expected shortfall (TMES)
//! `delta(h) = E[X_t | Y_{t-h} > a]` for bivariate time series, with
//! stationary-bootstrap confidence bands, simulators for max-moving-average,
//! ARMA-copula and GARCH-copula models, and independent oracle values.

pub mod bootstrap;
pub mod error;
pub mod extremal;
pub mod io;
pub mod models;
pub mod oracles;
pub mod rng;
pub mod rolling;
pub mod stats;

pub use bootstrap::{
    bootstrap_tmes_replicates, make_block_plan, percentile_ci, qq_against_normal, resample_series,
    BlockPlan, BootstrapReplicates, CiMethod,
};
pub use error::{Result, TmesError};
pub use extremal::{
    centered_empirical_tmes, empirical_tmes, exceedance_indicators, plugin_variance,
    sample_extremogram, select_threshold, IndicatorSeries, ThresholdSpec, TimeSeriesPair,
    TmesCurve,
};
pub use models::{Copula, ModelKind, ModelSpec};
pub use oracles::{OracleMethod, OracleResult};
pub use rolling::{DatedSeries, RollingConfig, WindowResult};
