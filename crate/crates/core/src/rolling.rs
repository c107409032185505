//! Moving-window centered TMES with per-window bootstrap bands.
//!
//! Each window is estimated on its own: the threshold comes from the
//! window's `y`, centering uses the window's mean of `x`, and the bootstrap
//! for window end `w` and lag `h` is seeded from `(seed, w, h)`. A window's
//! result is therefore identical to a standalone run on the extracted
//! sub-series.

use std::collections::HashSet;
use std::path::Path;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_tmes_replicates, check_theta, CiMethod};
use crate::error::{Result, TmesError};
use crate::extremal::{check_level, select_threshold, TimeSeriesPair};
use crate::rng::derive_seed;
use crate::stats;

/// A named series indexed by strictly increasing dates.
#[derive(Debug, Clone, PartialEq)]
pub struct DatedSeries {
    pub name: String,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl DatedSeries {
    /// Sorts by date and checks for duplicates and non-finite values.
    pub fn new(name: impl Into<String>, mut rows: Vec<(NaiveDate, f64)>) -> Result<Self> {
        let name = name.into();
        rows.sort_by_key(|r| r.0);
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(TmesError::DuplicateDate {
                path: name.clone().into(),
                date: w[0].0.to_string(),
            });
        }
        if let Some(index) = rows.iter().position(|r| !r.1.is_finite()) {
            return Err(TmesError::NonFinite { index });
        }
        let (dates, values) = rows.into_iter().unzip();
        Ok(Self {
            name,
            dates,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Reads `date_col` (ISO-8601 `YYYY-MM-DD`) and `value_col` from a headed CSV
/// file; `#` lines are comments.
pub fn ingest_csv(path: &Path, date_col: &str, value_col: &str) -> Result<DatedSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| TmesError::MissingColumn {
                path: path.to_path_buf(),
                column: name.to_string(),
            })
    };
    let di = column(date_col)?;
    let vi = column(value_col)?;

    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let parse_err = |msg: String| TmesError::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let ds = rec.get(di).unwrap_or("");
        let date = NaiveDate::parse_from_str(ds, "%Y-%m-%d")
            .map_err(|e| parse_err(format!("bad date `{ds}`: {e}")))?;
        let vs = rec.get(vi).unwrap_or("");
        let value: f64 = vs
            .parse()
            .map_err(|e| parse_err(format!("bad value `{vs}`: {e}")))?;
        if !value.is_finite() {
            return Err(parse_err(format!("non-finite value `{vs}`")));
        }
        if !seen.insert(date) {
            return Err(TmesError::DuplicateDate {
                path: path.to_path_buf(),
                date: ds.to_string(),
            });
        }
        rows.push((date, value));
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    DatedSeries::new(name, rows)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlignPolicy {
    /// Keep only dates present in both series.
    #[default]
    Intersect,
    /// Fail unless both series share the same calendar.
    ErrorOnGap,
}

impl std::str::FromStr for AlignPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "intersect" => Ok(AlignPolicy::Intersect),
            "error-on-gap" => Ok(AlignPolicy::ErrorOnGap),
            other => Err(format!("unknown alignment policy `{other}` (intersect|error-on-gap)")),
        }
    }
}

/// A [`TimeSeriesPair`] together with its shared calendar.
#[derive(Debug, Clone, PartialEq)]
pub struct DatedPair {
    pub dates: Vec<NaiveDate>,
    pub pair: TimeSeriesPair,
}

/// Aligns `x` (response) and `y` (conditioning series) on common dates.
pub fn align(x: &DatedSeries, y: &DatedSeries, policy: AlignPolicy) -> Result<DatedPair> {
    if x.is_empty() || y.is_empty() {
        return Err(TmesError::EmptyIntersection);
    }
    if policy == AlignPolicy::ErrorOnGap && x.dates != y.dates {
        let only_x = x.dates.iter().find(|d| y.dates.binary_search(d).is_err());
        let only_y = y.dates.iter().find(|d| x.dates.binary_search(d).is_err());
        let msg = match (only_x, only_y) {
            (Some(d), _) => format!("{d} present in `{}` only", x.name),
            (_, Some(d)) => format!("{d} present in `{}` only", y.name),
            _ => "calendars differ".to_string(),
        };
        return Err(TmesError::CalendarGap(msg));
    }
    let mut dates = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < x.len() && j < y.len() {
        match x.dates[i].cmp(&y.dates[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                dates.push(x.dates[i]);
                xs.push(x.values[i]);
                ys.push(y.values[j]);
                i += 1;
                j += 1;
            }
        }
    }
    if dates.is_empty() {
        return Err(TmesError::EmptyIntersection);
    }
    Ok(DatedPair {
        dates,
        pair: TimeSeriesPair::new(xs, ys)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingConfig {
    pub window: usize,
    pub lags: Vec<usize>,
    pub m_n: usize,
    pub theta: f64,
    #[serde(rename = "B")]
    pub b: usize,
    pub level: f64,
    pub seed: u64,
    #[serde(default)]
    pub ci: CiMethod,
}

impl Default for RollingConfig {
    fn default() -> Self {
        Self {
            window: 200,
            lags: vec![0, 1, 3, 7],
            m_n: 20,
            theta: 0.1,
            b: 300,
            level: 0.9,
            seed: 0,
            ci: CiMethod::Percentile,
        }
    }
}

impl RollingConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        let max_lag = self.lags.iter().copied().max().ok_or_else(|| {
            TmesError::InvalidWindow("lag set is empty".into())
        })?;
        if self.window > n {
            return Err(TmesError::InvalidWindow(format!(
                "window {} exceeds series length {n}",
                self.window
            )));
        }
        if self.window < max_lag + 2 {
            return Err(TmesError::InvalidWindow(format!(
                "window {} must be at least max lag + 2 = {}",
                self.window,
                max_lag + 2
            )));
        }
        if self.m_n < 1 || self.m_n > self.window {
            return Err(TmesError::InvalidLevel {
                m_n: self.m_n,
                n: self.window,
            });
        }
        if self.b == 0 {
            return Err(TmesError::InvalidParameter {
                name: "B",
                value: 0.0,
                bound: "must be at least 1",
            });
        }
        check_theta(self.theta)?;
        check_level(self.level)
    }
}

/// Centered TMES and band per lag for one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    /// 1-based position of the last observation in the window.
    pub end: usize,
    pub end_date: Option<NaiveDate>,
    pub lags: Vec<usize>,
    pub delta0: Vec<f64>,
    pub bands: Vec<(f64, f64)>,
    pub window_size: usize,
    pub m_n: usize,
    pub theta: f64,
    #[serde(rename = "B")]
    pub b: usize,
}

/// Bootstrap seed for window end `end` (1-based) and lag `h`.
pub fn window_seed(seed: u64, end: usize, h: usize) -> u64 {
    derive_seed(seed, &[end as u64, h as u64])
}

/// Estimates one window from its extracted sub-series. `end` only feeds the
/// seed derivation.
pub fn estimate_window(window: &TimeSeriesPair, end: usize, cfg: &RollingConfig) -> Result<WindowResult> {
    let spec = select_threshold(window.y(), cfg.m_n)?;
    let mean_x = stats::mean(window.x());
    let mut delta0 = Vec::with_capacity(cfg.lags.len());
    let mut bands = Vec::with_capacity(cfg.lags.len());
    for &h in &cfg.lags {
        let reps = bootstrap_tmes_replicates(
            window,
            &spec,
            h,
            cfg.theta,
            cfg.b,
            window_seed(cfg.seed, end, h),
        )?
        .shifted(mean_x);
        delta0.push(reps.point);
        bands.push(cfg.ci.interval(&reps, cfg.level)?);
    }
    Ok(WindowResult {
        end,
        end_date: None,
        lags: cfg.lags.clone(),
        delta0,
        bands,
        window_size: window.len(),
        m_n: cfg.m_n,
        theta: cfg.theta,
        b: cfg.b,
    })
}

/// Slides a window of `cfg.window` observations one step at a time over
/// `ts`, producing `n - window + 1` results ordered by end position.
pub fn rolling_tmes(
    ts: &TimeSeriesPair,
    dates: Option<&[NaiveDate]>,
    cfg: &RollingConfig,
) -> Result<Vec<WindowResult>> {
    let n = ts.len();
    cfg.validate(n)?;
    if let Some(d) = dates {
        if d.len() != n {
            return Err(TmesError::LengthMismatch {
                left: d.len(),
                right: n,
            });
        }
    }
    (cfg.window..=n)
        .into_par_iter()
        .map(|end| {
            let sub = ts.slice(end - cfg.window, end)?;
            let mut r = estimate_window(&sub, end, cfg)?;
            r.end_date = dates.map(|d| d[end - 1]);
            Ok(r)
        })
        .collect()
}
