use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tmes_core::io::{write_curve_csv, write_pair_csv, write_qq_csv, write_replicates_csv, write_windows_csv};
use tmes_core::oracles::{
    arma_extremogram_closed_form, copula_tmes_from_extremogram, mma_joint_cdf, mma_marginal_cdf,
    mma_tmes_oracle, monte_carlo_tmes, IntegrationGrid,
};
use tmes_core::rng::derive_seed;
use tmes_core::rolling::{align, ingest_csv, rolling_tmes, AlignPolicy};
use tmes_core::{
    bootstrap_tmes_replicates, io, qq_against_normal, select_threshold, stats, BootstrapReplicates, CiMethod,
    ModelKind, ModelSpec, OracleMethod, OracleResult, RollingConfig, TmesCurve,
};

use crate::config::{ensure_seed, layered, load, merge, resolve, Overlay};
use crate::{
    model, BootstrapArgs, EstimateArgs, Failure, Format, ModelName, OracleCommand, OracleOut, PairArgs,
    ResampleArgs, SimulateArgs, WindowArgs,
};

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, bytes)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn compact<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable config")
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serializable output");
    s.push(b'\n');
    s
}

fn require<T>(v: Option<T>, what: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("missing {what}")))
}

// ---------------------------------------------------------------------------
// simulate

pub fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let file = a.out.config.as_deref().map(load).transpose()?;
    let mut v = model::resolve(file.as_ref(), &a.model, ModelName::Mma)?;
    let mut rest = json!({ "n": 2000, "burn_in": tmes_core::models::DEFAULT_BURN_IN });
    if let Some(f) = &file {
        for k in ["n", "burn_in", "seed"] {
            if let Some(x) = f.get(k) {
                rest[k] = x.clone();
            }
        }
    }
    let mut flags = Overlay::default();
    flags.set("n", a.n).set("burn_in", a.burn_in).set("seed", a.seed);
    merge(&mut rest, flags.into_value());
    merge(&mut v, rest);
    ensure_seed(&mut v)?;
    let spec: ModelSpec = resolve(v)?;
    spec.validate()?;
    let ts = tmes_core::models::simulate(&spec)?;

    let bytes = match a.out.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_pair_csv(&mut buf, &ts, &[("config", compact(&spec))])?;
            buf
        }
        Format::Json => pretty(&json!({ "config": spec, "x": ts.x(), "y": ts.y() })),
    };
    emit(a.out.output.as_deref(), &bytes)
}

// ---------------------------------------------------------------------------
// estimate / bootstrap

#[derive(Debug, Serialize, Deserialize)]
struct PairConfig {
    input: Option<PathBuf>,
    x_col: String,
    y_col: String,
    m_n: usize,
    lags: Vec<usize>,
    centered: bool,
}

fn pair_defaults() -> Value {
    json!({
        "input": null, "x_col": "x", "y_col": "y", "m_n": 20,
        "lags": (0..=10).collect::<Vec<usize>>(), "centered": false,
    })
}

fn pair_flags(p: &PairArgs, flags: &mut Overlay) {
    flags
        .set("input", p.input.clone())
        .set("x_col", p.x_col.clone())
        .set("y_col", p.y_col.clone())
        .set("m_n", p.m_n)
        .set("lags", p.lags.clone().or(p.h_max.map(|h| (0..=h).collect())))
        .set("centered", p.centered.then_some(true));
}

fn resample_defaults() -> Value {
    json!({ "theta": 0.1, "B": 300, "level": 0.9, "ci": CiMethod::Percentile })
}

fn resample_flags(r: &ResampleArgs, flags: &mut Overlay) {
    flags
        .set("theta", r.theta)
        .set("B", r.b)
        .set("level", r.level)
        .set("ci", r.ci)
        .set("seed", r.seed);
}

struct LoadedPair {
    ts: tmes_core::TimeSeriesPair,
    spec: tmes_core::ThresholdSpec,
    shift: f64,
}

fn load_pair(cfg: &PairConfig) -> Result<LoadedPair, Failure> {
    let input = require(cfg.input.as_deref(), "--input")?;
    if cfg.lags.is_empty() {
        return Err(Failure::Usage("lag set is empty".into()));
    }
    let ts = io::read_pair_csv(input, &cfg.x_col, &cfg.y_col)?;
    let spec = select_threshold(ts.y(), cfg.m_n)?;
    let shift = if cfg.centered { stats::mean(ts.x()) } else { 0.0 };
    Ok(LoadedPair { ts, spec, shift })
}

fn write_curve(out: &crate::OutputArgs, curve: &TmesCurve, config: &impl Serialize) -> Result<(), Failure> {
    let bytes = match out.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_curve_csv(&mut buf, curve, &[("config", compact(config))])?;
            buf
        }
        Format::Json => pretty(&json!({ "config": config, "curve": curve })),
    };
    emit(out.output.as_deref(), &bytes)
}

pub fn estimate(a: EstimateArgs) -> Result<(), Failure> {
    let mut flags = Overlay::default();
    pair_flags(&a.pair, &mut flags);
    let cfg: PairConfig = resolve(layered(pair_defaults(), a.out.config.as_deref(), flags.into_value())?)?;
    let p = load_pair(&cfg)?;
    let values = cfg
        .lags
        .iter()
        .map(|&h| tmes_core::empirical_tmes(&p.ts, &p.spec, h).map(|v| v - p.shift))
        .collect::<Result<Vec<_>, _>>()?;
    let curve = TmesCurve {
        lags: cfg.lags.clone(),
        values,
        centered: cfg.centered,
        bands: None,
        level: None,
    };
    write_curve(&a.out, &curve, &cfg)
}

#[derive(Debug, Serialize, Deserialize)]
struct BootstrapConfig {
    #[serde(flatten)]
    pair: PairConfig,
    theta: f64,
    #[serde(rename = "B")]
    b: usize,
    level: f64,
    ci: CiMethod,
    seed: u64,
}

pub fn bootstrap(a: BootstrapArgs) -> Result<(), Failure> {
    let mut defaults = pair_defaults();
    merge(&mut defaults, resample_defaults());
    let mut flags = Overlay::default();
    pair_flags(&a.pair, &mut flags);
    resample_flags(&a.resample, &mut flags);
    let mut v = layered(defaults, a.out.config.as_deref(), flags.into_value())?;
    ensure_seed(&mut v)?;
    let cfg: BootstrapConfig = resolve(v)?;
    let p = load_pair(&cfg.pair)?;

    let mut all: Vec<BootstrapReplicates> = Vec::with_capacity(cfg.pair.lags.len());
    let mut bands = Vec::with_capacity(cfg.pair.lags.len());
    for &h in &cfg.pair.lags {
        let reps = bootstrap_tmes_replicates(&p.ts, &p.spec, h, cfg.theta, cfg.b, derive_seed(cfg.seed, &[h as u64]))?
            .shifted(p.shift);
        bands.push(cfg.ci.interval(&reps, cfg.level)?);
        all.push(reps);
    }
    let curve = TmesCurve {
        lags: cfg.pair.lags.clone(),
        values: all.iter().map(|r| r.point).collect(),
        centered: cfg.pair.centered,
        bands: Some(bands),
        level: Some(cfg.level),
    };
    let meta = [("config", compact(&cfg))];
    if let Some(path) = &a.qq {
        let qq = all
            .iter()
            .map(|r| qq_against_normal(r).map(|pairs| (r.lag, pairs)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut buf = Vec::new();
        write_qq_csv(&mut buf, &qq, &meta)?;
        emit(Some(path), &buf)?;
    }
    if let Some(path) = &a.replicates {
        let mut buf = Vec::new();
        write_replicates_csv(&mut buf, &all, &meta)?;
        emit(Some(path), &buf)?;
    }
    write_curve(&a.out, &curve, &cfg)
}

// ---------------------------------------------------------------------------
// window

#[derive(Debug, Serialize, Deserialize)]
struct WindowConfig {
    x_file: Option<PathBuf>,
    y_file: Option<PathBuf>,
    date_col: String,
    x_col: String,
    y_col: String,
    align: AlignPolicy,
    #[serde(flatten)]
    rolling: RollingConfig,
}

pub fn window(a: WindowArgs) -> Result<(), Failure> {
    let base = RollingConfig::default();
    let mut defaults = json!({
        "x_file": null, "y_file": null, "date_col": "date", "x_col": "x", "y_col": "y",
        "align": AlignPolicy::Intersect,
        "window": base.window, "lags": base.lags, "m_n": base.m_n,
    });
    merge(&mut defaults, resample_defaults());
    let align_policy = a
        .align
        .as_deref()
        .map(str::parse::<AlignPolicy>)
        .transpose()
        .map_err(Failure::Usage)?;
    let mut flags = Overlay::default();
    flags
        .set("x_file", a.x_file.clone().or(a.input.clone()))
        .set("y_file", a.y_file.clone().or(a.input.clone()))
        .set("date_col", a.date_col.clone())
        .set("x_col", a.x_col.clone())
        .set("y_col", a.y_col.clone())
        .set("align", align_policy)
        .set("window", a.window)
        .set("lags", a.lags.clone())
        .set("m_n", a.m_n);
    resample_flags(&a.resample, &mut flags);
    let mut v = layered(defaults, a.out.config.as_deref(), flags.into_value())?;
    ensure_seed(&mut v)?;
    let cfg: WindowConfig = resolve(v)?;

    let xf = require(cfg.x_file.as_deref(), "--input or --x-file")?;
    let yf = require(cfg.y_file.as_deref(), "--input or --y-file")?;
    let xs = ingest_csv(xf, &cfg.date_col, &cfg.x_col)?;
    let ys = ingest_csv(yf, &cfg.date_col, &cfg.y_col)?;
    let pair = align(&xs, &ys, cfg.align)?;
    let results = rolling_tmes(&pair.pair, Some(&pair.dates), &cfg.rolling)?;

    let bytes = match a.out.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_windows_csv(&mut buf, &results, &[("config", compact(&cfg))])?;
            buf
        }
        Format::Json => pretty(&json!({ "config": cfg, "windows": results })),
    };
    emit(a.out.output.as_deref(), &bytes)
}

// ---------------------------------------------------------------------------
// oracle

fn emit_oracle(out: &OracleOut, r: &OracleResult) -> Result<(), Failure> {
    emit(out.output.as_deref(), &pretty(&serde_json::to_value(r).expect("serializable result")))
}

#[derive(Debug, Serialize, Deserialize)]
struct ArmaParams {
    h: usize,
    phi: f64,
    theta_ma: f64,
    xi: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct MmaDeltaParams {
    h: usize,
    xi: f64,
    phi: f64,
    m_n: usize,
    step: Option<f64>,
    cutoff: Option<f64>,
    trunc: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MmaCdfParams {
    x: Option<f64>,
    y: Option<f64>,
    h: usize,
    xi: f64,
    phi: f64,
    trunc: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CopulaParams {
    rho_h: Option<f64>,
    mean_x: Option<f64>,
    delta0: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct McParams {
    model: ModelKind,
    burn_in: usize,
    m_n: usize,
    h: usize,
    paths: usize,
    path_len: usize,
    seed: u64,
}

fn closed_form(value: f64, params: &impl Serialize) -> OracleResult {
    OracleResult {
        value,
        method: OracleMethod::ClosedForm,
        error_estimate: None,
        params: serde_json::to_value(params).expect("serializable params"),
    }
}

pub fn oracle(cmd: OracleCommand) -> Result<(), Failure> {
    match cmd {
        OracleCommand::ArmaExtremogram { h, phi, theta_ma, xi, out } => {
            let mut f = Overlay::default();
            f.set("h", h).set("phi", phi).set("theta_ma", theta_ma).set("xi", xi);
            let defaults = json!({ "h": 1, "phi": 0.2, "theta_ma": 0.8, "xi": 6.0 });
            let p: ArmaParams = resolve(layered(defaults, out.config.as_deref(), f.into_value())?)?;
            let value = arma_extremogram_closed_form(p.h, p.phi, p.theta_ma, p.xi)?;
            emit_oracle(&out, &closed_form(value, &p))
        }
        OracleCommand::MmaDelta { h, xi, phi, m_n, step, cutoff, trunc, out } => {
            let mut f = Overlay::default();
            f.set("h", h)
                .set("xi", xi)
                .set("phi", phi)
                .set("m_n", m_n)
                .set("step", step)
                .set("cutoff", cutoff)
                .set("trunc", trunc);
            let defaults = json!({
                "h": 0, "xi": 4.0, "phi": 0.8, "m_n": 20, "step": null, "cutoff": null, "trunc": null,
            });
            let p: MmaDeltaParams = resolve(layered(defaults, out.config.as_deref(), f.into_value())?)?;
            let grid = IntegrationGrid { step: p.step, cutoff: p.cutoff, trunc: p.trunc };
            let mut r = mma_tmes_oracle(p.h, p.xi, p.phi, p.m_n, grid)?;
            let used = std::mem::take(&mut r.params);
            let mut params = serde_json::to_value(&p).expect("serializable params");
            params["threshold"] = used["threshold"].clone();
            params["grid_used"] = json!({
                "step": used["step"], "cutoff": used["cutoff"], "trunc": used["trunc"],
            });
            r.params = params;
            emit_oracle(&out, &r)
        }
        OracleCommand::MmaCdf { x, y, h, xi, phi, trunc, out } => {
            let mut f = Overlay::default();
            f.set("x", x).set("y", y).set("h", h).set("xi", xi).set("phi", phi).set("trunc", trunc);
            let defaults = json!({ "x": null, "y": null, "h": 0, "xi": 4.0, "phi": 0.8, "trunc": null });
            let p: MmaCdfParams = resolve(layered(defaults, out.config.as_deref(), f.into_value())?)?;
            let xv = require(p.x, "--x")?;
            tmes_core::ModelKind::Mma { xi: p.xi, phi: p.phi, trunc: None }.validate()?;
            let value = match p.y {
                Some(yv) => mma_joint_cdf(xv, yv, p.h, p.xi, p.phi, p.trunc),
                None => mma_marginal_cdf(xv, p.xi, p.phi),
            };
            emit_oracle(&out, &closed_form(value, &p))
        }
        OracleCommand::CopulaDelta { rho_h, mean_x, delta0, out } => {
            let mut f = Overlay::default();
            f.set("rho_h", rho_h).set("mean_x", mean_x).set("delta0", delta0);
            let defaults = json!({ "rho_h": null, "mean_x": null, "delta0": null });
            let p: CopulaParams = resolve(layered(defaults, out.config.as_deref(), f.into_value())?)?;
            let value = copula_tmes_from_extremogram(
                require(p.rho_h, "--rho-h")?,
                require(p.mean_x, "--mean-x")?,
                require(p.delta0, "--delta0")?,
            )?;
            emit_oracle(&out, &closed_form(value, &p))
        }
        OracleCommand::McDelta0 { model: margs, m_n, h, paths, path_len, seed, out } => {
            let file = out.config.as_deref().map(load).transpose()?;
            let kind = model::resolve(file.as_ref().and_then(|f| f.get("model")), &margs, ModelName::Arma)?;
            let mut defaults = json!({
                "burn_in": tmes_core::models::DEFAULT_BURN_IN, "m_n": 20, "h": 0, "paths": 100, "path_len": 2000,
            });
            if let Some(f) = file {
                merge(&mut defaults, f);
            }
            let mut f = Overlay::default();
            f.set("m_n", m_n).set("h", h).set("paths", paths).set("path_len", path_len).set("seed", seed);
            merge(&mut defaults, f.into_value());
            defaults["model"] = kind;
            ensure_seed(&mut defaults)?;
            let p: McParams = resolve(defaults)?;
            let spec = ModelSpec { kind: p.model, n: p.path_len, burn_in: p.burn_in, seed: p.seed };
            spec.validate()?;
            let mut r = monte_carlo_tmes(&spec, p.m_n, p.h, p.paths, p.path_len, p.seed)?;
            let exceedances = r.params["exceedances"].clone();
            let mut params = serde_json::to_value(&p).expect("serializable params");
            params["exceedances"] = exceedances;
            r.params = params;
            emit_oracle(&out, &r)
        }
    }
}
