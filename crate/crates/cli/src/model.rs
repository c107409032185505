//! Resolution of the model flags into a `ModelKind` JSON object.

use serde_json::Value;
use tmes_core::{Copula, ModelKind};

use crate::config::{merge, Overlay};
use crate::{CopulaName, Failure, ModelArgs, ModelName};

fn tag(name: ModelName) -> &'static str {
    match name {
        ModelName::Mma => "mma",
        ModelName::Arma => "arma-copula",
        ModelName::Garch => "garch-copula",
    }
}

fn default_kind(name: ModelName) -> ModelKind {
    match name {
        ModelName::Mma => ModelKind::mma(),
        ModelName::Arma => ModelKind::arma_gaussian(),
        ModelName::Garch => ModelKind::garch_t(),
    }
}

fn name_of(tag: &str) -> Result<ModelName, Failure> {
    match tag {
        "mma" => Ok(ModelName::Mma),
        "arma-copula" | "arma" => Ok(ModelName::Arma),
        "garch-copula" | "garch" => Ok(ModelName::Garch),
        other => Err(Failure::Usage(format!("unknown model `{other}`"))),
    }
}

fn default_copula(name: CopulaName) -> Copula {
    match name {
        CopulaName::Gaussian => Copula::Gaussian { rho: 0.6 },
        CopulaName::StudentT => Copula::StudentT { rho: 0.7, df: 3.0 },
    }
}

fn not_for(flag: &str, model: &str) -> Failure {
    Failure::Usage(format!("--{flag} does not apply to model `{model}`"))
}

/// Resolves the model: flags over `file` (a `ModelKind`-shaped object,
/// possibly with extra keys) over the model's defaults. Parameters from the
/// file are only kept when it names the same model.
pub fn resolve(file: Option<&Value>, args: &ModelArgs, fallback: ModelName) -> Result<Value, Failure> {
    let file_name = match file.and_then(|f| f.get("model")).and_then(Value::as_str) {
        Some(t) => Some(name_of(t)?),
        None => None,
    };
    let name = args.model.or(file_name).unwrap_or(fallback);
    let model = tag(name);
    let mut v = serde_json::to_value(default_kind(name)).expect("serializable model");
    if let Some(f) = file.filter(|_| file_name == Some(name)) {
        let keys: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
        for k in keys {
            if let Some(x) = f.get(&k) {
                merge(v.get_mut(&k).unwrap(), x.clone());
            }
        }
    }

    let has_copula = name != ModelName::Mma;
    let allowed: &[(&str, bool)] = &[
        ("xi", args.xi.is_some()),
        ("phi", args.phi.is_some()),
        ("trunc", args.trunc.is_some()),
        ("theta-ma", args.theta_ma.is_some()),
        ("omega", args.omega.is_some()),
        ("alpha", args.alpha.is_some()),
        ("beta", args.beta.is_some()),
    ];
    for &(flag, given) in allowed {
        if given && v.get(flag.replace('-', "_")).is_none() {
            return Err(not_for(flag, model));
        }
    }
    let mut flags = Overlay::default();
    flags
        .set("xi", args.xi)
        .set("phi", args.phi)
        .set("trunc", args.trunc)
        .set("theta_ma", args.theta_ma)
        .set("omega", args.omega)
        .set("alpha", args.alpha)
        .set("beta", args.beta);
    merge(&mut v, flags.into_value());

    if !has_copula {
        for (flag, given) in [("copula", args.copula.is_some()), ("rho", args.rho.is_some()), ("df", args.df.is_some())] {
            if given {
                return Err(not_for(flag, model));
            }
        }
        return Ok(v);
    }
    if let Some(c) = args.copula {
        let same = matches!(
            (c, v["copula"]["family"].as_str()),
            (CopulaName::Gaussian, Some("gaussian")) | (CopulaName::StudentT, Some("student-t"))
        );
        if !same {
            v["copula"] = serde_json::to_value(default_copula(c)).expect("serializable copula");
        }
    }
    if args.df.is_some() && v["copula"]["family"] != "student-t" {
        return Err(Failure::Usage("--df applies only to the student-t copula".into()));
    }
    let mut cflags = Overlay::default();
    cflags.set("rho", args.rho).set("df", args.df);
    merge(&mut v["copula"], cflags.into_value());
    Ok(v)
}
