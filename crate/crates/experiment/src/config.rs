//! Run descriptions and the flat `key=value` config format.
//!
//! Keys: `model`, `method`, `b`, `c`, `t0`, `cap_c`, `theta_true`, `theta0`
//! (comma-separated, in the model's parameter order), `N`, `T`, `delta`,
//! `replicates`, `seed`, `stride`, `resampler`, `out`. Blank lines and lines
//! starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ioem_core::em::DEFAULT_CAP_C;
use ioem_core::models::{Benchmark, FullAr, SimplifiedAr, StochasticVolatility, TwoDimAr};
use ioem_core::{Method, ParamVector, Resampler};
use sha2::{Digest, Sha256};

use crate::error::{config_err, HarnessError, Result};

pub const KEYS: &[&str] = &[
    "model",
    "method",
    "b",
    "c",
    "t0",
    "cap_c",
    "theta_true",
    "theta0",
    "N",
    "T",
    "delta",
    "replicates",
    "seed",
    "stride",
    "resampler",
    "out",
];

pub const DEFAULT_STRIDE: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    SimplifiedAr,
    FullAr,
    TwoDimAr,
    StochasticVolatility,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::SimplifiedAr,
        ModelKind::FullAr,
        ModelKind::TwoDimAr,
        ModelKind::StochasticVolatility,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::SimplifiedAr => "simplified_ar",
            ModelKind::FullAr => "full_ar",
            ModelKind::TwoDimAr => "two_dim_ar",
            ModelKind::StochasticVolatility => "sv",
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::SimplifiedAr => SimplifiedAr::<f64>::PARAMS,
            ModelKind::FullAr => FullAr::<f64>::PARAMS,
            ModelKind::TwoDimAr => TwoDimAr::<f64>::PARAMS,
            ModelKind::StochasticVolatility => StochasticVolatility::PARAMS,
        }
    }

    /// Truth and initialization used when a config leaves them out.
    pub fn default_thetas(self) -> (Vec<f64>, Vec<f64>) {
        match self {
            ModelKind::SimplifiedAr => (vec![30.0], vec![20.0]),
            ModelKind::FullAr => (vec![0.95, 1.0, 5.5], vec![0.8, 3.0, 1.0]),
            ModelKind::TwoDimAr => (vec![0.95, 1.0, 5.5, 0.95, 1.0], vec![0.95, 1.0, 3.0, 0.95, 3.0]),
            ModelKind::StochasticVolatility => {
                (vec![0.1, 2f64.sqrt(), 1.0], vec![0.5, 1.0, 2f64.sqrt()])
            }
        }
    }

    fn check(self, values: &[f64], what: &str) -> Result<()> {
        let names = self.param_names();
        if values.len() != names.len() {
            return config_err(format!(
                "{what} for {} needs {} values ({}), got {}",
                self.name(),
                names.len(),
                names.join(", "),
                values.len()
            ));
        }
        let theta = ParamVector::new(names, values.to_vec());
        let checked = match self {
            ModelKind::SimplifiedAr => SimplifiedAr::default().check_params(&theta),
            ModelKind::FullAr => FullAr::new().check_params(&theta),
            ModelKind::TwoDimAr => TwoDimAr::new().check_params(&theta),
            ModelKind::StochasticVolatility => StochasticVolatility::new().check_params(&theta),
        };
        checked.map_err(|e| HarnessError::Config(format!("{what}: {e}")))
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ModelKind::ALL.iter().map(|m| m.name()).collect();
                HarnessError::Config(format!("unknown model {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// One method on one model, replicated.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub method: Method<f64>,
    pub theta_true: Vec<f64>,
    pub theta0: Vec<f64>,
    /// Particles per chain.
    pub particles: usize,
    /// Observations per replicate.
    pub steps: usize,
    /// Fixed lag.
    pub lag: usize,
    pub replicates: usize,
    pub seed: u64,
    /// A trace row is written every `stride` observations.
    pub stride: usize,
    pub resampler: Resampler,
    pub out: PathBuf,
}

impl ExperimentConfig {
    /// A config with harness defaults for everything but model and method.
    pub fn new(model: ModelKind, method: Method<f64>) -> Self {
        let (theta_true, theta0) = model.default_thetas();
        Self {
            model,
            method,
            theta_true,
            theta0,
            particles: 100,
            steps: 100_000,
            lag: ioem_core::smc::DEFAULT_LAG,
            replicates: 100,
            seed: 1,
            stride: DEFAULT_STRIDE,
            resampler: Resampler::Systematic,
            out: PathBuf::from("out"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps <= self.lag {
            return config_err(format!("T = {} must exceed delta = {}", self.steps, self.lag));
        }
        if self.particles == 0 {
            return config_err("N must be at least 1");
        }
        if self.replicates == 0 {
            return config_err("replicates must be at least 1");
        }
        if self.stride == 0 {
            return config_err("stride must be at least 1");
        }
        self.method.validate()?;
        self.model.check(&self.theta_true, "theta_true")?;
        self.model.check(&self.theta0, "theta0")
    }

    /// Canonical `key=value` pairs: every key that affects the output.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let mut pairs = vec![("model", self.model.to_string()), ("method", self.method.kind().to_string())];
        match self.method {
            Method::Bem { batch } => pairs.push(("b", batch.to_string())),
            Method::Oem { c } => pairs.push(("c", c.to_string())),
            Method::Avg { c, t0 } => {
                pairs.push(("c", c.to_string()));
                pairs.push(("t0", t0.to_string()));
            }
            Method::Ioem { cap_c } => pairs.push(("cap_c", cap_c.to_string())),
        }
        pairs.extend([
            ("theta_true", join(&self.theta_true)),
            ("theta0", join(&self.theta0)),
            ("N", self.particles.to_string()),
            ("T", self.steps.to_string()),
            ("delta", self.lag.to_string()),
            ("replicates", self.replicates.to_string()),
            ("seed", self.seed.to_string()),
            ("stride", self.stride.to_string()),
            ("resampler", self.resampler.to_string()),
            ("out", self.out.display().to_string()),
        ]);
        pairs
    }

    pub fn to_kv(&self) -> String {
        self.to_pairs().iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// SHA-256 of the canonical pairs, excluding the output directory.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.to_pairs() {
            if k != "out" {
                h.update(format!("{k}={v}\n").as_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Builds a config from key-value pairs. `model` and `method` are
    /// required, as are the parameters of the chosen method (`cap_c` defaults
    /// to 0.51); everything else has a default.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        for key in pairs.keys() {
            if !KEYS.contains(&key.as_str()) {
                return config_err(format!("unknown key {key:?}; known keys: {}", KEYS.join(", ")));
            }
        }
        let get = |k: &str| pairs.get(k).map(String::as_str);
        let model: ModelKind = get("model").ok_or_else(|| missing("model"))?.parse()?;
        let method_name = get("method").ok_or_else(|| missing("method"))?;
        let need = |k: &str| get(k).ok_or_else(|| missing_for(k, method_name));
        let method = match method_name {
            "bem" => Method::Bem { batch: number(need("b")?, "b")? },
            "oem" => Method::Oem { c: number(need("c")?, "c")? },
            "avg" => Method::Avg {
                c: number(need("c")?, "c")?,
                t0: number(need("t0")?, "t0")?,
            },
            "ioem" => Method::Ioem {
                cap_c: get("cap_c").map_or(Ok(DEFAULT_CAP_C), |v| number(v, "cap_c"))?,
            },
            other => return config_err(format!("unknown method {other:?}; expected bem, oem, avg or ioem")),
        };
        let mut cfg = ExperimentConfig::new(model, method);
        if let Some(v) = get("theta_true") {
            cfg.theta_true = list(v, "theta_true")?;
        }
        if let Some(v) = get("theta0") {
            cfg.theta0 = list(v, "theta0")?;
        }
        if let Some(v) = get("N") {
            cfg.particles = number(v, "N")?;
        }
        if let Some(v) = get("T") {
            cfg.steps = number(v, "T")?;
        }
        if let Some(v) = get("delta") {
            cfg.lag = number(v, "delta")?;
        }
        if let Some(v) = get("replicates") {
            cfg.replicates = number(v, "replicates")?;
        }
        if let Some(v) = get("seed") {
            cfg.seed = number(v, "seed")?;
        }
        if let Some(v) = get("stride") {
            cfg.stride = number(v, "stride")?;
        }
        if let Some(v) = get("resampler") {
            cfg.resampler = v.parse().map_err(|e| HarnessError::Config(format!("resampler: {e}")))?;
        }
        if let Some(v) = get("out") {
            cfg.out = PathBuf::from(v);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        Self::from_pairs(&parse_kv(text)?)
    }
}

/// Parses `key=value` lines into a map; a repeated key keeps its last value.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return config_err(format!("line {}: expected key=value, got {line:?}", i + 1));
        };
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn missing(key: &str) -> HarnessError {
    HarnessError::Config(format!("missing required key {key:?}"))
}

fn missing_for(key: &str, method: &str) -> HarnessError {
    HarnessError::Config(format!("method {method} requires key {key:?}"))
}

fn number<N: FromStr>(v: &str, key: &str) -> Result<N>
where
    N::Err: fmt::Display,
{
    v.parse().map_err(|e| HarnessError::Config(format!("{key} = {v:?}: {e}")))
}

fn list(v: &str, key: &str) -> Result<Vec<f64>> {
    v.split(',').map(|x| number(x.trim(), key)).collect()
}
