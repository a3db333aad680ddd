//! CSV rows, the manifest, and the parallel driver that produces them.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{config_err, HarnessError, Result};
use crate::runner::{run_replicate, ReplicateOutcome, Status};

pub const CSV_HEADER: &str = "model,method,replicate,t,parameter,estimate,gamma";

/// Library version recorded in manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One CSV record.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow<'a> {
    pub model: &'a str,
    pub method: &'a str,
    pub replicate: usize,
    pub t: usize,
    pub parameter: &'a str,
    pub estimate: f64,
    pub gamma: Option<f64>,
}

impl ResultRow<'_> {
    /// Appends the row; floats use shortest round-trip formatting.
    pub fn write(&self, out: &mut String) {
        let _ = write!(
            out,
            "{},{},{},{},{},{},",
            self.model, self.method, self.replicate, self.t, self.parameter, self.estimate
        );
        if let Some(g) = self.gamma {
            let _ = write!(out, "{g}");
        }
        out.push('\n');
    }
}

/// Everything one run set writes.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub trace: String,
    pub final_rows: String,
    pub manifest: String,
    pub outcomes: Vec<Vec<ReplicateOutcome>>,
}

struct ReplicateReport {
    trace: String,
    final_rows: String,
    outcome: ReplicateOutcome,
}

fn run_one(cfg: &ExperimentConfig, r: usize) -> Result<ReplicateReport> {
    let model = cfg.model.name();
    let method = cfg.method.label();
    let names = cfg.model.param_names();
    let mut trace = String::new();
    let outcome = run_replicate(cfg, r, |rec| {
        if rec.t % cfg.stride == 0 {
            for (p, &parameter) in names.iter().enumerate() {
                ResultRow {
                    model,
                    method: &method,
                    replicate: r,
                    t: rec.t,
                    parameter,
                    estimate: rec.theta[p],
                    gamma: rec.gammas[p],
                }
                .write(&mut trace);
            }
        }
    })?;
    let mut final_rows = String::new();
    for (p, &parameter) in names.iter().enumerate() {
        ResultRow {
            model,
            method: &method,
            replicate: r,
            t: cfg.steps,
            parameter,
            estimate: outcome.theta[p],
            gamma: outcome.gammas[p],
        }
        .write(&mut final_rows);
    }
    Ok(ReplicateReport {
        trace,
        final_rows,
        outcome,
    })
}

/// Runs every replicate of every config on `threads` workers (all cores when
/// `None`). Output is ordered by config, then replicate, whatever the
/// thread count.
pub fn run_set(configs: &[ExperimentConfig], threads: Option<usize>) -> Result<RunOutput> {
    if configs.is_empty() {
        return config_err("nothing to run");
    }
    for cfg in configs {
        cfg.validate()?;
    }
    let jobs: Vec<(usize, usize)> = configs
        .iter()
        .enumerate()
        .flat_map(|(i, cfg)| (0..cfg.replicates).map(move |r| (i, r)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| HarnessError::Pool(e.to_string()))?;
    let reports: Vec<ReplicateReport> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, r)| run_one(&configs[i], r))
            .collect::<Result<_>>()
    })?;

    let mut trace = format!("{CSV_HEADER}\n");
    let mut final_rows = trace.clone();
    let mut outcomes: Vec<Vec<ReplicateOutcome>> = vec![Vec::new(); configs.len()];
    for (&(i, _), report) in jobs.iter().zip(reports) {
        trace.push_str(&report.trace);
        final_rows.push_str(&report.final_rows);
        outcomes[i].push(report.outcome);
    }
    let manifest = manifest(configs, &outcomes);
    Ok(RunOutput {
        trace,
        final_rows,
        manifest,
        outcomes,
    })
}

fn manifest(configs: &[ExperimentConfig], outcomes: &[Vec<ReplicateOutcome>]) -> String {
    let mut m = String::new();
    let _ = writeln!(m, "version={VERSION}");
    let _ = writeln!(m, "streams=data (seed, 2r); filter (seed, 2r+1); chain c uses component c");
    let _ = writeln!(m, "runs={}", configs.len());
    for (i, (cfg, outs)) in configs.iter().zip(outcomes).enumerate() {
        let _ = writeln!(m, "run.{i}.label={}", cfg.method.label());
        let _ = writeln!(m, "run.{i}.config_hash={}", cfg.hash());
        for (k, v) in cfg.to_pairs() {
            let _ = writeln!(m, "run.{i}.{k}={v}");
        }
        for o in outs {
            let r = o.replicate;
            let status = match &o.status {
                Status::Ok => "ok".to_string(),
                Status::Failed { t, reason } => format!("failed at t={t}: {reason}"),
            };
            let d = o.diagnostics;
            let _ = writeln!(m, "run.{i}.replicate.{r}.status={status}");
            let _ = writeln!(
                m,
                "run.{i}.replicate.{r}.diagnostics=retained_previous:{},clamped_variance:{},non_finite:{}",
                d.retained_previous, d.clamped_variance, d.non_finite
            );
            let _ = writeln!(m, "run.{i}.replicate.{r}.updates={}", o.updates);
            let _ = writeln!(m, "run.{i}.replicate.{r}.resamples={}", o.resamples);
        }
    }
    m
}

/// Rebuilds the configs recorded in a manifest.
pub fn configs_from_manifest(text: &str) -> Result<Vec<ExperimentConfig>> {
    let pairs = crate::config::parse_kv(text)?;
    let runs: usize = pairs
        .get("runs")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| HarnessError::Config("manifest has no runs entry".into()))?;
    (0..runs)
        .map(|i| {
            let prefix = format!("run.{i}.");
            let own = pairs
                .iter()
                .filter_map(|(k, v)| {
                    let key = k.strip_prefix(&prefix)?;
                    crate::config::KEYS
                        .contains(&key)
                        .then(|| (key.to_string(), v.clone()))
                })
                .collect();
            ExperimentConfig::from_pairs(&own)
        })
        .collect()
}

/// Writes `trace.csv`, `final.csv` and `manifest.txt` into `dir`.
pub fn write_output(output: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| HarnessError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::new();
    for (name, body) in [
        ("trace.csv", &output.trace),
        ("final.csv", &output.final_rows),
        ("manifest.txt", &output.manifest),
    ] {
        let path = dir.join(name);
        fs::write(&path, body).map_err(io(&path))?;
        written.push(path);
    }
    Ok(written)
}

/// Runs a config set and writes its files into the first config's `out`.
pub fn run_experiment(configs: &[ExperimentConfig], threads: Option<usize>) -> Result<(RunOutput, Vec<PathBuf>)> {
    let output = run_set(configs, threads)?;
    let paths = write_output(&output, &configs[0].out)?;
    Ok((output, paths))
}
