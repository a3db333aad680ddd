use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ioem_experiment::config::{parse_kv, ExperimentConfig};
use ioem_experiment::{preset, run_experiment, HarnessError, Status, PRESETS};

#[derive(Parser)]
#[command(name = "ioem", version, about = "Particle-filter EM experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a config file; flags override either.
    Run(RunArgs),
    /// List the preset names.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    /// bem, oem, avg or ioem.
    #[arg(long)]
    method: Option<String>,
    /// Particles per chain.
    #[arg(long = "N")]
    particles: Option<String>,
    /// Observations per replicate.
    #[arg(long = "T")]
    steps: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    replicates: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    stride: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// systematic or multinomial.
    #[arg(long)]
    resampler: Option<String>,
    /// BEM batch size.
    #[arg(long)]
    b: Option<String>,
    /// OEM / AVG learning-rate exponent.
    #[arg(long)]
    c: Option<String>,
    /// AVG start, in scheduler updates.
    #[arg(long)]
    t0: Option<String>,
    /// IOEM cap exponent.
    #[arg(long = "cap-c")]
    cap_c: Option<String>,
    /// Comma-separated true parameters.
    #[arg(long = "theta-true")]
    theta_true: Option<String>,
    /// Comma-separated initial parameters.
    #[arg(long)]
    theta0: Option<String>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

impl RunArgs {
    fn base_overrides(&self) -> Vec<(&'static str, &String)> {
        [
            ("model", &self.model),
            ("N", &self.particles),
            ("T", &self.steps),
            ("delta", &self.delta),
            ("replicates", &self.replicates),
            ("seed", &self.seed),
            ("stride", &self.stride),
            ("out", &self.out),
            ("resampler", &self.resampler),
            ("theta_true", &self.theta_true),
            ("theta0", &self.theta0),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k, v)))
        .collect()
    }

    fn method_overrides(&self) -> Vec<(&'static str, &String)> {
        [
            ("method", &self.method),
            ("b", &self.b),
            ("c", &self.c),
            ("t0", &self.t0),
            ("cap_c", &self.cap_c),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k, v)))
        .collect()
    }
}

fn apply(pairs: &mut BTreeMap<String, String>, overrides: &[(&'static str, &String)]) {
    for (k, v) in overrides {
        pairs.insert(k.to_string(), v.to_string());
    }
}

fn configs(args: &RunArgs) -> Result<Vec<ExperimentConfig>, HarnessError> {
    let base = args.base_overrides();
    let method = args.method_overrides();
    if let Some(name) = &args.preset {
        let mut p = preset(name)?;
        let mut pairs: BTreeMap<String, String> =
            p.template.to_pairs().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        apply(&mut pairs, &base);
        if pairs.get("model").map(String::as_str) != Some(p.template.model.name()) && args.theta_true.is_none() {
            // A different model cannot reuse the preset's parameter vectors.
            pairs.remove("theta_true");
            pairs.remove("theta0");
        }
        if method.is_empty() {
            p.template = ExperimentConfig::from_pairs(&pairs)?;
            return Ok(p.expand());
        }
        if args.method.is_none() {
            return Err(HarnessError::Config("method parameters given without --method".into()));
        }
        for k in ["method", "b", "c", "t0", "cap_c"] {
            pairs.remove(k);
        }
        apply(&mut pairs, &method);
        return Ok(vec![ExperimentConfig::from_pairs(&pairs)?]);
    }
    let mut pairs = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
                path: path.clone(),
                source,
            })?;
            parse_kv(&text)?
        }
        None => BTreeMap::new(),
    };
    apply(&mut pairs, &base);
    apply(&mut pairs, &method);
    Ok(vec![ExperimentConfig::from_pairs(&pairs)?])
}

fn run(args: RunArgs) -> Result<(), HarnessError> {
    let configs = configs(&args)?;
    let (output, paths) = run_experiment(&configs, args.threads)?;
    for (cfg, outs) in configs.iter().zip(&output.outcomes) {
        let failed = outs.iter().filter(|o| o.status != Status::Ok).count();
        println!(
            "{} {}: {} replicates, {failed} failed",
            cfg.model,
            cfg.method.label(),
            outs.len()
        );
    }
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Presets => {
            for p in PRESETS {
                println!("{p}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
