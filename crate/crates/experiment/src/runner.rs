//! Replicate execution: simulate, filter, update, record.

use ioem_core::models::{simulate, Benchmark, BenchmarkFilter, FullAr, SimplifiedAr, StochasticVolatility, TwoDimAr};
use ioem_core::{derive_stream, Diagnostics, Error, ParamVector, Scheduler};

use crate::config::{ExperimentConfig, ModelKind};
use crate::error::Result;

/// State after observation `t` has been assimilated.
pub struct StepRecord<'a> {
    /// Observations consumed so far (1-based time).
    pub t: usize,
    /// Statistic vectors the scheduler has consumed so far.
    pub updates: usize,
    pub theta: &'a ParamVector<f64>,
    /// Learning rate applied to each parameter at the latest update, where
    /// the method has one.
    pub gammas: &'a [Option<f64>],
    pub scheduler: &'a Scheduler<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Ok,
    Failed { t: usize, reason: String },
}

#[derive(Clone, Debug)]
pub struct ReplicateOutcome {
    pub replicate: usize,
    pub status: Status,
    pub diagnostics: Diagnostics,
    /// Estimates after the last observation, or NaN for a failed replicate.
    pub theta: Vec<f64>,
    pub gammas: Vec<Option<f64>>,
    pub updates: usize,
    /// Resampling events summed over chains.
    pub resamples: usize,
}

macro_rules! with_benchmark {
    ($kind:expr, $b:ident => $body:expr) => {
        match $kind {
            ModelKind::SimplifiedAr => {
                let $b = SimplifiedAr::default();
                $body
            }
            ModelKind::FullAr => {
                let $b = FullAr::new();
                $body
            }
            ModelKind::TwoDimAr => {
                let $b = TwoDimAr::new();
                $body
            }
            ModelKind::StochasticVolatility => {
                let $b = StochasticVolatility::new();
                $body
            }
        }
    };
}

/// Runs replicate `r` of `cfg`, calling `observer` after every observation.
///
/// Data come from stream `(seed, 2r)` and the filter from `(seed, 2r + 1)`.
/// A collapse of the particle weights ends the replicate with
/// [`Status::Failed`]; configuration problems are errors.
pub fn run_replicate<F>(cfg: &ExperimentConfig, r: usize, observer: F) -> Result<ReplicateOutcome>
where
    F: FnMut(&StepRecord<'_>),
{
    with_benchmark!(cfg.model, bench => run_on(&bench, cfg, r, observer))
}

fn run_on<B, F>(bench: &B, cfg: &ExperimentConfig, r: usize, mut observer: F) -> Result<ReplicateOutcome>
where
    B: Benchmark<f64>,
    F: FnMut(&StepRecord<'_>),
{
    let truth = bench.params(cfg.theta_true.clone())?;
    let theta0 = bench.params(cfg.theta0.clone())?;
    let r64 = r as u64;
    let sim = simulate(bench, &truth, cfg.steps, &derive_stream(cfg.seed, 2 * r64))?;
    let filter_rng = derive_stream(cfg.seed, 2 * r64 + 1);
    let mut filter = BenchmarkFilter::new(bench, &theta0, cfg.particles, cfg.lag, cfg.resampler, &filter_rng)?;
    let mut sched = Scheduler::new(cfg.method, bench, theta0)?;

    let n_params = bench.param_names().len();
    let mut gammas = vec![None; n_params];
    let mut ys = Vec::new();
    let mut updates = 0;
    let mut status = Status::Ok;
    for t in 1..=cfg.steps {
        sim.observation(t, &mut ys);
        match filter.step(bench, &ys, sched.theta()) {
            Ok(Some(stats)) => {
                sched.update(&stats, bench);
                updates += 1;
                for (p, g) in gammas.iter_mut().enumerate() {
                    *g = sched.gamma(p);
                }
            }
            Ok(None) => {}
            Err(e @ Error::DegenerateWeights { .. }) => {
                status = Status::Failed { t, reason: e.to_string() };
                break;
            }
            Err(e) => return Err(e.into()),
        }
        observer(&StepRecord {
            t,
            updates,
            theta: sched.theta(),
            gammas: &gammas,
            scheduler: &sched,
        });
    }

    let theta = match status {
        Status::Ok => sched.theta().values().to_vec(),
        Status::Failed { .. } => {
            gammas.iter_mut().for_each(|g| *g = None);
            vec![f64::NAN; n_params]
        }
    };
    Ok(ReplicateOutcome {
        replicate: r,
        status,
        diagnostics: sched.diagnostics(),
        theta,
        gammas,
        updates,
        resamples: filter.systems().iter().map(|s| s.resamples()).sum(),
    })
}
