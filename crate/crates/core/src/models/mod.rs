//! Benchmark state-space models and the machinery to simulate and filter them.
//!
//! A [`Benchmark`] is a parameter map plus one or more independent scalar
//! chains that share the parameter vector. Chains are filtered by separate
//! particle systems with separate random streams, and their per-step
//! statistics are pooled into the benchmark's statistic vector.

mod ar;
pub mod kalman;
mod sv;

pub use ar::{ArChain, ArStatistics, Coefficient, FullAr, Noise, SimplifiedAr, TwoDimAr};
pub use sv::{StochasticVolatility, SvChain};

use crate::smc::{ParticleSystem, Resampler};
use crate::{Error, ParamVector, ParameterMap, Result, RngStream, Scalar, StateSpaceModel};

/// Floor applied to variance arguments before square roots, and the smallest
/// ratio denominator accepted by the maps.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// A benchmark model: parameter map, chains and statistic pooling.
pub trait Benchmark<T: Scalar>: ParameterMap<T> + Send + Sync {
    type Chain: StateSpaceModel<T>;

    fn name(&self) -> &'static str;

    fn chains(&self) -> &[Self::Chain];

    /// Combines the per-chain statistic vectors into the benchmark's vector.
    fn pool_stats(&self, per_chain: &[Vec<T>]) -> Vec<T>;

    /// Validates a parameter vector used for simulation or initialization.
    fn check_params(&self, theta: &ParamVector<T>) -> Result<()>;

    fn params(&self, values: Vec<T>) -> Result<ParamVector<T>> {
        let names = self.param_names();
        if values.len() != names.len() {
            return Err(Error::Config(format!(
                "model {} takes {} parameters ({}), got {}",
                self.name(),
                names.len(),
                names.join(", "),
                values.len()
            )));
        }
        Ok(ParamVector::new(names, values))
    }
}

/// Latent paths and observations, indexed `[chain][t - 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Simulation<T> {
    pub latent: Vec<Vec<T>>,
    pub observed: Vec<Vec<T>>,
}

impl<T: Scalar> Simulation<T> {
    pub fn len(&self) -> usize {
        self.observed.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Observations at time `t` (1-based), one per chain.
    pub fn observation(&self, t: usize, out: &mut Vec<T>) {
        out.clear();
        out.extend(self.observed.iter().map(|c| c[t - 1]));
    }
}

/// Simulates `len` steps of one chain: `x_1` from the initial distribution,
/// then transitions and emissions.
pub fn simulate_chain<T: Scalar, M: StateSpaceModel<T> + ?Sized>(
    chain: &M,
    theta: &ParamVector<T>,
    len: usize,
    rng: &mut RngStream,
) -> Result<(Vec<T>, Vec<T>)> {
    chain.check_initial(theta)?;
    let mut xs = Vec::with_capacity(len);
    let mut ys = Vec::with_capacity(len);
    let mut x = chain.sample_initial(theta, rng);
    for t in 0..len {
        if t > 0 {
            x = chain.sample_transition(x, theta, rng);
        }
        xs.push(x);
        ys.push(chain.sample_emission(x, theta, rng));
    }
    Ok((xs, ys))
}

/// Simulates every chain of `bench`, chain `c` on component stream `c`.
pub fn simulate<T: Scalar, B: Benchmark<T> + ?Sized>(
    bench: &B,
    theta: &ParamVector<T>,
    len: usize,
    rng: &RngStream,
) -> Result<Simulation<T>> {
    bench.check_params(theta)?;
    let mut sim = Simulation {
        latent: Vec::new(),
        observed: Vec::new(),
    };
    for (c, chain) in bench.chains().iter().enumerate() {
        let mut stream = rng.component(c as u64);
        let (xs, ys) = simulate_chain(chain, theta, len, &mut stream)?;
        sim.latent.push(xs);
        sim.observed.push(ys);
    }
    Ok(sim)
}

/// One particle system per chain, each with its own component stream.
#[derive(Clone, Debug)]
pub struct BenchmarkFilter<T> {
    systems: Vec<ParticleSystem<T>>,
    streams: Vec<RngStream>,
    per_chain: Vec<Vec<T>>,
}

impl<T: Scalar> BenchmarkFilter<T> {
    pub fn new<B: Benchmark<T> + ?Sized>(
        bench: &B,
        theta0: &ParamVector<T>,
        particles: usize,
        lag: usize,
        resampler: Resampler,
        rng: &RngStream,
    ) -> Result<Self> {
        bench.check_params(theta0)?;
        let mut systems = Vec::new();
        let mut streams = Vec::new();
        for (c, chain) in bench.chains().iter().enumerate() {
            let mut stream = rng.component(c as u64);
            systems.push(ParticleSystem::init(chain, theta0, particles, lag, resampler, &mut stream)?);
            streams.push(stream);
        }
        Ok(Self {
            per_chain: Vec::with_capacity(systems.len()),
            systems,
            streams,
        })
    }

    /// Advances every chain by one observation (`ys[c]` for chain `c`).
    pub fn step<B: Benchmark<T> + ?Sized>(
        &mut self,
        bench: &B,
        ys: &[T],
        theta: &ParamVector<T>,
    ) -> Result<Option<Vec<T>>> {
        self.per_chain.clear();
        let mut complete = true;
        for (c, chain) in bench.chains().iter().enumerate() {
            match self.systems[c].step(chain, ys[c], theta, &mut self.streams[c])? {
                Some(s) => self.per_chain.push(s),
                None => complete = false,
            }
        }
        Ok(complete.then(|| bench.pool_stats(&self.per_chain)))
    }

    pub fn systems(&self) -> &[ParticleSystem<T>] {
        &self.systems
    }
}

pub(crate) fn check_stationary<T: Scalar>(coef: T, what: &str) -> Result<()> {
    if coef.abs() < T::one() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "|{what}| = {} must be below 1 for a stationary initial distribution",
            coef.abs()
        )))
    }
}

pub(crate) fn check_nonnegative<T: Scalar>(v: T, what: &str) -> Result<()> {
    if v >= T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} = {v} must be a nonnegative number")))
    }
}

/// `log N(y; mean, var)`
#[inline]
pub(crate) fn normal_log_density<T: Scalar>(y: T, mean: T, var: T) -> T {
    let d = y - mean;
    T::lit(-0.5) * (T::lit(std::f64::consts::TAU) * var).ln() - d * d / (T::lit(2.0) * var)
}

pub(crate) mod maps {
    use super::VARIANCE_FLOOR;
    use crate::{Diagnostics, Scalar};

    /// `s_cross / s_lead`, keeping `previous` when `s_lead` is not positive.
    pub fn ratio<T: Scalar>(s_cross: T, s_lead: T, previous: T, diag: &mut Diagnostics) -> T {
        if s_lead > T::lit(VARIANCE_FLOOR) {
            s_cross / s_lead
        } else {
            diag.retained_previous += 1;
            previous
        }
    }

    pub fn floored_sqrt<T: Scalar>(v: T, diag: &mut Diagnostics) -> T {
        let floor = T::lit(VARIANCE_FLOOR);
        if v < floor || v.is_nan() {
            diag.clamped_variance += 1;
            floor.sqrt()
        } else {
            v.sqrt()
        }
    }

    /// Innovation sd `(s_next - s_cross^2 / s_lead)^(1/2)`.
    pub fn innovation_sd<T: Scalar>(
        s_lead: T,
        s_cross: T,
        s_next: T,
        previous: T,
        diag: &mut Diagnostics,
    ) -> T {
        if s_lead > T::lit(VARIANCE_FLOOR) {
            floored_sqrt(s_next - s_cross * s_cross / s_lead, diag)
        } else {
            diag.retained_previous += 1;
            previous
        }
    }
}
