//! Stochastic volatility: `x_t ~ N(phi x_{t-1}, sigma^2)`,
//! `y_t ~ N(0, beta^2 exp(x_t))`.

use super::{check_nonnegative, check_stationary, maps, normal_log_density, Benchmark};
use crate::{Diagnostics, ParamVector, ParameterMap, Result, RngStream, Scalar, StateSpaceModel};

/// The latent log-volatility chain. Parameters are `(phi, sigma, beta)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SvChain;

impl SvChain {
    fn check<T: Scalar>(theta: &ParamVector<T>) -> Result<()> {
        check_stationary(theta[0], "phi")?;
        check_nonnegative(theta[1], "sigma")?;
        check_nonnegative(theta[2], "beta")
    }
}

impl<T: Scalar> StateSpaceModel<T> for SvChain {
    fn n_stats(&self) -> usize {
        4
    }

    fn stat_window(&self) -> usize {
        2
    }

    fn check_initial(&self, theta: &ParamVector<T>) -> Result<()> {
        Self::check(theta)
    }

    fn sample_initial(&self, theta: &ParamVector<T>, rng: &mut RngStream) -> T {
        let (phi, sigma) = (theta[0], theta[1]);
        let sd = sigma / (T::one() - phi * phi).sqrt();
        rng.normal(T::zero(), sd)
    }

    fn sample_transition(&self, prev: T, theta: &ParamVector<T>, rng: &mut RngStream) -> T {
        rng.normal(theta[0] * prev, theta[1])
    }

    fn log_emission(&self, y: T, x: T, theta: &ParamVector<T>) -> T {
        let beta = theta[2];
        normal_log_density(y, T::zero(), beta * beta * x.exp())
    }

    fn sample_emission(&self, x: T, theta: &ParamVector<T>, rng: &mut RngStream) -> T {
        rng.normal(T::zero(), theta[2] * (x / T::lit(2.0)).exp())
    }

    fn collect_stats(&self, y: T, window: &[T], out: &mut [T]) {
        let (x, next) = (window[0], window[1]);
        out[0] = x * next;
        out[1] = x * x;
        out[2] = next * next;
        out[3] = (-x).exp() * y * y;
    }
}

#[derive(Clone, Debug, Default)]
pub struct StochasticVolatility {
    chains: [SvChain; 1],
}

impl StochasticVolatility {
    pub const PARAMS: &'static [&'static str] = &["phi", "sigma", "beta"];

    pub fn new() -> Self {
        Self::default()
    }
}

impl<T: Scalar> ParameterMap<T> for StochasticVolatility {
    fn param_names(&self) -> &'static [&'static str] {
        Self::PARAMS
    }

    fn n_stats(&self) -> usize {
        4
    }

    fn dependencies(&self) -> Vec<Vec<usize>> {
        vec![vec![0, 1], vec![0, 1, 2], vec![3]]
    }

    fn map_param(&self, param: usize, s: &[T], previous: T, diag: &mut Diagnostics) -> T {
        match param {
            0 => maps::ratio(s[0], s[1], previous, diag),
            1 => maps::innovation_sd(s[1], s[0], s[2], previous, diag),
            2 => maps::floored_sqrt(s[3], diag),
            _ => unreachable!("StochasticVolatility has three parameters"),
        }
    }
}

impl<T: Scalar> Benchmark<T> for StochasticVolatility {
    type Chain = SvChain;

    fn name(&self) -> &'static str {
        "sv"
    }

    fn chains(&self) -> &[SvChain] {
        &self.chains
    }

    fn pool_stats(&self, per_chain: &[Vec<T>]) -> Vec<T> {
        per_chain[0].clone()
    }

    fn check_params(&self, theta: &ParamVector<T>) -> Result<()> {
        SvChain::check(theta)
    }
}
