//! Interfaces the filter and the EM schedulers program against.

use crate::{ParamVector, Result, RngStream, Scalar};

/// Counts of numerical interventions made by parameter maps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Diagnostics {
    /// A ratio denominator was too small and the previous estimate was kept.
    pub retained_previous: u64,
    /// A variance argument fell below the floor before a square root.
    pub clamped_variance: u64,
    /// A parameter estimate came out non-finite and was replaced.
    pub non_finite: u64,
}

impl Diagnostics {
    pub fn total(&self) -> u64 {
        self.retained_previous + self.clamped_variance + self.non_finite
    }
}

/// One scalar latent chain observed with scalar noise: the unit a
/// [`ParticleSystem`](crate::smc::ParticleSystem) filters.
///
/// `theta` is always the full parameter vector of the enclosing benchmark;
/// each chain reads the entries it needs.
pub trait StateSpaceModel<T: Scalar>: Send + Sync {
    /// Number of per-step statistics emitted by [`collect_stats`](Self::collect_stats).
    fn n_stats(&self) -> usize;

    /// Number of consecutive latent states a statistic reads: 1 for
    /// statistics of `x_k` alone, 2 for statistics of the pair `(x_k, x_{k+1})`.
    fn stat_window(&self) -> usize;

    /// Rejects parameter values for which the initial distribution is undefined.
    fn check_initial(&self, theta: &ParamVector<T>) -> Result<()>;

    fn sample_initial(&self, theta: &ParamVector<T>, rng: &mut RngStream) -> T;

    fn sample_transition(&self, prev: T, theta: &ParamVector<T>, rng: &mut RngStream) -> T;

    fn log_emission(&self, y: T, x: T, theta: &ParamVector<T>) -> T;

    fn sample_emission(&self, x: T, theta: &ParamVector<T>, rng: &mut RngStream) -> T;

    /// Writes the statistic values for observation `y = y_k` and latent states
    /// `window = [x_k, ..]` of length [`stat_window`](Self::stat_window).
    fn collect_stats(&self, y: T, window: &[T], out: &mut [T]);
}

/// The M-step map from averaged statistics to parameters.
pub trait ParameterMap<T: Scalar> {
    fn param_names(&self) -> &'static [&'static str];

    fn n_stats(&self) -> usize;

    /// For each parameter, the statistic indices its estimate reads.
    fn dependencies(&self) -> Vec<Vec<usize>>;

    /// Estimate of parameter `param` from `s_hat`, reading only the entries
    /// listed in its dependencies. `previous` is returned (and counted) when
    /// the map is undefined at `s_hat`.
    fn map_param(&self, param: usize, s_hat: &[T], previous: T, diag: &mut Diagnostics) -> T;

    fn map(&self, s_hat: &[T], previous: &ParamVector<T>, diag: &mut Diagnostics) -> ParamVector<T> {
        let values = (0..previous.len())
            .map(|p| self.map_param(p, s_hat, previous[p], diag))
            .collect();
        ParamVector::new(self.param_names(), values)
    }
}

/// Identity map from `n` statistics to `n` parameters named `s0, s1, ...`.
///
/// Used to drive the schedulers directly with synthetic statistic streams.
#[derive(Clone, Copy, Debug)]
pub struct IdentityMap {
    n: usize,
}

static IDENTITY_NAMES: [&str; 8] = ["s0", "s1", "s2", "s3", "s4", "s5", "s6", "s7"];

impl IdentityMap {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1 && n <= IDENTITY_NAMES.len());
        Self { n }
    }
}

impl<T: Scalar> ParameterMap<T> for IdentityMap {
    fn param_names(&self) -> &'static [&'static str] {
        &IDENTITY_NAMES[..self.n]
    }

    fn n_stats(&self) -> usize {
        self.n
    }

    fn dependencies(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|j| vec![j]).collect()
    }

    fn map_param(&self, param: usize, s_hat: &[T], _previous: T, _diag: &mut Diagnostics) -> T {
        s_hat[param]
    }
}
