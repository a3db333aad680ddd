//! Noisily observed AR(1) chains: `x_t = a x_{t-1} + sigma_w w_t`,
//! `y_t = x_t + sigma_v v_t`.

use super::{check_nonnegative, check_stationary, maps, normal_log_density, Benchmark};
use crate::{Diagnostics, ParamVector, ParameterMap, Result, RngStream, Scalar, StateSpaceModel};

/// Where a chain finds a noise scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Noise<T> {
    /// Known standard deviation.
    Known(T),
    /// Parameter holding a standard deviation.
    Sd(usize),
    /// Parameter holding a variance.
    Variance(usize),
}

impl<T: Scalar> Noise<T> {
    fn variance(&self, theta: &ParamVector<T>) -> T {
        match *self {
            Noise::Known(sd) => sd * sd,
            Noise::Sd(i) => theta[i] * theta[i],
            Noise::Variance(i) => theta[i],
        }
    }

    fn sd(&self, theta: &ParamVector<T>) -> T {
        match *self {
            Noise::Known(sd) => sd,
            Noise::Sd(i) => theta[i],
            Noise::Variance(i) => theta[i].max(T::zero()).sqrt(),
        }
    }

    fn raw(&self, theta: &ParamVector<T>) -> T {
        match *self {
            Noise::Known(sd) => sd,
            Noise::Sd(i) | Noise::Variance(i) => theta[i],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArStatistics {
    /// `(y_k - x_k)^2` alone.
    Residual,
    /// `(x_k^2, x_k x_{k+1}, x_{k+1}^2, (y_k - x_k)^2)`.
    Full,
}

/// One AR(1) chain reading its coefficient and noise scales from the shared
/// parameter vector (or from known constants).
#[derive(Clone, Copy, Debug)]
pub struct ArChain<T> {
    pub a: Coefficient<T>,
    pub sigma_w: Noise<T>,
    pub sigma_v: Noise<T>,
    pub statistics: ArStatistics,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coefficient<T> {
    Known(T),
    Param(usize),
}

impl<T: Scalar> ArChain<T> {
    fn a(&self, theta: &ParamVector<T>) -> T {
        match self.a {
            Coefficient::Known(a) => a,
            Coefficient::Param(i) => theta[i],
        }
    }

    fn check(&self, theta: &ParamVector<T>) -> Result<()> {
        check_stationary(self.a(theta), "a")?;
        check_nonnegative(self.sigma_w.raw(theta), "sigma_w")?;
        check_nonnegative(self.sigma_v.raw(theta), "sigma_v")
    }
}

impl<T: Scalar> StateSpaceModel<T> for ArChain<T> {
    fn n_stats(&self) -> usize {
        match self.statistics {
            ArStatistics::Residual => 1,
            ArStatistics::Full => 4,
        }
    }

    fn stat_window(&self) -> usize {
        match self.statistics {
            ArStatistics::Residual => 1,
            ArStatistics::Full => 2,
        }
    }

    fn check_initial(&self, theta: &ParamVector<T>) -> Result<()> {
        self.check(theta)
    }

    fn sample_initial(&self, theta: &ParamVector<T>, rng: &mut RngStream) -> T {
        let a = self.a(theta);
        let var = self.sigma_w.variance(theta) / (T::one() - a * a);
        rng.normal(T::zero(), var.sqrt())
    }

    fn sample_transition(&self, prev: T, theta: &ParamVector<T>, rng: &mut RngStream) -> T {
        rng.normal(self.a(theta) * prev, self.sigma_w.sd(theta))
    }

    fn log_emission(&self, y: T, x: T, theta: &ParamVector<T>) -> T {
        normal_log_density(y, x, self.sigma_v.variance(theta))
    }

    fn sample_emission(&self, x: T, theta: &ParamVector<T>, rng: &mut RngStream) -> T {
        rng.normal(x, self.sigma_v.sd(theta))
    }

    fn collect_stats(&self, y: T, window: &[T], out: &mut [T]) {
        let x = window[0];
        let r = y - x;
        match self.statistics {
            ArStatistics::Residual => out[0] = r * r,
            ArStatistics::Full => {
                let next = window[1];
                out[0] = x * x;
                out[1] = x * next;
                out[2] = next * next;
                out[3] = r * r;
            }
        }
    }
}

/// AR(1) with known `a` and `sigma_w`; only the observation variance is
/// estimated, and its statistic is the parameter itself.
#[derive(Clone, Debug)]
pub struct SimplifiedAr<T> {
    chains: [ArChain<T>; 1],
}

impl<T: Scalar> SimplifiedAr<T> {
    pub const PARAMS: &'static [&'static str] = &["sigma_v2"];

    pub fn new(a: T, sigma_w: T) -> Self {
        Self {
            chains: [ArChain {
                a: Coefficient::Known(a),
                sigma_w: Noise::Known(sigma_w),
                sigma_v: Noise::Variance(0),
                statistics: ArStatistics::Residual,
            }],
        }
    }
}

impl<T: Scalar> Default for SimplifiedAr<T> {
    fn default() -> Self {
        Self::new(T::lit(0.95), T::one())
    }
}

impl<T: Scalar> ParameterMap<T> for SimplifiedAr<T> {
    fn param_names(&self) -> &'static [&'static str] {
        Self::PARAMS
    }

    fn n_stats(&self) -> usize {
        1
    }

    fn dependencies(&self) -> Vec<Vec<usize>> {
        vec![vec![0]]
    }

    fn map_param(&self, _param: usize, s_hat: &[T], _previous: T, diag: &mut Diagnostics) -> T {
        if s_hat[0] < T::zero() {
            diag.clamped_variance += 1;
            T::zero()
        } else {
            s_hat[0]
        }
    }
}

impl<T: Scalar> Benchmark<T> for SimplifiedAr<T> {
    type Chain = ArChain<T>;

    fn name(&self) -> &'static str {
        "simplified_ar"
    }

    fn chains(&self) -> &[ArChain<T>] {
        &self.chains
    }

    fn pool_stats(&self, per_chain: &[Vec<T>]) -> Vec<T> {
        per_chain[0].clone()
    }

    fn check_params(&self, theta: &ParamVector<T>) -> Result<()> {
        self.chains[0].check(theta)
    }
}

/// AR(1) with unknown `a`, `sigma_w` and `sigma_v`.
#[derive(Clone, Debug)]
pub struct FullAr<T> {
    chains: [ArChain<T>; 1],
}

impl<T: Scalar> FullAr<T> {
    pub const PARAMS: &'static [&'static str] = &["a", "sigma_w", "sigma_v"];

    pub fn new() -> Self {
        Self {
            chains: [ArChain {
                a: Coefficient::Param(0),
                sigma_w: Noise::Sd(1),
                sigma_v: Noise::Sd(2),
                statistics: ArStatistics::Full,
            }],
        }
    }
}

impl<T: Scalar> Default for FullAr<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> ParameterMap<T> for FullAr<T> {
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
            0 => maps::ratio(s[1], s[0], previous, diag),
            1 => maps::innovation_sd(s[0], s[1], s[2], previous, diag),
            2 => maps::floored_sqrt(s[3], diag),
            _ => unreachable!("FullAr has three parameters"),
        }
    }
}

impl<T: Scalar> Benchmark<T> for FullAr<T> {
    type Chain = ArChain<T>;

    fn name(&self) -> &'static str {
        "full_ar"
    }

    fn chains(&self) -> &[ArChain<T>] {
        &self.chains
    }

    fn pool_stats(&self, per_chain: &[Vec<T>]) -> Vec<T> {
        per_chain[0].clone()
    }

    fn check_params(&self, theta: &ParamVector<T>) -> Result<()> {
        self.chains[0].check(theta)
    }
}

/// Two independent AR(1) chains sharing only the observation noise.
///
/// Statistics: chain A's `(x^2, x x', x'^2)`, chain B's, then the mean of the
/// two squared residuals.
#[derive(Clone, Debug)]
pub struct TwoDimAr<T> {
    chains: [ArChain<T>; 2],
}

impl<T: Scalar> TwoDimAr<T> {
    pub const PARAMS: &'static [&'static str] = &["a_A", "sigma_w_A", "sigma_v", "a_B", "sigma_w_B"];

    pub fn new() -> Self {
        let chain = |a, w| ArChain {
            a: Coefficient::Param(a),
            sigma_w: Noise::Sd(w),
            sigma_v: Noise::Sd(2),
            statistics: ArStatistics::Full,
        };
        Self {
            chains: [chain(0, 1), chain(3, 4)],
        }
    }
}

impl<T: Scalar> Default for TwoDimAr<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> ParameterMap<T> for TwoDimAr<T> {
    fn param_names(&self) -> &'static [&'static str] {
        Self::PARAMS
    }

    fn n_stats(&self) -> usize {
        7
    }

    fn dependencies(&self) -> Vec<Vec<usize>> {
        vec![vec![0, 1], vec![0, 1, 2], vec![6], vec![3, 4], vec![3, 4, 5]]
    }

    fn map_param(&self, param: usize, s: &[T], previous: T, diag: &mut Diagnostics) -> T {
        match param {
            0 => maps::ratio(s[1], s[0], previous, diag),
            1 => maps::innovation_sd(s[0], s[1], s[2], previous, diag),
            2 => maps::floored_sqrt(s[6], diag),
            3 => maps::ratio(s[4], s[3], previous, diag),
            4 => maps::innovation_sd(s[3], s[4], s[5], previous, diag),
            _ => unreachable!("TwoDimAr has five parameters"),
        }
    }
}

impl<T: Scalar> Benchmark<T> for TwoDimAr<T> {
    type Chain = ArChain<T>;

    fn name(&self) -> &'static str {
        "two_dim_ar"
    }

    fn chains(&self) -> &[ArChain<T>] {
        &self.chains
    }

    fn pool_stats(&self, per_chain: &[Vec<T>]) -> Vec<T> {
        let (a, b) = (&per_chain[0], &per_chain[1]);
        vec![a[0], a[1], a[2], b[0], b[1], b[2], (a[3] + b[3]) / T::lit(2.0)]
    }

    fn check_params(&self, theta: &ParamVector<T>) -> Result<()> {
        self.chains[0].check(theta)?;
        self.chains[1].check(theta)
    }
}
