//! Stochastic-approximation EM schedulers.
//!
//! All four consume the same stream of per-step statistic vectors and turn it
//! into parameter estimates through a [`ParameterMap`]:
//!
//! * [`BemState`]: batch means, parameters updated only at batch boundaries;
//! * [`OemState`]: running average with learning rate `t^-c`;
//! * [`AvgState`]: OEM followed by a running mean of its estimates from `t0` on;
//! * [`IoemState`]: one learning-rate sequence per parameter, chosen online
//!   from a weighted regression on pseudo-independent parameter updates.
//!
//! The step index `t` used for learning rates counts statistics, so the first
//! statistic always has `gamma = 1`.

use crate::regression::{RegressionEstimates, RegressionState};
use crate::{Diagnostics, Error, ParamVector, ParameterMap, Result, Scalar};

/// Default IOEM cap exponent.
pub const DEFAULT_CAP_C: f64 = 0.51;

/// Regression points required before IOEM trusts its own learning rate.
pub const IOEM_WARMUP: usize = 10;

/// Scheduler choice with its tuning parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method<T> {
    Bem { batch: usize },
    Oem { c: T },
    Avg { c: T, t0: usize },
    Ioem { cap_c: T },
}

impl<T: Scalar> Method<T> {
    pub fn validate(&self) -> Result<()> {
        let check_c = |c: T, what: &str| {
            if c > T::lit(0.5) && c <= T::one() {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} = {c} must lie in (0.5, 1]")))
            }
        };
        match *self {
            Method::Bem { batch: 0 } => {
                Err(Error::Config("batch size b must be at least 1".into()))
            }
            Method::Bem { .. } => Ok(()),
            Method::Oem { c } => check_c(c, "c"),
            Method::Avg { c, t0 } => {
                check_c(c, "c")?;
                if t0 == 0 {
                    return Err(Error::Config("t0 must be at least 1".into()));
                }
                Ok(())
            }
            Method::Ioem { cap_c } => check_c(cap_c, "cap-c"),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Method::Bem { .. } => "bem",
            Method::Oem { .. } => "oem",
            Method::Avg { .. } => "avg",
            Method::Ioem { .. } => "ioem",
        }
    }

    /// Short label including the tuning parameters, e.g. `oem_c0.6`.
    pub fn label(&self) -> String {
        match self {
            Method::Bem { batch } => format!("bem_b{batch}"),
            Method::Oem { c } => format!("oem_c{c}"),
            Method::Avg { c, t0 } => format!("avg_c{c}_t0{t0}"),
            Method::Ioem { cap_c } => {
                if (cap_c.to_f64_lossy() - DEFAULT_CAP_C).abs() < 1e-15 {
                    "ioem".to_string()
                } else {
                    format!("ioem_c{cap_c}")
                }
            }
        }
    }
}

/// Learning rate `t^-c`.
pub fn power_gamma<T: Scalar>(t: usize, c: T) -> T {
    T::from_count(t).powf(-c)
}

/// `gamma * s + (1 - gamma) * prev`
#[inline]
pub fn blend<T: Scalar>(prev: T, s: T, gamma: T) -> T {
    gamma * s + (T::one() - gamma) * prev
}

/// Weight `eta_k^t` of each input in a running average driven by `gammas`
/// (`gammas[0]` is normally 1).
pub fn averaging_weights<T: Scalar>(gammas: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); gammas.len()];
    let mut tail = T::one();
    for k in (0..gammas.len()).rev() {
        out[k] = gammas[k] * tail;
        tail *= T::one() - gammas[k];
    }
    out
}

/// Pseudo-independent update `theta_t / gamma + (1 - 1/gamma) theta_{t-1}`.
///
/// Undoes one step of smoothing: for a parameter linear in a running average
/// this recovers the raw statistic, so successive values are uncorrelated
/// when the raw statistics are.
pub fn pseudo_update<T: Scalar>(current: T, previous: T, gamma: T) -> T {
    debug_assert!(gamma > T::zero() && gamma <= T::one());
    let inv = gamma.recip();
    inv * current + (T::one() - inv) * previous
}

/// Bounds `[(t+1)^-1, (t+1)^-c]` for the learning rate after step `t`.
pub fn gamma_bounds<T: Scalar>(t: usize, c: T) -> (T, T) {
    let next = T::from_count(t + 1);
    (next.recip(), next.powf(-c))
}

/// Raw proposal `(|slope| + sd(slope)) / sd(intercept)`, or `None` when the
/// intercept has no estimated spread.
pub fn regression_gamma<T: Scalar>(est: &RegressionEstimates<T>) -> Option<T> {
    if est.intercept_sd > T::zero() && est.intercept_sd.is_finite() {
        let g = (est.slope.abs() + est.slope_sd) / est.intercept_sd;
        g.is_finite().then_some(g)
    } else {
        None
    }
}

/// Clamps a proposal into [`gamma_bounds`]; no proposal means the upper bound.
pub fn cap_gamma<T: Scalar>(raw: Option<T>, t: usize, c: T) -> T {
    let (lo, hi) = gamma_bounds(t, c);
    match raw {
        Some(g) => hi.min(g.max(lo)),
        None => hi,
    }
}

/// Learning rate for step `t + 1` from the regression state after step `t`.
pub fn propose_gamma<T: Scalar>(reg: &RegressionState<T>, t: usize, c: T) -> T {
    cap_gamma(reg.estimates().as_ref().and_then(regression_gamma), t, c)
}

#[derive(Clone, Debug)]
pub struct BemState<T> {
    batch: usize,
    sum: Vec<T>,
    in_batch: usize,
    batches: usize,
    s_hat: Vec<T>,
    theta: ParamVector<T>,
}

impl<T: Scalar> BemState<T> {
    pub fn new(batch: usize, n_stats: usize, theta0: ParamVector<T>) -> Self {
        assert!(batch >= 1);
        Self {
            batch,
            sum: vec![T::zero(); n_stats],
            in_batch: 0,
            batches: 0,
            s_hat: vec![T::zero(); n_stats],
            theta: theta0,
        }
    }

    pub fn update<M: ParameterMap<T> + ?Sized>(
        &mut self,
        stats: &[T],
        map: &M,
        diag: &mut Diagnostics,
    ) -> &ParamVector<T> {
        for (acc, &s) in self.sum.iter_mut().zip(stats) {
            *acc += s;
        }
        self.in_batch += 1;
        if self.in_batch == self.batch {
            let b = T::from_count(self.batch);
            for (s_hat, acc) in self.s_hat.iter_mut().zip(self.sum.iter_mut()) {
                *s_hat = *acc / b;
                *acc = T::zero();
            }
            self.in_batch = 0;
            self.batches += 1;
            self.theta = map.map(&self.s_hat, &self.theta, diag);
        }
        &self.theta
    }

    /// Completed batches.
    pub fn batches(&self) -> usize {
        self.batches
    }

    pub fn s_hat(&self) -> &[T] {
        &self.s_hat
    }
}

#[derive(Clone, Debug)]
pub struct OemState<T> {
    c: T,
    t: usize,
    gamma: T,
    s_hat: Vec<T>,
    theta: ParamVector<T>,
}

impl<T: Scalar> OemState<T> {
    pub fn new(c: T, n_stats: usize, theta0: ParamVector<T>) -> Self {
        Self {
            c,
            t: 0,
            gamma: T::one(),
            s_hat: vec![T::zero(); n_stats],
            theta: theta0,
        }
    }

    pub fn update<M: ParameterMap<T> + ?Sized>(
        &mut self,
        stats: &[T],
        map: &M,
        diag: &mut Diagnostics,
    ) -> &ParamVector<T> {
        self.t += 1;
        self.gamma = power_gamma(self.t, self.c);
        for (s_hat, &s) in self.s_hat.iter_mut().zip(stats) {
            *s_hat = blend(*s_hat, s, self.gamma);
        }
        self.theta = map.map(&self.s_hat, &self.theta, diag);
        &self.theta
    }

    /// Learning rate used by the most recent update.
    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn steps(&self) -> usize {
        self.t
    }

    pub fn s_hat(&self) -> &[T] {
        &self.s_hat
    }

    pub fn theta(&self) -> &ParamVector<T> {
        &self.theta
    }
}

#[derive(Clone, Debug)]
pub struct AvgState<T> {
    inner: OemState<T>,
    t0: usize,
    averaged: usize,
    mean: Vec<T>,
    theta: ParamVector<T>,
}

impl<T: Scalar> AvgState<T> {
    pub fn new(c: T, t0: usize, n_stats: usize, theta0: ParamVector<T>) -> Self {
        Self {
            inner: OemState::new(c, n_stats, theta0.clone()),
            t0,
            averaged: 0,
            mean: vec![T::zero(); theta0.len()],
            theta: theta0,
        }
    }

    pub fn update<M: ParameterMap<T> + ?Sized>(
        &mut self,
        stats: &[T],
        map: &M,
        diag: &mut Diagnostics,
    ) -> &ParamVector<T> {
        self.inner.update(stats, map, diag);
        let oem = &self.inner.theta;
        if self.inner.t < self.t0 {
            self.theta = oem.clone();
        } else {
            self.averaged += 1;
            let k = T::from_count(self.averaged);
            for (m, &v) in self.mean.iter_mut().zip(oem.values()) {
                *m += (v - *m) / k;
            }
            self.theta = ParamVector::new(oem.names(), self.mean.clone());
        }
        &self.theta
    }

    pub fn inner(&self) -> &OemState<T> {
        &self.inner
    }
}

#[derive(Clone, Debug)]
struct IoemParam<T> {
    deps: Vec<usize>,
    s_hat: Vec<T>,
    gamma_next: T,
    gamma_used: T,
    pseudo: T,
    reg: RegressionState<T>,
}

/// Introspective online EM: per-parameter learning rates.
///
/// Each parameter keeps private running averages of the statistics it
/// depends on, all driven by that parameter's own learning-rate sequence.
#[derive(Clone, Debug)]
pub struct IoemState<T> {
    cap_c: T,
    t: usize,
    params: Vec<IoemParam<T>>,
    theta: ParamVector<T>,
}

impl<T: Scalar> IoemState<T> {
    pub fn new<M: ParameterMap<T> + ?Sized>(cap_c: T, map: &M, theta0: ParamVector<T>) -> Self {
        let n_stats = map.n_stats();
        let params = map
            .dependencies()
            .into_iter()
            .map(|deps| IoemParam {
                deps,
                s_hat: vec![T::zero(); n_stats],
                gamma_next: T::one(),
                gamma_used: T::one(),
                pseudo: T::zero(),
                reg: RegressionState::new(),
            })
            .collect::<Vec<_>>();
        assert_eq!(params.len(), theta0.len(), "dependency map must cover every parameter");
        Self {
            cap_c,
            t: 0,
            params,
            theta: theta0,
        }
    }

    pub fn update<M: ParameterMap<T> + ?Sized>(
        &mut self,
        stats: &[T],
        map: &M,
        diag: &mut Diagnostics,
    ) -> &ParamVector<T> {
        self.t += 1;
        for (p, param) in self.params.iter_mut().enumerate() {
            let gamma = param.gamma_next;
            for &j in &param.deps {
                param.s_hat[j] = blend(param.s_hat[j], stats[j], gamma);
            }
            let previous = self.theta[p];
            let mut estimate = map.map_param(p, &param.s_hat, previous, diag);
            if !estimate.is_finite() {
                diag.non_finite += 1;
                estimate = previous;
            }
            self.theta.set(p, estimate);

            param.pseudo = pseudo_update(estimate, previous, gamma);
            param.reg.update(param.pseudo, gamma);
            param.gamma_used = gamma;
            param.gamma_next = if param.reg.n < IOEM_WARMUP {
                gamma_bounds(self.t, self.cap_c).1
            } else {
                propose_gamma(&param.reg, self.t, self.cap_c)
            };
        }
        &self.theta
    }

    pub fn steps(&self) -> usize {
        self.t
    }

    /// Learning rate parameter `p` used in the most recent update.
    pub fn gamma(&self, p: usize) -> T {
        self.params[p].gamma_used
    }

    /// Learning rate parameter `p` will use in the next update.
    pub fn next_gamma(&self, p: usize) -> T {
        self.params[p].gamma_next
    }

    /// Most recent pseudo-independent update of parameter `p`.
    pub fn pseudo_update(&self, p: usize) -> T {
        self.params[p].pseudo
    }

    pub fn regression(&self, p: usize) -> &RegressionState<T> {
        &self.params[p].reg
    }

    /// Parameter `p`'s private running average of statistic `j`.
    pub fn s_hat(&self, p: usize, j: usize) -> T {
        self.params[p].s_hat[j]
    }
}

/// Any of the four schedulers, plus the diagnostics of its parameter maps.
#[derive(Clone, Debug)]
pub struct Scheduler<T> {
    kind: SchedulerKind<T>,
    diagnostics: Diagnostics,
}

#[derive(Clone, Debug)]
pub enum SchedulerKind<T> {
    Bem(BemState<T>),
    Oem(OemState<T>),
    Avg(AvgState<T>),
    Ioem(IoemState<T>),
}

impl<T: Scalar> Scheduler<T> {
    pub fn new<M: ParameterMap<T> + ?Sized>(
        method: Method<T>,
        map: &M,
        theta0: ParamVector<T>,
    ) -> Result<Self> {
        method.validate()?;
        if theta0.names() != map.param_names() {
            return Err(Error::Config(format!(
                "initial parameters {:?} do not match model parameters {:?}",
                theta0.names(),
                map.param_names()
            )));
        }
        let n_stats = map.n_stats();
        let kind = match method {
            Method::Bem { batch } => SchedulerKind::Bem(BemState::new(batch, n_stats, theta0)),
            Method::Oem { c } => SchedulerKind::Oem(OemState::new(c, n_stats, theta0)),
            Method::Avg { c, t0 } => SchedulerKind::Avg(AvgState::new(c, t0, n_stats, theta0)),
            Method::Ioem { cap_c } => SchedulerKind::Ioem(IoemState::new(cap_c, map, theta0)),
        };
        Ok(Self {
            kind,
            diagnostics: Diagnostics::default(),
        })
    }

    pub fn update<M: ParameterMap<T> + ?Sized>(&mut self, stats: &[T], map: &M) -> &ParamVector<T> {
        let diag = &mut self.diagnostics;
        match &mut self.kind {
            SchedulerKind::Bem(s) => s.update(stats, map, diag),
            SchedulerKind::Oem(s) => s.update(stats, map, diag),
            SchedulerKind::Avg(s) => s.update(stats, map, diag),
            SchedulerKind::Ioem(s) => s.update(stats, map, diag),
        }
    }

    pub fn theta(&self) -> &ParamVector<T> {
        match &self.kind {
            SchedulerKind::Bem(s) => &s.theta,
            SchedulerKind::Oem(s) => &s.theta,
            SchedulerKind::Avg(s) => &s.theta,
            SchedulerKind::Ioem(s) => &s.theta,
        }
    }

    /// Learning rate applied to parameter `p` at the latest update; `None`
    /// for BEM and AVG, whose reported estimate is not a single running
    /// average.
    pub fn gamma(&self, p: usize) -> Option<T> {
        match &self.kind {
            SchedulerKind::Oem(s) if s.steps() > 0 => Some(s.gamma()),
            SchedulerKind::Ioem(s) if s.steps() > 0 => Some(s.gamma(p)),
            _ => None,
        }
    }

    pub fn kind(&self) -> &SchedulerKind<T> {
        &self.kind
    }

    pub fn diagnostics(&self) -> Diagnostics {
        self.diagnostics
    }
}
