//! Exact fixed-lag smoothing for a scalar AR(1) observed in Gaussian noise.
//!
//! Forward Kalman filter from the stationary prior, then for each `k` a
//! Rauch-Tung-Striebel pass backward from `min(k + lag, T)`.

use crate::Scalar;

/// Per-step moments, indexed `k - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedLagSmoother<T> {
    pub lag: usize,
    pub filtered_means: Vec<T>,
    pub filtered_vars: Vec<T>,
    /// `E[X_k | Y_{1:min(k+lag, T)}]`
    pub means: Vec<T>,
    /// `Var[X_k | Y_{1:min(k+lag, T)}]`
    pub vars: Vec<T>,
    /// `E[(Y_k - X_k)^2 | Y_{1:min(k+lag, T)}]`
    pub residual_sq: Vec<T>,
}

impl<T: Scalar> FixedLagSmoother<T> {
    /// Mean of `residual_sq` over the steps whose full lag window is
    /// observed, `k = 1..=T - lag`. This is the value the fixed-lag particle
    /// statistic estimates on average.
    pub fn residual_mean(&self) -> Option<T> {
        let n = self.residual_sq.len().checked_sub(self.lag).filter(|&n| n > 0)?;
        let sum: T = self.residual_sq[..n].iter().copied().sum();
        Some(sum / T::from_count(n))
    }
}

/// Runs the smoother. `a` must satisfy `|a| < 1` and `sigma_w` must be
/// positive for the stationary prior to exist.
pub fn kalman_smoother<T: Scalar>(a: T, sigma_w: T, sigma_v: T, ys: &[T], lag: usize) -> FixedLagSmoother<T> {
    let n = ys.len();
    let q = sigma_w * sigma_w;
    let r = sigma_v * sigma_v;
    let mut pred_m = Vec::with_capacity(n);
    let mut pred_p = Vec::with_capacity(n);
    let mut filt_m = Vec::with_capacity(n);
    let mut filt_p = Vec::with_capacity(n);

    let (mut m, mut p) = (T::zero(), q / (T::one() - a * a));
    for (k, &y) in ys.iter().enumerate() {
        if k > 0 {
            m = a * m;
            p = a * a * p + q;
        }
        pred_m.push(m);
        pred_p.push(p);
        let gain = p / (p + r);
        m = m + gain * (y - m);
        p = (T::one() - gain) * p;
        filt_m.push(m);
        filt_p.push(p);
    }

    let mut means = Vec::with_capacity(n);
    let mut vars = Vec::with_capacity(n);
    let mut residual_sq = Vec::with_capacity(n);
    for k in 0..n {
        let end = (k + lag).min(n - 1);
        let (mut ms, mut ps) = (filt_m[end], filt_p[end]);
        for i in (k..end).rev() {
            let j = filt_p[i] * a / pred_p[i + 1];
            ms = filt_m[i] + j * (ms - pred_m[i + 1]);
            ps = filt_p[i] + j * j * (ps - pred_p[i + 1]);
        }
        let d = ys[k] - ms;
        means.push(ms);
        vars.push(ps);
        residual_sq.push(d * d + ps);
    }

    FixedLagSmoother {
        lag,
        filtered_means: filt_m,
        filtered_vars: filt_p,
        means,
        vars,
        residual_sq,
    }
}
