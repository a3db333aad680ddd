//! Online weighted linear regression of a series on its relative index.
//!
//! Points carry squared weights `w_k^2`; the newest point sits at `x = 0` and
//! older points at `-1, -2, ...`. Each update discounts every existing squared
//! weight by `(1 - gamma)` and appends the new point with squared weight
//! `gamma`, so when fed a learning-rate sequence starting at 1 the squared
//! weights are exactly the averaging weights `eta_k^t` of the running mean.
//!
//! Coefficient variances use the sandwich form
//! `A^-1 (sigma^2 X' diag(w^4) X) A^-1` with `A = X' diag(w^2) X`, so the
//! fourth-power weight moments are tracked alongside the usual ones.
//!
//! Moments are kept about the weighted mean of `x` and the residual sum of
//! squares is accumulated one point at a time, so nothing is recovered by
//! subtracting large raw sums.

use crate::Scalar;

/// Minimum normal-equation determinant for estimates to be reported.
pub const MIN_DETERMINANT: f64 = 1e-300;

/// Floor on the residual degrees of freedom `n_eff - 2`.
pub const MIN_RESIDUAL_DOF: f64 = 0.1;

/// Weighted moments of the points. `x` is the relative index of each point
/// and `mx`, `my` are the `w^2`-weighted means.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RegressionState<T> {
    /// Σ w²
    pub w2: T,
    pub mx: T,
    pub my: T,
    /// Σ w² (x - mx)²
    pub cxx: T,
    /// Σ w² (x - mx)(y - my)
    pub cxy: T,
    /// Weighted residual sum of squares of the current fit.
    pub rss: T,
    /// Σ w⁴
    pub w4: T,
    /// Σ w⁴ (x - mx)
    pub w4x: T,
    /// Σ w⁴ (x - mx)²
    pub w4xx: T,
    /// Points with nonzero weight.
    pub n: usize,
}

/// Intercept (value at the newest point) and slope per step, with their
/// standard errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegressionEstimates<T> {
    pub intercept: T,
    pub slope: T,
    pub intercept_sd: T,
    pub slope_sd: T,
}

impl<T: Scalar> RegressionState<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends `y` with learning weight `gamma`.
    ///
    /// Panics unless `0 < gamma <= 1`.
    pub fn update(&mut self, y: T, gamma: T) {
        assert!(
            gamma > T::zero() && gamma <= T::one(),
            "learning weight {gamma} outside (0, 1]"
        );
        let keep = T::one() - gamma;
        if keep == T::zero() {
            *self = Self::default();
        }
        let keep2 = keep * keep;

        // Discount. Shifting every x by -1 moves the mean and leaves the
        // centred moments alone.
        let w2 = self.w2 * keep;
        self.cxx *= keep;
        self.cxy *= keep;
        self.rss *= keep;
        self.w4 *= keep2;
        self.w4x *= keep2;
        self.w4xx *= keep2;
        self.mx -= T::one();

        // Residual sum of squares grows by the new point's weighted squared
        // prediction error, deflated by its leverage.
        if self.n >= 2 && w2 * self.cxx > T::zero() {
            let slope = self.cxy / self.cxx;
            let err = y - (self.my - slope * self.mx);
            let leverage = T::one() / w2 + self.mx * self.mx / self.cxx;
            self.rss += gamma * err * err / (T::one() + gamma * leverage);
        }

        // New point at x = 0.
        let total = w2 + gamma;
        let dx = -self.mx;
        let dy = y - self.my;
        let mx = self.mx + gamma * dx / total;
        self.my += gamma * dy / total;
        self.cxx += gamma * dx * (-mx);
        self.cxy += gamma * dx * (y - self.my);

        // Re-centre the fourth-power moments on the new mean, then add the
        // point.
        let d = self.mx - mx;
        self.w4xx += T::lit(2.0) * d * self.w4x + d * d * self.w4;
        self.w4x += d * self.w4;
        self.w4 += gamma * gamma;
        self.w4x += gamma * gamma * (-mx);
        self.w4xx += gamma * gamma * mx * mx;

        self.mx = mx;
        self.w2 = total;
        self.n += 1;
    }

    /// Effective number of points `(Σw²)² / Σw⁴`.
    pub fn effective_size(&self) -> T {
        self.w2 * self.w2 / self.w4
    }

    /// Weighted least-squares coefficients and their standard errors, or
    /// `None` with fewer than three points or (near-)singular normal equations.
    pub fn estimates(&self) -> Option<RegressionEstimates<T>> {
        if self.n < 3 {
            return None;
        }
        let det = self.w2 * self.cxx;
        let usable = det.is_finite() && det > T::lit(MIN_DETERMINANT);
        if !usable {
            return None;
        }
        let slope = self.cxy / self.cxx;
        let intercept = self.my - slope * self.mx;

        // Weighted mean squared residual with a degrees-of-freedom correction.
        let n_eff = self.effective_size();
        let dof = (n_eff - T::lit(2.0)).max(T::lit(MIN_RESIDUAL_DOF));
        let sigma2 = self.rss / self.w2 * n_eff / dof;

        // In centred coordinates A is diagonal, so the sandwich is
        // B_ij / (A_ii A_jj); the intercept at x = 0 is c0 - mx * slope.
        let v00 = self.w4 / (self.w2 * self.w2);
        let v01 = self.w4x / (self.w2 * self.cxx);
        let v11 = self.w4xx / (self.cxx * self.cxx);
        let var0 = v00 - T::lit(2.0) * self.mx * v01 + self.mx * self.mx * v11;
        Some(RegressionEstimates {
            intercept,
            slope,
            intercept_sd: (sigma2 * var0).max(T::zero()).sqrt(),
            slope_sd: (sigma2 * v11).max(T::zero()).sqrt(),
        })
    }
}
