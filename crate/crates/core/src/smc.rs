//! Bootstrap particle filter with fixed-lag statistic collection.
//!
//! Each particle keeps only its most recent `lag + window` latent states in a
//! ring; at time `t` the statistic for index `k = t - lag - window + 1` is the
//! weight-averaged model statistic over those windows. Nothing older than the
//! ring is ever stored.

use std::collections::VecDeque;

use crate::{Error, ParamVector, Result, RngStream, Scalar, StateSpaceModel};

/// Default fixed lag.
pub const DEFAULT_LAG: usize = 20;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Resampler {
    #[default]
    Systematic,
    Multinomial,
}

impl std::str::FromStr for Resampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "systematic" => Ok(Self::Systematic),
            "multinomial" => Ok(Self::Multinomial),
            other => Err(Error::Config(format!(
                "unknown resampler '{other}' (expected systematic or multinomial)"
            ))),
        }
    }
}

impl std::fmt::Display for Resampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Systematic => "systematic",
            Self::Multinomial => "multinomial",
        })
    }
}

/// Fixed-depth state history for all particles, advanced in lockstep.
///
/// Ages count back from the newest state: age 0 is time `t`, age `a` is
/// time `t - a`. Only ages below `depth` exist.
#[derive(Clone, Debug)]
pub struct HistoryRing<T> {
    n: usize,
    depth: usize,
    len: usize,
    newest: usize,
    slots: Vec<T>,
}

impl<T: Scalar> HistoryRing<T> {
    fn new(depth: usize, initial: &[T]) -> Self {
        assert!(depth >= 1);
        let n = initial.len();
        let mut slots = vec![T::zero(); n * depth];
        for (i, &x) in initial.iter().enumerate() {
            slots[i * depth] = x;
        }
        Self {
            n,
            depth,
            len: 1,
            newest: 0,
            slots,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Number of states currently held per particle, `min(t, depth)`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn particles(&self) -> usize {
        self.n
    }

    fn slot(&self, age: usize) -> usize {
        (self.newest + self.depth - age) % self.depth
    }

    pub fn at_age(&self, particle: usize, age: usize) -> T {
        assert!(age < self.len, "age {age} outside history of length {}", self.len);
        self.slots[particle * self.depth + self.slot(age)]
    }

    pub fn latest(&self, particle: usize) -> T {
        self.at_age(particle, 0)
    }

    /// Copies the states from age `oldest` down to age `oldest + 1 - out.len()`
    /// into `out`, oldest first.
    pub fn window(&self, particle: usize, oldest: usize, out: &mut [T]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.at_age(particle, oldest - j);
        }
    }

    fn advance(&mut self, mut next: impl FnMut(usize, T) -> T) {
        let prev = self.newest;
        self.newest = (self.newest + 1) % self.depth;
        for i in 0..self.n {
            let base = i * self.depth;
            self.slots[base + self.newest] = next(i, self.slots[base + prev]);
        }
        self.len = (self.len + 1).min(self.depth);
    }

    fn gather(&mut self, parents: &[usize]) {
        let mut slots = Vec::with_capacity(self.slots.len());
        for &p in parents {
            slots.extend_from_slice(&self.slots[p * self.depth..(p + 1) * self.depth]);
        }
        self.slots = slots;
    }
}

/// Effective sample size `1 / sum(w_i^2)` of normalized weights.
pub fn ess<T: Scalar>(weights: &[T]) -> T {
    let ss: T = weights.iter().map(|&w| w * w).sum();
    T::one() / ss
}

/// Draws `weights.len()` ancestor indices with expected multiplicities
/// `N * w_i`. Indices come out sorted.
pub fn resample_indices<T: Scalar>(
    weights: &[T],
    scheme: Resampler,
    rng: &mut RngStream,
    out: &mut Vec<usize>,
) {
    let n = weights.len();
    out.clear();
    let nf = T::from_count(n);
    let mut cumulative = Vec::with_capacity(n);
    let mut acc = T::zero();
    for &w in weights {
        acc += w;
        cumulative.push(acc);
    }
    let total = acc;
    let pick = |u: T, start: usize| -> usize {
        let mut i = start;
        while i + 1 < n && cumulative[i] <= u {
            i += 1;
        }
        i
    };
    match scheme {
        Resampler::Systematic => {
            let offset: T = rng.uniform();
            let mut i = 0;
            for k in 0..n {
                let u = (T::from_count(k) + offset) / nf * total;
                i = pick(u, i);
                out.push(i);
            }
        }
        Resampler::Multinomial => {
            // Sorted uniforms via normalized exponential spacings.
            let mut spacings = Vec::with_capacity(n + 1);
            let mut sum = T::zero();
            for _ in 0..=n {
                let e = -(T::one() - rng.uniform::<T>()).ln();
                sum += e;
                spacings.push(sum);
            }
            let mut i = 0;
            for &s in &spacings[..n] {
                let u = s / sum * total;
                i = pick(u, i);
                out.push(i);
            }
        }
    }
}

/// `N` weighted particles with their recent state histories.
#[derive(Clone, Debug)]
pub struct ParticleSystem<T> {
    lag: usize,
    window: usize,
    t: usize,
    awaiting_first: bool,
    history: HistoryRing<T>,
    weights: Vec<T>,
    observations: VecDeque<T>,
    resampler: Resampler,
    resamples: usize,
    parents: Vec<usize>,
    log_weights: Vec<T>,
    stat_buf: Vec<T>,
    window_buf: Vec<T>,
}

impl<T: Scalar> ParticleSystem<T> {
    /// Draws `n` initial states from the model's initial distribution under
    /// `theta0`, with uniform weights, at `t = 1`. The first call to
    /// [`step`](Self::step) weights these states by `y_1` without propagating.
    pub fn init<M: StateSpaceModel<T> + ?Sized>(
        model: &M,
        theta0: &ParamVector<T>,
        n: usize,
        lag: usize,
        resampler: Resampler,
        rng: &mut RngStream,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("particle count must be at least 1".into()));
        }
        model.check_initial(theta0)?;
        let initial: Vec<T> = (0..n).map(|_| model.sample_initial(theta0, rng)).collect();
        let window = model.stat_window();
        let depth = lag + window;
        Ok(Self {
            lag,
            window,
            t: 1,
            awaiting_first: true,
            history: HistoryRing::new(depth, &initial),
            weights: vec![T::one() / T::from_count(n); n],
            observations: VecDeque::with_capacity(depth),
            resampler,
            resamples: 0,
            parents: Vec::with_capacity(n),
            log_weights: vec![T::zero(); n],
            stat_buf: vec![T::zero(); model.n_stats()],
            window_buf: vec![T::zero(); window],
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Time index of the newest latent state.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn lag(&self) -> usize {
        self.lag
    }

    /// Consecutive states each statistic reads.
    pub fn stat_window(&self) -> usize {
        self.window
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn history(&self) -> &HistoryRing<T> {
        &self.history
    }

    pub fn ess(&self) -> T {
        ess(&self.weights)
    }

    /// Number of resampling events so far.
    pub fn resamples(&self) -> usize {
        self.resamples
    }

    /// Assimilates observation `y` (the next one in sequence) under `theta`.
    ///
    /// Returns the fixed-lag statistic vector once `t >= lag + window`.
    /// Resampling, when the ESS drops below `N/2`, happens after the
    /// statistic has been collected.
    pub fn step<M: StateSpaceModel<T> + ?Sized>(
        &mut self,
        model: &M,
        y: T,
        theta: &ParamVector<T>,
        rng: &mut RngStream,
    ) -> Result<Option<Vec<T>>> {
        if self.awaiting_first {
            self.awaiting_first = false;
        } else {
            self.history
                .advance(|_, prev| model.sample_transition(prev, theta, rng));
            self.t += 1;
        }
        if self.observations.len() == self.history.depth() {
            self.observations.pop_front();
        }
        self.observations.push_back(y);

        self.reweight(model, y, theta)?;
        let stats = self.collect(model);
        if self.ess() < T::from_count(self.len()) / T::lit(2.0) {
            self.resample(rng);
        }
        Ok(stats)
    }

    fn reweight<M: StateSpaceModel<T> + ?Sized>(
        &mut self,
        model: &M,
        y: T,
        theta: &ParamVector<T>,
    ) -> Result<()> {
        let mut max = T::neg_infinity();
        for i in 0..self.weights.len() {
            let lw = self.weights[i].ln() + model.log_emission(y, self.history.latest(i), theta);
            let lw = if lw.is_nan() { T::neg_infinity() } else { lw };
            self.log_weights[i] = lw;
            if lw > max {
                max = lw;
            }
        }
        if !max.is_finite() {
            return Err(Error::DegenerateWeights { t: self.t });
        }
        let mut total = T::zero();
        for (w, &lw) in self.weights.iter_mut().zip(&self.log_weights) {
            *w = (lw - max).exp();
            total += *w;
        }
        for w in &mut self.weights {
            *w /= total;
        }
        Ok(())
    }

    fn collect<M: StateSpaceModel<T> + ?Sized>(&mut self, model: &M) -> Option<Vec<T>> {
        if self.history.len() < self.history.depth() {
            return None;
        }
        let oldest = self.history.depth() - 1;
        let y = self.observations[0];
        let mut out = vec![T::zero(); self.stat_buf.len()];
        for i in 0..self.weights.len() {
            let w = self.weights[i];
            if w == T::zero() {
                continue;
            }
            self.history.window(i, oldest, &mut self.window_buf);
            model.collect_stats(y, &self.window_buf, &mut self.stat_buf);
            for (o, &s) in out.iter_mut().zip(&self.stat_buf) {
                *o += w * s;
            }
        }
        Some(out)
    }

    /// Resamples with the configured scheme, copying whole histories, and
    /// resets the weights to `1/N`.
    pub fn resample(&mut self, rng: &mut RngStream) {
        let mut parents = std::mem::take(&mut self.parents);
        resample_indices(&self.weights, self.resampler, rng, &mut parents);
        self.history.gather(&parents);
        self.parents = parents;
        let uniform = T::one() / T::from_count(self.len());
        self.weights.iter_mut().for_each(|w| *w = uniform);
        self.resamples += 1;
    }

    /// Ancestor indices chosen by the most recent resampling.
    pub fn last_parents(&self) -> &[usize] {
        &self.parents
    }
}
