use ioem_core::models::kalman::kalman_smoother;
use ioem_core::models::{simulate, Benchmark, BenchmarkFilter, FullAr, SimplifiedAr};
use ioem_core::{derive_stream, Resampler};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn observations(a: f64, sw: f64, sv: f64, t: usize, seed: u64) -> Vec<f64> {
    let b = FullAr::new();
    let th = b.params(vec![a, sw, sv]).unwrap();
    simulate(&b, &th, t, &derive_stream(seed, 0)).unwrap().observed.remove(0)
}

#[test]
fn exact_observation_limit() {
    let ys = observations(0.9, 1.0, 1.0, 200, 1);
    let k = kalman_smoother(0.9, 1.0, 1e-7, &ys, 5);
    for (i, y) in ys.iter().enumerate() {
        assert!((k.means[i] - y).abs() < 1e-9);
        assert!(k.residual_sq[i] < 1e-12);
    }
}

#[test]
fn independent_states_are_conjugate() {
    let (sw, sv) = (1.5, 2.0);
    let ys = observations(0.0, sw, sv, 100, 2);
    let k = kalman_smoother(0.0, sw, sv, &ys, 7);
    let shrink = sw * sw / (sw * sw + sv * sv);
    let var = sw * sw * sv * sv / (sw * sw + sv * sv);
    for (i, y) in ys.iter().enumerate() {
        assert!((k.means[i] - shrink * y).abs() < 1e-12);
        assert!((k.vars[i] - var).abs() < 1e-12);
        let r = y - shrink * y;
        assert!((k.residual_sq[i] - (r * r + var)).abs() < 1e-12);
    }
}

/// Solves `m x = b` for symmetric positive definite `m` by Gaussian
/// elimination without pivoting.
fn solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    x
}

/// Posterior mean and variance of `X_k` given `Y_{1:m}` from the joint
/// Gaussian of three states.
fn dense_posterior(a: f64, sw: f64, sv: f64, ys: &[f64], k: usize, m: usize) -> (f64, f64) {
    let sx = sw * sw / (1.0 - a * a);
    let cov = |i: usize, j: usize| sx * a.powi((i as i32 - j as i32).abs());
    let syy: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| cov(i, j) + if i == j { sv * sv } else { 0.0 }).collect())
        .collect();
    let sxy: Vec<f64> = (0..m).map(|j| cov(k, j)).collect();
    let alpha = solve(syy.clone(), ys[..m].to_vec());
    let beta = solve(syy, sxy.clone());
    let mean: f64 = sxy.iter().zip(&alpha).map(|(c, a)| c * a).sum();
    let var = cov(k, k) - sxy.iter().zip(&beta).map(|(c, b)| c * b).sum::<f64>();
    (mean, var)
}

#[test]
fn three_steps_match_dense_gaussian() {
    for (a, sw, sv, seed) in [(0.8, 1.0, 0.7, 3), (-0.5, 2.0, 1.5, 4), (0.95, 0.3, 3.0, 5)] {
        let ys = observations(a, sw, sv, 3, seed);
        for lag in 0..4 {
            let k = kalman_smoother(a, sw, sv, &ys, lag);
            for i in 0..3 {
                let m = (i + lag + 1).min(3);
                let (mean, var) = dense_posterior(a, sw, sv, &ys, i, m);
                assert!(rel(k.means[i], mean) < 1e-10 || (k.means[i] - mean).abs() < 1e-12);
                assert!(rel(k.vars[i], var) < 1e-10);
                let d = ys[i] - mean;
                assert!(rel(k.residual_sq[i], d * d + var) < 1e-10);
                if m == i + 1 {
                    assert!(rel(k.filtered_vars[i], var) < 1e-10);
                }
            }
        }
    }
}

#[test]
fn residual_mean_covers_full_windows_only() {
    let ys = observations(0.5, 1.0, 1.0, 10, 6);
    let k = kalman_smoother(0.5, 1.0, 1.0, &ys, 4);
    let want = k.residual_sq[..6].iter().sum::<f64>() / 6.0;
    assert!((k.residual_mean().unwrap() - want).abs() < 1e-15);
    assert!(kalman_smoother(0.5, 1.0, 1.0, &ys[..4], 4).residual_mean().is_none());
}

#[test]
fn particle_statistic_tracks_smoother() {
    let b = SimplifiedAr::default();
    let th = b.params(vec![30.0]).unwrap();
    let (t, lag) = (2000, 20);
    let sim = simulate(&b, &th, t, &derive_stream(2024, 0)).unwrap();
    let oracle = kalman_smoother(0.95, 1.0, 30f64.sqrt(), &sim.observed[0], lag)
        .residual_mean()
        .unwrap();
    let mut filter = BenchmarkFilter::new(&b, &th, 1000, lag, Resampler::Systematic, &derive_stream(2024, 1)).unwrap();
    let (mut sum, mut n) = (0.0, 0);
    let mut ys = Vec::new();
    for step in 1..=t {
        sim.observation(step, &mut ys);
        if let Some(s) = filter.step(&b, &ys, &th).unwrap() {
            sum += s[0];
            n += 1;
        }
    }
    assert_eq!(n, t - lag);
    let got = sum / n as f64;
    assert!(rel(got, oracle) < 0.05, "{got} vs {oracle}");
}
