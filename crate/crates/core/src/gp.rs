//! Gaussian-process regression with an anisotropic squared-exponential
//! kernel.
//!
//! One model handles one scalar objective. Targets are standardized to zero
//! mean and unit variance when a model is built, and predictions can be read
//! in either scale. Hyperparameters live in log space; training ascends the
//! log marginal likelihood with Adam using the analytic gradient
//! `dMLL/dtheta = 1/2 tr((alpha alpha^T - K^-1) dK/dtheta)` and keeps the
//! best hyperparameters seen anywhere along the trajectory, including the
//! starting point.
//!
//! All factorizations go through a Cholesky decomposition of `K + noise I`.
//! If that fails, a diagonal jitter escalates from 1e-6 by factors of ten up
//! to 1e-2 before giving up with a numerical error.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const JITTER_START: f64 = 1e-6;
const JITTER_MAX: f64 = 1e-2;
const STD_FLOOR: f64 = 1e-12;
const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Kernel and noise hyperparameters, stored in log space.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelHyperparams {
    log_signal_variance: f64,
    log_length_scales: Vec<f64>,
    log_noise_variance: f64,
}

impl KernelHyperparams {
    pub fn new(signal_variance: f64, length_scales: Vec<f64>, noise_variance: f64) -> Result<Self> {
        if !(signal_variance.is_finite() && signal_variance > 0.0) {
            return Err(Error::validation("signal variance must be positive"));
        }
        if length_scales.is_empty() {
            return Err(Error::validation("need at least one length scale"));
        }
        if length_scales.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::validation("length scales must be positive"));
        }
        if !(noise_variance.is_finite() && noise_variance > 0.0) {
            return Err(Error::validation("noise variance must be positive"));
        }
        Ok(KernelHyperparams {
            log_signal_variance: signal_variance.ln(),
            log_length_scales: length_scales.iter().map(|l| l.ln()).collect(),
            log_noise_variance: noise_variance.ln(),
        })
    }

    /// Starting point for training: unit signal variance, length scales of
    /// `0.5 sqrt(D)` (a medium correlation length for inputs in the unit
    /// cube), and noise variance 1e-2.
    pub fn default_for_dimension(dimension: usize) -> Self {
        let ls = 0.5 * (dimension as f64).sqrt();
        KernelHyperparams {
            log_signal_variance: 0.0,
            log_length_scales: vec![ls.ln(); dimension],
            log_noise_variance: (1e-2f64).ln(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.log_length_scales.len()
    }

    pub fn signal_variance(&self) -> f64 {
        self.log_signal_variance.exp()
    }

    pub fn length_scales(&self) -> Vec<f64> {
        self.log_length_scales.iter().map(|l| l.exp()).collect()
    }

    pub fn noise_variance(&self) -> f64 {
        self.log_noise_variance.exp()
    }

    fn to_log_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dimension() + 2);
        v.push(self.log_signal_variance);
        v.extend_from_slice(&self.log_length_scales);
        v.push(self.log_noise_variance);
        v
    }

    fn from_log_vector(v: &[f64]) -> Self {
        KernelHyperparams {
            log_signal_variance: v[0],
            log_length_scales: v[1..v.len() - 1].to_vec(),
            log_noise_variance: v[v.len() - 1],
        }
    }
}

/// Anisotropic squared-exponential covariance between two points.
pub fn kernel(a: &[f64], b: &[f64], hyper: &KernelHyperparams) -> f64 {
    assert_eq!(a.len(), b.len(), "kernel inputs must share a dimension");
    assert_eq!(a.len(), hyper.dimension(), "kernel dimension mismatch");
    let mut dist = 0.0;
    for ((&x, &y), log_l) in a.iter().zip(b).zip(&hyper.log_length_scales) {
        let diff = x - y;
        let l2 = (2.0 * log_l).exp();
        dist += diff * diff / l2;
    }
    hyper.signal_variance() * (-0.5 * dist).exp()
}

/// Training settings for [`GpModel::fit`].
#[derive(Clone, Debug, PartialEq)]
pub struct GpFitConfig {
    pub epochs: usize,
    pub step_size: f64,
}

impl Default for GpFitConfig {
    fn default() -> Self {
        GpFitConfig {
            epochs: 250,
            step_size: 0.05,
        }
    }
}

impl GpFitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::validation("step size must be positive"));
        }
        Ok(())
    }
}

/// Per-dataset quantities that do not depend on hyperparameters.
struct TrainingCache {
    n: usize,
    /// Per-dimension matrices of squared coordinate differences.
    sq: Vec<DMatrix<f64>>,
    y: DVector<f64>,
}

impl TrainingCache {
    fn new(x: &[Vec<f64>], y: &[f64]) -> Self {
        let n = x.len();
        let d = if n == 0 { 0 } else { x[0].len() };
        let sq = (0..d)
            .map(|dim| {
                DMatrix::from_fn(n, n, |i, j| {
                    let diff = x[i][dim] - x[j][dim];
                    diff * diff
                })
            })
            .collect();
        TrainingCache {
            n,
            sq,
            y: DVector::from_column_slice(y),
        }
    }

    fn signal_matrix(&self, hyper: &KernelHyperparams) -> DMatrix<f64> {
        let n = self.n;
        let mut w: DMatrix<f64> = DMatrix::zeros(n, n);
        for (sq_d, log_l) in self.sq.iter().zip(&hyper.log_length_scales) {
            let inv_l2 = (-2.0 * log_l).exp();
            for (acc, &s) in w.as_mut_slice().iter_mut().zip(sq_d.as_slice()) {
                *acc += s * inv_l2;
            }
        }
        let sf2 = hyper.signal_variance();
        for v in w.as_mut_slice() {
            *v = sf2 * (-0.5 * *v).exp();
        }
        w
    }
}

/// Cholesky-factorizes `k + extra I`, escalating `extra` through the jitter
/// ladder when the plain matrix is not numerically positive definite.
fn factorize_with_jitter(
    k_noisy: &DMatrix<f64>,
) -> Result<(nalgebra::Cholesky<f64, nalgebra::Dyn>, f64)> {
    let mut jitter = 0.0;
    loop {
        let mut attempt = k_noisy.clone();
        if jitter > 0.0 {
            for i in 0..attempt.nrows() {
                attempt[(i, i)] += jitter;
            }
        }
        if let Some(chol) = nalgebra::Cholesky::new(attempt) {
            return Ok((chol, jitter));
        }
        jitter = if jitter == 0.0 {
            JITTER_START
        } else {
            jitter * 10.0
        };
        if jitter > JITTER_MAX {
            return Err(Error::numerical(format!(
                "kernel matrix is not positive definite even with jitter {JITTER_MAX}"
            )));
        }
    }
}

struct Factorized {
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    k_signal: DMatrix<f64>,
    alpha: DVector<f64>,
    jitter: f64,
    mll: f64,
}

fn factorize_and_mll(cache: &TrainingCache, hyper: &KernelHyperparams) -> Result<Factorized> {
    let n = cache.n;
    let k_signal = cache.signal_matrix(hyper);
    let mut k_noisy = k_signal.clone();
    let noise = hyper.noise_variance();
    for i in 0..n {
        k_noisy[(i, i)] += noise;
    }
    let (chol, jitter) = factorize_with_jitter(&k_noisy)?;
    let alpha = chol.solve(&cache.y);
    let mut log_det_half = 0.0;
    {
        let l = chol.l_dirty();
        for i in 0..n {
            log_det_half += l[(i, i)].ln();
        }
    }
    let mll = -0.5 * cache.y.dot(&alpha)
        - log_det_half
        - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
    Ok(Factorized {
        chol,
        k_signal,
        alpha,
        jitter,
        mll,
    })
}

/// MLL gradient with respect to the log-space hyperparameter vector
/// `[log signal_variance, log length_scales.., log noise_variance]`.
fn gradient(cache: &TrainingCache, hyper: &KernelHyperparams, fac: &Factorized) -> Vec<f64> {
    let n = cache.n;
    let k_inv = fac.chol.inverse();
    // m[i,j] = (alpha_i alpha_j - K^-1[i,j]) * K_signal[i,j]; every gradient
    // component is a weighted sum over this matrix.
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] = (fac.alpha[i] * fac.alpha[j] - k_inv[(i, j)]) * fac.k_signal[(i, j)];
        }
    }
    let mut grad = Vec::with_capacity(hyper.dimension() + 2);
    grad.push(0.5 * m.sum());
    for (sq_d, log_l) in cache.sq.iter().zip(&hyper.log_length_scales) {
        let inv_l2 = (-2.0 * log_l).exp();
        let dot: f64 = m
            .as_slice()
            .iter()
            .zip(sq_d.as_slice())
            .map(|(a, b)| a * b)
            .sum();
        grad.push(0.5 * inv_l2 * dot);
    }
    let noise = hyper.noise_variance();
    let trace_term: f64 = (0..n)
        .map(|i| fac.alpha[i] * fac.alpha[i] - k_inv[(i, i)])
        .sum();
    grad.push(0.5 * noise * trace_term);
    grad
}

fn validate_dataset(x: &[Vec<f64>], y: &[f64]) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::validation("training set must be non-empty"));
    }
    if x.len() != y.len() {
        return Err(Error::validation(format!(
            "{} inputs but {} targets",
            x.len(),
            y.len()
        )));
    }
    let d = x[0].len();
    if d == 0 {
        return Err(Error::validation("inputs must have at least one dimension"));
    }
    for (i, row) in x.iter().enumerate() {
        if row.len() != d {
            return Err(Error::validation(format!(
                "input {i} has dimension {} but input 0 has {d}",
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation(format!("input {i} must be finite")));
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("targets must be finite"));
    }
    Ok(d)
}

/// Log marginal likelihood of `(x, y)` under `hyper`. Targets are used
/// exactly as given; [`GpModel::fit`] standardizes before calling this.
pub fn log_marginal_likelihood(
    x: &[Vec<f64>],
    y: &[f64],
    hyper: &KernelHyperparams,
) -> Result<f64> {
    let d = validate_dataset(x, y)?;
    if d != hyper.dimension() {
        return Err(Error::validation("hyperparameter dimension mismatch"));
    }
    let cache = TrainingCache::new(x, y);
    Ok(factorize_and_mll(&cache, hyper)?.mll)
}

/// Log marginal likelihood together with its analytic gradient in log space.
pub fn mll_with_gradient(
    x: &[Vec<f64>],
    y: &[f64],
    hyper: &KernelHyperparams,
) -> Result<(f64, Vec<f64>)> {
    let d = validate_dataset(x, y)?;
    if d != hyper.dimension() {
        return Err(Error::validation("hyperparameter dimension mismatch"));
    }
    let cache = TrainingCache::new(x, y);
    let fac = factorize_and_mll(&cache, hyper)?;
    let grad = gradient(&cache, hyper, &fac);
    Ok((fac.mll, grad))
}

/// A fitted Gaussian-process regressor over one scalar objective.
#[derive(Clone, Debug)]
pub struct GpModel {
    hyper: KernelHyperparams,
    x: Vec<Vec<f64>>,
    y_raw: Vec<f64>,
    target_mean: f64,
    target_std: f64,
    /// Lower Cholesky factor of `K + (noise + jitter) I`.
    l: DMatrix<f64>,
    alpha: DVector<f64>,
    jitter: f64,
    mll: f64,
}

impl GpModel {
    /// Builds a model at fixed hyperparameters: standardizes the targets and
    /// factorizes the kernel matrix.
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>, hyper: KernelHyperparams) -> Result<Self> {
        let d = validate_dataset(&x, &y)?;
        if d != hyper.dimension() {
            return Err(Error::validation(format!(
                "inputs have dimension {d} but hyperparameters have {}",
                hyper.dimension()
            )));
        }
        let n = x.len() as f64;
        let target_mean = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - target_mean).powi(2)).sum::<f64>() / n;
        let target_std = var.sqrt().max(STD_FLOOR);
        let y_std: Vec<f64> = y.iter().map(|v| (v - target_mean) / target_std).collect();

        let cache = TrainingCache::new(&x, &y_std);
        let fac = factorize_and_mll(&cache, &hyper)?;
        Ok(GpModel {
            hyper,
            x,
            y_raw: y,
            target_mean,
            target_std,
            l: fac.chol.l(),
            alpha: fac.alpha,
            jitter: fac.jitter,
            mll: fac.mll,
        })
    }

    /// Trains hyperparameters by Adam ascent on the standardized-target MLL
    /// and returns the model built at the best hyperparameters visited
    /// (the starting point and the post-step point of every epoch).
    pub fn fit(x: Vec<Vec<f64>>, y: Vec<f64>, config: &GpFitConfig) -> Result<Self> {
        config.validate()?;
        let d = validate_dataset(&x, &y)?;

        let n = x.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt().max(STD_FLOOR);
        let y_std: Vec<f64> = y.iter().map(|v| (v - mean) / std).collect();
        let cache = TrainingCache::new(&x, &y_std);

        let mut theta = KernelHyperparams::default_for_dimension(d).to_log_vector();
        let mut best_theta = theta.clone();
        let mut best_mll = f64::NEG_INFINITY;
        let mut adam_m = vec![0.0; theta.len()];
        let mut adam_v = vec![0.0; theta.len()];

        for step in 1..=config.epochs {
            let hyper = KernelHyperparams::from_log_vector(&theta);
            let fac = factorize_and_mll(&cache, &hyper)?;
            if fac.mll > best_mll {
                best_mll = fac.mll;
                best_theta = theta.clone();
            }
            let grad = gradient(&cache, &hyper, &fac);
            let bias1 = 1.0 - ADAM_BETA1.powi(step as i32);
            let bias2 = 1.0 - ADAM_BETA2.powi(step as i32);
            for j in 0..theta.len() {
                adam_m[j] = ADAM_BETA1 * adam_m[j] + (1.0 - ADAM_BETA1) * grad[j];
                adam_v[j] = ADAM_BETA2 * adam_v[j] + (1.0 - ADAM_BETA2) * grad[j] * grad[j];
                let m_hat = adam_m[j] / bias1;
                let v_hat = adam_v[j] / bias2;
                theta[j] += config.step_size * m_hat / (v_hat.sqrt() + ADAM_EPS);
            }
            if theta.iter().any(|v| !v.is_finite()) {
                return Err(Error::numerical(format!(
                    "hyperparameters diverged at training step {step}"
                )));
            }
        }
        // The final point has had no MLL evaluation yet.
        let hyper = KernelHyperparams::from_log_vector(&theta);
        let fac = factorize_and_mll(&cache, &hyper)?;
        if fac.mll > best_mll {
            best_theta = theta;
        }

        GpModel::new(x, y, KernelHyperparams::from_log_vector(&best_theta))
    }

    /// Appends one observation and refactorizes at the current
    /// hyperparameters (no re-optimization).
    pub fn update(&self, x_new: Vec<f64>, y_new: f64) -> Result<GpModel> {
        let mut x = self.x.clone();
        let mut y = self.y_raw.clone();
        x.push(x_new);
        y.push(y_new);
        GpModel::new(x, y, self.hyper.clone())
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.hyper.dimension()
    }

    pub fn hyperparams(&self) -> &KernelHyperparams {
        &self.hyper
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// MLL of the standardized targets at the model's hyperparameters.
    pub fn log_marginal_likelihood(&self) -> f64 {
        self.mll
    }

    pub fn target_mean(&self) -> f64 {
        self.target_mean
    }

    pub fn target_std(&self) -> f64 {
        self.target_std
    }

    /// Lower Cholesky factor of the noisy kernel matrix.
    pub fn cholesky_factor(&self) -> &DMatrix<f64> {
        &self.l
    }

    /// Maps a standardized value (a prediction or an acquisition score) back
    /// to raw target units.
    pub fn destandardize(&self, value: f64) -> f64 {
        self.target_mean + self.target_std * value
    }

    /// Predictive mean and variance in standardized target units. The
    /// variance is the latent-function variance: `k(x,x) - k^T (K+noise)^-1
    /// k`, without the observation noise.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        assert_eq!(x.len(), self.dimension(), "query dimension mismatch");
        let k: DVector<f64> = DVector::from_iterator(
            self.x.len(),
            self.x.iter().map(|xi| kernel(xi, x, &self.hyper)),
        );
        let mean = k.dot(&self.alpha);
        let v = self
            .l
            .solve_lower_triangular(&k)
            .expect("Cholesky factor has positive diagonal");
        let var = (self.hyper.signal_variance() - v.dot(&v)).max(0.0);
        (mean, var)
    }

    /// Predictive mean and variance in raw target units.
    pub fn predict_raw(&self, x: &[f64]) -> (f64, f64) {
        let (mean, var) = self.predict(x);
        (
            self.destandardize(mean),
            var * self.target_std * self.target_std,
        )
    }
}
