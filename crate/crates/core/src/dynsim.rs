//! Stochastic counterfactual simulation of a fitted error-correction model.
//!
//! Each draw samples a coefficient vector from `N(beta_hat, cov)`, starts
//! from the point-estimate equilibrium with regressors at their sample means,
//! runs a burn-in, then iterates the model forward while one regressor is
//! shocked. Logged regressors are shocked additively by `ln(1 + magnitude)`.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ardl::{ArdlEcmFit, EcmCase};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::stats::{mean, quantile_sorted, sample_variance, stream_rng};

/// Values beyond this magnitude count as a diverged path.
pub const OVERFLOW_GUARD: f64 = 1e100;

/// Coverage levels of the reported percentile bands.
pub const BAND_LEVELS: [f64; 3] = [0.75, 0.90, 0.95];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShockKind {
    /// The regressor stays at its shocked value from `shock_time` on.
    #[default]
    Sustained,
    /// The regressor is shocked in `shock_time` only.
    Impulse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockSpec {
    pub target: String,
    /// Relative change, e.g. `-0.21` for a 21% fall.
    pub magnitude: f64,
    /// Period (counted from the end of burn-in) at which the shock hits.
    pub shock_time: usize,
    pub horizon: usize,
    pub n_sims: usize,
    pub burn_in: usize,
    pub kind: ShockKind,
}

impl ShockSpec {
    pub fn new(target: impl Into<String>, magnitude: f64) -> Self {
        Self {
            target: target.into(),
            magnitude,
            shock_time: 5,
            horizon: 20,
            n_sims: 5000,
            burn_in: 20,
            kind: ShockKind::Sustained,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shock_time > 0 && self.shock_time < self.horizon) {
            return Err(Error::Argument(format!(
                "shock time must satisfy 0 < {} < horizon {}",
                self.shock_time, self.horizon
            )));
        }
        if !(self.magnitude > -1.0 && self.magnitude.is_finite()) {
            return Err(Error::Argument(format!(
                "shock magnitude {} must be finite and above -1",
                self.magnitude
            )));
        }
        if self.n_sims == 0 {
            return Err(Error::Argument("n_sims must be at least 1".into()));
        }
        Ok(())
    }

    /// Additive shift applied to the logged target.
    pub fn log_shift(&self) -> f64 {
        self.magnitude.ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Disturbance {
    /// iid `N(0, sigma2)`.
    #[default]
    Normal,
    /// Resampled with replacement from the fitted residuals.
    Bootstrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimOptions {
    pub execution: Execution,
    pub disturbance: Disturbance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub coverage: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Batch-means Monte Carlo standard errors of `lower` and `upper`.
    pub lower_se: Vec<f64>,
    pub upper_se: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub periods: Vec<usize>,
    pub mean_path: Vec<f64>,
    pub median_path: Vec<f64>,
    /// Monte Carlo standard error of `mean_path`.
    pub mean_se: Vec<f64>,
    pub bands: Vec<Band>,
    /// Point-estimate equilibrium before the shock.
    pub equilibrium: f64,
    /// Point-estimate equilibrium under a sustained shock.
    pub shocked_equilibrium: Option<f64>,
    pub shock: ShockSpec,
    pub seed: u64,
    pub disturbance: Disturbance,
}

impl SimulationResult {
    pub fn band(&self, coverage: f64) -> Option<&Band> {
        self.bands
            .iter()
            .find(|b| (b.coverage - coverage).abs() < 1e-12)
    }
}

/// Simulates with iid normal disturbances and the default back-end.
pub fn simulate(fit: &ArdlEcmFit, shock: &ShockSpec, seed: u64) -> Result<SimulationResult> {
    simulate_with(fit, shock, seed, &SimOptions::default())
}

pub fn simulate_with(
    fit: &ArdlEcmFit,
    shock: &ShockSpec,
    seed: u64,
    options: &SimOptions,
) -> Result<SimulationResult> {
    let draws = simulate_draws(fit, shock, seed, options)?;
    let (equilibrium, shocked) = equilibria(fit, shock)?;
    Ok(summarize(
        &draws,
        shock,
        seed,
        options.disturbance,
        equilibrium,
        shocked,
    ))
}

/// Point-estimate steady states before and after a sustained shock.
pub fn equilibria(fit: &ArdlEcmFit, shock: &ShockSpec) -> Result<(f64, Option<f64>)> {
    let target = target_index(fit, shock)?;
    let beta = &fit.ols.beta;
    let base = steady_state(fit, beta, &fit.regressor_means)?;
    let shocked = match shock.kind {
        ShockKind::Sustained => {
            let mut x = fit.regressor_means.clone();
            x[target] += shock.log_shift();
            Some(steady_state(fit, beta, &x)?)
        }
        ShockKind::Impulse => None,
    };
    Ok((base, shocked))
}

fn steady_state(fit: &ArdlEcmFit, beta: &[f64], x: &[f64]) -> Result<f64> {
    let l = &fit.layout;
    let l1 = beta[l.level_y];
    if l1.abs() < 1e-12 {
        return Err(Error::Argument(
            "speed of adjustment is zero; the model has no equilibrium".into(),
        ));
    }
    let pull: f64 = l.level_x.iter().zip(x).map(|(&i, xv)| beta[i] * xv).sum();
    Ok(-(beta[l.intercept] + pull) / l1)
}

fn target_index(fit: &ArdlEcmFit, shock: &ShockSpec) -> Result<usize> {
    fit.spec
        .regressors
        .iter()
        .position(|r| *r == shock.target)
        .ok_or_else(|| Error::UnknownSeries {
            name: shock.target.clone(),
            available: fit.spec.regressors.join(", "),
        })
}

/// Factor `L` with `L L' = cov` (Cholesky when it exists).
///
/// Falls back to an eigen factor when Cholesky fails; eigenvalues that are
/// materially negative are clipped at `1e-12` with a warning.
pub fn covariance_factor(cov: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(ch) = cov.clone().cholesky() {
        return ch.l();
    }
    let eig = cov.clone().symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let negative = eig.eigenvalues.iter().any(|&v| v < -1e-12 * scale.max(1.0));
    if negative {
        log::warn!(
            "coefficient covariance is not positive semi-definite; clipping eigenvalues at 1e-12"
        );
    }
    let roots = eig.eigenvalues.map(|v| {
        if negative {
            v.max(1e-12).sqrt()
        } else {
            v.max(0.0).sqrt()
        }
    });
    &eig.eigenvectors * DMatrix::from_diagonal(&roots)
}

fn draw_beta<R: Rng + ?Sized>(beta: &[f64], factor: &DMatrix<f64>, rng: &mut R) -> Vec<f64> {
    let z: Vec<f64> = (0..beta.len())
        .map(|_| rng.sample(StandardNormal))
        .collect();
    let noise = factor * nalgebra::DVector::from_vec(z);
    beta.iter().zip(noise.iter()).map(|(b, e)| b + e).collect()
}

/// The coefficient vectors used by the first `n` simulation draws under `seed`.
pub fn parameter_draws(
    fit: &ArdlEcmFit,
    n: usize,
    seed: u64,
    execution: Execution,
) -> Vec<Vec<f64>> {
    let factor = covariance_factor(&fit.ols.cov);
    exec::map_indexed(execution, n, |draw| {
        draw_beta(&fit.ols.beta, &factor, &mut stream_rng(seed, draw as u64))
    })
}

/// Raw simulated paths, `draws[d][period]`, for the reported horizon.
pub fn simulate_draws(
    fit: &ArdlEcmFit,
    shock: &ShockSpec,
    seed: u64,
    options: &SimOptions,
) -> Result<Vec<Vec<f64>>> {
    shock.validate()?;
    if fit.spec.case != EcmCase::Constant {
        return Err(Error::Argument(
            "simulation supports the constant-only deterministic case".into(),
        ));
    }
    let target = target_index(fit, shock)?;
    let y0 = steady_state(fit, &fit.ols.beta, &fit.regressor_means)?;
    let factor = covariance_factor(&fit.ols.cov);
    let sd = fit.ols.sigma2.max(0.0).sqrt();
    let shift = shock.log_shift();
    let spec = &fit.spec;
    let layout = &fit.layout;
    let x_depth: Vec<usize> = spec.q.iter().map(|&q| q.max(1) + 1).collect();

    exec::try_map_indexed(options.execution, shock.n_sims, |draw| {
        let mut rng = stream_rng(seed, draw as u64);
        let beta = draw_beta(&fit.ols.beta, &factor, &mut rng);

        // y_hist[i] = y_{t-1-i}, x_hist[k][j] = x_{k,t-j} (front updated each period)
        let mut y_hist: VecDeque<f64> = std::iter::repeat_n(y0, spec.p.max(1)).collect();
        let mut x_hist: Vec<VecDeque<f64>> = fit
            .regressor_means
            .iter()
            .zip(&x_depth)
            .map(|(&m, &depth)| std::iter::repeat_n(m, depth).collect())
            .collect();
        let mut out = Vec::with_capacity(shock.horizon);
        for t in 0..shock.burn_in + shock.horizon {
            let period = t as isize - shock.burn_in as isize;
            for (k, hist) in x_hist.iter_mut().enumerate() {
                let mut value = fit.regressor_means[k];
                if k == target && period >= shock.shock_time as isize {
                    let active = match shock.kind {
                        ShockKind::Sustained => true,
                        ShockKind::Impulse => period == shock.shock_time as isize,
                    };
                    if active {
                        value += shift;
                    }
                }
                hist.pop_back();
                hist.push_front(value);
            }
            let mut dy = beta[layout.intercept] + beta[layout.level_y] * y_hist[0];
            for (i, &c) in layout.dy_lags.iter().enumerate() {
                dy += beta[c] * (y_hist[i] - y_hist[i + 1]);
            }
            for (k, hist) in x_hist.iter().enumerate() {
                for (j, &c) in layout.dx_lags[k].iter().enumerate() {
                    dy += beta[c] * (hist[j] - hist[j + 1]);
                }
                dy += beta[layout.level_x[k]] * hist[spec.level_lag(k)];
            }
            dy += match options.disturbance {
                Disturbance::Normal => sd * rng.sample::<f64, _>(StandardNormal),
                Disturbance::Bootstrap => {
                    let r = &fit.ols.residuals;
                    r[rng.random_range(0..r.len())]
                }
            };
            let y = y_hist[0] + dy;
            if !y.is_finite() || y.abs() > OVERFLOW_GUARD {
                return Err(Error::Diverged { draw, period: t });
            }
            y_hist.pop_back();
            y_hist.push_front(y);
            if period >= 0 {
                out.push(y);
            }
        }
        Ok(out)
    })
}

const N_BATCHES: usize = 20;

/// Per-period summaries across draws.
pub fn summarize(
    draws: &[Vec<f64>],
    shock: &ShockSpec,
    seed: u64,
    disturbance: Disturbance,
    equilibrium: f64,
    shocked_equilibrium: Option<f64>,
) -> SimulationResult {
    let horizon = draws.first().map_or(0, Vec::len);
    let column = |t: usize| -> Vec<f64> { draws.iter().map(|d| d[t]).collect() };
    let mut mean_path = Vec::with_capacity(horizon);
    let mut median_path = Vec::with_capacity(horizon);
    let mut mean_se = Vec::with_capacity(horizon);
    let mut bands: Vec<Band> = BAND_LEVELS
        .iter()
        .map(|&coverage| Band {
            coverage,
            lower: Vec::with_capacity(horizon),
            upper: Vec::with_capacity(horizon),
            lower_se: Vec::with_capacity(horizon),
            upper_se: Vec::with_capacity(horizon),
        })
        .collect();
    for t in 0..horizon {
        let col = column(t);
        let n = col.len();
        mean_path.push(mean(&col));
        mean_se.push(if n > 1 {
            (sample_variance(&col) / n as f64).sqrt()
        } else {
            0.0
        });
        let mut sorted = col.clone();
        sorted.sort_by(f64::total_cmp);
        median_path.push(quantile_sorted(&sorted, 0.5));
        for band in &mut bands {
            let tail = (1.0 - band.coverage) / 2.0;
            band.lower.push(quantile_sorted(&sorted, tail));
            band.upper.push(quantile_sorted(&sorted, 1.0 - tail));
            band.lower_se.push(batch_quantile_se(&col, tail));
            band.upper_se.push(batch_quantile_se(&col, 1.0 - tail));
        }
    }
    SimulationResult {
        periods: (0..horizon).collect(),
        mean_path,
        median_path,
        mean_se,
        bands,
        equilibrium,
        shocked_equilibrium,
        shock: shock.clone(),
        seed,
        disturbance,
    }
}

/// Batch-means standard error of the `q` quantile: the sample is cut into
/// contiguous batches, the quantile is taken per batch, and the spread of
/// the batch quantiles is scaled by `1/sqrt(batches)`.
pub fn batch_quantile_se(values: &[f64], q: f64) -> f64 {
    let batches = N_BATCHES.min(values.len() / 10);
    if batches < 2 {
        return f64::NAN;
    }
    let size = values.len() / batches;
    let per_batch: Vec<f64> = (0..batches)
        .map(|b| {
            let mut chunk = values[b * size..(b + 1) * size].to_vec();
            chunk.sort_by(f64::total_cmp);
            quantile_sorted(&chunk, q)
        })
        .collect();
    (sample_variance(&per_batch) / batches as f64).sqrt()
}
