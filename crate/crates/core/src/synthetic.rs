//! Data-generating processes with known truth, used by tests, benchmarks and
//! the fixture generator.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dataset::{Dataset, TimeSeries};
use crate::error::Result;

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn white_noise<R: Rng + ?Sized>(rng: &mut R, n: usize, sd: f64) -> Vec<f64> {
    (0..n).map(|_| sd * normal(rng)).collect()
}

/// Gaussian random walk starting at zero (first value is one innovation).
pub fn random_walk<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut acc = 0.0;
    (0..n)
        .map(|_| {
            acc += normal(rng);
            acc
        })
        .collect()
}

/// AR(1) with coefficient `phi`, started from the stationary distribution
/// when `|phi| < 1`.
pub fn ar1<R: Rng + ?Sized>(rng: &mut R, n: usize, phi: f64, sd: f64) -> Vec<f64> {
    let mut x = if phi.abs() < 1.0 {
        sd * normal(rng) / (1.0 - phi * phi).sqrt()
    } else {
        0.0
    };
    (0..n)
        .map(|_| {
            x = phi * x + sd * normal(rng);
            x
        })
        .collect()
}

/// Single-regressor error-correction process.
///
/// `x` is a random walk with innovation sd `x_sd`; `y` follows
/// `dy_t = alpha + speed * (y_{t-1} - theta * x_{t-1}) + impact * dx_t + e_t`
/// with `e_t ~ N(0, sd^2)`. The long-run coefficient is `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcmProcess {
    pub alpha: f64,
    pub speed: f64,
    pub theta: f64,
    pub impact: f64,
    pub sd: f64,
    pub x_sd: f64,
    pub burn_in: usize,
}

impl Default for EcmProcess {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            speed: -0.4,
            theta: 0.6,
            impact: 0.3,
            sd: 0.1,
            x_sd: 0.2,
            burn_in: 50,
        }
    }
}

impl EcmProcess {
    /// Returns `(y, x)` of length `n`.
    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> (Vec<f64>, Vec<f64>) {
        let total = n + self.burn_in;
        let mut x = Vec::with_capacity(total);
        let mut y = Vec::with_capacity(total);
        let mut xv = 0.0;
        let mut yv = -self.alpha / self.speed;
        for _ in 0..total {
            let dx = self.x_sd * normal(rng);
            let x_prev = xv;
            xv += dx;
            let dy = self.alpha
                + self.speed * (yv - self.theta * x_prev)
                + self.impact * dx
                + self.sd * normal(rng);
            yv += dy;
            x.push(xv);
            y.push(yv);
        }
        (y.split_off(self.burn_in), x.split_off(self.burn_in))
    }

    pub fn dataset<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Dataset> {
        let (y, x) = self.generate(rng, n);
        Dataset::new(vec![
            TimeSeries::new("y", 1, y)?,
            TimeSeries::new("x", 1, x)?,
        ])
    }
}

/// `y_t = phi * y_{t-1} + beta * x_t + e_t` with iid N(0,1) `x` and `e`.
pub fn ardl_1_0<R: Rng + ?Sized>(rng: &mut R, n: usize, phi: f64, beta: f64) -> Result<Dataset> {
    let burn = 50;
    let mut y = Vec::with_capacity(n + burn);
    let mut x = Vec::with_capacity(n + burn);
    let mut prev = 0.0;
    for _ in 0..n + burn {
        let xt = normal(rng);
        prev = phi * prev + beta * xt + normal(rng);
        x.push(xt);
        y.push(prev);
    }
    Dataset::new(vec![
        TimeSeries::new("y", 1, y.split_off(burn))?,
        TimeSeries::new("x", 1, x.split_off(burn))?,
    ])
}

/// Several cointegrated log-level series resembling the five-variable
/// annual panel: regressors are drifting random walks and the dependent
/// variable error-corrects towards `intercept + sum(theta_j x_j)`.
pub fn macro_panel<R: Rng + ?Sized>(
    rng: &mut R,
    start_year: i32,
    n: usize,
    names: &[&str],
    thetas: &[f64],
) -> Result<Dataset> {
    assert_eq!(names.len(), thetas.len() + 1);
    let k = thetas.len();
    let burn = 30;
    let mut xs = vec![Vec::with_capacity(n + burn); k];
    let mut level: Vec<f64> = (0..k).map(|j| 1.0 + 0.5 * j as f64).collect();
    let intercept = 2.0;
    let speed = -0.5;
    let mut y = intercept + thetas.iter().zip(&level).map(|(t, x)| t * x).sum::<f64>();
    let mut ys = Vec::with_capacity(n + burn);
    for _ in 0..n + burn {
        let prev: Vec<f64> = level.clone();
        for (j, l) in level.iter_mut().enumerate() {
            *l += 0.02 + 0.03 * normal(rng);
            xs[j].push(*l);
        }
        let target = intercept + thetas.iter().zip(&prev).map(|(t, x)| t * x).sum::<f64>();
        let dx: f64 = thetas
            .iter()
            .zip(level.iter().zip(&prev))
            .map(|(t, (a, b))| 0.5 * t * (a - b))
            .sum();
        y += speed * (y - target) + dx + 0.02 * normal(rng);
        ys.push(y);
    }
    let mut series = vec![TimeSeries::new(names[0], start_year, ys.split_off(burn))?];
    for (j, x) in xs.iter_mut().enumerate() {
        series.push(TimeSeries::new(
            names[j + 1],
            start_year,
            x.split_off(burn),
        )?);
    }
    Dataset::new(series)
}
