//! Kernel regularised least squares with a Gaussian kernel.
//!
//! Features are standardised and the response centred. The fit solves
//! `(K + lambda I) c = y`; `lambda` defaults to the leave-one-out minimiser.
//! Pointwise marginal effects come from the analytic kernel gradient and are
//! reported in the original feature units.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::stats::{mean, quantile_sorted, sample_variance};

/// Search interval for `lambda` (standardised data).
pub const LAMBDA_RANGE: (f64, f64) = (1e-6, 1e3);
/// Golden-section tolerance on `ln(lambda)`.
pub const LAMBDA_LOG_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KrlsOptions {
    /// Fixed regulariser; chosen by leave-one-out error when `None`.
    pub lambda: Option<f64>,
    /// Kernel bandwidth; defaults to the number of features.
    pub sigma2: Option<f64>,
    pub execution: Execution,
}

/// `K_ij = exp(-|x_i - x_j|^2 / sigma2)` over the rows of `x`.
pub fn kernel_matrix(x: &DMatrix<f64>, sigma2: f64) -> Result<DMatrix<f64>> {
    kernel_matrix_with(x, sigma2, Execution::default())
}

pub fn kernel_matrix_with(
    x: &DMatrix<f64>,
    sigma2: f64,
    execution: Execution,
) -> Result<DMatrix<f64>> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::Argument(format!(
            "kernel bandwidth must be positive, got {sigma2}"
        )));
    }
    let n = x.nrows();
    let rows = exec::map_indexed(execution, n, |i| {
        (0..n)
            .map(|j| {
                let d2: f64 = x
                    .row(i)
                    .iter()
                    .zip(x.row(j).iter())
                    .map(|(a, b)| (a - b).powi(2))
                    .sum();
                (-d2 / sigma2).exp()
            })
            .collect::<Vec<f64>>()
    });
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalEffect {
    pub feature: String,
    pub average: f64,
    pub std_error: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    /// Interquartile range relative to `|average|`; a descriptive measure of
    /// effect heterogeneity.
    pub iqr_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct KrlsFit {
    pub names: Vec<String>,
    /// Standardised features.
    pub x: DMatrix<f64>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub y_mean: f64,
    pub kernel: DMatrix<f64>,
    pub c: Vec<f64>,
    pub lambda: f64,
    pub sigma2: f64,
    /// Leave-one-out squared error at `lambda` (centred response).
    pub loo_error: f64,
    pub fitted: Vec<f64>,
    pub r2: f64,
    /// `N x D` pointwise derivatives in original units.
    pub derivatives: DMatrix<f64>,
    pub effects: Vec<MarginalEffect>,
}

impl KrlsFit {
    /// Centred fitted surface at a point given in standardised units.
    pub fn surface_at(&self, point: &[f64]) -> f64 {
        (0..self.x.nrows())
            .map(|i| {
                let d2: f64 = self
                    .x
                    .row(i)
                    .iter()
                    .zip(point)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum();
                self.c[i] * (-d2 / self.sigma2).exp()
            })
            .sum()
    }

    pub fn effect(&self, feature: &str) -> Option<&MarginalEffect> {
        self.effects.iter().find(|e| e.feature == feature)
    }
}

struct Spectrum {
    eig: SymmetricEigen<f64, nalgebra::Dyn>,
    /// `V' y`
    vty: DVector<f64>,
}

impl Spectrum {
    fn new(k: &DMatrix<f64>, y: &DVector<f64>) -> Result<Self> {
        let eig = k.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("kernel eigendecomposition failed".into()));
        }
        let vty = eig.eigenvectors.transpose() * y;
        Ok(Self { eig, vty })
    }

    fn inverse_diag(&self, lambda: f64) -> Vec<f64> {
        let v = &self.eig.eigenvectors;
        (0..v.nrows())
            .map(|i| {
                v.row(i)
                    .iter()
                    .zip(self.eig.eigenvalues.iter())
                    .map(|(e, l)| e * e / (l + lambda))
                    .sum()
            })
            .collect()
    }

    fn coefficients(&self, lambda: f64) -> DVector<f64> {
        let scaled = DVector::from_iterator(
            self.vty.len(),
            self.vty
                .iter()
                .zip(self.eig.eigenvalues.iter())
                .map(|(a, l)| a / (l + lambda)),
        );
        &self.eig.eigenvectors * scaled
    }

    /// `G^-1 w` with `G = K + lambda I`.
    fn solve(&self, w: &DVector<f64>, lambda: f64) -> DVector<f64> {
        let vtw = self.eig.eigenvectors.transpose() * w;
        let scaled = DVector::from_iterator(
            vtw.len(),
            vtw.iter()
                .zip(self.eig.eigenvalues.iter())
                .map(|(a, l)| a / (l + lambda)),
        );
        &self.eig.eigenvectors * scaled
    }

    fn loo_error(&self, lambda: f64) -> f64 {
        let c = self.coefficients(lambda);
        self.inverse_diag(lambda)
            .iter()
            .zip(c.iter())
            .map(|(g, ci)| (ci / g).powi(2))
            .sum()
    }
}

/// Golden-section minimisation of `f` over `[lo, hi]`.
fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        }
    }
    (lo + hi) / 2.0
}

/// Fits the model on the `N x D` feature matrix `x`.
pub fn fit_krls(
    x: &DMatrix<f64>,
    y: &[f64],
    names: &[String],
    options: &KrlsOptions,
) -> Result<KrlsFit> {
    let (n, d) = x.shape();
    if names.len() != d {
        return Err(Error::Argument(format!(
            "{} names for {d} features",
            names.len()
        )));
    }
    if y.len() != n {
        return Err(Error::Argument(format!(
            "{} responses for {n} rows",
            y.len()
        )));
    }
    if d == 0 || n < d + 2 {
        return Err(Error::InsufficientSample(format!(
            "KRLS needs at least D + 2 = {} observations, have {n}",
            d + 2
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Argument("non-finite input".into()));
    }
    let mut means = Vec::with_capacity(d);
    let mut scales = Vec::with_capacity(d);
    for (j, name) in names.iter().enumerate() {
        let col: Vec<f64> = x.column(j).iter().copied().collect();
        let sd = sample_variance(&col).sqrt();
        if !(sd > 0.0) {
            return Err(Error::Degenerate(format!(
                "feature `{name}` has zero variance"
            )));
        }
        means.push(mean(&col));
        scales.push(sd);
    }
    let xs = DMatrix::from_fn(n, d, |i, j| (x[(i, j)] - means[j]) / scales[j]);
    let y_mean = mean(y);
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));

    let sigma2 = options.sigma2.unwrap_or(d as f64);
    let kernel = kernel_matrix_with(&xs, sigma2, options.execution)?;
    let spectrum = Spectrum::new(&kernel, &yc)?;
    let lambda = match options.lambda {
        Some(l) if l > 0.0 && l.is_finite() => l,
        Some(l) => return Err(Error::Argument(format!("lambda must be positive, got {l}"))),
        None => golden_section(
            |ll| spectrum.loo_error(ll.exp()),
            LAMBDA_RANGE.0.ln(),
            LAMBDA_RANGE.1.ln(),
            LAMBDA_LOG_TOL,
        )
        .exp(),
    };
    let c = spectrum.coefficients(lambda);
    let loo_error = spectrum.loo_error(lambda);
    let kc = &kernel * &c;
    let fitted: Vec<f64> = kc.iter().map(|v| v + y_mean).collect();
    let ssr: f64 = y.iter().zip(&fitted).map(|(a, b)| (a - b).powi(2)).sum();
    let tss: f64 = yc.iter().map(|v| v * v).sum();
    let r2 = if tss > 0.0 { 1.0 - ssr / tss } else { 1.0 };

    let derivatives = derivative_matrix(
        &xs,
        &kernel,
        c.as_slice(),
        sigma2,
        &scales,
        options.execution,
    );

    // Var(c) = s2 G^-2 with s2 the mean squared residual
    let s2 = ssr / n as f64;
    let mut effects = Vec::with_capacity(d);
    for (dim, name) in names.iter().enumerate() {
        // average effect = w' c
        let w = DVector::from_iterator(
            n,
            (0..n).map(|i| {
                (0..n)
                    .map(|j| (xs[(j, dim)] - xs[(i, dim)]) * kernel[(j, i)])
                    .sum::<f64>()
                    * (-2.0 / sigma2)
                    / scales[dim]
                    / n as f64
            }),
        );
        let average = w.dot(&c);
        let std_error = (s2 * spectrum.solve(&w, lambda).norm_squared()).sqrt();
        let mut col: Vec<f64> = derivatives.column(dim).iter().copied().collect();
        col.sort_by(f64::total_cmp);
        let (p25, p50, p75) = (
            quantile_sorted(&col, 0.25),
            quantile_sorted(&col, 0.5),
            quantile_sorted(&col, 0.75),
        );
        effects.push(MarginalEffect {
            feature: name.clone(),
            average,
            std_error,
            p25,
            p50,
            p75,
            iqr_ratio: (p75 - p25) / average.abs(),
        });
    }

    Ok(KrlsFit {
        names: names.to_vec(),
        x: xs,
        means,
        scales,
        y_mean,
        kernel,
        c: c.iter().copied().collect(),
        lambda,
        sigma2,
        loo_error,
        fitted,
        r2,
        derivatives,
        effects,
    })
}

fn derivative_matrix(
    xs: &DMatrix<f64>,
    kernel: &DMatrix<f64>,
    c: &[f64],
    sigma2: f64,
    scales: &[f64],
    execution: Execution,
) -> DMatrix<f64> {
    let (n, d) = xs.shape();
    let rows = exec::map_indexed(execution, n, |j| {
        (0..d)
            .map(|dim| {
                let s: f64 = (0..n)
                    .map(|i| c[i] * (xs[(j, dim)] - xs[(i, dim)]) * kernel[(j, i)])
                    .sum();
                -2.0 / sigma2 * s / scales[dim]
            })
            .collect::<Vec<f64>>()
    });
    DMatrix::from_fn(n, d, |i, j| rows[i][j])
}

/// Pointwise derivatives of a fit, `N x D`, in original units.
pub fn pointwise_derivatives(fit: &KrlsFit) -> &DMatrix<f64> {
    &fit.derivatives
}
