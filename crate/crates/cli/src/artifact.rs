//! Saved error-correction fits.
//!
//! The artifact is a JSON document holding everything needed to rebuild an
//! [`ArdlEcmFit`] without the source data: the model spec, the design matrix
//! and response, the coefficient vector with its covariance, residuals and
//! sample metadata. Floats are written in shortest round-trip form, so a
//! reload reproduces every statistic exactly. `hash` is the SHA-256 of the
//! document serialized with an empty `hash` field.

use std::path::Path;

use dynardl_core::ardl::{ArdlEcmFit, ModelSpec};
use dynardl_core::regress::{DesignMatrix, OlsFit};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const FORMAT: &str = "dynardl-fit";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitArtifact {
    pub format: String,
    pub version: u32,
    pub spec: ModelSpec,
    pub years: Vec<i32>,
    pub dependent_mean: f64,
    pub regressor_means: Vec<f64>,
    pub names: Vec<String>,
    /// Row-major design matrix.
    pub design: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub beta: Vec<f64>,
    /// Row-major coefficient covariance.
    pub cov: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
    pub sigma2: f64,
    pub ssr: f64,
    pub r2: f64,
    pub nobs: usize,
    pub dof: usize,
    pub hash: String,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn matrix(rows: &[Vec<f64>], ncols: usize, what: &str) -> CliResult<DMatrix<f64>> {
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(CliError::Artifact(format!(
            "{what}: ragged rows, expected {ncols} columns"
        )));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl FitArtifact {
    pub fn from_fit(fit: &ArdlEcmFit) -> Self {
        let ols = &fit.ols;
        let mut a = Self {
            format: FORMAT.to_string(),
            version: VERSION,
            spec: fit.spec.clone(),
            years: fit.years.clone(),
            dependent_mean: fit.dependent_mean,
            regressor_means: fit.regressor_means.clone(),
            names: ols.names.clone(),
            design: rows(ols.design.matrix()),
            y: ols.y.clone(),
            beta: ols.beta.clone(),
            cov: rows(&ols.cov),
            residuals: ols.residuals.clone(),
            fitted: ols.fitted.clone(),
            sigma2: ols.sigma2,
            ssr: ols.ssr,
            r2: ols.r2,
            nobs: ols.nobs,
            dof: ols.dof,
            hash: String::new(),
        };
        a.hash = a.content_hash();
        a
    }

    pub fn content_hash(&self) -> String {
        let mut unhashed = self.clone();
        unhashed.hash.clear();
        let bytes = serde_json::to_vec(&unhashed).expect("artifact serializes");
        hex(&Sha256::digest(&bytes))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("artifact serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let a: Self = serde_json::from_str(text)
            .map_err(|e| CliError::Artifact(format!("malformed fit artifact: {e}")))?;
        if a.format != FORMAT {
            return Err(CliError::Artifact(format!(
                "not a fit artifact (format `{}`)",
                a.format
            )));
        }
        if a.version != VERSION {
            return Err(CliError::Artifact(format!(
                "unsupported artifact version {} (this build reads {VERSION})",
                a.version
            )));
        }
        let expected = a.content_hash();
        if a.hash != expected {
            return Err(CliError::Artifact(format!(
                "content hash mismatch: stored {}, computed {expected}",
                a.hash
            )));
        }
        Ok(a)
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        crate::fetch::write_atomic(path, self.to_json().as_bytes())
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Rebuilds the fit; derived quantities are recomputed from the stored
    /// regression.
    pub fn to_fit(&self) -> CliResult<ArdlEcmFit> {
        let k = self.names.len();
        let n = self.y.len();
        let lens = [
            self.design.len(),
            self.residuals.len(),
            self.fitted.len(),
            self.years.len(),
        ];
        if lens.iter().any(|&l| l != n)
            || self.beta.len() != k
            || self.cov.len() != k
            || self.nobs != n
        {
            return Err(CliError::Artifact("inconsistent dimensions".to_string()));
        }
        let design = DesignMatrix::new(self.names.clone(), matrix(&self.design, k, "design")?)?;
        let ols = OlsFit {
            names: self.names.clone(),
            beta: self.beta.clone(),
            cov: matrix(&self.cov, k, "cov")?,
            residuals: self.residuals.clone(),
            fitted: self.fitted.clone(),
            sigma2: self.sigma2,
            ssr: self.ssr,
            r2: self.r2,
            nobs: self.nobs,
            dof: self.dof,
            design,
            y: self.y.clone(),
        };
        Ok(ArdlEcmFit::from_ols(
            self.spec.clone(),
            ols,
            self.years.clone(),
            self.dependent_mean,
            self.regressor_means.clone(),
        )?)
    }
}

pub fn save_fit(fit: &ArdlEcmFit, path: &Path) -> CliResult<()> {
    FitArtifact::from_fit(fit).save(path)
}

pub fn load_fit(path: &Path) -> CliResult<ArdlEcmFit> {
    FitArtifact::load(path)?.to_fit()
}
