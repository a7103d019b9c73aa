//! Conditional error-correction (ARDL) estimation and the bounds test.
//!
//! The estimated equation is
//!
//! ```text
//! dy_t = a [+ b t] + sum_{i=1..p-1} c_i dy_{t-i} + sum_k sum_{j=0..q_k-1} g_kj dx_{k,t-j}
//!        + l_1 y_{t-1} + sum_k l_{k+1} x_{k,t-1} + e_t
//! ```
//!
//! which is the levels ARDL(p, q_1, ..., q_k) rewritten. A regressor with
//! `q_k = 0` has no difference terms and enters in levels at `t`.
//!
//! Long-run effects are `theta_k = -l_{k+1} / l_1` with delta-method standard
//! errors. The bounds test compares the F statistic on all `l` jointly, and
//! the t ratio on `l_1`, with the I(0)/I(1) critical-value bounds.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::regress::{fit_ols, wald_f_test, DesignMatrix, OlsFit};
use crate::stats::{normal_cdf, normal_quantile};
use crate::tables::{self, BoundsTable, BOUNDS_LEVELS};

/// Deterministic terms of the error-correction regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EcmCase {
    /// Unrestricted intercept, no trend.
    #[default]
    Constant,
    /// Unrestricted intercept and trend. Experimental.
    ConstantTrend,
}

impl EcmCase {
    fn tables(self) -> (&'static BoundsTable, &'static BoundsTable) {
        match self {
            EcmCase::Constant => (&tables::PSS_F_CASE3, &tables::PSS_T_CASE3),
            EcmCase::ConstantTrend => (&tables::PSS_F_CASE5, &tables::PSS_T_CASE5),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EcmCase::Constant => "III (unrestricted constant, no trend)",
            EcmCase::ConstantTrend => "V (unrestricted constant and trend)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Aic,
    #[default]
    Bic,
}

impl Criterion {
    pub fn value(self, ssr: f64, nobs: usize, ncoef: usize) -> f64 {
        let n = nobs as f64;
        let fit = n * (ssr / n).ln();
        match self {
            Criterion::Aic => fit + 2.0 * ncoef as f64,
            Criterion::Bic => fit + ncoef as f64 * n.ln(),
        }
    }
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aic" => Ok(Criterion::Aic),
            "bic" | "sbc" | "sic" => Ok(Criterion::Bic),
            other => Err(Error::Argument(format!(
                "unknown criterion `{other}` (aic|bic)"
            ))),
        }
    }
}

/// Lag structure of the error-correction regression.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub dependent: String,
    pub regressors: Vec<String>,
    /// Autoregressive order of the levels ARDL (`>= 1`).
    pub p: usize,
    /// Distributed-lag order of each regressor in the levels ARDL.
    pub q: Vec<usize>,
    pub case: EcmCase,
}

impl ModelSpec {
    pub fn new(
        dependent: impl Into<String>,
        regressors: Vec<String>,
        p: usize,
        q: Vec<usize>,
    ) -> Result<Self> {
        let spec = Self {
            dependent: dependent.into(),
            regressors,
            p,
            q,
            case: EcmCase::Constant,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Same `q` for every regressor.
    pub fn uniform(dependent: &str, regressors: &[&str], p: usize, q: usize) -> Result<Self> {
        Self::new(
            dependent,
            regressors.iter().map(|s| s.to_string()).collect(),
            p,
            vec![q; regressors.len()],
        )
    }

    pub fn with_case(mut self, case: EcmCase) -> Self {
        self.case = case;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::Argument("p must be at least 1".into()));
        }
        if self.q.len() != self.regressors.len() {
            return Err(Error::Argument(format!(
                "{} q orders for {} regressors",
                self.q.len(),
                self.regressors.len()
            )));
        }
        let mut names = self.regressors.clone();
        names.push(self.dependent.clone());
        names.sort();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Argument("model variables must be distinct".into()));
        }
        Ok(())
    }

    /// Largest lag of any level needed to build one observation.
    pub fn max_lag(&self) -> usize {
        self.q
            .iter()
            .copied()
            .chain([self.p])
            .max()
            .unwrap_or(self.p)
    }

    /// Number of regressors `k`.
    pub fn k(&self) -> usize {
        self.regressors.len()
    }

    pub fn ncoef(&self) -> usize {
        1 + usize::from(self.case == EcmCase::ConstantTrend)
            + (self.p - 1)
            + self.q.iter().sum::<usize>()
            + 1
            + self.k()
    }

    /// Lag at which regressor `k` enters in levels.
    pub fn level_lag(&self, k: usize) -> usize {
        usize::from(self.q[k] > 0)
    }

    pub fn level_names(&self) -> Vec<String> {
        std::iter::once(format!("{}.L1", self.dependent))
            .chain(
                self.regressors
                    .iter()
                    .enumerate()
                    .map(|(k, v)| format!("{v}.L{}", self.level_lag(k))),
            )
            .collect()
    }

    pub fn describe(&self) -> String {
        let q: Vec<String> = self.q.iter().map(|q| q.to_string()).collect();
        format!("ARDL({},{})", self.p, q.join(","))
    }
}

/// Positions of each coefficient block in the regression's coefficient vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EcmLayout {
    pub intercept: usize,
    pub trend: Option<usize>,
    pub dy_lags: Vec<usize>,
    /// `dx_lags[k][j]` is the coefficient on `dx_{k,t-j}`, `j < q_k`.
    pub dx_lags: Vec<Vec<usize>>,
    pub level_y: usize,
    pub level_x: Vec<usize>,
}

impl EcmLayout {
    fn of(spec: &ModelSpec) -> Self {
        let mut next = 0;
        let mut take = || {
            next += 1;
            next - 1
        };
        let intercept = take();
        let trend = (spec.case == EcmCase::ConstantTrend).then(&mut take);
        let dy_lags = (1..spec.p).map(|_| take()).collect();
        let dx_lags = spec
            .q
            .iter()
            .map(|&q| (0..q).map(|_| take()).collect())
            .collect();
        let level_y = take();
        let level_x = spec.regressors.iter().map(|_| take()).collect();
        Self {
            intercept,
            trend,
            dy_lags,
            dx_lags,
            level_y,
            level_x,
        }
    }
}

/// Error-correction regression for observations `start..T` of aligned data.
///
/// Returns the design, the response `dy_t`, and the years of the response.
pub fn ecm_design(
    d: &Dataset,
    spec: &ModelSpec,
    start: usize,
) -> Result<(DesignMatrix, Vec<f64>, Vec<i32>)> {
    spec.validate()?;
    let y = d.column(&spec.dependent)?;
    let xs: Vec<Vec<f64>> = spec
        .regressors
        .iter()
        .map(|r| d.column(r))
        .collect::<Result<_>>()?;
    let total = y.len();
    let start = start.max(spec.max_lag());
    if start >= total {
        return Err(Error::InsufficientSample(format!(
            "{} needs more than {start} observations, have {total}",
            spec.describe()
        )));
    }
    let n = total - start;
    let rows = start..total;
    let diff = |v: &[f64], t: usize| v[t] - v[t - 1];

    let mut x = DesignMatrix::with_rows(n);
    x.push("const", &vec![1.0; n])?;
    if spec.case == EcmCase::ConstantTrend {
        x.push("trend", &rows.clone().map(|t| t as f64).collect::<Vec<_>>())?;
    }
    for i in 1..spec.p {
        let col: Vec<f64> = rows.clone().map(|t| diff(&y, t - i)).collect();
        x.push(format!("d.{}.L{i}", spec.dependent), &col)?;
    }
    for (name, (xv, &q)) in spec.regressors.iter().zip(xs.iter().zip(&spec.q)) {
        for j in 0..q {
            let col: Vec<f64> = rows.clone().map(|t| diff(xv, t - j)).collect();
            x.push(format!("d.{name}.L{j}"), &col)?;
        }
    }
    x.push(
        format!("{}.L1", spec.dependent),
        &rows.clone().map(|t| y[t - 1]).collect::<Vec<_>>(),
    )?;
    for (k, (name, xv)) in spec.regressors.iter().zip(&xs).enumerate() {
        let lag = spec.level_lag(k);
        x.push(
            format!("{name}.L{lag}"),
            &rows.clone().map(|t| xv[t - lag]).collect::<Vec<_>>(),
        )?;
    }
    let dy: Vec<f64> = rows.clone().map(|t| diff(&y, t)).collect();
    let (first_year, _) = d.span();
    let years = rows.map(|t| first_year + t as i32).collect();
    Ok((x, dy, years))
}

/// Levels ARDL(p, q_1, ...) regression on the same sample as
/// [`ecm_design`]: `y_t` on `y_{t-1..t-p}` and `x_{k,t..t-q_k}`.
///
/// The error-correction form is an exact reparameterisation of it.
pub fn levels_design(d: &Dataset, spec: &ModelSpec) -> Result<(DesignMatrix, Vec<f64>)> {
    spec.validate()?;
    let y = d.column(&spec.dependent)?;
    let total = y.len();
    let start = spec.max_lag();
    if start >= total {
        return Err(Error::InsufficientSample(spec.describe()));
    }
    let n = total - start;
    let rows = start..total;
    let mut x = DesignMatrix::with_rows(n);
    x.push("const", &vec![1.0; n])?;
    if spec.case == EcmCase::ConstantTrend {
        x.push("trend", &rows.clone().map(|t| t as f64).collect::<Vec<_>>())?;
    }
    for i in 1..=spec.p {
        x.push(
            format!("{}.L{i}", spec.dependent),
            &rows.clone().map(|t| y[t - i]).collect::<Vec<_>>(),
        )?;
    }
    for (name, &q) in spec.regressors.iter().zip(&spec.q) {
        let xv = d.column(name)?;
        for j in 0..=q {
            x.push(
                format!("{name}.L{j}"),
                &rows.clone().map(|t| xv[t - j]).collect::<Vec<_>>(),
            )?;
        }
    }
    Ok((x, rows.map(|t| y[t]).collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongRunCoef {
    pub regressor: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum LongRunStatus {
    Stable,
    /// Long-run coefficients are reported but not trustworthy.
    Unstable(String),
    /// `|l_1|` is numerically zero; no long-run coefficients.
    Undefined,
}

/// Estimated error-correction model.
#[derive(Debug, Clone)]
pub struct ArdlEcmFit {
    pub spec: ModelSpec,
    pub ols: OlsFit,
    pub layout: EcmLayout,
    /// Years of the dependent-variable observations used.
    pub years: Vec<i32>,
    pub speed_of_adjustment: f64,
    /// `l_1 .. l_{k+1}`: dependent level first, then each regressor.
    pub lambda: Vec<Coefficient>,
    pub short_run: Vec<Coefficient>,
    pub long_run: Option<Vec<LongRunCoef>>,
    pub long_run_status: LongRunStatus,
    /// Sample means of the regressor levels over the estimation sample.
    pub regressor_means: Vec<f64>,
    /// Sample mean of the dependent level over the estimation sample.
    pub dependent_mean: f64,
}

fn coefficient(ols: &OlsFit, idx: usize) -> Coefficient {
    let estimate = ols.beta[idx];
    let std_error = ols.cov[(idx, idx)].max(0.0).sqrt();
    let t_stat = estimate / std_error;
    Coefficient {
        name: ols.names[idx].clone(),
        estimate,
        std_error,
        t_stat,
        p_value: t_p_value(t_stat, ols.dof),
    }
}

pub(crate) fn t_p_value(t: f64, dof: usize) -> f64 {
    if !t.is_finite() {
        return if t.is_nan() { f64::NAN } else { 0.0 };
    }
    let dist = StudentsT::new(0.0, 1.0, dof as f64).expect("positive dof");
    (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
}

impl ArdlEcmFit {
    /// Assembles the fit from an estimated error-correction regression whose
    /// columns follow the layout implied by `spec`.
    pub fn from_ols(
        spec: ModelSpec,
        ols: OlsFit,
        years: Vec<i32>,
        dependent_mean: f64,
        regressor_means: Vec<f64>,
    ) -> Result<Self> {
        spec.validate()?;
        let layout = EcmLayout::of(&spec);
        if ols.ncoef() != spec.ncoef() {
            return Err(Error::Argument(format!(
                "regression has {} coefficients, {} implies {}",
                ols.ncoef(),
                spec.describe(),
                spec.ncoef()
            )));
        }
        let lambda: Vec<Coefficient> = std::iter::once(layout.level_y)
            .chain(layout.level_x.iter().copied())
            .map(|i| coefficient(&ols, i))
            .collect();
        let short_run: Vec<Coefficient> = std::iter::once(layout.intercept)
            .chain(layout.trend)
            .chain(layout.dy_lags.iter().copied())
            .chain(layout.dx_lags.iter().flatten().copied())
            .map(|i| coefficient(&ols, i))
            .collect();
        let l1 = lambda[0].estimate;
        let scale = ols.y.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        let tol = f64::EPSILON * ols.nobs as f64 * scale;
        let (long_run, long_run_status) = if l1.abs() <= tol {
            (None, LongRunStatus::Undefined)
        } else {
            let i1 = layout.level_y;
            let lr = spec
                .regressors
                .iter()
                .zip(&layout.level_x)
                .map(|(name, &ij)| {
                    let lj = ols.beta[ij];
                    let estimate = -lj / l1;
                    // gradient of -lj/l1 w.r.t. (l1, lj)
                    let g1 = lj / (l1 * l1);
                    let gj = -1.0 / l1;
                    let var = g1 * g1 * ols.cov[(i1, i1)]
                        + 2.0 * g1 * gj * ols.cov[(i1, ij)]
                        + gj * gj * ols.cov[(ij, ij)];
                    let std_error = var.max(0.0).sqrt();
                    let t_stat = estimate / std_error;
                    LongRunCoef {
                        regressor: name.clone(),
                        estimate,
                        std_error,
                        t_stat,
                        p_value: t_p_value(t_stat, ols.dof),
                    }
                })
                .collect();
            (Some(lr), stability(&spec, &lambda[0]))
        };
        Ok(Self {
            speed_of_adjustment: l1,
            spec,
            ols,
            layout,
            years,
            lambda,
            short_run,
            long_run,
            long_run_status,
            regressor_means,
            dependent_mean,
        })
    }

    pub fn long_run_of(&self, regressor: &str) -> Option<&LongRunCoef> {
        self.long_run
            .as_ref()?
            .iter()
            .find(|c| c.regressor == regressor)
    }
}

fn stability(spec: &ModelSpec, l1: &Coefficient) -> LongRunStatus {
    if l1.estimate >= 0.0 {
        return LongRunStatus::Unstable(format!(
            "speed of adjustment {:.4} is not negative; no error correction",
            l1.estimate
        ));
    }
    if l1.estimate <= -2.0 {
        return LongRunStatus::Unstable(format!(
            "speed of adjustment {:.4} implies explosive oscillation",
            l1.estimate
        ));
    }
    let (_, t_table) = spec.case.tables();
    if let Some(row) = t_table.get(spec.k()) {
        let bound = row[1][1];
        if l1.t_stat > bound {
            return LongRunStatus::Unstable(format!(
                "t ratio {:.3} on the speed of adjustment is above the 5% I(1) bound {bound}; \
                 equilibrium relation not established",
                l1.t_stat
            ));
        }
    }
    LongRunStatus::Stable
}

/// Fits the error-correction regression on the largest sample `spec` allows.
pub fn fit_ecm(d: &Dataset, spec: &ModelSpec) -> Result<ArdlEcmFit> {
    fit_ecm_from(d, spec, 0)
}

/// Fits on observations `start..` (at least `spec.max_lag()`).
pub fn fit_ecm_from(d: &Dataset, spec: &ModelSpec, start: usize) -> Result<ArdlEcmFit> {
    let (x, dy, years) = ecm_design(d, spec, start)?;
    let ols = fit_ols(&x, &dy)?;
    let layout = EcmLayout::of(spec);
    let mean_col = |j: usize| {
        let c = x.matrix().column(j);
        c.sum() / c.len() as f64
    };
    let dependent_mean = mean_col(layout.level_y);
    let regressor_means = layout.level_x.iter().map(|&j| mean_col(j)).collect();
    ArdlEcmFit::from_ols(spec.clone(), ols, years, dependent_mean, regressor_means)
}

/// Grid bounds and options for [`select_lags`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagSearch {
    pub p_max: usize,
    pub q_max: usize,
    pub criterion: Criterion,
    pub case: EcmCase,
    pub execution: Execution,
}

impl Default for LagSearch {
    fn default() -> Self {
        Self {
            p_max: 4,
            q_max: 4,
            criterion: Criterion::Bic,
            case: EcmCase::Constant,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateScore {
    pub p: usize,
    pub q: Vec<usize>,
    pub criterion: f64,
    pub nobs: usize,
    pub ncoef: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagSelection {
    pub spec: ModelSpec,
    pub criterion: Criterion,
    /// Every fitted candidate, in grid order.
    pub candidates: Vec<CandidateScore>,
    /// Grid points skipped for lack of degrees of freedom or singularity.
    pub skipped: usize,
    pub common_nobs: usize,
}

const MAX_GRID: usize = 2_000_000;

/// Exhaustive search over `p in 1..=p_max` and `q_k in 0..=q_max`.
///
/// All candidates are estimated on the sample left after the largest lag in
/// the grid, so their criteria are comparable. A candidate is admissible when
/// that sample exceeds its coefficient count by more than 5. Ties go to the
/// smaller total lag count, then to the lexicographically smaller `(p, q)`.
pub fn select_lags(
    d: &Dataset,
    dependent: &str,
    regressors: &[String],
    search: &LagSearch,
) -> Result<LagSelection> {
    if search.p_max == 0 {
        return Err(Error::Argument("p_max must be at least 1".into()));
    }
    let k = regressors.len();
    let per_q = search.q_max + 1;
    let grid = (0..k).try_fold(search.p_max, |acc: usize, _| acc.checked_mul(per_q));
    let grid = match grid {
        Some(g) if g <= MAX_GRID => g,
        _ => {
            return Err(Error::Argument(format!(
                "lag grid larger than {MAX_GRID} candidates"
            )))
        }
    };
    let start = search.p_max.max(search.q_max);
    let total = d.column(dependent)?.len();
    for r in regressors {
        d.column(r)?;
    }
    let common_nobs = total.saturating_sub(start);

    let decode = |idx: usize| -> (usize, Vec<usize>) {
        let mut rest = idx;
        let mut q = vec![0; k];
        for slot in q.iter_mut().rev() {
            *slot = rest % per_q;
            rest /= per_q;
        }
        (rest + 1, q)
    };

    let outcomes: Vec<Option<CandidateScore>> = exec::map_indexed(search.execution, grid, |idx| {
        let (p, q) = decode(idx);
        let spec = ModelSpec {
            dependent: dependent.to_string(),
            regressors: regressors.to_vec(),
            p,
            q: q.clone(),
            case: search.case,
        };
        let ncoef = spec.ncoef();
        if common_nobs <= ncoef + 5 {
            return None;
        }
        let (x, dy, _) = ecm_design(d, &spec, start).ok()?;
        let fit = fit_ols(&x, &dy).ok()?;
        Some(CandidateScore {
            p,
            q,
            criterion: search.criterion.value(fit.ssr, fit.nobs, ncoef),
            nobs: fit.nobs,
            ncoef,
        })
    });
    let skipped = outcomes.iter().filter(|o| o.is_none()).count();
    let candidates: Vec<CandidateScore> = outcomes.into_iter().flatten().collect();
    let best = candidates
        .iter()
        .min_by(|a, b| {
            a.criterion
                .total_cmp(&b.criterion)
                .then_with(|| {
                    (a.p + a.q.iter().sum::<usize>()).cmp(&(b.p + b.q.iter().sum::<usize>()))
                })
                .then_with(|| (a.p, &a.q).cmp(&(b.p, &b.q)))
        })
        .ok_or_else(|| {
            Error::InsufficientSample(format!(
                "no lag candidate fits: {common_nobs} usable observations with p_max={}, q_max={}",
                search.p_max, search.q_max
            ))
        })?;
    let spec = ModelSpec {
        dependent: dependent.to_string(),
        regressors: regressors.to_vec(),
        p: best.p,
        q: best.q.clone(),
        case: search.case,
    };
    Ok(LagSelection {
        spec,
        criterion: search.criterion,
        candidates,
        skipped,
        common_nobs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsDecision {
    Cointegration,
    NoCointegration,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsAtLevel {
    pub level: f64,
    pub f_i0: f64,
    pub f_i1: f64,
    pub t_i0: f64,
    pub t_i1: f64,
}

/// Approximate p-values under the I(0) and I(1) limiting cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxPValues {
    pub f_i0: f64,
    pub f_i1: f64,
    pub t_i0: f64,
    pub t_i1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsTestResult {
    pub f_stat: f64,
    pub f_df: (usize, usize),
    pub t_stat: f64,
    pub k: usize,
    pub nobs: usize,
    pub case: EcmCase,
    pub bounds: Vec<BoundsAtLevel>,
    pub approx_p_values: ApproxPValues,
    /// Level at which `decision` is taken.
    pub decision_level: f64,
    pub decision: BoundsDecision,
    pub note: String,
}

pub fn critical_bounds(case: EcmCase, k: usize) -> Result<Vec<BoundsAtLevel>> {
    let (f_table, t_table) = case.tables();
    if k >= f_table.len() {
        return Err(Error::UnsupportedK {
            k,
            min: 0,
            max: f_table.len() - 1,
        });
    }
    Ok(BOUNDS_LEVELS
        .iter()
        .enumerate()
        .map(|(i, &level)| BoundsAtLevel {
            level,
            f_i0: f_table[k][i][0],
            f_i1: f_table[k][i][1],
            t_i0: t_table[k][i][0],
            t_i1: t_table[k][i][1],
        })
        .collect())
}

/// Applies the bounds decision rule at one level.
///
/// Cointegration requires F above its I(1) bound and t below its I(1)
/// bound. F below its I(0) bound or t above its I(0) bound means no
/// cointegration. Everything else is inconclusive.
pub fn bounds_decision(f: f64, t: f64, b: &BoundsAtLevel) -> (BoundsDecision, String) {
    let pct = b.level * 100.0;
    if f > b.f_i1 && t < b.t_i1 {
        (
            BoundsDecision::Cointegration,
            format!(
                "F = {f:.3} > I(1) bound {} and t = {t:.3} < I(1) bound {} at {pct}%: \
                 reject the null of no level relationship",
                b.f_i1, b.t_i1
            ),
        )
    } else if f < b.f_i0 || t > b.t_i0 {
        (
            BoundsDecision::NoCointegration,
            format!(
                "F = {f:.3} (I(0) bound {}) or t = {t:.3} (I(0) bound {}) at {pct}% \
                 fails to reject the null of no level relationship",
                b.f_i0, b.t_i0
            ),
        )
    } else {
        let mut parts = Vec::new();
        if f <= b.f_i1 {
            parts.push(format!("F = {f:.3} lies between {} and {}", b.f_i0, b.f_i1));
        }
        if t >= b.t_i1 {
            parts.push(format!("t = {t:.3} lies between {} and {}", b.t_i1, b.t_i0));
        }
        (
            BoundsDecision::Inconclusive,
            format!(
                "inconclusive at {pct}%: {}; the outcome depends on the integration order of the regressors",
                parts.join(" and ")
            ),
        )
    }
}

/// Approximate p-value from a critical-value curve tabulated at
/// [`BOUNDS_LEVELS`]: `g(cv) = a + b * z`, `z = Phi^-1(1 - level)`, fitted by
/// least squares and inverted at the statistic.
fn surface_p_value(stat: f64, cvs: [f64; 4], log_scale: bool) -> f64 {
    let g = |v: f64| if log_scale { v.ln() } else { v };
    if log_scale && stat <= 0.0 {
        return 1.0;
    }
    let z: Vec<f64> = BOUNDS_LEVELS
        .iter()
        .map(|l| normal_quantile(1.0 - l))
        .collect();
    let gv: Vec<f64> = cvs.iter().map(|&c| g(c)).collect();
    let zm = z.iter().sum::<f64>() / 4.0;
    let gm = gv.iter().sum::<f64>() / 4.0;
    let sxy: f64 = z.iter().zip(&gv).map(|(a, b)| (a - zm) * (b - gm)).sum();
    let sxx: f64 = z.iter().map(|a| (a - zm).powi(2)).sum();
    let b = sxy / sxx;
    let a = gm - b * zm;
    1.0 - normal_cdf((g(stat) - a) / b)
}

pub fn approx_p_values(case: EcmCase, k: usize, f: f64, t: f64) -> Result<ApproxPValues> {
    let b = critical_bounds(case, k)?;
    let col = |sel: fn(&BoundsAtLevel) -> f64| [sel(&b[0]), sel(&b[1]), sel(&b[2]), sel(&b[3])];
    Ok(ApproxPValues {
        f_i0: surface_p_value(f, col(|x| x.f_i0), true),
        f_i1: surface_p_value(f, col(|x| x.f_i1), true),
        t_i0: surface_p_value(t, col(|x| x.t_i0), false),
        t_i1: surface_p_value(t, col(|x| x.t_i1), false),
    })
}

/// Bounds test at the 5% level.
pub fn bounds_test(fit: &ArdlEcmFit) -> Result<BoundsTestResult> {
    bounds_test_at(fit, 0.05)
}

pub fn bounds_test_at(fit: &ArdlEcmFit, level: f64) -> Result<BoundsTestResult> {
    let k = fit.spec.k();
    let bounds = critical_bounds(fit.spec.case, k)?;
    let at = *bounds
        .iter()
        .find(|b| (b.level - level).abs() < 1e-12)
        .ok_or_else(|| Error::Argument(format!("bounds not tabulated at level {level}")))?;
    let names: Vec<String> = fit.lambda.iter().map(|c| c.name.clone()).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let ft = wald_f_test(&fit.ols, &refs)?;
    let t = fit.lambda[0].t_stat;
    let (decision, note) = bounds_decision(ft.f, t, &at);
    Ok(BoundsTestResult {
        f_stat: ft.f,
        f_df: (ft.df_num, ft.df_den),
        t_stat: t,
        k,
        nobs: fit.ols.nobs,
        case: fit.spec.case,
        approx_p_values: approx_p_values(fit.spec.case, k, ft.f, t)?,
        bounds,
        decision_level: level,
        decision,
        note,
    })
}
