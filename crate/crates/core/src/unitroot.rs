//! Phillips-Perron unit-root test.
//!
//! The test regression is the plain Dickey-Fuller one,
//! `dy_t = [a + b t] + g y_{t-1} + u_t`, with no lagged differences. The
//! t ratio on `g` is corrected for serial correlation and heteroskedasticity
//! in `u` through a Newey-West (Bartlett) long-run variance:
//!
//! ```text
//! Z_tau = sqrt(g0 / l2) * t_g - (l2 - g0) * T * se(g) / (2 * sqrt(l2) * s)
//! ```
//!
//! with `g0 = SSR / T`, `s^2 = SSR / (T - k)` and `l2` the long-run variance.

use serde::{Deserialize, Serialize};

use crate::dataset::TimeSeries;
use crate::error::{Error, Result};
use crate::regress::{fit_ols, DesignMatrix};
use crate::stats::normal_cdf;
use crate::tables::{self, PValueSurface};

/// Deterministic terms in the test regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deterministic {
    None,
    #[default]
    Constant,
    ConstantTrend,
}

impl Deterministic {
    fn response_surface(self) -> &'static [[f64; 4]; 3] {
        match self {
            Deterministic::None => &tables::MACKINNON_NC,
            Deterministic::Constant => &tables::MACKINNON_C,
            Deterministic::ConstantTrend => &tables::MACKINNON_CT,
        }
    }

    fn p_surface(self) -> &'static PValueSurface {
        match self {
            Deterministic::None => &tables::MACKINNON_P_NC,
            Deterministic::Constant => &tables::MACKINNON_P_C,
            Deterministic::ConstantTrend => &tables::MACKINNON_P_CT,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Deterministic::None => "none",
            Deterministic::Constant => "constant",
            Deterministic::ConstantTrend => "trend",
        }
    }
}

impl std::str::FromStr for Deterministic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Deterministic::None),
            "constant" | "c" => Ok(Deterministic::Constant),
            "trend" | "ct" | "constant_trend" => Ok(Deterministic::ConstantTrend),
            other => Err(Error::Argument(format!(
                "unknown deterministic case `{other}` (none|constant|trend)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValue {
    pub level: f64,
    pub value: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpTestResult {
    pub series: String,
    pub z_tau: f64,
    /// Unadjusted Dickey-Fuller t ratio.
    pub rho_t: f64,
    pub long_run_variance: f64,
    pub residual_variance: f64,
    pub bandwidth: usize,
    pub nobs: usize,
    pub deterministic: Deterministic,
    /// At 1%, 5% and 10%.
    pub critical_values: Vec<CriticalValue>,
    pub p_value: f64,
}

impl PpTestResult {
    pub fn rejects_at(&self, level: f64) -> Option<bool> {
        self.critical_values
            .iter()
            .find(|c| (c.level - level).abs() < 1e-12)
            .map(|c| c.reject)
    }
}

/// `floor(4 (T/100)^(2/9))`.
pub fn default_bandwidth(nobs: usize) -> usize {
    (4.0 * (nobs as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Newey-West long-run variance with Bartlett weights `1 - j/(bw+1)`,
/// autocovariances normalised by `T`.
pub fn newey_west_lrv(u: &[f64], bandwidth: usize) -> f64 {
    let n = u.len() as f64;
    let gamma0 = u.iter().map(|v| v * v).sum::<f64>() / n;
    let mut lrv = gamma0;
    for j in 1..=bandwidth.min(u.len().saturating_sub(1)) {
        let w = 1.0 - j as f64 / (bandwidth as f64 + 1.0);
        let gj: f64 = u[j..].iter().zip(u).map(|(a, b)| a * b).sum::<f64>() / n;
        lrv += 2.0 * w * gj;
    }
    lrv.max(0.0)
}

/// Finite-sample critical value at 1%, 5% or 10% for `nobs` observations.
pub fn critical_value(deterministic: Deterministic, level: f64, nobs: usize) -> Result<f64> {
    let idx = tables::UNIT_ROOT_LEVELS
        .iter()
        .position(|l| (l - level).abs() < 1e-12)
        .ok_or_else(|| Error::Argument(format!("no critical value tabulated at level {level}")))?;
    let b = deterministic.response_surface()[idx];
    let t = nobs as f64;
    Ok(b[0] + b[1] / t + b[2] / (t * t) + b[3] / (t * t * t))
}

/// Asymptotic p-value of a unit-root t statistic.
pub fn mackinnon_p_value(deterministic: Deterministic, stat: f64) -> f64 {
    let s = deterministic.p_surface();
    if stat > s.tau_max {
        return 1.0;
    }
    if stat < s.tau_min {
        return 0.0;
    }
    let z = if stat <= s.tau_star {
        s.small_p[0] + s.small_p[1] * stat + s.small_p[2] * stat * stat
    } else {
        s.large_p[0]
            + s.large_p[1] * stat
            + s.large_p[2] * stat * stat
            + s.large_p[3] * stat * stat * stat
    };
    normal_cdf(z)
}

pub fn pp_test(
    s: &TimeSeries,
    deterministic: Deterministic,
    bandwidth: Option<usize>,
) -> Result<PpTestResult> {
    let mut r = pp_test_values(&s.complete_values()?, deterministic, bandwidth)?;
    r.series = s.name().to_string();
    Ok(r)
}

pub fn pp_test_values(
    y: &[f64],
    deterministic: Deterministic,
    bandwidth: Option<usize>,
) -> Result<PpTestResult> {
    if y.len() < 11 {
        return Err(Error::InsufficientSample(format!(
            "Phillips-Perron needs at least 10 differenced observations, got {}",
            y.len().saturating_sub(1)
        )));
    }
    let first = y[0];
    if y.iter().all(|&v| v == first) {
        return Err(Error::Degenerate("series is constant".into()));
    }
    let n = y.len() - 1;
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let mut x = DesignMatrix::with_rows(n);
    match deterministic {
        Deterministic::None => {}
        Deterministic::Constant => x.push("const", &vec![1.0; n])?,
        Deterministic::ConstantTrend => {
            x.push("const", &vec![1.0; n])?;
            x.push("trend", &(1..=n).map(|t| t as f64).collect::<Vec<_>>())?;
        }
    }
    x.push("y_lag", &y[..n])?;
    let fit = fit_ols(&x, &dy).map_err(|e| match e {
        Error::SingularDesign { .. } => {
            Error::Degenerate(format!("test regression is singular: {e}"))
        }
        e => e,
    })?;
    let k = fit.ncoef();
    let g = fit.beta[k - 1];
    let se = fit.cov[(k - 1, k - 1)].sqrt();
    if !(se > 0.0) || !(fit.ssr > 0.0) {
        return Err(Error::Degenerate(
            "test regression has a perfect fit".into(),
        ));
    }
    let t_g = g / se;
    let bw = bandwidth.unwrap_or_else(|| default_bandwidth(n));
    if bw >= n {
        return Err(Error::Argument(format!(
            "bandwidth {bw} must be below the sample length {n}"
        )));
    }
    let nf = n as f64;
    let gamma0 = fit.residuals.iter().map(|v| v * v).sum::<f64>() / nf;
    let lrv = newey_west_lrv(&fit.residuals, bw);
    if !(lrv > 0.0) {
        return Err(Error::Degenerate(
            "long-run variance is not positive".into(),
        ));
    }
    let s = fit.sigma2.sqrt();
    let z_tau = (gamma0 / lrv).sqrt() * t_g - (lrv - gamma0) * nf * se / (2.0 * lrv.sqrt() * s);

    let critical_values = tables::UNIT_ROOT_LEVELS
        .iter()
        .map(|&level| {
            let value = critical_value(deterministic, level, n)?;
            Ok(CriticalValue {
                level,
                value,
                reject: z_tau < value,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(PpTestResult {
        series: String::new(),
        z_tau,
        rho_t: t_g,
        long_run_variance: lrv,
        residual_variance: gamma0,
        bandwidth: bw,
        nobs: n,
        deterministic,
        critical_values,
        p_value: mackinnon_p_value(deterministic, z_tau),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::stream_rng;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random_walk(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = stream_rng(seed, 0);
        let mut y = Vec::with_capacity(n);
        let mut acc = 0.0;
        for _ in 0..n {
            acc += rng.sample::<f64, _>(StandardNormal);
            y.push(acc);
        }
        y
    }

    #[test]
    fn zero_bandwidth_is_dickey_fuller() {
        let y = random_walk(1, 80);
        let r = pp_test_values(&y, Deterministic::Constant, Some(0)).unwrap();
        assert_eq!(r.z_tau, r.rho_t);
        assert_eq!(r.long_run_variance, r.residual_variance);
    }

    #[test]
    fn default_bandwidth_rule() {
        assert_eq!(default_bandwidth(100), 4);
        assert_eq!(default_bandwidth(99), 3);
        assert_eq!(default_bandwidth(27), 2);
    }

    #[test]
    fn decision_is_left_tailed_comparison() {
        let y = random_walk(3, 100);
        let r = pp_test_values(&y, Deterministic::ConstantTrend, None).unwrap();
        for c in &r.critical_values {
            assert_eq!(c.reject, r.z_tau < c.value);
        }
        assert!(r.bandwidth < r.nobs);
    }

    #[test]
    fn differenced_random_walk_rejects_at_one_percent() {
        let y = random_walk(2024, 100);
        let d: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
        let r = pp_test_values(&d, Deterministic::Constant, None).unwrap();
        assert_eq!(r.rejects_at(0.01), Some(true), "{r:?}");
        assert!(r.p_value < 0.01);
    }

    #[test]
    fn constant_and_short_series_are_rejected() {
        assert!(matches!(
            pp_test_values(&[3.0; 40], Deterministic::Constant, None),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            pp_test_values(&[1.0, 2.0, 1.5, 3.0, 2.0], Deterministic::Constant, None),
            Err(Error::InsufficientSample(_))
        ));
    }

    #[test]
    fn critical_values_approach_asymptotic() {
        let cv = critical_value(Deterministic::Constant, 0.05, 100_000).unwrap();
        assert!((cv + 2.86154).abs() < 1e-3);
        let cv100 = critical_value(Deterministic::Constant, 0.05, 100).unwrap();
        assert!(cv100 < cv);
    }

    #[test]
    fn p_value_at_critical_value_is_close_to_level() {
        for case in [
            Deterministic::None,
            Deterministic::Constant,
            Deterministic::ConstantTrend,
        ] {
            let cv = critical_value(case, 0.05, 1_000_000).unwrap();
            assert!(
                (mackinnon_p_value(case, cv) - 0.05).abs() < 0.003,
                "{case:?}"
            );
        }
    }

    #[test]
    fn long_run_variance_is_nonnegative() {
        let u: Vec<f64> = (0..50)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        assert!(newey_west_lrv(&u, 10) >= 0.0);
    }

    proptest! {
        #[test]
        fn affine_invariance(seed in 0u64..500, a in 0.1f64..50.0, b in -100f64..100.0) {
            let y = random_walk(seed, 60);
            let ys: Vec<f64> = y.iter().map(|v| a * v + b).collect();
            let r1 = pp_test_values(&y, Deterministic::Constant, None).unwrap();
            let r2 = pp_test_values(&ys, Deterministic::Constant, None).unwrap();
            prop_assert!((r1.z_tau - r2.z_tau).abs() < 1e-8);
        }
    }
}
