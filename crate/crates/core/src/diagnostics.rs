//! Post-estimation checks: serial correlation, the information-matrix test
//! decomposition, recursive-residual CUSUM stability and residual normality.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regress::{fit_ols, DesignMatrix, OlsFit, PivotedQr};
use crate::stats::{chi2_sf, mean, sample_variance};
use crate::tables;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub stat: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquareTest {
    fn new(stat: f64, dof: usize) -> Self {
        Self {
            stat,
            dof,
            p_value: if dof == 0 {
                1.0
            } else {
                chi2_sf(stat, dof as f64)
            },
        }
    }

    pub fn rejects_at(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// Breusch-Godfrey LM test for serial correlation up to order `lags`.
///
/// Regresses the residuals on the original design and `lags` lagged
/// residuals (zero before the sample start); `LM = n R^2`.
pub fn breusch_godfrey(fit: &OlsFit, lags: usize) -> Result<ChiSquareTest> {
    if lags == 0 {
        return Err(Error::Argument(
            "Breusch-Godfrey test needs at least one lag".into(),
        ));
    }
    let n = fit.nobs;
    if n <= fit.ncoef() + lags {
        return Err(Error::InsufficientSample(format!(
            "{n} observations for {} regressors and {lags} lags",
            fit.ncoef()
        )));
    }
    let u = &fit.residuals;
    let mut aux = fit.design.clone();
    for l in 1..=lags {
        let col: Vec<f64> = (0..n)
            .map(|t| if t >= l { u[t - l] } else { 0.0 })
            .collect();
        aux.push(format!("resid.L{l}"), &col)?;
    }
    let aux_fit = fit_ols(&aux, u)?;
    Ok(ChiSquareTest::new(
        n as f64 * centered_r2(u, aux_fit.ssr),
        lags,
    ))
}

fn centered_r2(y: &[f64], ssr: f64) -> f64 {
    let m = mean(y);
    let tss: f64 = y.iter().map(|v| (v - m).powi(2)).sum();
    if tss > 0.0 {
        (1.0 - ssr / tss).max(0.0)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImTest {
    pub heteroskedasticity: ChiSquareTest,
    pub skewness: ChiSquareTest,
    pub kurtosis: ChiSquareTest,
    pub total: ChiSquareTest,
    /// Auxiliary columns of the heteroskedasticity regression, after dropping
    /// collinear ones.
    pub het_terms: Vec<String>,
    pub notes: Vec<String>,
}

fn slope_columns(x: &DesignMatrix) -> Vec<usize> {
    (0..x.ncols())
        .filter(|&j| {
            let c = x.matrix().column(j);
            let first = c[0];
            c.iter().any(|&v| v != first)
        })
        .collect()
}

/// Information-matrix test split into heteroskedasticity, skewness and
/// kurtosis components.
///
/// * heteroskedasticity: `n R^2` of `u^2` on a constant, the regressors and
///   their unique cross-products
/// * skewness: score test of `E[u^3 x] = 0` over the non-constant regressors
/// * kurtosis: score test of `E[u^4 - 6 s^2 u^2 + 3 s^4] = 0`
pub fn im_test(fit: &OlsFit) -> Result<ImTest> {
    let x = &fit.design;
    let n = fit.nobs;
    let u = &fit.residuals;
    let s2 = fit.ssr / n as f64;
    if s2 <= 0.0 {
        return Err(Error::Degenerate("residuals are identically zero".into()));
    }
    let slopes = slope_columns(x);
    let mut notes = Vec::new();

    // heteroskedasticity
    let u2: Vec<f64> = u.iter().map(|v| v * v).collect();
    let (het, het_terms) = {
        let levels: Vec<(String, Vec<f64>)> = slopes
            .iter()
            .map(|&j| (x.names()[j].clone(), x.column(j)))
            .collect();
        let mut squares = Vec::new();
        let mut crosses = Vec::new();
        for (a, (na, ca)) in levels.iter().enumerate() {
            for (nb, cb) in levels.iter().skip(a) {
                let prod: Vec<f64> = ca.iter().zip(cb).map(|(p, q)| p * q).collect();
                let name = if na == nb {
                    format!("{na}^2")
                } else {
                    format!("{na}*{nb}")
                };
                if na == nb {
                    squares.push((name, prod));
                } else {
                    crosses.push((name, prod));
                }
            }
        }
        let full: Vec<_> = levels
            .iter()
            .chain(&squares)
            .chain(&crosses)
            .cloned()
            .collect();
        let reduced: Vec<_> = levels.iter().chain(&squares).cloned().collect();
        let mut chosen = full;
        if chosen.len() + 2 > n {
            notes.push(format!(
                "{} cross-product terms for {n} observations; cross-products dropped",
                chosen.len()
            ));
            chosen = reduced;
            if chosen.len() + 2 > n {
                notes.push("squares dropped as well; levels only".into());
                chosen = levels.clone();
            }
        }
        let (terms, cols) = independent_columns(chosen, n, &mut notes);
        let mut aux = DesignMatrix::with_rows(n);
        aux.push("const", &vec![1.0; n])?;
        for (name, col) in terms.iter().zip(&cols) {
            aux.push(name.clone(), col)?;
        }
        let aux_fit = fit_ols(&aux, &u2)?;
        (
            ChiSquareTest::new(n as f64 * centered_r2(&u2, aux_fit.ssr), terms.len()),
            terms,
        )
    };

    // skewness
    let skewness = if slopes.is_empty() {
        ChiSquareTest::new(0.0, 0)
    } else {
        let m = slopes.len();
        let centered: Vec<Vec<f64>> = slopes
            .iter()
            .map(|&j| {
                let c = x.column(j);
                let mu = mean(&c);
                c.into_iter().map(|v| v - mu).collect()
            })
            .collect();
        let score = DVector::from_iterator(
            m,
            centered
                .iter()
                .map(|c| c.iter().zip(u).map(|(xv, uv)| uv.powi(3) * xv).sum::<f64>()),
        );
        let mut info = DMatrix::<f64>::zeros(m, m);
        for a in 0..m {
            for b in 0..m {
                info[(a, b)] = 6.0
                    * s2.powi(3)
                    * centered[a]
                        .iter()
                        .zip(&centered[b])
                        .map(|(p, q)| p * q)
                        .sum::<f64>();
            }
        }
        let stat = match info.clone().cholesky() {
            Some(ch) => score.dot(&ch.solve(&score)),
            None => {
                let pinv = info
                    .pseudo_inverse(1e-12)
                    .map_err(|e| Error::Numeric(e.to_string()))?;
                notes.push("skewness information matrix is singular; pseudo-inverse used".into());
                score.dot(&(pinv * &score))
            }
        };
        ChiSquareTest::new(stat, m)
    };

    // kurtosis
    let k_sum: f64 = u
        .iter()
        .map(|v| v.powi(4) - 6.0 * s2 * v * v + 3.0 * s2 * s2)
        .sum();
    let kurtosis = ChiSquareTest::new(k_sum * k_sum / (24.0 * s2.powi(4) * n as f64), 1);

    let total = ChiSquareTest::new(
        het.stat + skewness.stat + kurtosis.stat,
        het.dof + skewness.dof + kurtosis.dof,
    );
    Ok(ImTest {
        heteroskedasticity: het,
        skewness,
        kurtosis,
        total,
        het_terms,
        notes,
    })
}

/// Keeps a linearly independent subset of `cols` (together with a constant),
/// recording the dropped names in `notes`.
fn independent_columns(
    cols: Vec<(String, Vec<f64>)>,
    n: usize,
    notes: &mut Vec<String>,
) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut m = DMatrix::<f64>::zeros(n, cols.len() + 1);
    m.column_mut(0).fill(1.0);
    for (j, (_, c)) in cols.iter().enumerate() {
        m.column_mut(j + 1).copy_from_slice(c);
    }
    let qr = PivotedQr::new(&m);
    let mut dropped: Vec<usize> = qr.dependent_columns();
    // a dependent constant means some term is constant; drop that term instead
    if let Some(pos) = dropped.iter().position(|&j| j == 0) {
        let constant_term = (1..=cols.len()).find(|&j| {
            let c = m.column(j);
            c.iter().all(|&v| v == c[0])
        });
        match constant_term {
            Some(j) => dropped[pos] = j,
            None => {
                dropped.remove(pos);
            }
        }
    }
    let mut names = Vec::new();
    let mut out = Vec::new();
    let mut dropped_names = Vec::new();
    for (j, (name, c)) in cols.into_iter().enumerate() {
        if dropped.contains(&(j + 1)) {
            dropped_names.push(name);
        } else {
            names.push(name);
            out.push(c);
        }
    }
    if !dropped_names.is_empty() {
        notes.push(format!(
            "collinear heteroskedasticity terms dropped: {}",
            dropped_names.join(", ")
        ));
    }
    (names, out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cusum {
    /// Recursive residuals for observations `k..T` (0-based).
    pub recursive_residuals: Vec<f64>,
    pub path: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub level: f64,
    pub in_bounds: bool,
    /// Index (into `path`) of the first boundary crossing.
    pub first_crossing: Option<usize>,
}

/// CUSUM of recursive residuals with 5% boundaries.
pub fn cusum(y: &[f64], x: &DesignMatrix) -> Result<Cusum> {
    cusum_at(y, x, 0.05)
}

pub fn cusum_at(y: &[f64], x: &DesignMatrix, level: f64) -> Result<Cusum> {
    let a = tables::cusum_constant(level)
        .ok_or_else(|| Error::Argument(format!("no CUSUM constant for level {level}")))?;
    let w = recursive_residuals(y, x)?;
    let k = x.ncols();
    let m = w.len();
    let sd = sample_variance(&w).sqrt();
    if !(sd > 0.0) {
        return Err(Error::Degenerate(
            "recursive residuals have zero variance".into(),
        ));
    }
    let mut path = Vec::with_capacity(m);
    let mut acc = 0.0;
    for v in &w {
        acc += v / sd;
        path.push(acc);
    }
    let root = (m as f64).sqrt();
    let upper: Vec<f64> = (1..=m)
        .map(|r| a * (root + 2.0 * r as f64 / root))
        .collect();
    let lower: Vec<f64> = upper.iter().map(|v| -v).collect();
    let first_crossing = path.iter().zip(&upper).position(|(p, b)| p.abs() >= *b);
    debug_assert_eq!(m, y.len() - k);
    Ok(Cusum {
        recursive_residuals: w,
        path,
        upper,
        lower,
        level,
        in_bounds: first_crossing.is_none(),
        first_crossing,
    })
}

/// One-step-ahead standardised prediction errors from expanding windows.
pub fn recursive_residuals(y: &[f64], x: &DesignMatrix) -> Result<Vec<f64>> {
    let (t_len, k) = (x.nrows(), x.ncols());
    if y.len() != t_len {
        return Err(Error::Argument("response and design lengths differ".into()));
    }
    if t_len < k + 2 {
        return Err(Error::InsufficientSample(format!(
            "CUSUM needs at least {} observations for {k} regressors, have {t_len}",
            k + 2
        )));
    }
    let mut w = Vec::with_capacity(t_len - k);
    for t in k..t_len {
        let window = x.matrix().rows(0, t).into_owned();
        let qr = PivotedQr::new(&window);
        if qr.rank() < k {
            return Err(Error::Degenerate(format!(
                "recursive window of the first {t} observations is rank deficient"
            )));
        }
        let b = qr.solve(&y[..t]);
        let inv = qr.xtx_inverse();
        let xt = x.matrix().row(t).transpose();
        let pred: f64 = xt.iter().zip(&b).map(|(a, c)| a * c).sum();
        let h = (xt.transpose() * &inv * &xt)[(0, 0)];
        w.push((y[t] - pred) / (1.0 + h).sqrt());
    }
    Ok(w)
}

/// Jarque-Bera normality test on residuals.
pub fn jarque_bera(residuals: &[f64]) -> Result<ChiSquareTest> {
    let n = residuals.len();
    if n < 3 {
        return Err(Error::InsufficientSample(
            "Jarque-Bera needs 3 observations".into(),
        ));
    }
    let m = mean(residuals);
    let moment = |p: i32| residuals.iter().map(|v| (v - m).powi(p)).sum::<f64>() / n as f64;
    let m2 = moment(2);
    if m2 <= 0.0 {
        return Err(Error::Degenerate("residuals are constant".into()));
    }
    let skew = moment(3) / m2.powf(1.5);
    let kurt = moment(4) / (m2 * m2);
    let jb = n as f64 / 6.0 * (skew * skew + (kurt - 3.0).powi(2) / 4.0);
    Ok(ChiSquareTest::new(jb, 2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Reject,
}

impl Verdict {
    fn of(reject: bool) -> Self {
        if reject {
            Verdict::Reject
        } else {
            Verdict::Pass
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub bg_lags: usize,
    pub breusch_godfrey: ChiSquareTest,
    pub im: ImTest,
    pub cusum: Cusum,
    pub jarque_bera: ChiSquareTest,
    pub level: f64,
    pub serial_correlation: Verdict,
    pub heteroskedasticity: Verdict,
    pub stability: Verdict,
    pub normality: Verdict,
}

impl DiagnosticsReport {
    /// Runs the full battery on a fitted regression at the 5% level.
    pub fn compute(fit: &OlsFit, bg_lags: usize) -> Result<Self> {
        let bg = breusch_godfrey(fit, bg_lags)?;
        let im = im_test(fit)?;
        let cs = cusum(&fit.y, &fit.design)?;
        let jb = jarque_bera(&fit.residuals)?;
        let level = 0.05;
        Ok(Self {
            bg_lags,
            serial_correlation: Verdict::of(bg.rejects_at(level)),
            heteroskedasticity: Verdict::of(im.heteroskedasticity.rejects_at(level)),
            stability: Verdict::of(!cs.in_bounds),
            normality: Verdict::of(jb.rejects_at(level)),
            breusch_godfrey: bg,
            im,
            cusum: cs,
            jarque_bera: jb,
            level,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::MonteCarlo;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn design(x: &[f64]) -> DesignMatrix {
        DesignMatrix::from_columns(vec![
            ("const".into(), vec![1.0; x.len()]),
            ("x".into(), x.to_vec()),
        ])
        .unwrap()
    }

    fn normals<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn bg_zero_lags_is_an_argument_error() {
        let mut rng = MonteCarlo::new(1, 1).rng(0);
        let x = normals(&mut rng, 30);
        let y = normals(&mut rng, 30);
        let fit = fit_ols(&design(&x), &y).unwrap();
        assert!(matches!(breusch_godfrey(&fit, 0), Err(Error::Argument(_))));
        assert!(matches!(
            breusch_godfrey(&fit, 28),
            Err(Error::InsufficientSample(_))
        ));
    }

    #[test]
    fn bg_matches_hand_built_auxiliary_regression() {
        let mut rng = MonteCarlo::new(1, 2).rng(0);
        let x = normals(&mut rng, 40);
        let y: Vec<f64> = x
            .iter()
            .zip(normals(&mut rng, 40))
            .map(|(a, e)| 1.0 + a + e)
            .collect();
        let fit = fit_ols(&design(&x), &y).unwrap();
        let u = &fit.residuals;
        let l1: Vec<f64> = (0..40)
            .map(|t| if t >= 1 { u[t - 1] } else { 0.0 })
            .collect();
        let l2: Vec<f64> = (0..40)
            .map(|t| if t >= 2 { u[t - 2] } else { 0.0 })
            .collect();
        let aux = DesignMatrix::from_columns(vec![
            ("c".into(), vec![1.0; 40]),
            ("x".into(), x.clone()),
            ("l1".into(), l1),
            ("l2".into(), l2),
        ])
        .unwrap();
        let aux_fit = fit_ols(&aux, u).unwrap();
        let bg = breusch_godfrey(&fit, 2).unwrap();
        assert!((bg.stat - 40.0 * aux_fit.r2).abs() < 1e-10);
        assert_eq!(bg.dof, 2);
    }

    #[test]
    fn bg_size_and_power() {
        let mc = MonteCarlo::new(200, 10);
        let size = mc
            .rate(|rng| {
                let x = normals(rng, 100);
                let e = normals(rng, 100);
                let y: Vec<f64> = x.iter().zip(&e).map(|(a, b)| 1.0 + 2.0 * a + b).collect();
                Ok(breusch_godfrey(&fit_ols(&design(&x), &y)?, 4)?.rejects_at(0.05))
            })
            .unwrap();
        assert!(size.rate < 0.12, "{size:?}");
        let power = mc
            .rate(|rng| {
                let x = normals(rng, 100);
                let e = normals(rng, 100);
                let mut u = 0.0;
                let y: Vec<f64> = x
                    .iter()
                    .zip(&e)
                    .map(|(a, b)| {
                        u = 0.9 * u + b;
                        1.0 + 2.0 * a + u
                    })
                    .collect();
                Ok(breusch_godfrey(&fit_ols(&design(&x), &y)?, 4)?.rejects_at(0.05))
            })
            .unwrap();
        assert!(power.rate >= 0.95, "{power:?}");
    }

    #[test]
    fn im_single_regressor_terms() {
        let mut rng = MonteCarlo::new(1, 3).rng(0);
        let x = normals(&mut rng, 50);
        let y = normals(&mut rng, 50);
        let im = im_test(&fit_ols(&design(&x), &y).unwrap()).unwrap();
        assert_eq!(im.het_terms, vec!["x".to_string(), "x^2".to_string()]);
        assert_eq!(im.heteroskedasticity.dof, 2);
        assert_eq!(im.skewness.dof, 1);
        assert_eq!(im.kurtosis.dof, 1);
        assert_eq!(im.total.dof, 4);
        let sum = im.heteroskedasticity.stat + im.skewness.stat + im.kurtosis.stat;
        assert_eq!(im.total.stat, sum);
    }

    #[test]
    fn im_drops_collinear_products() {
        // a dummy regressor: d^2 == d
        let mut rng = MonteCarlo::new(1, 4).rng(0);
        let x = normals(&mut rng, 60);
        let d: Vec<f64> = (0..60).map(|i| f64::from(u8::from(i % 3 == 0))).collect();
        let y = normals(&mut rng, 60);
        let xd = DesignMatrix::from_columns(vec![
            ("const".into(), vec![1.0; 60]),
            ("x".into(), x),
            ("d".into(), d),
        ])
        .unwrap();
        let im = im_test(&fit_ols(&xd, &y).unwrap()).unwrap();
        assert_eq!(im.heteroskedasticity.dof, 4);
        assert!(im.notes.iter().any(|n| n.contains("d^2")));
    }

    #[test]
    fn im_detects_heteroskedasticity() {
        let mc = MonteCarlo::new(100, 20);
        let power = mc
            .rate(|rng| {
                let x: Vec<f64> = (0..200).map(|_| rng.random_range(0.0..10.0)).collect();
                let e = normals(rng, 200);
                let y: Vec<f64> = x
                    .iter()
                    .zip(&e)
                    .map(|(a, b)| 1.0 + a + a.sqrt() * b)
                    .collect();
                Ok(im_test(&fit_ols(&design(&x), &y)?)?
                    .heteroskedasticity
                    .rejects_at(0.05))
            })
            .unwrap();
        assert!(power.rate >= 0.9, "{power:?}");
    }

    #[test]
    fn kurtosis_component_matches_formula() {
        let u = [1.0, -2.0, 0.5, 0.5];
        let x = DesignMatrix::from_columns(vec![("c".into(), vec![1.0; 4])]).unwrap();
        let fit = fit_ols(&x, &u).unwrap();
        let im = im_test(&fit).unwrap();
        let s2 = fit.ssr / 4.0;
        let k: f64 = fit
            .residuals
            .iter()
            .map(|v| v.powi(4) - 6.0 * s2 * v * v + 3.0 * s2 * s2)
            .sum();
        assert!((im.kurtosis.stat - k * k / (24.0 * s2.powi(4) * 4.0)).abs() < 1e-12);
        assert_eq!(im.skewness.dof, 0);
    }

    /// Recursive residual from an explicit normal-equations refit.
    fn recursive_oracle(y: &[f64], x: &DMatrix<f64>, t: usize) -> f64 {
        let xs = x.rows(0, t).into_owned();
        let xtx = xs.transpose() * &xs;
        let inv = xtx.try_inverse().unwrap();
        let b = &inv * xs.transpose() * DVector::from_row_slice(&y[..t]);
        let xt = x.row(t).transpose();
        let h = (xt.transpose() * &inv * &xt)[(0, 0)];
        (y[t] - xt.dot(&b)) / (1.0 + h).sqrt()
    }

    #[test]
    fn recursive_residuals_match_oracle() {
        let mut rng = MonteCarlo::new(1, 5).rng(0);
        let x = normals(&mut rng, 25);
        let y: Vec<f64> = x
            .iter()
            .zip(normals(&mut rng, 25))
            .map(|(a, e)| a + e)
            .collect();
        let d = design(&x);
        let w = recursive_residuals(&y, &d).unwrap();
        for (i, wi) in w.iter().enumerate() {
            assert!((wi - recursive_oracle(&y, d.matrix(), i + 2)).abs() < 1e-10);
        }
    }

    #[test]
    fn cusum_minimal_sample() {
        let x = [0.3, 1.0, 2.0, 2.5];
        let y = [1.0, 2.2, 2.9, 4.4];
        let c = cusum(&y, &design(&x)).unwrap();
        assert_eq!(c.path.len(), 2);
        assert_eq!(c.upper.len(), 2);
        assert!((c.upper[0] - 0.948 * (2f64.sqrt() + 2.0 / 2f64.sqrt())).abs() < 1e-12);
        assert!(cusum(&y[..3], &design(&x[..3])).is_err());
    }

    #[test]
    fn cusum_affine_invariant() {
        let mut rng = MonteCarlo::new(1, 6).rng(0);
        let x = normals(&mut rng, 60);
        let y: Vec<f64> = x
            .iter()
            .zip(normals(&mut rng, 60))
            .map(|(a, e)| 2.0 * a + e)
            .collect();
        let y2: Vec<f64> = y.iter().map(|v| 4.0 * v - 3.0).collect();
        let a = cusum(&y, &design(&x)).unwrap();
        let b = cusum(&y2, &design(&x)).unwrap();
        for (p, q) in a.path.iter().zip(&b.path) {
            assert!((p - q).abs() < 1e-8);
        }
    }

    #[test]
    fn recursive_residual_variance_near_sigma2() {
        let mut rng = MonteCarlo::new(1, 7).rng(0);
        let x = normals(&mut rng, 500);
        let y: Vec<f64> = x
            .iter()
            .zip(normals(&mut rng, 500))
            .map(|(a, e)| 1.0 + a + 0.5 * e)
            .collect();
        let d = design(&x);
        let fit = fit_ols(&d, &y).unwrap();
        let w = recursive_residuals(&y, &d).unwrap();
        let ratio = sample_variance(&w) / fit.sigma2;
        assert!((ratio - 1.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn cusum_size_and_break_power() {
        let mc = MonteCarlo::new(100, 30);
        let stable = mc
            .rate(|rng| {
                let x: Vec<f64> = normals(rng, 100).iter().map(|v| 5.0 + v).collect();
                let e = normals(rng, 100);
                let y: Vec<f64> = x.iter().zip(&e).map(|(a, b)| 1.0 + a + b).collect();
                Ok(cusum(&y, &design(&x))?.in_bounds)
            })
            .unwrap();
        assert!(stable.rate >= 0.85, "{stable:?}");
        let broken = mc
            .rate(|rng| {
                let x: Vec<f64> = normals(rng, 100).iter().map(|v| 5.0 + v).collect();
                let e = normals(rng, 100);
                let y: Vec<f64> = x
                    .iter()
                    .zip(&e)
                    .enumerate()
                    .map(|(t, (a, b))| 1.0 + if t < 50 { 1.0 } else { 2.0 } * a + b)
                    .collect();
                Ok(!cusum(&y, &design(&x))?.in_bounds)
            })
            .unwrap();
        assert!(broken.rate >= 0.8, "{broken:?}");
    }

    #[test]
    fn jarque_bera_flags_skewed_residuals() {
        let mut rng = MonteCarlo::new(1, 8).rng(0);
        let e: Vec<f64> = normals(&mut rng, 400).iter().map(|v| v.exp()).collect();
        assert!(jarque_bera(&e).unwrap().rejects_at(0.01));
        let g = normals(&mut rng, 400);
        assert!(jarque_bera(&g).unwrap().p_value > 0.001);
    }

    #[test]
    fn report_p_values_are_probabilities() {
        let mut rng = MonteCarlo::new(1, 9).rng(0);
        let x = normals(&mut rng, 80);
        let y: Vec<f64> = x
            .iter()
            .zip(normals(&mut rng, 80))
            .map(|(a, e)| a + e)
            .collect();
        let r = DiagnosticsReport::compute(&fit_ols(&design(&x), &y).unwrap(), 4).unwrap();
        for p in [
            r.breusch_godfrey.p_value,
            r.im.heteroskedasticity.p_value,
            r.im.skewness.p_value,
            r.im.kurtosis.p_value,
            r.im.total.p_value,
            r.jarque_bera.p_value,
        ] {
            assert!((0.0..=1.0).contains(&p));
        }
    }
}
