//! Ordinary least squares via Householder QR with column pivoting.
//!
//! Every estimator and diagnostic in the crate goes through [`fit_ols`].
//! The covariance matrix is the classical homoskedastic one,
//! `sigma2 * (X'X)^-1` with `sigma2 = SSR / (n - k)`, where `k` counts every
//! estimated column including intercept and trend.

use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};

/// Column-named regressor matrix, rows in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    names: Vec<String>,
    data: DMatrix<f64>,
}

impl DesignMatrix {
    pub fn new(names: Vec<String>, data: DMatrix<f64>) -> Result<Self> {
        if names.len() != data.ncols() {
            return Err(Error::Argument(format!(
                "{} column names for {} columns",
                names.len(),
                data.ncols()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument(
                "design matrix has non-finite entries".into(),
            ));
        }
        Ok(Self { names, data })
    }

    /// Builds the matrix from named columns of equal length.
    pub fn from_columns(cols: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let n = cols.first().map(|c| c.1.len()).unwrap_or(0);
        if cols.iter().any(|c| c.1.len() != n) {
            return Err(Error::Argument("design columns differ in length".into()));
        }
        let names = cols.iter().map(|c| c.0.clone()).collect();
        let data = DMatrix::from_fn(n, cols.len(), |i, j| cols[j].1[i]);
        Self::new(names, data)
    }

    /// Empty design with `n` rows, to be grown with [`DesignMatrix::push`].
    pub fn with_rows(n: usize) -> Self {
        Self {
            names: Vec::new(),
            data: DMatrix::zeros(n, 0),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, col: &[f64]) -> Result<()> {
        if col.len() != self.nrows() {
            return Err(Error::Argument(format!(
                "column length {} does not match {} rows",
                col.len(),
                self.nrows()
            )));
        }
        let k = self.ncols();
        let data = std::mem::replace(&mut self.data, DMatrix::zeros(0, 0));
        self.data = data.insert_column(k, 0.0);
        self.data.column_mut(k).copy_from_slice(col);
        self.names.push(name.into());
        Ok(())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.data.column(j).iter().copied().collect()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.data.row(i).iter().copied().collect()
    }

    /// Keeps the listed columns, in the given order.
    pub fn select(&self, cols: &[usize]) -> DesignMatrix {
        DesignMatrix {
            names: cols.iter().map(|&j| self.names[j].clone()).collect(),
            data: self.data.select_columns(cols),
        }
    }

    /// Keeps rows `range`.
    pub fn rows(&self, range: std::ops::Range<usize>) -> DesignMatrix {
        DesignMatrix {
            names: self.names.clone(),
            data: self.data.rows(range.start, range.len()).into_owned(),
        }
    }

    /// True when some column is a non-zero constant.
    pub fn has_intercept(&self) -> bool {
        (0..self.ncols()).any(|j| {
            let c = self.data.column(j);
            c[0] != 0.0 && c.iter().all(|&v| v == c[0])
        })
    }
}

/// Householder QR factorisation with column pivoting, `A P = Q R`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    /// R in the upper triangle, Householder vectors below the diagonal.
    packed: DMatrix<f64>,
    tau: Vec<f64>,
    /// `perm[i]` is the original index of the i-th pivoted column.
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    pub fn new(a: &DMatrix<f64>) -> Self {
        let (n, k) = a.shape();
        let mut m = a.clone();
        let mut perm: Vec<usize> = (0..k).collect();
        let mut norms: Vec<f64> = (0..k).map(|j| m.column(j).norm_squared()).collect();
        let max_norm = norms.iter().fold(0.0f64, |a, &b| a.max(b)).sqrt();
        let tol = f64::EPSILON * n.max(k) as f64 * max_norm;
        let steps = n.min(k);
        let mut tau = vec![0.0; steps];
        let mut rank = steps;

        for j in 0..steps {
            // pivot: largest remaining column norm (recomputed for stability)
            for (c, slot) in norms.iter_mut().enumerate().skip(j) {
                *slot = m.view((j, c), (n - j, 1)).norm_squared();
            }
            let (p, _) = norms
                .iter()
                .enumerate()
                .skip(j)
                .fold(
                    (j, -1.0),
                    |acc, (c, &v)| if v > acc.1 { (c, v) } else { acc },
                );
            if p != j {
                m.swap_columns(j, p);
                norms.swap(j, p);
                perm.swap(j, p);
            }
            let alpha_norm = norms[j].sqrt();
            if alpha_norm <= tol {
                rank = j;
                break;
            }
            // Householder reflector zeroing m[j+1.., j]
            let x0 = m[(j, j)];
            let beta = if x0 >= 0.0 { -alpha_norm } else { alpha_norm };
            let v0 = x0 - beta;
            for i in j + 1..n {
                m[(i, j)] /= v0;
            }
            let t = (beta - x0) / beta;
            tau[j] = t;
            m[(j, j)] = beta;
            for c in j + 1..k {
                let mut s = m[(j, c)];
                for i in j + 1..n {
                    s += m[(i, j)] * m[(i, c)];
                }
                s *= t;
                m[(j, c)] -= s;
                for i in j + 1..n {
                    let vij = m[(i, j)];
                    m[(i, c)] -= s * vij;
                }
            }
        }
        Self {
            packed: m,
            tau,
            perm,
            rank,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Original indices of columns found linearly dependent on the others.
    pub fn dependent_columns(&self) -> Vec<usize> {
        self.perm[self.rank..].to_vec()
    }

    /// Overwrites `y` with `Q' y`.
    fn apply_qt(&self, y: &mut [f64]) {
        let n = self.packed.nrows();
        for j in 0..self.rank {
            let mut s = y[j];
            for (i, yi) in y.iter().enumerate().take(n).skip(j + 1) {
                s += self.packed[(i, j)] * yi;
            }
            s *= self.tau[j];
            y[j] -= s;
            for i in j + 1..n {
                y[i] -= s * self.packed[(i, j)];
            }
        }
    }

    /// Least-squares solution for a full-rank factorisation.
    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        let k = self.perm.len();
        debug_assert_eq!(self.rank, k);
        let mut qty = y.to_vec();
        self.apply_qt(&mut qty);
        let mut z = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = qty[i];
            for (c, zc) in z.iter().enumerate().take(k).skip(i + 1) {
                s -= self.packed[(i, c)] * zc;
            }
            z[i] = s / self.packed[(i, i)];
        }
        let mut beta = vec![0.0; k];
        for (i, &p) in self.perm.iter().enumerate() {
            beta[p] = z[i];
        }
        beta
    }

    /// `(X'X)^-1` in the original column order, for a full-rank factorisation.
    pub fn xtx_inverse(&self) -> DMatrix<f64> {
        let k = self.perm.len();
        // R^-1, upper triangular
        let mut rinv = DMatrix::<f64>::zeros(k, k);
        for c in 0..k {
            rinv[(c, c)] = 1.0 / self.packed[(c, c)];
            for i in (0..c).rev() {
                let mut s = 0.0;
                for m in i + 1..=c {
                    s += self.packed[(i, m)] * rinv[(m, c)];
                }
                rinv[(i, c)] = -s / self.packed[(i, i)];
            }
        }
        let inner = &rinv * rinv.transpose();
        let mut out = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                out[(self.perm[i], self.perm[j])] = inner[(i, j)];
            }
        }
        out
    }
}

/// Result of an OLS regression.
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub names: Vec<String>,
    pub beta: Vec<f64>,
    pub cov: DMatrix<f64>,
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
    pub sigma2: f64,
    pub ssr: f64,
    pub r2: f64,
    pub nobs: usize,
    pub dof: usize,
    pub design: DesignMatrix,
    pub y: Vec<f64>,
}

impl OlsFit {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn coef(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.beta[i])
    }

    pub fn std_errors(&self) -> Vec<f64> {
        (0..self.beta.len())
            .map(|i| self.cov[(i, i)].max(0.0).sqrt())
            .collect()
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.index_of(name)
            .map(|i| self.cov[(i, i)].max(0.0).sqrt())
    }

    pub fn t_stat(&self, name: &str) -> Option<f64> {
        Some(self.coef(name)? / self.std_error(name)?)
    }

    pub fn ncoef(&self) -> usize {
        self.beta.len()
    }
}

fn r_squared(y: &[f64], ssr: f64, centered: bool) -> f64 {
    let tss = if centered {
        let m = y.iter().sum::<f64>() / y.len() as f64;
        y.iter().map(|v| (v - m).powi(2)).sum::<f64>()
    } else {
        y.iter().map(|v| v * v).sum::<f64>()
    };
    if tss > 0.0 {
        (1.0 - ssr / tss).clamp(0.0, 1.0)
    } else {
        1.0
    }
}

/// Fits `y = X beta + u` by least squares.
pub fn fit_ols(x: &DesignMatrix, y: &[f64]) -> Result<OlsFit> {
    let (n, k) = (x.nrows(), x.ncols());
    if y.len() != n {
        return Err(Error::Argument(format!(
            "response has {} rows, design has {n}",
            y.len()
        )));
    }
    if k == 0 {
        return Err(Error::Argument("design has no columns".into()));
    }
    if n <= k {
        return Err(Error::InsufficientSample(format!(
            "{n} observations for {k} coefficients"
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("response has non-finite entries".into()));
    }
    let qr = PivotedQr::new(x.matrix());
    if qr.rank() < k {
        return Err(Error::SingularDesign {
            columns: qr
                .dependent_columns()
                .into_iter()
                .map(|j| x.names()[j].clone())
                .collect(),
        });
    }
    let beta = qr.solve(y);
    let fitted: Vec<f64> = (0..n)
        .map(|i| (0..k).map(|j| x.matrix()[(i, j)] * beta[j]).sum())
        .collect();
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let ssr: f64 = residuals.iter().map(|r| r * r).sum();
    let dof = n - k;
    let sigma2 = ssr / dof as f64;
    let cov = qr.xtx_inverse() * sigma2;
    let cov = (&cov + cov.transpose()) * 0.5;
    Ok(OlsFit {
        names: x.names().to_vec(),
        beta,
        cov,
        r2: r_squared(y, ssr, x.has_intercept()),
        residuals,
        fitted,
        sigma2,
        ssr,
        nobs: n,
        dof,
        design: x.clone(),
        y: y.to_vec(),
    })
}

/// Outcome of a Wald F test of joint zero restrictions.
#[derive(Debug, Clone, PartialEq)]
pub struct FTest {
    pub f: f64,
    pub df_num: usize,
    pub df_den: usize,
    pub ssr_restricted: f64,
    pub ssr_unrestricted: f64,
    pub p_value: f64,
}

/// Tests that the named coefficients are jointly zero by refitting without them.
pub fn wald_f_test(fit: &OlsFit, restrictions: &[&str]) -> Result<FTest> {
    if restrictions.is_empty() {
        return Err(Error::Argument("restriction set is empty".into()));
    }
    let mut drop = Vec::with_capacity(restrictions.len());
    for r in restrictions {
        let j = fit.index_of(r).ok_or_else(|| Error::UnknownSeries {
            name: r.to_string(),
            available: fit.names.join(", "),
        })?;
        if drop.contains(&j) {
            return Err(Error::Argument(format!("restriction `{r}` listed twice")));
        }
        drop.push(j);
    }
    let keep: Vec<usize> = (0..fit.ncoef()).filter(|j| !drop.contains(j)).collect();
    let ssr_r = if keep.is_empty() {
        fit.y.iter().map(|v| v * v).sum()
    } else {
        fit_ols(&fit.design.select(&keep), &fit.y)?.ssr
    };
    let m = drop.len();
    let f = ((ssr_r - fit.ssr) / m as f64) / (fit.ssr / fit.dof as f64);
    let f = f.max(0.0);
    let p_value = FisherSnedecor::new(m as f64, fit.dof as f64)
        .map(|d| (1.0 - d.cdf(f)).clamp(0.0, 1.0))
        .unwrap_or(f64::NAN);
    Ok(FTest {
        f,
        df_num: m,
        df_den: fit.dof,
        ssr_restricted: ssr_r,
        ssr_unrestricted: fit.ssr,
        p_value,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    /// Normal-equations oracle: solves (X'X) b = X'y by Gauss-Jordan with
    /// partial pivoting. Independent of the QR path.
    pub(crate) fn normal_equations(x: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
        let k = x.ncols();
        let mut a = vec![vec![0.0; k + 1]; k];
        for i in 0..k {
            for j in 0..k {
                a[i][j] = (0..x.nrows()).map(|r| x[(r, i)] * x[(r, j)]).sum();
            }
            a[i][k] = (0..x.nrows()).map(|r| x[(r, i)] * y[r]).sum();
        }
        for c in 0..k {
            let p = (c..k)
                .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
                .unwrap();
            a.swap(c, p);
            let piv = a[c][c];
            for v in a[c].iter_mut() {
                *v /= piv;
            }
            for r in 0..k {
                if r != c {
                    let f = a[r][c];
                    let row_c = a[c].clone();
                    for (v, rc) in a[r].iter_mut().zip(row_c) {
                        *v -= f * rc;
                    }
                }
            }
        }
        a.iter().map(|row| row[k]).collect()
    }

    pub(crate) fn random_design(rng: &mut ChaCha8Rng, n: usize, k: usize) -> DesignMatrix {
        let mut cols = vec![("const".to_string(), vec![1.0; n])];
        for j in 1..k {
            cols.push((
                format!("x{j}"),
                (0..n)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect(),
            ));
        }
        DesignMatrix::from_columns(cols).unwrap()
    }

    #[test]
    fn exact_linear_fit() {
        let x = DesignMatrix::from_columns(vec![
            ("const".into(), vec![1.0; 6]),
            ("x".into(), vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]),
        ])
        .unwrap();
        let y: Vec<f64> = (0..6).map(|i| 2.0 + 3.0 * i as f64).collect();
        let fit = fit_ols(&x, &y).unwrap();
        let norm: f64 = fit.residuals.iter().map(|r| r * r).sum::<f64>().sqrt();
        assert!(norm < 1e-10);
        assert_eq!(fit.r2, 1.0);
    }

    #[test]
    fn intercept_only_is_the_mean() {
        let x = DesignMatrix::from_columns(vec![("const".into(), vec![1.0; 3])]).unwrap();
        let fit = fit_ols(&x, &[2.0, 4.0, 6.0]).unwrap();
        assert!((fit.beta[0] - 4.0).abs() < 1e-12);
        for (r, e) in fit.residuals.iter().zip([-2.0, 0.0, 2.0]) {
            assert!((r - e).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_normal_equations_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random_design(&mut rng, 50, 5);
        let y: Vec<f64> = (0..50)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let fit = fit_ols(&x, &y).unwrap();
        let oracle = normal_equations(x.matrix(), &y);
        for (a, b) in fit.beta.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn duplicated_column_is_singular_and_named() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut x = random_design(&mut rng, 20, 3);
        let dup = x.column(1);
        x.push("x1_copy", &dup).unwrap();
        let y = vec![1.0; 20];
        match fit_ols(&x, &y) {
            Err(Error::SingularDesign { columns }) => {
                assert_eq!(columns.len(), 1);
                assert!(columns[0] == "x1" || columns[0] == "x1_copy");
            }
            other => panic!("expected singular design, got {other:?}"),
        }
    }

    #[test]
    fn residuals_orthogonal_and_cov_symmetric_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_design(&mut rng, 40, 4);
        let y: Vec<f64> = (0..40)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let fit = fit_ols(&x, &y).unwrap();
        for j in 0..4 {
            let col = x.column(j);
            let dot: f64 = col.iter().zip(&fit.residuals).map(|(a, b)| a * b).sum();
            let scale: f64 = col.iter().map(|v| v * v).sum::<f64>().sqrt()
                * fit.residuals.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(dot.abs() <= 1e-8 * scale);
        }
        assert!((&fit.cov - fit.cov.transpose()).abs().max() < 1e-14);
        let eig = fit.cov.clone().symmetric_eigen();
        assert!(eig.eigenvalues.min() > -1e-10);
        assert!((0.0..=1.0).contains(&fit.r2));
    }

    #[test]
    fn f_test_zero_for_irrelevant_regressor_in_exact_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_design(&mut rng, 30, 3);
        let y: Vec<f64> = (0..30).map(|i| 1.0 + 2.0 * x.matrix()[(i, 1)]).collect();
        let fit = fit_ols(&x, &y).unwrap();
        let t = wald_f_test(&fit, &["x2"]).unwrap();
        assert!(t.f.abs() < 1e-6 || !t.f.is_finite() || t.ssr_restricted < 1e-20);
    }

    #[test]
    fn f_test_large_under_gross_misfit() {
        let n = 30;
        let trend: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y: Vec<f64> = trend
            .iter()
            .map(|t| 5.0 * t + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let x = DesignMatrix::from_columns(vec![
            ("const".into(), vec![1.0; n]),
            ("trend".into(), trend),
        ])
        .unwrap();
        let fit = fit_ols(&x, &y).unwrap();
        let t = wald_f_test(&fit, &["trend"]).unwrap();
        assert!(t.f > 100.0);
        assert!(t.p_value < 1e-10);
    }

    #[test]
    fn f_test_matches_hand_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x = random_design(&mut rng, 30, 4);
        let y: Vec<f64> = (0..30)
            .map(|i| 0.5 * x.matrix()[(i, 1)] + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let fit = fit_ols(&x, &y).unwrap();
        let t = wald_f_test(&fit, &["x2", "x3"]).unwrap();
        // SSRs from the independent normal-equations path
        let ssr = |m: &DMatrix<f64>| {
            let b = normal_equations(m, &y);
            (0..30)
                .map(|i| {
                    let f: f64 = (0..m.ncols()).map(|j| m[(i, j)] * b[j]).sum();
                    (y[i] - f).powi(2)
                })
                .sum::<f64>()
        };
        let ssr_u = ssr(x.matrix());
        let ssr_r = ssr(&x.matrix().select_columns(&[0, 1]));
        let oracle = ((ssr_r - ssr_u) / 2.0) / (ssr_u / 26.0);
        assert!((t.f - oracle).abs() < 1e-9, "{} vs {oracle}", t.f);
        assert_eq!((t.df_num, t.df_den), (2, 26));
    }

    #[test]
    fn empty_restriction_set_is_an_argument_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_design(&mut rng, 10, 2);
        let fit = fit_ols(&x, &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(matches!(wald_f_test(&fit, &[]), Err(Error::Argument(_))));
    }

    #[test]
    fn projection_of_fitted_values_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x = random_design(&mut rng, 40, 3);
        let y: Vec<f64> = (0..40)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let fit = fit_ols(&x, &y).unwrap();
        let z = DesignMatrix::from_columns(vec![
            ("const".into(), vec![1.0; 40]),
            ("fitted".into(), fit.fitted.clone()),
        ])
        .unwrap();
        let again = fit_ols(&z, &fit.fitted).unwrap();
        assert!(again.beta[0].abs() < 1e-8);
        assert!((again.beta[1] - 1.0).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn scale_equivariance(seed in 0u64..1000, c in 0.01f64..100.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_design(&mut rng, 25, 3);
            let y: Vec<f64> = (0..25).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let ys: Vec<f64> = y.iter().map(|v| v * c).collect();
            let a = fit_ols(&x, &y).unwrap();
            let b = fit_ols(&x, &ys).unwrap();
            for (p, q) in a.beta.iter().zip(&b.beta) {
                prop_assert!((p * c - q).abs() <= 1e-10 * (1.0 + q.abs()));
            }
            for (p, q) in a.residuals.iter().zip(&b.residuals) {
                prop_assert!((p * c - q).abs() <= 1e-10 * (1.0 + q.abs()));
            }
            prop_assert!((a.sigma2 * c * c - b.sigma2).abs() <= 1e-10 * b.sigma2.max(1e-300));
            prop_assert!((a.r2 - b.r2).abs() <= 1e-10);
            let fa = wald_f_test(&a, &["x1"]).unwrap().f;
            let fb = wald_f_test(&b, &["x1"]).unwrap().f;
            prop_assert!((fa - fb).abs() <= 1e-10 * (1.0 + fa.abs()));
        }
    }
}
