//! Table-shaped CSV reports and the plain-text summary.

use std::fmt::Write as _;

use dynardl_core::ardl::{ArdlEcmFit, BoundsDecision, BoundsTestResult, LongRunStatus};
use dynardl_core::diagnostics::{DiagnosticsReport, Verdict};
use dynardl_core::dynsim::SimulationResult;
use dynardl_core::krls::KrlsFit;
use dynardl_core::unitroot::PpTestResult;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Shortest representation that parses back to the same value.
pub fn fmt_f(v: f64) -> String {
    format!("{v}")
}

pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Artifact(format!("csv encoding: {e}"));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Artifact(format!("csv encoding: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Phillips-Perron results for one variable in levels and first differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRootEntry {
    pub variable: String,
    pub level: PpTestResult,
    pub difference: PpTestResult,
    /// `I(0)`, `I(1)` or `inconclusive` at 5%.
    pub order: String,
}

impl UnitRootEntry {
    pub fn new(variable: &str, level: PpTestResult, difference: PpTestResult) -> Self {
        let order = if level.rejects_at(0.05) == Some(true) {
            "I(0)"
        } else if difference.rejects_at(0.05) == Some(true) {
            "I(1)"
        } else {
            "inconclusive"
        };
        Self {
            variable: variable.to_string(),
            level,
            difference,
            order: order.to_string(),
        }
    }
}

fn cv(r: &PpTestResult, level: f64) -> String {
    r.critical_values
        .iter()
        .find(|c| (c.level - level).abs() < 1e-12)
        .map_or(String::new(), |c| fmt_f(c.value))
}

pub fn table1_unitroot(entries: &[UnitRootEntry]) -> CliResult<String> {
    let mut rows = Vec::new();
    for e in entries {
        for (form, r) in [("level", &e.level), ("first_difference", &e.difference)] {
            rows.push(vec![
                e.variable.clone(),
                form.to_string(),
                r.deterministic.label().to_string(),
                fmt_f(r.z_tau),
                fmt_f(r.p_value),
                cv(r, 0.01),
                cv(r, 0.05),
                cv(r, 0.10),
                r.bandwidth.to_string(),
                r.nobs.to_string(),
                e.order.clone(),
            ]);
        }
    }
    csv_string(
        &[
            "variable",
            "form",
            "deterministic",
            "z_tau",
            "p_value",
            "cv_1pct",
            "cv_5pct",
            "cv_10pct",
            "bandwidth",
            "nobs",
            "order",
        ],
        &rows,
    )
}

fn decision_label(d: BoundsDecision) -> &'static str {
    match d {
        BoundsDecision::Cointegration => "cointegration",
        BoundsDecision::NoCointegration => "no_cointegration",
        BoundsDecision::Inconclusive => "inconclusive",
    }
}

pub fn table2_bounds(b: &BoundsTestResult) -> CliResult<String> {
    let mut rows = Vec::new();
    for (stat, value, p0, p1) in [
        (
            "F",
            b.f_stat,
            b.approx_p_values.f_i0,
            b.approx_p_values.f_i1,
        ),
        (
            "t",
            b.t_stat,
            b.approx_p_values.t_i0,
            b.approx_p_values.t_i1,
        ),
    ] {
        for lvl in &b.bounds {
            let (i0, i1) = if stat == "F" {
                (lvl.f_i0, lvl.f_i1)
            } else {
                (lvl.t_i0, lvl.t_i1)
            };
            rows.push(vec![
                stat.to_string(),
                fmt_f(value),
                b.k.to_string(),
                fmt_f(lvl.level),
                fmt_f(i0),
                fmt_f(i1),
                fmt_f(p0),
                fmt_f(p1),
            ]);
        }
    }
    csv_string(
        &[
            "statistic",
            "value",
            "k",
            "level",
            "i0_bound",
            "i1_bound",
            "p_i0",
            "p_i1",
        ],
        &rows,
    )
}

pub fn table3_ardl(fit: &ArdlEcmFit) -> CliResult<String> {
    let mut rows = Vec::new();
    if let Some(lr) = &fit.long_run {
        for c in lr {
            rows.push(vec![
                "long_run".to_string(),
                c.regressor.clone(),
                fmt_f(c.estimate),
                fmt_f(c.std_error),
                fmt_f(c.t_stat),
                fmt_f(c.p_value),
            ]);
        }
    }
    for (section, coefs) in [("adjustment", &fit.lambda), ("short_run", &fit.short_run)] {
        for c in coefs {
            rows.push(vec![
                section.to_string(),
                c.name.clone(),
                fmt_f(c.estimate),
                fmt_f(c.std_error),
                fmt_f(c.t_stat),
                fmt_f(c.p_value),
            ]);
        }
    }
    csv_string(
        &[
            "section",
            "term",
            "estimate",
            "std_error",
            "t_stat",
            "p_value",
        ],
        &rows,
    )
}

pub fn status_label(s: &LongRunStatus) -> String {
    match s {
        LongRunStatus::Stable => "stable".to_string(),
        LongRunStatus::Unstable(why) => format!("unstable: {why}"),
        LongRunStatus::Undefined => "undefined".to_string(),
    }
}

fn verdict(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Reject => "reject",
    }
}

pub fn table4_diagnostics(d: &DiagnosticsReport) -> CliResult<String> {
    let chi = |name: String, t: &dynardl_core::diagnostics::ChiSquareTest, v: Option<Verdict>| {
        vec![
            name,
            fmt_f(t.stat),
            t.dof.to_string(),
            fmt_f(t.p_value),
            v.map_or(
                if t.rejects_at(d.level) {
                    "reject"
                } else {
                    "pass"
                },
                verdict,
            )
            .to_string(),
        ]
    };
    let mut rows = vec![
        chi(
            format!("breusch_godfrey_lm({})", d.bg_lags),
            &d.breusch_godfrey,
            Some(d.serial_correlation),
        ),
        chi(
            "im_heteroskedasticity".into(),
            &d.im.heteroskedasticity,
            Some(d.heteroskedasticity),
        ),
        chi("im_skewness".into(), &d.im.skewness, None),
        chi("im_kurtosis".into(), &d.im.kurtosis, None),
        chi("im_total".into(), &d.im.total, None),
        chi("jarque_bera".into(), &d.jarque_bera, Some(d.normality)),
    ];
    let peak = d
        .cusum
        .path
        .iter()
        .zip(&d.cusum.upper)
        .map(|(w, b)| w.abs() / b)
        .fold(0.0f64, f64::max);
    rows.push(vec![
        "cusum_max_path_to_bound".into(),
        fmt_f(peak),
        String::new(),
        String::new(),
        verdict(d.stability).to_string(),
    ]);
    csv_string(&["test", "statistic", "dof", "p_value", "verdict"], &rows)
}

pub fn table5_krls(k: &KrlsFit) -> CliResult<String> {
    let rows: Vec<Vec<String>> = k
        .effects
        .iter()
        .map(|e| {
            vec![
                e.feature.clone(),
                fmt_f(e.average),
                fmt_f(e.std_error),
                fmt_f(e.p25),
                fmt_f(e.p50),
                fmt_f(e.p75),
            ]
        })
        .collect();
    csv_string(
        &["feature", "average", "std_error", "p25", "p50", "p75"],
        &rows,
    )
}

pub fn simulation_csv(sim: &SimulationResult) -> CliResult<String> {
    let band = |c: f64| {
        sim.band(c)
            .ok_or_else(|| CliError::Artifact(format!("missing {c} band")))
    };
    let (b75, b90, b95) = (band(0.75)?, band(0.90)?, band(0.95)?);
    let rows: Vec<Vec<String>> = (0..sim.periods.len())
        .map(|i| {
            vec![
                sim.periods[i].to_string(),
                fmt_f(sim.mean_path[i]),
                fmt_f(b75.lower[i]),
                fmt_f(b75.upper[i]),
                fmt_f(b90.lower[i]),
                fmt_f(b90.upper[i]),
                fmt_f(b95.lower[i]),
                fmt_f(b95.upper[i]),
            ]
        })
        .collect();
    csv_string(
        &[
            "period", "mean", "p75lo", "p75hi", "p90lo", "p90hi", "p95lo", "p95hi",
        ],
        &rows,
    )
}

pub fn bounds_text(b: &BoundsTestResult) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "Bounds test (k = {}, n = {}, {})",
        b.k,
        b.nobs,
        b.case.label()
    );
    let _ = writeln!(
        s,
        "  F = {:.4} (df {}, {})   t = {:.4}",
        b.f_stat, b.f_df.0, b.f_df.1, b.t_stat
    );
    for l in &b.bounds {
        let _ = writeln!(
            s,
            "  {:>4.1}%  F: I(0) {:.3}  I(1) {:.3}   t: I(0) {:.3}  I(1) {:.3}",
            l.level * 100.0,
            l.f_i0,
            l.f_i1,
            l.t_i0,
            l.t_i1
        );
    }
    let _ = writeln!(
        s,
        "  decision at {}%: {} ({})",
        b.decision_level * 100.0,
        decision_label(b.decision),
        b.note
    );
    s
}

pub fn fit_text(fit: &ArdlEcmFit) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} for {}  n = {}  R2 = {:.4}  sigma = {:.5}",
        fit.spec.describe(),
        fit.spec.dependent,
        fit.ols.nobs,
        fit.ols.r2,
        fit.ols.sigma2.sqrt()
    );
    let _ = writeln!(
        s,
        "  speed of adjustment {:.4}  long run: {}",
        fit.speed_of_adjustment,
        status_label(&fit.long_run_status)
    );
    if let Some(lr) = &fit.long_run {
        for c in lr {
            let _ = writeln!(
                s,
                "  theta[{}] = {:.4} (se {:.4}, p {:.3})",
                c.regressor, c.estimate, c.std_error, c.p_value
            );
        }
    }
    for c in fit.lambda.iter().chain(&fit.short_run) {
        let _ = writeln!(
            s,
            "  {:<16} {:>10.4} (se {:.4}, p {:.3})",
            c.name, c.estimate, c.std_error, c.p_value
        );
    }
    s
}

pub fn diagnostics_text(d: &DiagnosticsReport) -> String {
    let mut s = String::new();
    let line = |s: &mut String, name: &str, t: &dynardl_core::diagnostics::ChiSquareTest| {
        let _ = writeln!(
            s,
            "  {:<26} chi2({:>2}) = {:>9.4}  p = {:.4}",
            name, t.dof, t.stat, t.p_value
        );
    };
    let _ = writeln!(s, "Diagnostics ({}% level)", d.level * 100.0);
    line(
        &mut s,
        &format!("Breusch-Godfrey LM({})", d.bg_lags),
        &d.breusch_godfrey,
    );
    line(&mut s, "IM heteroskedasticity", &d.im.heteroskedasticity);
    line(&mut s, "IM skewness", &d.im.skewness);
    line(&mut s, "IM kurtosis", &d.im.kurtosis);
    line(&mut s, "IM total", &d.im.total);
    line(&mut s, "Jarque-Bera", &d.jarque_bera);
    for n in &d.im.notes {
        let _ = writeln!(s, "  note: {n}");
    }
    let _ = writeln!(
        s,
        "  CUSUM: {}{}",
        if d.cusum.in_bounds {
            "within bounds"
        } else {
            "crosses bounds"
        },
        d.cusum.first_crossing.map_or(String::new(), |i| format!(
            " (first at recursive residual {i})"
        ))
    );
    let _ = writeln!(
        s,
        "  serial correlation: {}  heteroskedasticity: {}  stability: {}  normality: {}",
        verdict(d.serial_correlation),
        verdict(d.heteroskedasticity),
        verdict(d.stability),
        verdict(d.normality)
    );
    s
}

pub fn krls_text(k: &KrlsFit) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "KRLS  n = {}  R2 = {:.4}  lambda = {:.4e}  sigma2 = {}",
        k.fitted.len(),
        k.r2,
        k.lambda,
        k.sigma2
    );
    let _ = writeln!(
        s,
        "  {:<12} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "feature", "average", "se", "p25", "p50", "p75"
    );
    for e in &k.effects {
        let _ = writeln!(
            s,
            "  {:<12} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            e.feature, e.average, e.std_error, e.p25, e.p50, e.p75
        );
    }
    s
}

pub fn unitroot_text(entries: &[UnitRootEntry]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Phillips-Perron Z(t)");
    for e in entries {
        let _ = writeln!(
            s,
            "  {:<10} level {:>8.3} (p {:.3})   diff {:>8.3} (p {:.3})   {}",
            e.variable,
            e.level.z_tau,
            e.level.p_value,
            e.difference.z_tau,
            e.difference.p_value,
            e.order
        );
    }
    s
}
