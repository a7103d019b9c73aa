//! The end-to-end batch run and the stage functions the subcommands share.

use std::path::{Path, PathBuf};

use dynardl_core::ardl::{
    bounds_test, fit_ecm, select_lags, ArdlEcmFit, BoundsDecision, BoundsTestResult,
    CandidateScore, Coefficient, Criterion, LagSearch, LagSelection, LongRunCoef, LongRunStatus,
    ModelSpec,
};
use dynardl_core::dataset::{
    align, load_csv, CsvSchema, Dataset, LogPolicy, Transform, TransformKind,
};
use dynardl_core::diagnostics::{DiagnosticsReport, Verdict};
use dynardl_core::dynsim::{
    parameter_draws, simulate_with, ShockSpec, SimOptions, SimulationResult,
};
use dynardl_core::krls::{fit_krls, KrlsFit, KrlsOptions, MarginalEffect};
use dynardl_core::stats::quantile;
use dynardl_core::unitroot::{pp_test, pp_test_values, Deterministic};
use dynardl_core::Execution;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::artifact::FitArtifact;
use crate::config::{ArdlConfig, DataConfig, KrlsConfig, PipelineConfig};
use crate::error::{CliError, CliResult};
use crate::fetch::{self, Transport};
use crate::report::{self, UnitRootEntry};
use crate::svg::{Figure, Layer, Panel, PALETTE};

pub const TABLE_FILES: [&str; 5] = [
    "table1_unitroot.csv",
    "table2_bounds.csv",
    "table3_ardl.csv",
    "table4_diagnostics.csv",
    "table5_krls.csv",
];

pub const FIGURE_FILES: [&str; 5] = [
    "fig1_series.svg",
    "fig2_simulation.svg",
    "fig3_cusum.svg",
    "fig4_parameters.svg",
    "fig5_krls_derivatives.svg",
];

/// Loads the configured source. Fetched series are read from the cache,
/// downloading through `transport` on a miss.
pub fn load_data(data: &DataConfig, transport: Option<&dyn Transport>) -> CliResult<Dataset> {
    if let Some(csv) = &data.csv {
        return Ok(load_csv(csv, &CsvSchema::AllColumns)?);
    }
    let cache = data
        .cache_dir
        .clone()
        .unwrap_or_else(fetch::default_cache_dir);
    let mut series = Vec::new();
    for req in &data.fetch {
        let path = fetch::fetch_series(req, &cache, transport)?;
        let d = load_csv(&path, &CsvSchema::AllColumns)?;
        series.extend(d.series().iter().cloned());
    }
    Ok(Dataset::new(series)?)
}

pub fn names_of(d: &Dataset) -> Vec<String> {
    d.names().into_iter().map(str::to_string).collect()
}

/// Adds `log<NAME>` for each listed series.
pub fn apply_logs(mut d: Dataset, logs: &[String], policy: LogPolicy) -> CliResult<Dataset> {
    for name in logs {
        d = d.apply_with(&Transform::new(TransformKind::Log, name.as_str()), policy)?;
    }
    Ok(d)
}

/// Keeps `vars` (deduplicated, in order) over their common sample.
pub fn select_and_align(d: &Dataset, vars: &[String]) -> CliResult<Dataset> {
    let mut seen: Vec<&String> = Vec::new();
    let mut series = Vec::new();
    for v in vars {
        if !seen.contains(&v) {
            seen.push(v);
            series.push(d.get(v)?.clone());
        }
    }
    Ok(align(&Dataset::new(series)?)?)
}

pub fn unit_roots(
    d: &Dataset,
    vars: &[String],
    case: Deterministic,
    bandwidth: Option<usize>,
) -> CliResult<Vec<UnitRootEntry>> {
    vars.iter()
        .map(|v| {
            let s = d.get(v)?;
            let level = pp_test(s, case, bandwidth)?;
            let x = s.complete_values()?;
            let diff: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
            let mut difference = pp_test_values(&diff, case, bandwidth)?;
            difference.series = format!("d.{v}");
            Ok(UnitRootEntry::new(v, level, difference))
        })
        .collect()
}

pub fn select_and_fit(
    d: &Dataset,
    dependent: &str,
    regressors: &[String],
    cfg: &ArdlConfig,
) -> CliResult<(LagSelection, ArdlEcmFit)> {
    let search = LagSearch {
        p_max: cfg.pmax,
        q_max: cfg.qmax,
        criterion: cfg.criterion,
        case: cfg.case,
        execution: Execution::default(),
    };
    let selection = select_lags(d, dependent, regressors, &search)?;
    let fit = fit_ecm(d, &selection.spec)?;
    Ok((selection, fit))
}

/// Feature matrix of the listed series over the dataset's (aligned) sample.
pub fn feature_matrix(d: &Dataset, names: &[String]) -> CliResult<DMatrix<f64>> {
    let cols: Vec<Vec<f64>> = names
        .iter()
        .map(|n| d.column(n))
        .collect::<Result<_, _>>()?;
    let n = cols.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]))
}

pub fn krls_stage(
    d: &Dataset,
    dependent: &str,
    features: &[String],
    cfg: &KrlsConfig,
) -> CliResult<KrlsFit> {
    let x = feature_matrix(d, features)?;
    let y = d.column(dependent)?;
    let opts = KrlsOptions {
        lambda: cfg.lambda,
        sigma2: cfg.sigma2,
        ..KrlsOptions::default()
    };
    Ok(fit_krls(&x, &y, features, &opts)?)
}

pub fn simulate_stage(
    fit: &ArdlEcmFit,
    shock: &ShockSpec,
    seed: u64,
    disturbance: dynardl_core::dynsim::Disturbance,
) -> CliResult<SimulationResult> {
    let opts = SimOptions {
        disturbance,
        ..SimOptions::default()
    };
    Ok(simulate_with(fit, shock, seed, &opts)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleInfo {
    pub first_year: i32,
    pub last_year: i32,
    pub nobs: usize,
    pub variables: Vec<String>,
    pub log_transformed: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LagSummary {
    pub criterion: Criterion,
    pub selected: String,
    pub p: usize,
    pub q: Vec<usize>,
    pub evaluated: usize,
    pub skipped: usize,
    pub common_nobs: usize,
    /// Ten best candidates by criterion.
    pub best: Vec<CandidateScore>,
}

impl LagSummary {
    pub fn new(sel: &LagSelection) -> Self {
        let mut best = sel.candidates.clone();
        best.sort_by(|a, b| a.criterion.total_cmp(&b.criterion));
        best.truncate(10);
        Self {
            criterion: sel.criterion,
            selected: sel.spec.describe(),
            p: sel.spec.p,
            q: sel.spec.q.clone(),
            evaluated: sel.candidates.len(),
            skipped: sel.skipped,
            common_nobs: sel.common_nobs,
            best,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub spec: ModelSpec,
    pub nobs: usize,
    pub r2: f64,
    pub sigma2: f64,
    pub speed_of_adjustment: f64,
    pub lambda: Vec<Coefficient>,
    pub short_run: Vec<Coefficient>,
    pub long_run: Option<Vec<LongRunCoef>>,
    pub long_run_status: LongRunStatus,
    pub artifact_hash: String,
}

impl FitSummary {
    pub fn new(fit: &ArdlEcmFit, artifact_hash: String) -> Self {
        Self {
            spec: fit.spec.clone(),
            nobs: fit.ols.nobs,
            r2: fit.ols.r2,
            sigma2: fit.ols.sigma2,
            speed_of_adjustment: fit.speed_of_adjustment,
            lambda: fit.lambda.clone(),
            short_run: fit.short_run.clone(),
            long_run: fit.long_run.clone(),
            long_run_status: fit.long_run_status.clone(),
            artifact_hash,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KrlsSummary {
    pub features: Vec<String>,
    pub nobs: usize,
    pub lambda: f64,
    pub sigma2: f64,
    pub r2: f64,
    pub loo_error: f64,
    pub effects: Vec<MarginalEffect>,
}

impl KrlsSummary {
    pub fn new(k: &KrlsFit) -> Self {
        Self {
            features: k.names.clone(),
            nobs: k.fitted.len(),
            lambda: k.lambda,
            sigma2: k.sigma2,
            r2: k.r2,
            loo_error: k.loo_error,
            effects: k.effects.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineResults {
    pub version: String,
    pub seed: u64,
    pub sample: SampleInfo,
    pub unit_root: Vec<UnitRootEntry>,
    pub lag_selection: LagSummary,
    pub fit: FitSummary,
    pub bounds: BoundsTestResult,
    pub simulation: SimulationResult,
    pub diagnostics: DiagnosticsReport,
    pub krls: KrlsSummary,
    /// Conditions that did not stop the run but qualify its results.
    pub flags: Vec<String>,
}

#[derive(Debug)]
pub struct PipelineOutcome {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub results: PipelineResults,
}

fn flags_for(
    unit_root: &[UnitRootEntry],
    fit: &ArdlEcmFit,
    bounds: &BoundsTestResult,
    diag: &DiagnosticsReport,
) -> Vec<String> {
    let mut flags = Vec::new();
    for e in unit_root.iter().filter(|e| e.order == "inconclusive") {
        flags.push(format!(
            "{}: first difference not stationary at 5%; the bounds test assumes no I(2) series",
            e.variable
        ));
    }
    match bounds.decision {
        BoundsDecision::Cointegration => {}
        BoundsDecision::NoCointegration => flags.push(format!(
            "bounds test: no cointegration at {}%; long-run estimates are not supported by the data",
            bounds.decision_level * 100.0
        )),
        BoundsDecision::Inconclusive => flags.push(format!(
            "bounds test: inconclusive at {}% ({})",
            bounds.decision_level * 100.0,
            bounds.note
        )),
    }
    if fit.long_run_status != LongRunStatus::Stable {
        flags.push(format!(
            "long run: {}",
            report::status_label(&fit.long_run_status)
        ));
    }
    for (what, v) in [
        ("serial correlation", diag.serial_correlation),
        ("heteroskedasticity", diag.heteroskedasticity),
        ("parameter instability", diag.stability),
        ("non-normal residuals", diag.normality),
    ] {
        if v == Verdict::Reject {
            flags.push(format!("diagnostics: {what} detected at 5%"));
        }
    }
    flags
}

/// Runs every stage and writes the report directory. Stages run in order
/// and the first hard failure aborts; a failed cointegration test does not.
pub fn run_pipeline(cfg: &PipelineConfig) -> CliResult<PipelineOutcome> {
    let transport = if cfg.data.fetch.is_empty() {
        None
    } else {
        fetch::network_transport()
    };
    run_pipeline_with(cfg, transport.as_deref())
}

pub fn run_pipeline_with(
    cfg: &PipelineConfig,
    transport: Option<&dyn Transport>,
) -> CliResult<PipelineOutcome> {
    cfg.validate(None)?;
    let seed = cfg.seed.expect("validated");
    let raw = load_data(&cfg.data, transport)?;
    cfg.validate(Some(&names_of(&raw)))?;
    let logged = apply_logs(raw, &cfg.log, cfg.log_policy)?;

    let dep = cfg.variables.dependent.clone();
    let regs = cfg.variables.regressors.clone();
    let krls_features = cfg.krls_regressors();
    let mut vars = vec![dep.clone()];
    vars.extend(regs.iter().cloned());
    vars.extend(krls_features.iter().cloned());
    let d = select_and_align(&logged, &vars)?;
    log::info!("sample {}-{} ({} years)", d.span().0, d.span().1, d.len());

    let model_vars: Vec<String> = names_of(&d);
    let unit_root = unit_roots(&d, &model_vars, cfg.unitroot.case, cfg.unitroot.bandwidth)?;
    let (selection, fit) = select_and_fit(&d, &dep, &regs, &cfg.ardl)?;
    log::info!("selected {}", selection.spec.describe());
    let artifact = FitArtifact::from_fit(&fit);
    let bounds = bounds_test(&fit)?;
    let shock = cfg.simulate.shock();
    let sim = simulate_stage(&fit, &shock, seed, cfg.simulate.disturbance)?;
    let diag = DiagnosticsReport::compute(&fit.ols, cfg.diagnostics.bg_lags)?;
    let krls = krls_stage(&d, &dep, &krls_features, &cfg.krls)?;

    let flags = flags_for(&unit_root, &fit, &bounds, &diag);
    for f in &flags {
        log::warn!("{f}");
    }
    let (first_year, last_year) = d.span();
    let results = PipelineResults {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        sample: SampleInfo {
            first_year,
            last_year,
            nobs: d.len(),
            variables: model_vars.clone(),
            log_transformed: cfg.log.clone(),
        },
        unit_root,
        lag_selection: LagSummary::new(&selection),
        fit: FitSummary::new(&fit, artifact.hash.clone()),
        bounds,
        simulation: sim,
        diagnostics: diag,
        krls: KrlsSummary::new(&krls),
        flags,
    };

    let out = &cfg.output_dir;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut files = Vec::new();
    let mut put = |name: &str, text: String| -> CliResult<()> {
        let p = out.join(name);
        fetch::write_atomic(&p, text.as_bytes())?;
        files.push(p);
        Ok(())
    };
    put("dataset.csv", d.to_csv_string()?)?;
    put("fit.json", artifact.to_json())?;
    put(TABLE_FILES[0], report::table1_unitroot(&results.unit_root)?)?;
    put(TABLE_FILES[1], report::table2_bounds(&results.bounds)?)?;
    put(TABLE_FILES[2], report::table3_ardl(&fit)?)?;
    put(
        TABLE_FILES[3],
        report::table4_diagnostics(&results.diagnostics)?,
    )?;
    put(TABLE_FILES[4], report::table5_krls(&krls)?)?;
    put(
        "simulation.csv",
        report::simulation_csv(&results.simulation)?,
    )?;
    let mut json =
        serde_json::to_string_pretty(&results).map_err(|e| CliError::Artifact(e.to_string()))?;
    json.push('\n');
    put("results.json", json)?;
    put("summary.txt", summary_text(&results, &fit, &krls))?;

    let stamp = cfg.svg_timestamp.then(timestamp);
    let draws = parameter_draws(&fit, shock.n_sims, seed, Execution::default());
    let figures = [
        fig1_series(&d, &model_vars),
        fig2_simulation(&results.simulation),
        fig3_cusum(&results.diagnostics, &fit),
        fig4_parameters(&fit, &draws),
        fig5_krls(&krls),
    ];
    for (name, mut fig) in FIGURE_FILES.iter().zip(figures) {
        fig.timestamp = stamp.clone();
        put(name, fig.render())?;
    }
    Ok(PipelineOutcome {
        output_dir: out.clone(),
        files,
        results,
    })
}

pub fn summary_text(r: &PipelineResults, fit: &ArdlEcmFit, krls: &KrlsFit) -> String {
    let mut s = format!(
        "dynardl {}  sample {}-{} ({} obs)  seed {}\n\n",
        r.version, r.sample.first_year, r.sample.last_year, r.sample.nobs, r.seed
    );
    s.push_str(&report::unitroot_text(&r.unit_root));
    s.push('\n');
    s.push_str(&format!(
        "Lag selection ({:?}): {} of {} candidates, {} skipped\n\n",
        r.lag_selection.criterion,
        r.lag_selection.selected,
        r.lag_selection.evaluated,
        r.lag_selection.skipped
    ));
    s.push_str(&report::bounds_text(&r.bounds));
    s.push('\n');
    s.push_str(&report::fit_text(fit));
    s.push('\n');
    let sim = &r.simulation;
    let last = sim.mean_path.len().saturating_sub(1);
    s.push_str(&format!(
        "Simulation: {} {:+}% {:?} at period {}, {} draws\n  equilibrium {:.4} -> {}  mean path end {:.4}\n\n",
        sim.shock.target,
        sim.shock.magnitude * 100.0,
        sim.shock.kind,
        sim.shock.shock_time,
        sim.shock.n_sims,
        sim.equilibrium,
        sim.shocked_equilibrium.map_or("n/a".to_string(), |v| format!("{v:.4}")),
        sim.mean_path.get(last).copied().unwrap_or(f64::NAN)
    ));
    s.push_str(&report::diagnostics_text(&r.diagnostics));
    s.push('\n');
    s.push_str(&report::krls_text(krls));
    if !r.flags.is_empty() {
        s.push_str("\nFlags:\n");
        for f in &r.flags {
            s.push_str(&format!("  - {f}\n"));
        }
    }
    s
}

fn timestamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    format!("unix {secs}")
}

pub fn fig1_series(d: &Dataset, vars: &[String]) -> Figure {
    let panels = vars
        .iter()
        .enumerate()
        .filter_map(|(i, v)| {
            let s = d.get(v).ok()?;
            let x: Vec<f64> = s.years().map(f64::from).collect();
            let y: Vec<f64> = s.values().iter().map(|o| o.unwrap_or(f64::NAN)).collect();
            Some(Panel::new(v.as_str(), "year", v.as_str()).with(Layer::line(
                &x,
                &y,
                PALETTE[i % PALETTE.len()],
            )))
        })
        .collect();
    Figure::new("Data series", panels, 3)
}

pub fn fig2_simulation(sim: &SimulationResult) -> Figure {
    let x: Vec<f64> = sim.periods.iter().map(|&p| p as f64).collect();
    let mut p = Panel::new(
        format!(
            "{} {:+}% at t = {}",
            sim.shock.target,
            sim.shock.magnitude * 100.0,
            sim.shock.shock_time
        ),
        "period",
        "predicted value",
    );
    for (c, op) in [(0.95, 0.15), (0.90, 0.2), (0.75, 0.3)] {
        if let Some(b) = sim.band(c) {
            p = p.with(
                Layer::band(&x, &b.lower, &b.upper, PALETTE[0], op)
                    .labeled(format!("{}% band", c * 100.0)),
            );
        }
    }
    p = p.with(Layer::line(&x, &sim.mean_path, PALETTE[1]).labeled("mean"));
    p = p.with(Layer::HLine {
        y: sim.equilibrium,
        color: "#555".into(),
    });
    let mut f = Figure::new("Dynamic simulation", vec![p], 1);
    f.panel_width = 640.0;
    f.panel_height = 380.0;
    f
}

pub fn fig3_cusum(diag: &DiagnosticsReport, fit: &ArdlEcmFit) -> Figure {
    let c = &diag.cusum;
    let offset = fit.years.len().saturating_sub(c.path.len());
    let x: Vec<f64> = fit.years[offset..].iter().map(|&y| f64::from(y)).collect();
    let p = Panel::new("CUSUM", "year", "cumulative sum")
        .with(
            Layer::dashed(&x, &c.upper, PALETTE[1])
                .labeled(format!("{}% bounds", 100.0 - c.level * 100.0)),
        )
        .with(Layer::dashed(&x, &c.lower, PALETTE[1]))
        .with(Layer::line(&x, &c.path, PALETTE[0]).labeled("CUSUM"))
        .with(Layer::HLine {
            y: 0.0,
            color: "#999".into(),
        });
    let mut f = Figure::new("Parameter stability", vec![p], 1);
    f.panel_width = 640.0;
    f.panel_height = 360.0;
    f
}

/// Point estimates with 95% intervals, next to the spread of the simulated
/// coefficient draws. Deterministic terms are left out.
pub fn fig4_parameters(fit: &ArdlEcmFit, draws: &[Vec<f64>]) -> Figure {
    let idx: Vec<usize> = (0..fit.ols.names.len())
        .filter(|&i| fit.ols.names[i] != "const" && fit.ols.names[i] != "trend")
        .collect();
    let pos: Vec<f64> = (0..idx.len()).map(|i| i as f64).collect();
    let ticks = idx
        .iter()
        .zip(&pos)
        .map(|(&i, &x)| (x, fit.ols.names[i].clone()))
        .collect();
    let se = fit.ols.std_errors();
    let est: Vec<f64> = idx.iter().map(|&i| fit.ols.beta[i]).collect();
    let lo: Vec<f64> = idx
        .iter()
        .map(|&i| fit.ols.beta[i] - 1.96 * se[i])
        .collect();
    let hi: Vec<f64> = idx
        .iter()
        .map(|&i| fit.ols.beta[i] + 1.96 * se[i])
        .collect();
    let column = |i: usize| draws.iter().map(|d| d[i]).collect::<Vec<f64>>();
    let sim_mid: Vec<f64> = idx.iter().map(|&i| quantile(&column(i), 0.5)).collect();
    let sim_lo: Vec<f64> = idx.iter().map(|&i| quantile(&column(i), 0.025)).collect();
    let sim_hi: Vec<f64> = idx.iter().map(|&i| quantile(&column(i), 0.975)).collect();
    let shift = |d: f64| pos.iter().map(|p| p + d).collect::<Vec<f64>>();
    let mut p = Panel::new("Coefficients with 95% intervals", "term", "estimate")
        .with(Layer::Intervals {
            x: shift(-0.15),
            center: est,
            lower: lo,
            upper: hi,
            color: PALETTE[0].into(),
            label: Some("ARDL".into()),
        })
        .with(Layer::Intervals {
            x: shift(0.15),
            center: sim_mid,
            lower: sim_lo,
            upper: sim_hi,
            color: PALETTE[1].into(),
            label: Some("dynamic ARDL draws".into()),
        })
        .with(Layer::HLine {
            y: 0.0,
            color: "#999".into(),
        });
    p.x_ticks = Some(ticks);
    let mut f = Figure::new("Parameter estimates", vec![p], 1);
    f.panel_width = (90.0 * idx.len() as f64).max(640.0);
    f.panel_height = 380.0;
    f
}

pub fn fig5_krls(k: &KrlsFit) -> Figure {
    let panels = k
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let x: Vec<f64> = (0..k.x.nrows())
                .map(|i| k.x[(i, j)] * k.scales[j] + k.means[j])
                .collect();
            let dy: Vec<f64> = k.derivatives.column(j).iter().copied().collect();
            let avg = k.effects[j].average;
            Panel::new(name.as_str(), name.as_str(), "pointwise derivative")
                .with(Layer::points(&x, &dy, PALETTE[j % PALETTE.len()]))
                .with(Layer::HLine {
                    y: avg,
                    color: "#333".into(),
                })
        })
        .collect();
    Figure::new("Pointwise marginal effects", panels, 2)
}

/// Output path for `name` inside `dir`, creating the directory.
pub fn output_path(dir: &Path, name: &str) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    Ok(dir.join(name))
}
