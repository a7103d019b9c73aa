//! Subcommand definitions and dispatch.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dynardl_core::ardl::{bounds_test, Criterion, EcmCase};
use dynardl_core::dataset::{Dataset, LogPolicy};
use dynardl_core::diagnostics::DiagnosticsReport;
use dynardl_core::dynsim::{Disturbance, ShockKind, ShockSpec};
use dynardl_core::unitroot::Deterministic;

use crate::artifact::{load_fit, FitArtifact};
use crate::config::{ArdlConfig, DataConfig, KrlsConfig, PipelineConfig};
use crate::error::{CliError, CliResult};
use crate::fetch::{self, FetchRequest, Source};
use crate::pipeline::{self, FIGURE_FILES, TABLE_FILES};
use crate::report;

#[derive(Debug, Parser)]
#[command(
    name = "dynardl",
    version,
    about = "ARDL bounds testing, dynamic simulation and KRLS for annual series"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Pipeline configuration (JSON); flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Random seed for stochastic steps.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

impl GlobalArgs {
    pub fn log_level(&self) -> log::LevelFilter {
        match self.verbose {
            0 => log::LevelFilter::Warn,
            1 => log::LevelFilter::Info,
            _ => log::LevelFilter::Debug,
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct DataArgs {
    /// Dataset CSV (`year` column first).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Series to log-transform; each adds `log<NAME>`.
    #[arg(long, value_delimiter = ',')]
    pub log: Vec<String>,
    /// Drop leading non-positive observations before taking logs.
    #[arg(long)]
    pub log_truncate: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load, transform and align a dataset; writes dataset.csv.
    Ingest {
        #[command(flatten)]
        data: DataArgs,
        /// Series to keep (default: all).
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
    },
    /// Phillips-Perron tests in levels and first differences.
    Unitroot {
        #[command(flatten)]
        data: DataArgs,
        /// Series to test (default: the configured variables).
        #[arg(long, value_delimiter = ',')]
        series: Vec<String>,
        /// Deterministic terms: `none`, `constant` or `constant_trend`.
        #[arg(long)]
        case: Option<Deterministic>,
        /// Newey-West bandwidth (default: floor(4 (T/100)^(2/9))).
        #[arg(long)]
        bandwidth: Option<usize>,
    },
    /// Select lags and fit the error-correction model; writes fit.json.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        /// Dependent variable.
        #[arg(long)]
        dep: Option<String>,
        /// Regressors, comma separated.
        #[arg(long, value_delimiter = ',')]
        regs: Vec<String>,
        /// Largest autoregressive order in the lag grid.
        #[arg(long)]
        pmax: Option<usize>,
        /// Largest distributed-lag order in the lag grid.
        #[arg(long)]
        qmax: Option<usize>,
        /// `aic` or `bic`.
        #[arg(long)]
        criterion: Option<Criterion>,
        /// `constant` or `constant_trend`.
        #[arg(long, value_parser = parse_case)]
        case: Option<EcmCase>,
    },
    /// Bounds cointegration test on a saved fit.
    Bounds {
        /// Saved fit (default: <out>/fit.json).
        #[arg(long)]
        fit: Option<PathBuf>,
    },
    /// Counterfactual simulation from a saved fit.
    Simulate {
        /// Saved fit (default: <out>/fit.json).
        #[arg(long)]
        fit: Option<PathBuf>,
        /// `NAME=MAGNITUDE`, a relative change such as `logNE=-0.21`.
        #[arg(long)]
        shock: Option<String>,
        /// Shock period within the horizon.
        #[arg(long)]
        at: Option<usize>,
        /// Reported periods.
        #[arg(long)]
        horizon: Option<usize>,
        /// Monte Carlo draws.
        #[arg(long)]
        sims: Option<usize>,
        /// Unreported periods before the horizon.
        #[arg(long)]
        burn_in: Option<usize>,
        /// Shock a single period instead of a sustained shift.
        #[arg(long)]
        impulse: bool,
        /// Resample fitted residuals instead of normal disturbances.
        #[arg(long)]
        bootstrap: bool,
    },
    /// Residual diagnostics on a saved fit.
    Diagnose {
        /// Saved fit (default: <out>/fit.json).
        #[arg(long)]
        fit: Option<PathBuf>,
        /// Breusch-Godfrey lag order.
        #[arg(long)]
        bg_lags: Option<usize>,
    },
    /// Kernel regularized least squares with pointwise marginal effects.
    Krls {
        #[command(flatten)]
        data: DataArgs,
        /// Dependent variable.
        #[arg(long)]
        dep: Option<String>,
        /// Regressors, comma separated.
        #[arg(long, value_delimiter = ',')]
        regs: Vec<String>,
        /// Fixed regulariser (default: leave-one-out choice).
        #[arg(long)]
        lambda: Option<f64>,
        /// Kernel bandwidth (default: number of regressors).
        #[arg(long)]
        sigma2: Option<f64>,
    },
    /// Run the full pipeline from a configuration file.
    Reproduce,
    /// Download one indicator into the cache.
    Fetch {
        /// `worldbank`, `eia` or `oecd`.
        #[arg(long)]
        source: Source,
        /// Provider series code.
        #[arg(long)]
        code: String,
        /// Column name for the cached series.
        #[arg(long)]
        name: String,
        /// ISO3 country code.
        #[arg(long, default_value = "CHN")]
        country: String,
        /// Defaults to $DYNARDL_CACHE_DIR or .dynardl-cache.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        /// Only consult the cache.
        #[arg(long)]
        offline: bool,
    },
}

fn parse_case(s: &str) -> Result<EcmCase, String> {
    match s {
        "constant" | "iii" => Ok(EcmCase::Constant),
        "constant_trend" | "trend" | "v" => Ok(EcmCase::ConstantTrend),
        other => Err(format!("unknown case `{other}` (constant|constant_trend)")),
    }
}

fn config(g: &GlobalArgs) -> CliResult<Option<PipelineConfig>> {
    g.config.as_deref().map(PipelineConfig::load).transpose()
}

fn out_dir(g: &GlobalArgs, cfg: Option<&PipelineConfig>) -> PathBuf {
    g.out
        .clone()
        .or_else(|| cfg.map(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("report"))
}

fn write(dir: &Path, name: &str, text: &str) -> CliResult<PathBuf> {
    let p = pipeline::output_path(dir, name)?;
    fetch::write_atomic(&p, text.as_bytes())?;
    Ok(p)
}

fn missing(field: &str, flag: &str) -> CliError {
    CliError::Config(vec![format!(
        "{field}: missing; pass {flag} or set it in --config"
    )])
}

/// Loads data from flags, falling back to the config's data section, and
/// applies log transforms.
fn dataset(data: &DataArgs, cfg: Option<&PipelineConfig>) -> CliResult<Dataset> {
    let source = match (&data.csv, cfg) {
        (Some(csv), _) => DataConfig {
            csv: Some(csv.clone()),
            ..DataConfig::default()
        },
        (None, Some(c)) => c.data.clone(),
        (None, None) => return Err(missing("data", "--csv")),
    };
    let transport = if source.fetch.is_empty() {
        None
    } else {
        fetch::network_transport()
    };
    let raw = pipeline::load_data(&source, transport.as_deref())?;
    let (logs, policy) = if !data.log.is_empty() || data.csv.is_some() {
        let policy = if data.log_truncate {
            LogPolicy::TruncateLeading
        } else {
            LogPolicy::Reject
        };
        (data.log.clone(), policy)
    } else {
        cfg.map_or((Vec::new(), LogPolicy::Reject), |c| {
            (c.log.clone(), c.log_policy)
        })
    };
    let names = pipeline::names_of(&raw);
    let unknown: Vec<String> = logs
        .iter()
        .filter(|l| !names.contains(l))
        .map(|l| {
            format!(
                "log: unknown series `{l}` (available: {})",
                names.join(", ")
            )
        })
        .collect();
    if !unknown.is_empty() {
        return Err(CliError::Config(unknown));
    }
    pipeline::apply_logs(raw, &logs, policy)
}

fn check_names(d: &Dataset, field: &str, wanted: &[String]) -> CliResult<()> {
    let names = pipeline::names_of(d);
    let problems: Vec<String> = wanted
        .iter()
        .filter(|w| !names.contains(w))
        .map(|w| {
            format!(
                "{field}: unknown variable `{w}` (available: {})",
                names.join(", ")
            )
        })
        .collect();
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(problems))
    }
}

fn roles(
    dep: &Option<String>,
    regs: &[String],
    cfg: Option<&PipelineConfig>,
) -> CliResult<(String, Vec<String>)> {
    let dep = dep
        .clone()
        .or_else(|| cfg.map(|c| c.variables.dependent.clone()))
        .ok_or_else(|| missing("variables.dependent", "--dep"))?;
    let regs = if regs.is_empty() {
        cfg.map(|c| c.variables.regressors.clone())
            .filter(|r| !r.is_empty())
            .ok_or_else(|| missing("variables.regressors", "--regs"))?
    } else {
        regs.to_vec()
    };
    Ok((dep, regs))
}

fn fit_path(fit: &Option<PathBuf>, g: &GlobalArgs, cfg: Option<&PipelineConfig>) -> PathBuf {
    fit.clone()
        .unwrap_or_else(|| out_dir(g, cfg).join("fit.json"))
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let g = &cli.global;
    let cfg = config(g)?;
    let cfg = cfg.as_ref();
    let out = out_dir(g, cfg);
    match &cli.command {
        Command::Ingest { data, vars } => {
            let d = dataset(data, cfg)?;
            let vars = if vars.is_empty() {
                pipeline::names_of(&d)
            } else {
                vars.clone()
            };
            check_names(&d, "vars", &vars)?;
            let d = pipeline::select_and_align(&d, &vars)?;
            let p = write(&out, "dataset.csv", &d.to_csv_string()?)?;
            let (a, b) = d.span();
            println!(
                "{} series, {a}-{b} ({} years) -> {}",
                vars.len(),
                d.len(),
                p.display()
            );
        }
        Command::Unitroot {
            data,
            series,
            case,
            bandwidth,
        } => {
            let d = dataset(data, cfg)?;
            let series = if !series.is_empty() {
                series.clone()
            } else if let Some(c) = cfg {
                std::iter::once(c.variables.dependent.clone())
                    .chain(c.variables.regressors.iter().cloned())
                    .collect()
            } else {
                pipeline::names_of(&d)
            };
            check_names(&d, "series", &series)?;
            let case = case.or(cfg.map(|c| c.unitroot.case)).unwrap_or_default();
            let bandwidth = bandwidth.or(cfg.and_then(|c| c.unitroot.bandwidth));
            let entries = series
                .iter()
                .map(|s| {
                    let one = pipeline::select_and_align(&d, std::slice::from_ref(s))?;
                    Ok(
                        pipeline::unit_roots(&one, std::slice::from_ref(s), case, bandwidth)?
                            .remove(0),
                    )
                })
                .collect::<CliResult<Vec<_>>>()?;
            write(&out, TABLE_FILES[0], &report::table1_unitroot(&entries)?)?;
            print!("{}", report::unitroot_text(&entries));
        }
        Command::Fit {
            data,
            dep,
            regs,
            pmax,
            qmax,
            criterion,
            case,
        } => {
            let d = dataset(data, cfg)?;
            let (dep, regs) = roles(dep, regs, cfg)?;
            let mut vars = vec![dep.clone()];
            vars.extend(regs.iter().cloned());
            check_names(&d, "variables", &vars)?;
            let base = cfg.map(|c| c.ardl.clone()).unwrap_or_default();
            let ardl = ArdlConfig {
                pmax: pmax.unwrap_or(base.pmax),
                qmax: qmax.unwrap_or(base.qmax),
                criterion: criterion.unwrap_or(base.criterion),
                case: case.unwrap_or(base.case),
            };
            let d = pipeline::select_and_align(&d, &vars)?;
            let (_, fit) = pipeline::select_and_fit(&d, &dep, &regs, &ardl)?;
            let artifact = FitArtifact::from_fit(&fit);
            let p = pipeline::output_path(&out, "fit.json")?;
            artifact.save(&p)?;
            write(&out, TABLE_FILES[2], &report::table3_ardl(&fit)?)?;
            print!("{}", report::fit_text(&fit));
            println!("saved {} (sha256 {})", p.display(), artifact.hash);
        }
        Command::Bounds { fit } => {
            let fit = load_fit(&fit_path(fit, g, cfg))?;
            let b = bounds_test(&fit)?;
            write(&out, TABLE_FILES[1], &report::table2_bounds(&b)?)?;
            print!("{}", report::bounds_text(&b));
        }
        Command::Simulate {
            fit,
            shock,
            at,
            horizon,
            sims,
            burn_in,
            impulse,
            bootstrap,
        } => {
            let seed = g
                .seed
                .or(cfg.and_then(|c| c.seed))
                .ok_or_else(|| missing("seed", "--seed"))?;
            let fit = load_fit(&fit_path(fit, g, cfg))?;
            let mut spec = match (shock, cfg) {
                (Some(s), _) => {
                    let (name, m) = s.split_once('=').ok_or_else(|| {
                        CliError::Config(vec![format!("shock: expected NAME=MAGNITUDE, got `{s}`")])
                    })?;
                    let m: f64 = m.trim().parse().map_err(|_| {
                        CliError::Config(vec![format!("shock: `{m}` is not a number")])
                    })?;
                    let base =
                        cfg.map_or_else(|| ShockSpec::new(name.trim(), m), |c| c.simulate.shock());
                    ShockSpec {
                        target: name.trim().to_string(),
                        magnitude: m,
                        ..base
                    }
                }
                (None, Some(c)) => c.simulate.shock(),
                (None, None) => return Err(missing("simulate.target", "--shock")),
            };
            spec.shock_time = at.unwrap_or(spec.shock_time);
            spec.horizon = horizon.unwrap_or(spec.horizon);
            spec.n_sims = sims.unwrap_or(spec.n_sims);
            spec.burn_in = burn_in.unwrap_or(spec.burn_in);
            if *impulse {
                spec.kind = ShockKind::Impulse;
            }
            let disturbance = if *bootstrap {
                Disturbance::Bootstrap
            } else {
                cfg.map_or(Disturbance::Normal, |c| c.simulate.disturbance)
            };
            let sim = pipeline::simulate_stage(&fit, &spec, seed, disturbance)?;
            let p = write(&out, "simulation.csv", &report::simulation_csv(&sim)?)?;
            write(
                &out,
                FIGURE_FILES[1],
                &pipeline::fig2_simulation(&sim).render(),
            )?;
            println!(
                "{} draws, equilibrium {:.4} -> {} ; wrote {}",
                sim.shock.n_sims,
                sim.equilibrium,
                sim.shocked_equilibrium
                    .map_or("n/a".to_string(), |v| format!("{v:.4}")),
                p.display()
            );
        }
        Command::Diagnose { fit, bg_lags } => {
            let fit = load_fit(&fit_path(fit, g, cfg))?;
            let lags = bg_lags.or(cfg.map(|c| c.diagnostics.bg_lags)).unwrap_or(4);
            let d = DiagnosticsReport::compute(&fit.ols, lags)?;
            let mut json =
                serde_json::to_string_pretty(&d).map_err(|e| CliError::Artifact(e.to_string()))?;
            json.push('\n');
            write(&out, "diagnostics.json", &json)?;
            let text = report::diagnostics_text(&d);
            write(&out, "diagnostics.txt", &text)?;
            write(&out, TABLE_FILES[3], &report::table4_diagnostics(&d)?)?;
            write(
                &out,
                FIGURE_FILES[2],
                &pipeline::fig3_cusum(&d, &fit).render(),
            )?;
            print!("{text}");
        }
        Command::Krls {
            data,
            dep,
            regs,
            lambda,
            sigma2,
        } => {
            let d = dataset(data, cfg)?;
            let regs = if regs.is_empty() {
                cfg.map(|c| c.krls_regressors()).unwrap_or_default()
            } else {
                regs.clone()
            };
            let (dep, regs) = roles(dep, &regs, cfg)?;
            let mut vars = vec![dep.clone()];
            vars.extend(regs.iter().cloned());
            check_names(&d, "variables", &vars)?;
            let base = cfg.map(|c| c.krls.clone()).unwrap_or_default();
            let kc = KrlsConfig {
                regressors: Some(regs.clone()),
                lambda: lambda.or(base.lambda),
                sigma2: sigma2.or(base.sigma2),
            };
            let d = pipeline::select_and_align(&d, &vars)?;
            let k = pipeline::krls_stage(&d, &dep, &regs, &kc)?;
            write(&out, TABLE_FILES[4], &report::table5_krls(&k)?)?;
            let text = report::krls_text(&k);
            write(&out, "krls.txt", &text)?;
            write(&out, FIGURE_FILES[4], &pipeline::fig5_krls(&k).render())?;
            print!("{text}");
        }
        Command::Reproduce => {
            let mut c = cfg.cloned().ok_or_else(|| missing("config", "--config"))?;
            if let Some(s) = g.seed {
                c.seed = Some(s);
            }
            if let Some(o) = &g.out {
                c.output_dir = o.clone();
            }
            let outcome = pipeline::run_pipeline(&c)?;
            println!(
                "wrote {} files to {}",
                outcome.files.len(),
                outcome.output_dir.display()
            );
            for f in &outcome.results.flags {
                println!("flag: {f}");
            }
        }
        Command::Fetch {
            source,
            code,
            name,
            country,
            cache_dir,
            offline,
        } => {
            let req = FetchRequest {
                source: *source,
                code: code.clone(),
                name: name.clone(),
                country: country.clone(),
            };
            let cache = cache_dir.clone().unwrap_or_else(fetch::default_cache_dir);
            let transport = if *offline {
                None
            } else {
                fetch::network_transport()
            };
            let p = fetch::fetch_series(&req, &cache, transport.as_deref())?;
            println!("{}", p.display());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn shock_and_case_flags_parse() {
        let c = Cli::try_parse_from([
            "dynardl",
            "--seed",
            "42",
            "simulate",
            "--shock",
            "logNE=-0.21",
            "--at",
            "5",
            "--horizon",
            "20",
            "--sims",
            "5000",
        ])
        .unwrap();
        assert_eq!(c.global.seed, Some(42));
        assert!(
            matches!(c.command, Command::Simulate { ref shock, .. } if shock.as_deref() == Some("logNE=-0.21"))
        );
        let c = Cli::try_parse_from([
            "dynardl",
            "fit",
            "--case",
            "constant_trend",
            "--criterion",
            "aic",
        ])
        .unwrap();
        assert!(matches!(
            c.command,
            Command::Fit {
                case: Some(EcmCase::ConstantTrend),
                criterion: Some(Criterion::Aic),
                ..
            }
        ));
    }
}
