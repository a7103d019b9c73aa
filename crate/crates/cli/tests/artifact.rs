use std::path::PathBuf;

use dynardl::artifact::{load_fit, save_fit, FitArtifact};
use dynardl::core::ardl::{bounds_test, fit_ecm, ModelSpec};
use dynardl::core::dataset::{load_csv, CsvSchema, LogPolicy};
use dynardl::core::diagnostics::DiagnosticsReport;
use dynardl::core::dynsim::{simulate, ShockSpec};
use dynardl::pipeline::apply_logs;
use dynardl::CliError;

fn fixture_fit() -> dynardl::core::ardl::ArdlEcmFit {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/panel.csv");
    let raw = load_csv(p, &CsvSchema::AllColumns).unwrap();
    let logs: Vec<String> = ["CE", "NE", "REN", "ERT", "EP"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let d = apply_logs(raw, &logs, LogPolicy::Reject).unwrap();
    let spec = ModelSpec::new(
        "logCE",
        vec![
            "logNE".into(),
            "logREN".into(),
            "logERT".into(),
            "logEP".into(),
        ],
        2,
        vec![1, 0, 2, 1],
    )
    .unwrap();
    fit_ecm(&d, &spec).unwrap()
}

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn round_trip_reproduces_every_statistic() {
    let fit = fixture_fit();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fit.json");
    save_fit(&fit, &path).unwrap();
    let back = load_fit(&path).unwrap();

    assert_eq!(back.spec, fit.spec);
    assert_eq!(back.years, fit.years);
    assert_eq!(back.ols.names, fit.ols.names);
    assert!(max_abs(&back.ols.beta, &fit.ols.beta) <= 1e-12);
    assert!(max_abs(back.ols.cov.as_slice(), fit.ols.cov.as_slice()) <= 1e-12);
    assert!(max_abs(&back.ols.residuals, &fit.ols.residuals) <= 1e-12);
    assert!(
        max_abs(
            back.ols.design.matrix().as_slice(),
            fit.ols.design.matrix().as_slice()
        ) <= 1e-12
    );
    assert!((back.ols.sigma2 - fit.ols.sigma2).abs() <= 1e-12);
    assert_eq!(back.long_run_status, fit.long_run_status);
    let lr = |f: &dynardl::core::ardl::ArdlEcmFit| {
        f.long_run
            .as_ref()
            .unwrap()
            .iter()
            .map(|c| c.estimate)
            .collect::<Vec<_>>()
    };
    assert!(max_abs(&lr(&back), &lr(&fit)) <= 1e-12);

    let (b0, b1) = (bounds_test(&fit).unwrap(), bounds_test(&back).unwrap());
    assert!((b0.f_stat - b1.f_stat).abs() <= 1e-12 && (b0.t_stat - b1.t_stat).abs() <= 1e-12);
    let (d0, d1) = (
        DiagnosticsReport::compute(&fit.ols, 4).unwrap(),
        DiagnosticsReport::compute(&back.ols, 4).unwrap(),
    );
    assert!((d0.breusch_godfrey.stat - d1.breusch_godfrey.stat).abs() <= 1e-12);
    assert!(max_abs(&d0.cusum.path, &d1.cusum.path) <= 1e-12);

    let shock = ShockSpec {
        n_sims: 50,
        ..ShockSpec::new("logNE", -0.21)
    };
    assert_eq!(
        simulate(&fit, &shock, 9).unwrap(),
        simulate(&back, &shock, 9).unwrap()
    );
}

#[test]
fn saved_text_is_stable() {
    let fit = fixture_fit();
    let a = FitArtifact::from_fit(&fit);
    let b = FitArtifact::from_json(&a.to_json()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.hash.len(), 64);
}

#[test]
fn tampering_is_detected() {
    let fit = fixture_fit();
    let json = FitArtifact::from_fit(&fit).to_json();
    let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let r = v["residuals"][3].as_f64().unwrap();
    v["residuals"][3] = serde_json::json!(r + 1e-15_f64.max(r.abs() * 1e-14));
    let e = FitArtifact::from_json(&v.to_string()).unwrap_err();
    assert!(
        matches!(e, CliError::Artifact(ref m) if m.contains("hash mismatch")),
        "{e}"
    );
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn unknown_versions_are_refused() {
    let fit = fixture_fit();
    let mut a = FitArtifact::from_fit(&fit);
    a.version = 99;
    a.hash = a.content_hash();
    let e = FitArtifact::from_json(&a.to_json())
        .unwrap_err()
        .to_string();
    assert!(e.contains("version 99"), "{e}");
}
