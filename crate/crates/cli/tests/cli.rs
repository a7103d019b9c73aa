use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn dynardl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynardl"))
        .args(args)
        .env_remove("DYNARDL_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, edit: impl FnOnce(&mut serde_json::Value)) -> PathBuf {
    let text = std::fs::read_to_string(fixtures().join("reproduce.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["data"]["csv"] = serde_json::json!(fixtures().join("panel.csv"));
    v["simulate"]["n_sims"] = serde_json::json!(200);
    edit(&mut v);
    let p = dir.join("config.json");
    std::fs::write(&p, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    p
}

#[test]
fn missing_seed_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |v| {
        v.as_object_mut().unwrap().remove("seed");
    });
    let o = dynardl(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
        "reproduce",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));
}

#[test]
fn unknown_regressor_lists_available_names() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |v| {
        v["variables"]["regressors"] = serde_json::json!(["logNE", "logGDP"]);
    });
    let o = dynardl(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
        "reproduce",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(
        e.contains("`logGDP`") && e.contains("available: CE, NE, REN, ERT, EP, logCE"),
        "{e}"
    );
}

#[test]
fn several_problems_are_listed_together() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |v| {
        v.as_object_mut().unwrap().remove("seed");
        v["simulate"]["magnitude"] = serde_json::json!(-2.0);
        v["ardl"]["pmax"] = serde_json::json!(0);
    });
    let o = dynardl(&["--config", cfg.to_str().unwrap(), "reproduce"]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(
        e.contains("seed") && e.contains("simulate") && e.contains("ardl.pmax"),
        "{e}"
    );
}

#[test]
fn missing_data_file_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |v| {
        v["data"]["csv"] = serde_json::json!("/nonexistent/panel.csv");
    });
    let o = dynardl(&["--config", cfg.to_str().unwrap(), "reproduce"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn bad_flags_are_validation_errors() {
    assert_eq!(dynardl(&["fit", "--pmax", "many"]).status.code(), Some(1));
    assert_eq!(dynardl(&["--help"]).status.code(), Some(0));
}

#[test]
fn subcommands_chain_through_the_fit_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let csv = fixtures().join("panel.csv");
    let csv = csv.to_str().unwrap();
    let logs = "CE,NE,REN,ERT,EP";

    let o = dynardl(&["--out", out, "ingest", "--csv", csv, "--log", logs]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ingested = std::fs::read_to_string(dir.path().join("dataset.csv")).unwrap();
    assert!(ingested.starts_with("year,CE,NE,REN,ERT,EP,logCE,"));
    assert_eq!(ingested.lines().count(), 29);

    let o = dynardl(&[
        "--out",
        out,
        "unitroot",
        "--csv",
        csv,
        "--log",
        logs,
        "--series",
        "logCE,logNE",
        "--case",
        "constant",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("table1_unitroot.csv").is_file());

    let o = dynardl(&[
        "--out",
        out,
        "fit",
        "--csv",
        csv,
        "--log",
        logs,
        "--dep",
        "logCE",
        "--regs",
        "logNE,logREN,logERT,logEP",
        "--pmax",
        "2",
        "--qmax",
        "2",
        "--criterion",
        "bic",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("ARDL(1,0,0,0,0)"));

    let o = dynardl(&["--out", out, "bounds"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("cointegration"));

    let o = dynardl(&[
        "--out",
        out,
        "simulate",
        "--shock",
        "logNE=-0.21",
        "--at",
        "5",
        "--horizon",
        "20",
        "--sims",
        "300",
    ]);
    assert_eq!(
        o.status.code(),
        Some(1),
        "simulation without a seed must be refused"
    );
    let o = dynardl(&[
        "--out",
        out,
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
        "300",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sim = std::fs::read_to_string(dir.path().join("simulation.csv")).unwrap();
    assert!(sim.starts_with("period,mean,p75lo,p75hi,p90lo,p90hi,p95lo,p95hi\n"));
    assert_eq!(sim.lines().count(), 21);

    let o = dynardl(&["--out", out, "diagnose", "--bg-lags", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in [
        "diagnostics.json",
        "diagnostics.txt",
        "table4_diagnostics.csv",
        "fig3_cusum.svg",
    ] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }

    let o = dynardl(&[
        "--out",
        out,
        "krls",
        "--csv",
        csv,
        "--log",
        logs,
        "--dep",
        "logCE",
        "--regs",
        "logNE,logERT,logREN,logEP",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t5 = std::fs::read_to_string(dir.path().join("table5_krls.csv")).unwrap();
    assert_eq!(t5.lines().count(), 5);

    let o = dynardl(&[
        "--out",
        out,
        "simulate",
        "--seed",
        "1",
        "--shock",
        "logGDP=-0.1",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn corrupted_artifact_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let csv = fixtures().join("panel.csv");
    let o = dynardl(&[
        "--out",
        out,
        "fit",
        "--csv",
        csv.to_str().unwrap(),
        "--log",
        "CE,NE",
        "--dep",
        "logCE",
        "--regs",
        "logNE",
        "--pmax",
        "1",
        "--qmax",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let path = dir.path().join("fit.json");
    let text = std::fs::read_to_string(&path).unwrap();
    let first_digit = text.find("\"ssr\": ").unwrap() + 7;
    let mut bytes = text.into_bytes();
    bytes[first_digit] = if bytes[first_digit] == b'1' {
        b'2'
    } else {
        b'1'
    };
    std::fs::write(&path, bytes).unwrap();
    let o = dynardl(&["--out", out, "bounds"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("hash mismatch"), "{}", stderr(&o));
}

#[test]
fn offline_fetch_with_cold_cache_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let o = dynardl(&[
        "fetch",
        "--source",
        "worldbank",
        "--code",
        "EG.ELC.NUCL.ZS",
        "--name",
        "NE",
        "--offline",
        "--cache-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("worldbank"), "{}", stderr(&o));
}
