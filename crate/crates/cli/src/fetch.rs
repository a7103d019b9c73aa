//! Optional public-data fetchers with an on-disk cache.
//!
//! Each provider payload is converted to the two-column dataset CSV
//! (`year,<name>`) and cached under `<cache>/<source>/<code>.csv`. A cache
//! hit never touches the network. The HTTP transport is compiled in with the
//! `fetch` feature; payload parsing is always available.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "DYNARDL_CACHE_DIR";
/// Environment variable holding the EIA API key.
pub const EIA_KEY_ENV: &str = "EIA_API_KEY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    WorldBank,
    Eia,
    Oecd,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::WorldBank => "worldbank",
            Source::Eia => "eia",
            Source::Oecd => "oecd",
        })
    }
}

impl FromStr for Source {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.to_ascii_lowercase().as_str() {
            "worldbank" | "wdi" => Ok(Source::WorldBank),
            "eia" => Ok(Source::Eia),
            "oecd" => Ok(Source::Oecd),
            other => Err(CliError::Config(vec![format!(
                "unknown source `{other}` (worldbank|eia|oecd)"
            )])),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FetchRequest {
    pub source: Source,
    /// Indicator id (World Bank), series id (EIA) or dataflow key (OECD).
    pub code: String,
    /// Series name in the produced CSV.
    pub name: String,
    /// ISO3 country code for World Bank requests.
    #[serde(default = "default_country")]
    pub country: String,
}

fn default_country() -> String {
    "CHN".to_string()
}

impl FetchRequest {
    pub fn url(&self) -> String {
        match self.source {
            Source::WorldBank => format!(
                "https://api.worldbank.org/v2/country/{}/indicator/{}?format=json&per_page=20000",
                self.country, self.code
            ),
            Source::Eia => {
                let key = std::env::var(EIA_KEY_ENV).unwrap_or_default();
                format!(
                    "https://api.eia.gov/v2/seriesid/{}?api_key={key}",
                    self.code
                )
            }
            Source::Oecd => format!(
                "https://sdmx.oecd.org/public/rest/data/{}?format=csvfilewithlabels",
                self.code
            ),
        }
    }

    pub fn cache_path(&self, cache_dir: &Path) -> PathBuf {
        let safe: String = self
            .code
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || "._-".contains(c) {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        cache_dir
            .join(self.source.to_string())
            .join(format!("{safe}.csv"))
    }

    fn error(&self, message: impl Into<String>) -> CliError {
        CliError::Fetch {
            source_name: self.source.to_string(),
            message: message.into(),
        }
    }
}

/// Something that can GET a URL and return the body.
pub trait Transport {
    fn get(&self, url: &str) -> Result<String, String>;
}

/// Cache directory from [`CACHE_ENV`], else `.dynardl-cache`.
pub fn default_cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(".dynardl-cache"))
}

/// Returns the cached CSV for `req`, downloading it through `transport` on a
/// cache miss. With `transport = None` only the cache is consulted.
pub fn fetch_series(
    req: &FetchRequest,
    cache_dir: &Path,
    transport: Option<&dyn Transport>,
) -> CliResult<PathBuf> {
    let path = req.cache_path(cache_dir);
    if path.is_file() {
        log::info!("cache hit for {} {}", req.source, req.code);
        return Ok(path);
    }
    let transport = transport.ok_or_else(|| {
        req.error(format!(
            "`{}` is not cached in {} and network access is disabled",
            req.code,
            cache_dir.display()
        ))
    })?;
    let body = transport.get(&req.url()).map_err(|e| req.error(e))?;
    let observations = parse_payload(req, &body)?;
    let csv = to_csv(&req.name, &observations);
    write_atomic(&path, csv.as_bytes())?;
    Ok(path)
}

/// Year-keyed observations; `None` marks a reported-but-missing value.
pub type Observations = BTreeMap<i32, Option<f64>>;

pub fn parse_payload(req: &FetchRequest, body: &str) -> CliResult<Observations> {
    match req.source {
        Source::WorldBank => parse_world_bank(body),
        Source::Eia => parse_eia(body),
        Source::Oecd => parse_oecd_csv(body),
    }
    .map_err(|m| req.error(m))
}

fn excerpt(body: &str) -> String {
    let mut s: String = body.chars().take(160).collect();
    if body.chars().count() > 160 {
        s.push_str("...");
    }
    s
}

fn parse_year(v: &Value) -> Option<i32> {
    match v {
        Value::String(s) => s.get(..4)?.parse().ok(),
        Value::Number(n) => n.as_i64().and_then(|y| i32::try_from(y).ok()),
        _ => None,
    }
}

fn parse_value(v: &Value) -> Result<Option<f64>, String> {
    match v {
        Value::Null => Ok(None),
        Value::Number(n) => Ok(n.as_f64()),
        Value::String(s) if s.trim().is_empty() => Ok(None),
        Value::String(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("non-numeric value `{s}`")),
        other => Err(format!("unexpected value {other}")),
    }
}

/// World Bank v2 JSON: `[meta, [{"date": "2017", "value": 1.5}, ...]]`, or
/// `[{"message": [...]}]` on error.
pub fn parse_world_bank(body: &str) -> Result<Observations, String> {
    let v: Value =
        serde_json::from_str(body).map_err(|e| format!("invalid JSON ({e}): {}", excerpt(body)))?;
    let arr = v
        .as_array()
        .ok_or_else(|| format!("expected a JSON array: {}", excerpt(body)))?;
    if let Some(msg) = arr.first().and_then(|m| m.get("message")) {
        let text = msg
            .as_array()
            .and_then(|m| m.first())
            .and_then(|m| m.get("value"))
            .and_then(Value::as_str)
            .unwrap_or("unspecified error");
        return Err(format!("provider error: {text}"));
    }
    let rows = arr
        .get(1)
        .and_then(Value::as_array)
        .ok_or_else(|| format!("missing data page: {}", excerpt(body)))?;
    let mut out = Observations::new();
    for row in rows {
        let year = row
            .get("date")
            .and_then(parse_year)
            .ok_or_else(|| format!("row without a usable `date`: {}", excerpt(&row.to_string())))?;
        let value = parse_value(row.get("value").unwrap_or(&Value::Null))?;
        out.insert(year, value);
    }
    Ok(out)
}

/// EIA API v2: `{"response": {"data": [{"period": "2017", "value": 3.2}, ...]}}`.
pub fn parse_eia(body: &str) -> Result<Observations, String> {
    let v: Value =
        serde_json::from_str(body).map_err(|e| format!("invalid JSON ({e}): {}", excerpt(body)))?;
    if let Some(err) = v.get("error") {
        return Err(format!(
            "provider error: {}",
            err.as_str().unwrap_or(&err.to_string())
        ));
    }
    let rows = v
        .pointer("/response/data")
        .and_then(Value::as_array)
        .ok_or_else(|| format!("missing response.data: {}", excerpt(body)))?;
    let mut out = Observations::new();
    for row in rows {
        let year = row.get("period").and_then(parse_year).ok_or_else(|| {
            format!(
                "row without a usable `period`: {}",
                excerpt(&row.to_string())
            )
        })?;
        out.insert(year, parse_value(row.get("value").unwrap_or(&Value::Null))?);
    }
    Ok(out)
}

/// OECD SDMX-CSV: needs `TIME_PERIOD` and `OBS_VALUE` columns.
pub fn parse_oecd_csv(body: &str) -> Result<Observations, String> {
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| format!("invalid CSV header: {e}"))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| format!("column `{name}` not found in header: {}", excerpt(body)))
    };
    let (t, o) = (col("TIME_PERIOD")?, col("OBS_VALUE")?);
    let mut out = Observations::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| format!("invalid CSV record: {e}"))?;
        let year = rec
            .get(t)
            .and_then(|s| s.get(..4))
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                format!(
                    "bad TIME_PERIOD in `{}`",
                    rec.iter().collect::<Vec<_>>().join(",")
                )
            })?;
        let raw = rec.get(o).unwrap_or("").trim();
        let value = if raw.is_empty() {
            None
        } else {
            Some(
                raw.parse()
                    .map_err(|_| format!("non-numeric OBS_VALUE `{raw}`"))?,
            )
        };
        out.insert(year, value);
    }
    Ok(out)
}

/// Dataset CSV with one row per year from the first to the last
/// observation; gaps are written as empty cells.
pub fn to_csv(name: &str, obs: &Observations) -> String {
    let mut s = format!("year,{name}\n");
    let (Some(&first), Some(&last)) = (obs.keys().next(), obs.keys().next_back()) else {
        return s;
    };
    for year in first..=last {
        match obs.get(&year).copied().flatten() {
            Some(v) => s.push_str(&format!("{year},{v}\n")),
            None => s.push_str(&format!("{year},\n")),
        }
    }
    s
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    std::fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

/// Blocking HTTP transport.
#[cfg(feature = "fetch")]
pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

#[cfg(feature = "fetch")]
impl HttpTransport {
    pub fn new() -> Result<Self, String> {
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(30))
            .user_agent(concat!("dynardl/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| e.to_string())?;
        Ok(Self { client })
    }
}

#[cfg(feature = "fetch")]
impl Transport for HttpTransport {
    fn get(&self, url: &str) -> Result<String, String> {
        let resp = self.client.get(url).send().map_err(|e| e.to_string())?;
        let status = resp.status();
        let body = resp.text().map_err(|e| e.to_string())?;
        if !status.is_success() {
            return Err(format!("HTTP {status}: {}", excerpt(&body)));
        }
        Ok(body)
    }
}

/// The network transport when compiled in.
pub fn network_transport() -> Option<Box<dyn Transport>> {
    #[cfg(feature = "fetch")]
    {
        match HttpTransport::new() {
            Ok(t) => return Some(Box::new(t)),
            Err(e) => log::warn!("HTTP client unavailable: {e}"),
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    struct Canned {
        body: Result<String, String>,
        calls: Cell<usize>,
    }

    impl Transport for Canned {
        fn get(&self, _url: &str) -> Result<String, String> {
            self.calls.set(self.calls.get() + 1);
            self.body.clone()
        }
    }

    fn wb() -> FetchRequest {
        FetchRequest {
            source: Source::WorldBank,
            code: "EG.ELC.NUCL.ZS".into(),
            name: "NE".into(),
            country: "CHN".into(),
        }
    }

    #[test]
    fn world_bank_payload() {
        let body = r#"[{"page":1,"pages":1,"per_page":50,"total":3},
            [{"indicator":{"id":"X","value":"x"},"country":{"id":"CN","value":"China"},"countryiso3code":"CHN","date":"1992","value":null,"unit":"","obs_status":"","decimal":1},
             {"indicator":{"id":"X","value":"x"},"country":{"id":"CN","value":"China"},"countryiso3code":"CHN","date":"1991","value":0.5,"unit":"","obs_status":"","decimal":1},
             {"indicator":{"id":"X","value":"x"},"country":{"id":"CN","value":"China"},"countryiso3code":"CHN","date":"1990","value":1.25,"unit":"","obs_status":"","decimal":1}]]"#;
        let obs = parse_world_bank(body).unwrap();
        assert_eq!(to_csv("NE", &obs), "year,NE\n1990,1.25\n1991,0.5\n1992,\n");
    }

    #[test]
    fn world_bank_error_message_is_surfaced() {
        let body = r#"[{"message":[{"id":"120","key":"Invalid value","value":"The provided parameter value is not valid"}]}]"#;
        let e = parse_payload(&wb(), body).unwrap_err().to_string();
        assert!(e.contains("worldbank") && e.contains("not valid"), "{e}");
    }

    #[test]
    fn schema_drift_quotes_the_payload() {
        let e = parse_eia(r#"{"resp": {}}"#).unwrap_err();
        assert!(e.contains("response.data") && e.contains("resp"), "{e}");
    }

    #[test]
    fn oecd_csv_payload() {
        let body = "STRUCTURE,REF_AREA,TIME_PERIOD,OBS_VALUE\nDF,CHN,2001,3.5\nDF,CHN,2000,\nDF,CHN,2003,4\n";
        let obs = parse_oecd_csv(body).unwrap();
        assert_eq!(
            to_csv("ERT", &obs),
            "year,ERT\n2000,\n2001,3.5\n2002,\n2003,4\n"
        );
    }

    #[test]
    fn warm_cache_needs_no_network() {
        let dir = tempfile::tempdir().unwrap();
        let t = Canned {
            body: Ok(r#"[{"page":1},[{"date":"2000","value":2.0}]]"#.into()),
            calls: Cell::new(0),
        };
        let p1 = fetch_series(&wb(), dir.path(), Some(&t)).unwrap();
        assert_eq!(t.calls.get(), 1);
        let p2 = fetch_series(&wb(), dir.path(), None).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(std::fs::read_to_string(p2).unwrap(), "year,NE\n2000,2\n");
        let leftovers: Vec<_> = std::fs::read_dir(p1.parent().unwrap()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }

    #[test]
    fn cold_cache_without_network_fails() {
        let dir = tempfile::tempdir().unwrap();
        let e = fetch_series(&wb(), dir.path(), None).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let t = Canned {
            body: Err("HTTP 404".into()),
            calls: Cell::new(0),
        };
        let e = fetch_series(&wb(), dir.path(), Some(&t))
            .unwrap_err()
            .to_string();
        assert!(e.contains("worldbank") && e.contains("404"));
    }
}
