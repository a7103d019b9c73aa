//! Annual time series, CSV ingestion, variable transforms and sample alignment.
//!
//! A [`TimeSeries`] is a contiguous run of calendar years with one optional
//! observation per year. Missing observations are `None`; nothing is ever
//! imputed. A [`Dataset`] is a set of uniquely named series which may cover
//! different spans until [`align`] trims them to the common fully observed
//! window.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    name: String,
    start_year: i32,
    values: Vec<Option<f64>>,
}

impl TimeSeries {
    /// Fully observed series starting at `start_year`.
    pub fn new(name: impl Into<String>, start_year: i32, values: Vec<f64>) -> Result<Self> {
        Self::with_missing(name, start_year, values.into_iter().map(Some).collect())
    }

    pub fn with_missing(
        name: impl Into<String>,
        start_year: i32,
        values: Vec<Option<f64>>,
    ) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::Argument("series name must not be empty".into()));
        }
        for (i, v) in values.iter().enumerate() {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(Error::Domain {
                        series: name,
                        year: start_year + i as i32,
                        message: format!("non-finite value {v}"),
                    });
                }
            }
        }
        Ok(Self {
            name,
            start_year,
            values,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    /// Last year covered (inclusive). Equals `start_year - 1` for an empty series.
    pub fn end_year(&self) -> i32 {
        self.start_year + self.values.len() as i32 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.values.len()).map(move |i| self.start_year + i as i32)
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn get(&self, year: i32) -> Option<f64> {
        let off = year - self.start_year;
        if off < 0 {
            return None;
        }
        self.values.get(off as usize).copied().flatten()
    }

    /// Observed values, or an integrity error naming the first missing year.
    pub fn complete_values(&self) -> Result<Vec<f64>> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| {
                    Error::Integrity(format!(
                        "series `{}` is missing a value at {}",
                        self.name,
                        self.start_year + i as i32
                    ))
                })
            })
            .collect()
    }

    fn first_observed(&self) -> Option<i32> {
        self.values
            .iter()
            .position(Option::is_some)
            .map(|i| self.start_year + i as i32)
    }

    fn last_observed(&self) -> Option<i32> {
        self.values
            .iter()
            .rposition(Option::is_some)
            .map(|i| self.start_year + i as i32)
    }

    fn window(&self, start: i32, end: i32) -> TimeSeries {
        let values = (start..=end).map(|y| self.get(y)).collect();
        TimeSeries {
            name: self.name.clone(),
            start_year: start,
            values,
        }
    }
}

/// What to do with non-positive observations when taking logs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogPolicy {
    /// Any value `<= 0` is a domain error.
    #[default]
    Reject,
    /// Drop the leading run of non-positive (or missing) observations so the
    /// series starts at its first strictly positive value. Non-positive values
    /// after that point are still an error.
    TruncateLeading,
}

/// Natural logarithm of every observation. The result is named `log<name>`.
pub fn log_transform(s: &TimeSeries) -> Result<TimeSeries> {
    log_transform_with(s, LogPolicy::Reject)
}

pub fn log_transform_with(s: &TimeSeries, policy: LogPolicy) -> Result<TimeSeries> {
    let skip = match policy {
        LogPolicy::Reject => 0,
        LogPolicy::TruncateLeading => s
            .values
            .iter()
            .position(|v| matches!(v, Some(x) if *x > 0.0))
            .unwrap_or(s.values.len()),
    };
    let mut out = Vec::with_capacity(s.values.len() - skip);
    for (i, v) in s.values.iter().enumerate().skip(skip) {
        out.push(match v {
            Some(x) if *x > 0.0 => Some(x.ln()),
            Some(x) => {
                return Err(Error::Domain {
                    series: s.name.clone(),
                    year: s.start_year + i as i32,
                    message: format!("log undefined for value {x}"),
                })
            }
            None => None,
        });
    }
    Ok(TimeSeries {
        name: format!("log{}", s.name),
        start_year: s.start_year + skip as i32,
        values: out,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    Log,
    Difference,
    Lag(usize),
}

impl TransformKind {
    /// Number of head observations lost by the transform.
    pub fn order(self) -> usize {
        match self {
            TransformKind::Log => 0,
            TransformKind::Difference => 1,
            TransformKind::Lag(k) => k,
        }
    }

    /// Name of the derived series.
    pub fn derived_name(self, target: &str) -> String {
        match self {
            TransformKind::Log => format!("log{target}"),
            TransformKind::Difference => format!("d.{target}"),
            TransformKind::Lag(k) => format!("L{k}.{target}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transform {
    pub kind: TransformKind,
    pub target: String,
}

impl Transform {
    pub fn new(kind: TransformKind, target: impl Into<String>) -> Self {
        Self {
            kind,
            target: target.into(),
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TransformKind::Log => write!(f, "log({})", self.target),
            TransformKind::Difference => write!(f, "diff({})", self.target),
            TransformKind::Lag(k) => write!(f, "lag{k}({})", self.target),
        }
    }
}

/// Bookkeeping for a transform applied to a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformRecord {
    pub transform: Transform,
    pub output: String,
    pub lost_head: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    series: Vec<TimeSeries>,
    history: Vec<TransformRecord>,
}

impl Dataset {
    pub fn new(series: Vec<TimeSeries>) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::NoDataSeries);
        }
        let mut seen = HashSet::new();
        for s in &series {
            if !seen.insert(s.name()) {
                return Err(Error::Integrity(format!(
                    "duplicate series name `{}`",
                    s.name()
                )));
            }
        }
        Ok(Self {
            series,
            history: Vec::new(),
        })
    }

    pub fn series(&self) -> &[TimeSeries] {
        &self.series
    }

    pub fn names(&self) -> Vec<&str> {
        self.series.iter().map(TimeSeries::name).collect()
    }

    pub fn get(&self, name: &str) -> Result<&TimeSeries> {
        self.series
            .iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::UnknownSeries {
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    /// Smallest `[start, end]` window containing every series.
    pub fn span(&self) -> (i32, i32) {
        let start = self.series.iter().map(TimeSeries::start_year).min();
        let end = self.series.iter().map(TimeSeries::end_year).max();
        (start.unwrap_or(0), end.unwrap_or(-1))
    }

    /// Number of years in [`Dataset::span`].
    pub fn len(&self) -> usize {
        let (a, b) = self.span();
        (b - a + 1).max(0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn history(&self) -> &[TransformRecord] {
        &self.history
    }

    /// True when every series covers the same span with no missing values.
    pub fn is_aligned(&self) -> bool {
        let span = self.span();
        self.series
            .iter()
            .all(|s| (s.start_year(), s.end_year()) == span && s.values.iter().all(Option::is_some))
    }

    /// Fully observed values of `name`; fails if any value is missing.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        self.get(name)?.complete_values()
    }

    /// Adds (or replaces) a series.
    pub fn with_series(mut self, s: TimeSeries) -> Self {
        match self.series.iter_mut().find(|x| x.name() == s.name()) {
            Some(slot) => *slot = s,
            None => self.series.push(s),
        }
        self
    }

    /// Applies a transform and adds the derived series. Log transforms use
    /// [`LogPolicy::Reject`]; see [`Dataset::apply_with`].
    pub fn apply(&self, t: &Transform) -> Result<Dataset> {
        self.apply_with(t, LogPolicy::Reject)
    }

    pub fn apply_with(&self, t: &Transform, policy: LogPolicy) -> Result<Dataset> {
        match t.kind {
            TransformKind::Log => {
                let s = log_transform_with(self.get(&t.target)?, policy)?;
                let lost = (s.start_year() - self.get(&t.target)?.start_year()) as usize;
                let mut out = self.clone().with_series(s);
                out.history.push(TransformRecord {
                    transform: t.clone(),
                    output: t.kind.derived_name(&t.target),
                    lost_head: lost,
                });
                Ok(out)
            }
            _ => lag_and_diff(self, t),
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        self.write_csv_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        self.write_csv_to(&mut w)?;
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    fn write_csv_to<W: std::io::Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        let mut header = vec!["year".to_string()];
        header.extend(self.series.iter().map(|s| s.name().to_string()));
        w.write_record(&header).map_err(csv_err)?;
        let (start, end) = self.span();
        for year in start..=end {
            let mut row = vec![year.to_string()];
            for s in &self.series {
                row.push(s.get(year).map(|v| v.to_string()).unwrap_or_default());
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.position() {
        Some(p) => Error::Parse {
            row: p.line() as usize,
            column: 0,
            message: e.to_string(),
        },
        None => Error::Io(e.to_string()),
    }
}

/// Which CSV columns become series, and under what names.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CsvSchema {
    /// Every non-year column, named after its header.
    #[default]
    AllColumns,
    /// `(column header, series name)` pairs.
    Mapping(Vec<(String, String)>),
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let file =
        std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_csv(file, schema)
}

/// Parses the dataset CSV format from any reader.
///
/// The first column must be `year`. Empty cells and cells containing no
/// digits (`NA`, `..`) are missing observations; anything else must be a
/// plain decimal number with an optional exponent.
pub fn read_csv<R: std::io::Read>(reader: R, schema: &CsvSchema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.first().map(|h| h.eq_ignore_ascii_case("year")) != Some(true) {
        return Err(Error::Parse {
            row: 1,
            column: 1,
            message: "first column must be `year`".into(),
        });
    }

    // (csv column index, series name)
    let selected: Vec<(usize, String)> = match schema {
        CsvSchema::AllColumns => headers
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, h)| (i, h.clone()))
            .collect(),
        CsvSchema::Mapping(pairs) => pairs
            .iter()
            .map(|(col, name)| {
                headers
                    .iter()
                    .position(|h| h == col)
                    .filter(|&i| i > 0)
                    .map(|i| (i, name.clone()))
                    .ok_or_else(|| Error::UnknownSeries {
                        name: col.clone(),
                        available: headers[1..].join(", "),
                    })
            })
            .collect::<Result<_>>()?,
    };
    if selected.is_empty() {
        return Err(Error::NoDataSeries);
    }

    let mut rows: BTreeMap<i32, Vec<Option<f64>>> = BTreeMap::new();
    for (ri, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = ri + 2;
        let year_cell = rec.get(0).unwrap_or("");
        let year: i32 = year_cell.parse().map_err(|_| Error::Parse {
            row: line,
            column: 1,
            message: format!("invalid year `{year_cell}`"),
        })?;
        let mut vals = Vec::with_capacity(selected.len());
        for (ci, _) in &selected {
            let cell = rec.get(*ci).unwrap_or("");
            vals.push(parse_cell(cell).map_err(|message| Error::Parse {
                row: line,
                column: ci + 1,
                message,
            })?);
        }
        if rows.insert(year, vals).is_some() {
            return Err(Error::Integrity(format!("duplicate year {year}")));
        }
    }
    let (&start, _) = rows
        .first_key_value()
        .ok_or_else(|| Error::InsufficientSample("file has no data rows".into()))?;
    for (expected, &year) in (start..).zip(rows.keys()) {
        if year != expected {
            return Err(Error::Integrity(format!("gap at {expected}")));
        }
    }
    let series = selected
        .iter()
        .enumerate()
        .map(|(j, (_, name))| {
            TimeSeries::with_missing(name.clone(), start, rows.values().map(|r| r[j]).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(series)
}

fn parse_cell(cell: &str) -> std::result::Result<Option<f64>, String> {
    if !cell.bytes().any(|b| b.is_ascii_digit()) {
        return Ok(None);
    }
    if !is_plain_decimal(cell) {
        return Err(format!("`{cell}` is not a plain decimal number"));
    }
    cell.parse::<f64>()
        .map(Some)
        .map_err(|e| format!("`{cell}`: {e}"))
}

/// `[+-]digits[.digits][(e|E)[+-]digits]`, at least one mantissa digit.
fn is_plain_decimal(s: &str) -> bool {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let mut mantissa_digits = 0;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
        mantissa_digits += 1;
    }
    if i < b.len() && b[i] == b'.' {
        i += 1;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
            mantissa_digits += 1;
        }
    }
    if mantissa_digits == 0 {
        return false;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == start {
            return false;
        }
    }
    i == b.len()
}

/// Applies a difference or lag transform to `t.target`, adds the derived
/// series and trims every series' head by the transform order.
pub fn lag_and_diff(d: &Dataset, t: &Transform) -> Result<Dataset> {
    let src = d.get(&t.target)?;
    let order = match t.kind {
        TransformKind::Lag(0) => {
            return Err(Error::Argument("lag order must be at least 1".into()))
        }
        TransformKind::Log => {
            return Err(Error::Argument(
                "log is not a lag/difference transform".into(),
            ))
        }
        k => k.order(),
    };
    let (start, end) = d.span();
    if d.len() <= order {
        return Err(Error::InsufficientSample(format!(
            "{t} needs more than {order} observations, span has {}",
            d.len()
        )));
    }
    let new_start = start + order as i32;
    let derived: Vec<Option<f64>> = (new_start..=end)
        .map(|y| match t.kind {
            TransformKind::Difference => match (src.get(y), src.get(y - 1)) {
                (Some(a), Some(b)) => Some(a - b),
                _ => None,
            },
            TransformKind::Lag(k) => src.get(y - k as i32),
            TransformKind::Log => unreachable!(),
        })
        .collect();
    let out_name = t.kind.derived_name(&t.target);
    let mut series: Vec<TimeSeries> = d
        .series
        .iter()
        .filter(|s| s.name() != out_name)
        .map(|s| s.window(new_start.max(s.start_year()), s.end_year()))
        .collect();
    series.push(TimeSeries::with_missing(
        out_name.clone(),
        new_start,
        derived,
    )?);
    let mut history = d.history.clone();
    history.push(TransformRecord {
        transform: t.clone(),
        output: out_name,
        lost_head: order,
    });
    Ok(Dataset { series, history })
}

/// Trims every series to the largest span over which all are observed.
///
/// Missing values strictly inside that span are an error: nothing is imputed.
pub fn align(d: &Dataset) -> Result<Dataset> {
    let mut start = i32::MIN;
    let mut end = i32::MAX;
    for s in &d.series {
        match (s.first_observed(), s.last_observed()) {
            (Some(a), Some(b)) => {
                start = start.max(a);
                end = end.min(b);
            }
            _ => return Err(Error::NoCommonSample),
        }
    }
    if start > end {
        return Err(Error::NoCommonSample);
    }
    let series: Vec<TimeSeries> = d.series.iter().map(|s| s.window(start, end)).collect();
    for s in &series {
        if let Some(i) = s.values.iter().position(Option::is_none) {
            return Err(Error::Integrity(format!(
                "series `{}` has a missing value at {} inside the common span {start}-{end}",
                s.name(),
                start + i as i32
            )));
        }
    }
    Ok(Dataset {
        series,
        history: d.history.clone(),
    })
}
