//! Reading monthly series from CSV files and from a remote CSV endpoint.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::ar1::TimeSeries;
use crate::error::{Error, Result, Source};

/// Fewest observations a record may have.
pub const MIN_OBSERVATIONS: usize = 10;

/// Series data web service of the European Central Bank.
pub const DEFAULT_ENDPOINT: &str = "https://data-api.ecb.europa.eu/service/data";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub id: String,
    pub observations: Vec<(NaiveDate, f64)>,
    pub source: Source,
}

impl SeriesRecord {
    pub fn values(&self) -> Vec<f64> {
        self.observations.iter().map(|&(_, v)| v).collect()
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.observations.first().map(|&(d, _)| d)
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.observations.last().map(|&(d, _)| d)
    }

    /// Checks dates are strictly increasing, values finite and positive and
    /// that there are at least [`MIN_OBSERVATIONS`] of them.
    pub fn validate(&self) -> Result<()> {
        let err = |message: String| Error::Parse {
            source_kind: self.source,
            row: 0,
            column: self.id.clone(),
            message,
        };
        if self.observations.len() < MIN_OBSERVATIONS {
            return Err(err(format!(
                "{} observations, need at least {MIN_OBSERVATIONS}",
                self.observations.len()
            )));
        }
        if let Some(w) = self.observations.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(err(format!("date {} does not follow {}", w[1].0, w[0].0)));
        }
        if let Some((d, v)) = self.observations.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(err(format!("value {v} on {d} is not a positive number")));
        }
        Ok(())
    }

    /// The series as AR(1) data: optionally logged, optionally demeaned, with
    /// the first observation as `x_0`.
    pub fn to_time_series(&self, log_levels: bool, demean: bool) -> Result<TimeSeries> {
        let mut levels = self.values();
        if log_levels {
            levels.iter_mut().for_each(|v| *v = v.ln());
        }
        if demean {
            let mean = levels.iter().sum::<f64>() / levels.len() as f64;
            levels.iter_mut().for_each(|v| *v -= mean);
        }
        TimeSeries::from_levels(&levels)
    }
}

/// Column layout of an input file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum CsvSchema {
    /// Long when the header has `id` and `value` columns beside `date`,
    /// single-series when it has `TIME_PERIOD` and `OBS_VALUE`, wide
    /// otherwise.
    #[default]
    Auto,
    Long {
        date: String,
        id: String,
        value: String,
    },
    /// A date column and one column per series.
    Wide {
        date: String,
    },
    Single {
        date: String,
        value: String,
        id: String,
    },
}

impl CsvSchema {
    pub fn long() -> Self {
        CsvSchema::Long {
            date: "date".into(),
            id: "id".into(),
            value: "value".into(),
        }
    }

    pub fn wide() -> Self {
        CsvSchema::Wide { date: "date".into() }
    }

    fn resolve(&self, header: &[String], fallback_id: &str) -> CsvSchema {
        if *self != CsvSchema::Auto {
            return self.clone();
        }
        let find = |name: &str| header.iter().find(|h| h.eq_ignore_ascii_case(name)).cloned();
        if let (Some(date), Some(value)) = (find("TIME_PERIOD"), find("OBS_VALUE")) {
            return CsvSchema::Single {
                date,
                value,
                id: fallback_id.to_string(),
            };
        }
        let date = find("date").unwrap_or_else(|| header.first().cloned().unwrap_or_default());
        match (find("id"), find("value")) {
            (Some(id), Some(value)) => CsvSchema::Long { date, id, value },
            _ => CsvSchema::Wide { date },
        }
    }
}

/// Accepts `YYYY-MM-DD` and `YYYY-MM` (taken as the first of the month).
pub fn parse_date(text: &str) -> Option<NaiveDate> {
    let text = text.trim();
    NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(&format!("{text}-01"), "%Y-%m-%d"))
        .ok()
}

struct RowParser {
    source: Source,
}

impl RowParser {
    fn err(&self, row: usize, column: &str, message: impl Into<String>) -> Error {
        Error::Parse {
            source_kind: self.source,
            row,
            column: column.to_string(),
            message: message.into(),
        }
    }

    fn date(&self, rec: &csv::StringRecord, k: usize, row: usize, column: &str) -> Result<NaiveDate> {
        let cell = rec.get(k).unwrap_or("");
        parse_date(cell).ok_or_else(|| self.err(row, column, format!("malformed date '{cell}'")))
    }

    fn value(&self, rec: &csv::StringRecord, k: usize, row: usize, column: &str) -> Result<f64> {
        let cell = rec.get(k).unwrap_or("").trim();
        if cell.is_empty() {
            return Err(self.err(row, column, "missing value"));
        }
        let v: f64 = cell
            .parse()
            .map_err(|_| self.err(row, column, format!("'{cell}' is not a number")))?;
        if !(v.is_finite() && v > 0.0) {
            return Err(self.err(row, column, format!("value {v} is not a positive number")));
        }
        Ok(v)
    }

    fn column(&self, header: &[String], name: &str) -> Result<usize> {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| self.err(1, name, "column not found in header"))
    }
}

/// Observations tagged with the file row they came from.
type Tagged = Vec<(usize, NaiveDate, f64)>;

/// Parses CSV text into validated records, in order of first appearance.
/// No records are returned unless every row parses.
pub fn parse_csv(text: &str, schema: &CsvSchema, source: Source, fallback_id: &str) -> Result<Vec<SeriesRecord>> {
    let p = RowParser { source };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| p.err(1, "", e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(p.err(1, "", "empty input"));
    }
    let schema = schema.resolve(&header, fallback_id);

    let mut order: Vec<String> = Vec::new();
    let mut series: HashMap<String, Tagged> = HashMap::new();
    let mut push = |id: &str, obs: (usize, NaiveDate, f64)| {
        if !series.contains_key(id) {
            order.push(id.to_string());
        }
        series.entry(id.to_string()).or_default().push(obs);
    };

    let mut rows = 0usize;
    match &schema {
        CsvSchema::Auto => unreachable!("resolved above"),
        CsvSchema::Long { date, id, value } => {
            let (kd, ki, kv) = (
                p.column(&header, date)?,
                p.column(&header, id)?,
                p.column(&header, value)?,
            );
            for rec in reader.records() {
                let (rec, row) = record(&p, rec)?;
                let name = rec.get(ki).unwrap_or("").trim();
                if name.is_empty() {
                    return Err(p.err(row, id, "missing series id"));
                }
                push(
                    name,
                    (row, p.date(&rec, kd, row, date)?, p.value(&rec, kv, row, value)?),
                );
                rows += 1;
            }
        }
        CsvSchema::Wide { date } => {
            let kd = p.column(&header, date)?;
            let cols: Vec<usize> = (0..header.len()).filter(|&k| k != kd).collect();
            if cols.is_empty() {
                return Err(p.err(1, "", "no series columns beside the date"));
            }
            for rec in reader.records() {
                let (rec, row) = record(&p, rec)?;
                let d = p.date(&rec, kd, row, date)?;
                for &k in &cols {
                    push(&header[k], (row, d, p.value(&rec, k, row, &header[k])?));
                }
                rows += 1;
            }
        }
        CsvSchema::Single { date, value, id } => {
            let (kd, kv) = (p.column(&header, date)?, p.column(&header, value)?);
            for rec in reader.records() {
                let (rec, row) = record(&p, rec)?;
                push(id, (row, p.date(&rec, kd, row, date)?, p.value(&rec, kv, row, value)?));
                rows += 1;
            }
        }
    }
    if rows == 0 {
        return Err(p.err(2, "", "no data rows"));
    }

    order
        .into_iter()
        .map(|id| {
            let tagged = series.remove(&id).unwrap_or_default();
            if let Some(w) = tagged.windows(2).find(|w| w[1].1 <= w[0].1) {
                let column = match &schema {
                    CsvSchema::Long { date, .. } | CsvSchema::Wide { date } | CsvSchema::Single { date, .. } => date,
                    CsvSchema::Auto => unreachable!(),
                };
                return Err(p.err(
                    w[1].0,
                    column,
                    format!("dates of '{id}' not increasing: {} after {}", w[1].1, w[0].1),
                ));
            }
            let record = SeriesRecord {
                id,
                observations: tagged.into_iter().map(|(_, d, v)| (d, v)).collect(),
                source,
            };
            record.validate()?;
            Ok(record)
        })
        .collect()
}

fn record(p: &RowParser, rec: csv::Result<csv::StringRecord>) -> Result<(csv::StringRecord, usize)> {
    match rec {
        Ok(rec) => {
            let row = rec.position().map_or(0, |pos| pos.line() as usize);
            Ok((rec, row))
        }
        Err(e) => {
            let row = e.position().map_or(0, |pos| pos.line() as usize);
            Err(p.err(row, "", e.to_string()))
        }
    }
}

/// Reads and validates every series in a local CSV file.
pub fn read_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Vec<SeriesRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("series");
    parse_csv(&text, schema, Source::LocalCsv, stem)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
}

/// Minimal HTTP GET, so the fetch logic can run against a stub.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str, timeout: Duration) -> std::result::Result<HttpResponse, String>;
}

#[cfg(feature = "remote")]
#[derive(Debug, Clone, Copy, Default)]
pub struct HttpTransport;

#[cfg(feature = "remote")]
impl Transport for HttpTransport {
    fn get(&self, url: &str, timeout: Duration) -> std::result::Result<HttpResponse, String> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let mut response = agent.get(url).call().map_err(|e| e.to_string())?;
        let status = response.status().as_u16();
        let body = response.body_mut().read_to_vec().map_err(|e| e.to_string())?;
        Ok(HttpResponse { status, body })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub endpoint: String,
    #[serde(with = "secs")]
    pub timeout: Duration,
    /// Where fetched payloads are kept; nothing is written when `None`.
    pub cache_dir: Option<PathBuf>,
}

mod secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            endpoint: DEFAULT_ENDPOINT.to_string(),
            timeout: Duration::from_secs(30),
            cache_dir: None,
        }
    }
}

pub fn series_url(endpoint: &str, key: &str) -> String {
    format!("{}/{}?format=csvdata", endpoint.trim_end_matches('/'), key)
}

fn cache_stem(key: &str) -> String {
    key.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

#[derive(Serialize)]
struct CacheStamp<'a> {
    key: &'a str,
    url: &'a str,
    retrieved_at: String,
}

static CACHE_WRITES: Mutex<()> = Mutex::new(());

fn write_cache(dir: &Path, key: &str, url: &str, body: &[u8]) -> Result<()> {
    let _guard = CACHE_WRITES.lock().unwrap_or_else(|e| e.into_inner());
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = cache_stem(key);
    let data = dir.join(format!("{stem}.csv"));
    fs::write(&data, body).map_err(|e| Error::io(&data, e))?;
    let stamp = CacheStamp {
        key,
        url,
        retrieved_at: chrono::Utc::now().to_rfc3339(),
    };
    let meta = dir.join(format!("{stem}.json"));
    let json = serde_json::to_string_pretty(&stamp).expect("stamp serialises");
    fs::write(&meta, json).map_err(|e| Error::io(&meta, e))
}

/// Downloads one series and validates it exactly like a local file.
///
/// The payload may hold several series (long or wide layout); the one whose
/// id equals `key`, or the last `/`-separated segment of it, is returned.
/// The cache is written only after the payload has parsed.
pub fn fetch_remote(key: &str, config: &RemoteConfig, transport: &dyn Transport) -> Result<SeriesRecord> {
    let fetch_err = |message: String| Error::Fetch {
        key: key.to_string(),
        message,
    };
    let url = series_url(&config.endpoint, key);
    let response = transport.get(&url, config.timeout).map_err(fetch_err)?;
    if !(200..300).contains(&response.status) {
        return Err(fetch_err(format!("HTTP status {} from {url}", response.status)));
    }
    let text = String::from_utf8(response.body).map_err(|_| fetch_err("payload is not UTF-8".into()))?;
    let records = parse_csv(&text, &CsvSchema::Auto, Source::RemoteFetch, key)?;
    let short = key.rsplit('/').next().unwrap_or(key);
    let record = if records.len() == 1 {
        records.into_iter().next()
    } else {
        records.into_iter().find(|r| r.id == key || r.id == short)
    }
    .ok_or_else(|| fetch_err(format!("payload has no series '{key}'")))?;
    if let Some(dir) = &config.cache_dir {
        write_cache(dir, key, &url, text.as_bytes())?;
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wide_text() -> String {
        let mut s = String::from("date,AAA,BBB\n");
        for m in 1..=12 {
            s.push_str(&format!(
                "2019-{m:02},{},{}\n",
                1.0 + m as f64 * 0.1,
                2.0 - m as f64 * 0.05
            ));
        }
        s
    }

    fn long_text() -> String {
        let mut s = String::from("date,id,value\n");
        for id in ["AAA", "BBB"] {
            for m in 1..=12 {
                let v = if id == "AAA" {
                    1.0 + m as f64 * 0.1
                } else {
                    2.0 - m as f64 * 0.05
                };
                s.push_str(&format!("2019-{m:02}-01,{id},{v}\n"));
            }
        }
        s
    }

    fn parse_err(text: &str) -> (usize, String, String) {
        match parse_csv(text, &CsvSchema::Auto, Source::LocalCsv, "x") {
            Err(Error::Parse {
                row, column, message, ..
            }) => (row, column, message),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn wide_and_long_agree() {
        let wide = parse_csv(&wide_text(), &CsvSchema::wide(), Source::LocalCsv, "x").unwrap();
        let long = parse_csv(&long_text(), &CsvSchema::long(), Source::LocalCsv, "x").unwrap();
        assert_eq!(wide, long);
        assert_eq!(
            parse_csv(&long_text(), &CsvSchema::Auto, Source::LocalCsv, "x").unwrap(),
            wide
        );
        assert_eq!(wide[0].id, "AAA");
        assert_eq!(wide[0].observations.len(), 12);
        assert_eq!(wide[0].first_date(), NaiveDate::from_ymd_opt(2019, 1, 1));
    }

    #[test]
    fn diagnostics_name_row_and_column() {
        let bad = wide_text().replace("2019-05,1.5", "2019-05,oops");
        let (row, col, msg) = parse_err(&bad);
        assert_eq!((row, col.as_str()), (6, "AAA"));
        assert!(msg.contains("oops"));

        let (row, col, _) = parse_err(&wide_text().replace("2019-03", "2019-13"));
        assert_eq!((row, col.as_str()), (4, "date"));

        let (row, col, msg) = parse_err(&wide_text().replace("2019-04,", "2019-02,"));
        assert_eq!((row, col.as_str()), (5, "date"));
        assert!(msg.contains("not increasing"));

        let (row, col, msg) = parse_err(&wide_text().replace(",1.2,", ",,"));
        assert_eq!((row, col.as_str(), msg.as_str()), (3, "AAA", "missing value"));
    }

    #[test]
    fn rejects_empty_short_and_nonpositive() {
        assert!(parse_err("").2.contains("empty"));
        assert!(parse_err("date,AAA\n").2.contains("no data"));
        let short: String = wide_text().lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(parse_err(&short).2.contains("at least"));
        assert!(parse_err(&wide_text().replace(",1.2,", ",-1.2,"))
            .2
            .contains("positive"));
    }

    #[test]
    fn time_series_conversion() {
        let rec = &parse_csv(&wide_text(), &CsvSchema::Auto, Source::LocalCsv, "x").unwrap()[0];
        let raw = rec.to_time_series(false, false).unwrap();
        assert_eq!(raw.len(), 11);
        assert!((raw.x0() - 1.1).abs() < 1e-15);
        let centred = rec.to_time_series(false, true).unwrap();
        let total: f64 = centred.values().iter().sum::<f64>() + centred.x0();
        assert!(total.abs() < 1e-12);
        let logged = rec.to_time_series(true, false).unwrap();
        assert!((logged.x0() - 1.1f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn ecb_layout_detected() {
        let mut s = String::from("KEY,FREQ,TIME_PERIOD,OBS_VALUE\n");
        for m in 1..=10 {
            s.push_str(&format!("EXR.M,M,2020-{m:02},{}\n", 1.1 + m as f64 * 0.01));
        }
        let recs = parse_csv(&s, &CsvSchema::Auto, Source::RemoteFetch, "EXR/M.USD").unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].id, "EXR/M.USD");
    }

    #[test]
    fn url_and_cache_names() {
        assert_eq!(
            series_url("https://host/data/", "EXR/M.USD.EUR.SP00.A"),
            "https://host/data/EXR/M.USD.EUR.SP00.A?format=csvdata"
        );
        assert_eq!(cache_stem("EXR/M.USD"), "EXR_M_USD");
    }
}
