use std::fs;
use std::path::PathBuf;
use std::time::Duration;

use unitroot_core::data_io::{fetch_remote, read_csv, CsvSchema, HttpResponse, RemoteConfig, Transport};
use unitroot_core::{Error, Source};

struct Stub {
    status: u16,
    body: Vec<u8>,
}

impl Transport for Stub {
    fn get(&self, _url: &str, _timeout: Duration) -> Result<HttpResponse, String> {
        Ok(HttpResponse {
            status: self.status,
            body: self.body.clone(),
        })
    }
}

struct Unreachable;

impl Transport for Unreachable {
    fn get(&self, url: &str, _timeout: Duration) -> Result<HttpResponse, String> {
        Err(format!("connection refused: {url}"))
    }
}

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/rer_2010_2020.csv")
}

fn config(dir: &tempfile::TempDir) -> RemoteConfig {
    RemoteConfig {
        endpoint: "https://example.invalid/data".into(),
        cache_dir: Some(dir.path().join("cache")),
        ..RemoteConfig::default()
    }
}

#[test]
fn stub_payload_matches_local_read() {
    let dir = tempfile::tempdir().unwrap();
    let stub = Stub {
        status: 200,
        body: fs::read(fixture()).unwrap(),
    };
    let fetched = fetch_remote("EUR", &config(&dir), &stub).unwrap();
    let local = read_csv(fixture(), &CsvSchema::Auto).unwrap();
    let eur = local.iter().find(|r| r.id == "EUR").unwrap();
    assert_eq!(fetched.observations, eur.observations);
    assert_eq!(fetched.source, Source::RemoteFetch);
    assert!(dir.path().join("cache/EUR.csv").exists());
    let stamp = fs::read_to_string(dir.path().join("cache/EUR.json")).unwrap();
    assert!(stamp.contains("retrieved_at"));
}

#[test]
fn http_error_writes_no_cache() {
    let dir = tempfile::tempdir().unwrap();
    let stub = Stub {
        status: 500,
        body: b"oops".to_vec(),
    };
    let err = fetch_remote("EUR", &config(&dir), &stub).unwrap_err();
    assert!(matches!(err, Error::Fetch { .. }), "{err}");
    assert!(err.to_string().contains("500"));
    assert!(!dir.path().join("cache").exists());
}

#[test]
fn network_failure_is_a_fetch_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = fetch_remote("EUR", &config(&dir), &Unreachable).unwrap_err();
    assert!(matches!(err, Error::Fetch { .. }));
    assert!(err.to_string().contains("retry"));
}

#[test]
fn truncated_payload_is_a_remote_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture()).unwrap();
    let cut = text.lines().take(40).collect::<Vec<_>>().join("\n");
    let cut = &cut[..cut.len() - 12];
    let stub = Stub {
        status: 200,
        body: cut.as_bytes().to_vec(),
    };
    match fetch_remote("EUR", &config(&dir), &stub).unwrap_err() {
        Error::Parse { source_kind, row, .. } => {
            assert_eq!(source_kind, Source::RemoteFetch);
            assert_eq!(row, 40);
        }
        other => panic!("expected a parse error, got {other}"),
    }
    assert!(!dir.path().join("cache").exists());
}
