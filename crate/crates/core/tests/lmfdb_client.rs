use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use maass_universality::hecke::Source;
use maass_universality::io::record::FormRecord;
use maass_universality::io::{save_records, LmfdbClient, Selector};
use maass_universality::Error;
use serde_json::json;

/// Canned HTTP server: answers the i-th request with `responses[min(i, len - 1)]`.
struct Mock {
    url: String,
    hits: Arc<AtomicUsize>,
    paths: Arc<Mutex<Vec<String>>>,
}

fn serve(responses: Vec<(u16, String)>, delay: Duration) -> Mock {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let paths = Arc::new(Mutex::new(Vec::new()));
    let (h, ps) = (hits.clone(), paths.clone());
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { break };
            let i = h.fetch_add(1, Ordering::SeqCst);
            let (status, body) = responses[i.min(responses.len() - 1)].clone();
            let ps = ps.clone();
            thread::spawn(move || answer(stream, status, &body, delay, &ps));
        }
    });
    Mock { url, hits, paths }
}

fn answer(mut stream: TcpStream, status: u16, body: &str, delay: Duration, paths: &Mutex<Vec<String>>) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut first = String::new();
    reader.read_line(&mut first).unwrap();
    paths.lock().unwrap().push(first.split_whitespace().nth(1).unwrap_or("").to_string());
    loop {
        let mut l = String::new();
        if reader.read_line(&mut l).unwrap() == 0 || l == "\r\n" {
            break;
        }
    }
    thread::sleep(delay);
    let reply = format!(
        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
    let _ = stream.write_all(reply.as_bytes());
}

fn page(items: serde_json::Value) -> String {
    json!({ "data": items }).to_string()
}

/// a(n) for n <= 12 with lambda(2) = l2, lambda(3) = l3 and the rest of the primes at 0.5, scaled by a1.
fn coefficients(a1: f64, l2: f64, l3: f64) -> Vec<f64> {
    let mut c = [0.0; 12];
    c[0] = 1.0;
    c[1] = l2;
    c[2] = l3;
    c[4] = 0.5;
    c[6] = 0.5;
    c[10] = 0.5;
    c.iter().map(|v| v * a1).collect()
}

fn upstream_form(label: &str, r: f64, coeffs: Vec<f64>) -> serde_json::Value {
    json!({ "maass_label": label, "spectral_parameter": r, "symmetry": 1, "level": 1, "coefficients": coeffs })
}

fn client(url: &str, dir: &std::path::Path) -> LmfdbClient {
    LmfdbClient::new(url, dir).unwrap().with_backoff(Duration::from_millis(5))
}

fn label(l: &str) -> Selector {
    Selector::Label { label: l.to_string() }
}

#[test]
fn cache_hit_makes_no_requests() {
    let dir = tempfile::tempdir().unwrap();
    let mock = serve(vec![(500, String::new())], Duration::ZERO);
    let c = client(&mock.url, dir.path());
    let sel = label("1.9.53");
    let rec = FormRecord {
        label: "1.9.53".into(),
        r: 9.53,
        parity: 1,
        eigs: vec![(2, -1.07), (3, -0.46)],
        source: Source::Lmfdb,
        fetched_at: "2024-01-01T00:00:00Z".into(),
        provenance: None,
        norm_alpha: None,
    };
    save_records(&c.cache_path(&sel), &[rec]).unwrap();
    let forms = c.fetch(&sel).unwrap();
    assert_eq!(forms.len(), 1);
    assert_eq!(forms[0].lambda_p(3).unwrap(), -0.46);
    assert_eq!(mock.hits.load(Ordering::SeqCst), 0);
}

#[test]
fn download_then_cache() {
    let dir = tempfile::tempdir().unwrap();
    let body = page(json!([upstream_form("1.9.53", 9.53, coefficients(1.0, -1.0, 0.25))]));
    let mock = serve(vec![(200, body)], Duration::ZERO);
    let c = client(&mock.url, dir.path());
    let forms = c.fetch(&label("1.9.53")).unwrap();
    assert_eq!(forms[0].primes(), &[2, 3, 5, 7, 11]);
    assert_eq!(forms[0].lambda_p(2).unwrap(), -1.0);
    assert!(c.cache_path(&label("1.9.53")).exists());
    assert_eq!(c.fetch(&label("1.9.53")).unwrap(), forms);
    assert_eq!(mock.hits.load(Ordering::SeqCst), 1);
    let path = mock.paths.lock().unwrap()[0].clone();
    assert!(path.contains("maass_label=1.9.53") && path.contains("level=1"), "{path}");
}

#[test]
fn rate_limit_is_retried() {
    let dir = tempfile::tempdir().unwrap();
    let body = page(json!([upstream_form("a", 9.53, coefficients(1.0, 0.1, 0.2))]));
    let mock = serve(vec![(429, String::new()), (200, body)], Duration::ZERO);
    let forms = client(&mock.url, dir.path()).fetch(&label("a")).unwrap();
    assert_eq!(forms.len(), 1);
    assert_eq!(mock.hits.load(Ordering::SeqCst), 2);
}

#[test]
fn persistent_server_errors_become_network_errors() {
    let dir = tempfile::tempdir().unwrap();
    let mock = serve(vec![(503, String::new())], Duration::ZERO);
    let c = client(&mock.url, dir.path());
    assert!(matches!(c.fetch(&label("a")), Err(Error::Network(_))));
    assert_eq!(mock.hits.load(Ordering::SeqCst), 4);
    assert!(!c.cache_path(&label("a")).exists());
}

#[test]
fn client_errors_are_not_retried() {
    let dir = tempfile::tempdir().unwrap();
    let mock = serve(vec![(404, String::new())], Duration::ZERO);
    assert!(matches!(client(&mock.url, dir.path()).fetch(&label("a")), Err(Error::Network(_))));
    assert_eq!(mock.hits.load(Ordering::SeqCst), 1);
}

#[test]
fn unreachable_host_is_network_error() {
    let dir = tempfile::tempdir().unwrap();
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let c = client(&format!("http://127.0.0.1:{port}"), dir.path());
    assert!(matches!(c.fetch(&label("a")), Err(Error::Network(_))));
}

#[test]
fn schema_drift() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        json!({ "results": [] }).to_string(),
        page(json!([{ "maass_label": "a", "level": 1, "symmetry": 0, "coefficients": [1.0] }])),
        page(json!([{ "maass_label": "a", "level": 1, "spectral_parameter": 9.5, "symmetry": 0, "coefficients": "none" }])),
        page(json!([{ "maass_label": "a", "level": 1, "spectral_parameter": 9.5, "symmetry": 3, "coefficients": [1.0] }])),
        "<html>maintenance</html>".to_string(),
    ];
    for body in cases {
        let mock = serve(vec![(200, body.clone())], Duration::ZERO);
        let err = client(&mock.url, dir.path()).fetch(&label("a")).unwrap_err();
        assert!(matches!(err, Error::SchemaDrift(_)), "{body}: {err}");
    }
}

#[test]
fn empty_result_is_cached() {
    let dir = tempfile::tempdir().unwrap();
    let mock = serve(vec![(200, page(json!([])))], Duration::ZERO);
    let c = client(&mock.url, dir.path());
    let sel = Selector::Range { r_min: 1.0, r_max: 2.0 };
    assert!(c.fetch(&sel).unwrap().is_empty());
    assert!(c.fetch(&sel).unwrap().is_empty());
    assert_eq!(mock.hits.load(Ordering::SeqCst), 1);
}

#[test]
fn first_coefficient_is_normalized() {
    let dir = tempfile::tempdir().unwrap();
    let body = page(json!([upstream_form("a", 9.53, coefficients(-3.0, 0.8, -0.4))]));
    let mock = serve(vec![(200, body)], Duration::ZERO);
    let c = client(&mock.url, dir.path());
    let forms = c.fetch(&label("a")).unwrap();
    assert!((forms[0].lambda_p(2).unwrap() - 0.8).abs() < 1e-15);
    assert!((forms[0].lambda_p(3).unwrap() + 0.4).abs() < 1e-15);
    let cached = std::fs::read_to_string(c.cache_path(&label("a"))).unwrap();
    assert!(cached.contains("a(1)"));

    let body = page(json!([upstream_form("z", 9.53, vec![0.0, 1.0])]));
    let mock = serve(vec![(200, body)], Duration::ZERO);
    assert!(matches!(client(&mock.url, dir.path()).fetch(&label("z")), Err(Error::Validation { .. })));
}

#[test]
fn out_of_bound_eigenvalue_rejected_and_not_cached() {
    let dir = tempfile::tempdir().unwrap();
    let body = page(json!([upstream_form("a", 9.53, coefficients(1.0, 3.0, 0.1))]));
    let mock = serve(vec![(200, body)], Duration::ZERO);
    let c = client(&mock.url, dir.path());
    assert!(matches!(c.fetch(&label("a")), Err(Error::BoundViolation { p: 2, .. })));
    assert!(!c.cache_path(&label("a")).exists());
}

#[test]
fn range_selector_filters_and_follows_pages() {
    let dir = tempfile::tempdir().unwrap();
    let first = json!({
        "data": [upstream_form("lo", 5.0, coefficients(1.0, 0.1, 0.1)), upstream_form("in", 9.5, coefficients(1.0, 0.2, 0.2))],
        "next": "/api/maass_newforms/?_format=json&level=1&_offset=2"
    })
    .to_string();
    let second = page(json!([upstream_form("in2", 12.1, coefficients(1.0, 0.3, 0.3)), upstream_form("hi", 20.0, coefficients(1.0, 0.1, 0.1))]));
    let mock = serve(vec![(200, first), (200, second)], Duration::ZERO);
    let forms = client(&mock.url, dir.path()).fetch(&Selector::Range { r_min: 9.0, r_max: 13.0 }).unwrap();
    let labels: Vec<&str> = forms.iter().map(|f| f.label.as_str()).collect();
    assert_eq!(labels, ["in", "in2"]);
    assert_eq!(mock.hits.load(Ordering::SeqCst), 2);
}

#[test]
fn concurrent_fetches_share_one_download() {
    let dir = tempfile::tempdir().unwrap();
    let body = page(json!([upstream_form("shared", 9.53, coefficients(1.0, 0.1, 0.2))]));
    let mock = serve(vec![(200, body)], Duration::from_millis(200));
    let c = Arc::new(client(&mock.url, dir.path()));
    let handles: Vec<_> = (0..6)
        .map(|_| {
            let c = c.clone();
            thread::spawn(move || c.fetch(&label("shared")).unwrap())
        })
        .collect();
    let results: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert!(results.windows(2).all(|w| w[0] == w[1]));
    assert_eq!(mock.hits.load(Ordering::SeqCst), 1);
}

#[test]
fn selector_validation() {
    let dir = tempfile::tempdir().unwrap();
    let c = client("http://127.0.0.1:9", dir.path());
    assert!(matches!(c.fetch(&label(" ")), Err(Error::InvalidArgument(_))));
    assert!(matches!(c.fetch(&Selector::Range { r_min: 3.0, r_max: 1.0 }), Err(Error::InvalidArgument(_))));
    assert_ne!(label("a").cache_key(), label("b").cache_key());
    assert_eq!(label("a").cache_key(), label("a").cache_key());
}
