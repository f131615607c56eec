//! LMFDB client for level-one Maass newforms with an on-disk cache.
//!
//! Cache layout: `<cache_dir>/<selector-hash>.jsonl`, one validated record per line, written
//! atomically. A cached selector is served without network access.
//!
//! Upstream mapping (isolated in [`parse_upstream`]): each object in the `data` array must carry
//! `maass_label`, `spectral_parameter`, `symmetry` (0 even, 1 odd), `level` and `coefficients`
//! (a(1), a(2), ...). Missing or mistyped fields are reported as schema drift.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::record::{load_dataset, now_rfc3339, save_records, FormRecord};
use crate::error::{Error, Result};
use crate::hecke::{MaassFormData, Source};
use crate::special::primes::primes_up_to;

pub const DEFAULT_BASE_URL: &str = "https://www.lmfdb.org";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Selector {
    Label { label: String },
    Range { r_min: f64, r_max: f64 },
}

impl Selector {
    fn canonical(&self) -> String {
        match self {
            Selector::Label { label } => format!("label={label}"),
            Selector::Range { r_min, r_max } => format!("range={r_min:?}..{r_max:?}"),
        }
    }

    pub fn cache_key(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        hex::encode(&digest[..16])
    }

    fn validate(&self) -> Result<()> {
        match self {
            Selector::Label { label } if label.trim().is_empty() => Err(Error::invalid("empty label selector")),
            Selector::Range { r_min, r_max } if !(r_min <= r_max) => {
                Err(Error::invalid(format!("empty spectral range [{r_min}, {r_max}]")))
            }
            _ => Ok(()),
        }
    }

    fn accepts(&self, label: &str, r: f64) -> bool {
        match self {
            Selector::Label { label: want } => want == label,
            Selector::Range { r_min, r_max } => *r_min <= r && r <= *r_max,
        }
    }
}

pub struct LmfdbClient {
    base_url: String,
    cache_dir: PathBuf,
    http: reqwest::blocking::Client,
    retries: u32,
    backoff: Duration,
}

impl LmfdbClient {
    pub fn new(base_url: impl Into<String>, cache_dir: impl Into<PathBuf>) -> Result<Self> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(60))
            .user_agent(concat!("maass-universality/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| Error::Network(e.to_string()))?;
        Ok(Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            cache_dir: cache_dir.into(),
            http,
            retries: 3,
            backoff: Duration::from_millis(500),
        })
    }

    /// Base delay of the exponential backoff (delay = base * 2^attempt).
    pub fn with_backoff(mut self, base: Duration) -> Self {
        self.backoff = base;
        self
    }

    pub fn cache_path(&self, sel: &Selector) -> PathBuf {
        self.cache_dir.join(format!("{}.jsonl", sel.cache_key()))
    }

    /// Records for the selector, from cache when present.
    pub fn fetch(&self, sel: &Selector) -> Result<Vec<MaassFormData>> {
        sel.validate()?;
        let path = self.cache_path(sel);
        let guard = selector_lock(&sel.cache_key());
        let _held = guard.lock().expect("selector lock");
        if path.exists() {
            return load_dataset(&path);
        }
        let records = self.download(sel)?;
        let forms = records.iter().map(FormRecord::to_form).collect::<Result<Vec<_>>>()?;
        save_records(&path, &records)?;
        Ok(forms)
    }

    fn download(&self, sel: &Selector) -> Result<Vec<FormRecord>> {
        let mut url = format!("{}/api/maass_newforms/?_format=json&level=1", self.base_url);
        if let Selector::Label { label } = sel {
            url.push_str(&format!("&maass_label={label}"));
        }
        let fetched_at = now_rfc3339();
        let mut out = Vec::new();
        let mut next = Some(url);
        let mut pages = 0;
        while let Some(u) = next.take() {
            pages += 1;
            if pages > 1000 {
                return Err(Error::SchemaDrift("pagination does not terminate".into()));
            }
            let body = self.get_with_retry(&u)?;
            let (records, following) = parse_upstream(&body, &fetched_at)?;
            out.extend(records.into_iter().filter(|r| sel.accepts(&r.label, r.r)));
            next = following.map(|n| if n.starts_with("http") { n } else { format!("{}{}", self.base_url, n) });
        }
        Ok(out)
    }

    fn get_with_retry(&self, url: &str) -> Result<Value> {
        let mut last = String::new();
        for attempt in 0..=self.retries {
            if attempt > 0 {
                thread::sleep(self.backoff * 2u32.pow(attempt - 1));
            }
            match self.http.get(url).send() {
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        let text = resp.text().map_err(|e| Error::Network(e.to_string()))?;
                        return serde_json::from_str(&text)
                            .map_err(|e| Error::SchemaDrift(format!("response is not JSON: {e}")));
                    }
                    last = format!("HTTP {status} from {url}");
                    if !(status.as_u16() == 429 || status.is_server_error()) {
                        return Err(Error::Network(last));
                    }
                }
                Err(e) => last = e.to_string(),
            }
        }
        Err(Error::Network(format!("giving up after {} retries: {last}", self.retries)))
    }
}

fn selector_lock(key: &str) -> Arc<Mutex<()>> {
    static LOCKS: OnceLock<Mutex<HashMap<String, Arc<Mutex<()>>>>> = OnceLock::new();
    LOCKS
        .get_or_init(|| Mutex::new(HashMap::new()))
        .lock()
        .expect("lock registry")
        .entry(key.to_string())
        .or_default()
        .clone()
}

fn field<'a>(obj: &'a Value, name: &str) -> Result<&'a Value> {
    obj.get(name).ok_or_else(|| Error::SchemaDrift(format!("missing field `{name}`")))
}

fn number(v: &Value, name: &str) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
    .ok_or_else(|| Error::SchemaDrift(format!("field `{name}` is not numeric: {v}")))
}

/// Map one upstream page to records and the next-page link.
pub fn parse_upstream(body: &Value, fetched_at: &str) -> Result<(Vec<FormRecord>, Option<String>)> {
    let data = field(body, "data")?
        .as_array()
        .ok_or_else(|| Error::SchemaDrift("`data` is not an array".into()))?;
    let mut out = Vec::with_capacity(data.len());
    for obj in data {
        let label = field(obj, "maass_label")?
            .as_str()
            .ok_or_else(|| Error::SchemaDrift("`maass_label` is not a string".into()))?
            .to_string();
        let level = number(field(obj, "level")?, "level")?;
        if level != 1.0 {
            continue;
        }
        let r = number(field(obj, "spectral_parameter")?, "spectral_parameter")?;
        let symmetry = number(field(obj, "symmetry")?, "symmetry")?;
        let parity = if symmetry == 0.0 {
            0
        } else if symmetry == 1.0 {
            1
        } else {
            return Err(Error::SchemaDrift(format!("symmetry {symmetry} for {label}")));
        };
        let coeffs: Vec<f64> = field(obj, "coefficients")?
            .as_array()
            .ok_or_else(|| Error::SchemaDrift("`coefficients` is not an array".into()))?
            .iter()
            .map(|v| number(v, "coefficients"))
            .collect::<Result<_>>()?;
        let a1 = *coeffs
            .first()
            .ok_or_else(|| Error::validation(&label, "no coefficients upstream"))?;
        if a1 == 0.0 || !a1.is_finite() {
            return Err(Error::validation(&label, format!("a(1) = {a1} cannot be normalized")));
        }
        let eigs = primes_up_to(coeffs.len() as u64)
            .into_iter()
            .map(|p| (p, coeffs[p as usize - 1] / a1))
            .collect();
        let provenance = if a1 == 1.0 {
            Some("lmfdb maass_newforms".to_string())
        } else {
            Some(format!("lmfdb maass_newforms; divided by a(1) = {a1:?}"))
        };
        out.push(FormRecord {
            label,
            r,
            parity,
            eigs,
            source: Source::Lmfdb,
            fetched_at: fetched_at.to_string(),
            provenance,
            norm_alpha: None,
        });
    }
    let next = match body.get("next") {
        Some(Value::String(s)) if !s.is_empty() => Some(s.clone()),
        _ => None,
    };
    Ok((out, next))
}

/// Cache file for a selector under `dir`.
pub fn cache_file(dir: &Path, sel: &Selector) -> PathBuf {
    dir.join(format!("{}.jsonl", sel.cache_key()))
}
