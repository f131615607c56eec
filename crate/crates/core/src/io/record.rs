//! JSON-lines dataset records.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hecke::{MaassFormData, Parity, Source};

/// One line of a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormRecord {
    pub label: String,
    pub r: f64,
    pub parity: u8,
    /// (p, lambda(p)) for every prime up to the largest listed.
    pub eigs: Vec<(u64, f64)>,
    pub source: Source,
    /// RFC 3339 timestamp.
    pub fetched_at: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_alpha: Option<f64>,
}

impl FormRecord {
    pub fn from_form(form: &MaassFormData, fetched_at: &str, provenance: Option<String>) -> Self {
        Self {
            label: form.label.clone(),
            r: form.r,
            parity: form.parity.epsilon(),
            eigs: form.pairs().collect(),
            source: form.source,
            fetched_at: fetched_at.to_string(),
            provenance,
            norm_alpha: form.norm_alpha,
        }
    }

    pub fn to_form(&self) -> Result<MaassFormData> {
        if chrono::DateTime::parse_from_rfc3339(&self.fetched_at).is_err() {
            return Err(Error::validation(&self.label, format!("fetched_at {:?} is not RFC 3339", self.fetched_at)));
        }
        let parity = Parity::from_epsilon(self.parity).map_err(|e| Error::validation(&self.label, e.to_string()))?;
        let mut form = MaassFormData::new(self.label.clone(), self.r, parity, self.eigs.clone(), self.source)?;
        form.norm_alpha = self.norm_alpha;
        Ok(form)
    }
}

/// Current UTC time in RFC 3339 with second precision.
pub fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Raw records, with 1-based line numbers in parse errors. Blank lines are skipped.
pub fn load_records(path: &Path) -> Result<Vec<FormRecord>> {
    let file = fs::File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: FormRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Parse { path: path.to_path_buf(), line: i + 1, reason: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}

/// Load and validate every record.
pub fn load_dataset(path: &Path) -> Result<Vec<MaassFormData>> {
    load_records(path)?.iter().map(FormRecord::to_form).collect()
}

/// Write records atomically (temporary file in the same directory, then rename).
pub fn save_records(path: &Path, records: &[FormRecord]) -> Result<()> {
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r)?;
        buf.push(b'\n');
    }
    write_atomic(path, &buf)
}

pub fn save_dataset(path: &Path, forms: &[MaassFormData], fetched_at: &str) -> Result<()> {
    let records: Vec<FormRecord> = forms.iter().map(|f| FormRecord::from_form(f, fetched_at, None)).collect();
    save_records(path, &records)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let unique = COUNTER.fetch_add(1, Ordering::Relaxed);
    let tmp = dir.join(format!(".{name}.tmp-{}-{unique}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
