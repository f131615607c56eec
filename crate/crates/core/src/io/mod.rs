//! Dataset files, experiment reports and the LMFDB client.

pub mod lmfdb;
pub mod record;
pub mod report;

pub use lmfdb::{LmfdbClient, Selector};
pub use record::{load_dataset, load_records, save_dataset, save_records, FormRecord};
pub use report::ExperimentReport;

/// Path of the level-one fixture catalog shipped with the crate.
pub fn bundled_fixture() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/maass_level1.jsonl")
}
