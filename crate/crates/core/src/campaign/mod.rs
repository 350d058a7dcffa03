//! Config-driven batch runs with reproducible, hash-stamped artifacts.
//!
//! A run writes to `<out>/<config hash>/`. CSV tables open with a
//! `# config_hash=<hex>` line, JSON objects carry a `config_hash` key and field
//! snapshots carry it in their text header. Apart from `manifest.json`, which
//! records timestamps and wall time, every payload is byte-identical on rerun.

mod config;
mod output;
mod report;
mod run;

pub use config::{
    parse_config, parse_config_str, CampaignKind, FieldPreset, GammaSection, GridSection, MaxprinSection,
    NoisePreset, OracleKind, OracleSection, PicardSection, RefineSection, RunConfig, SolverSection,
    TruncationSection, UniquenessSection,
};
pub use output::{check_single_hash, file_hash, ArtifactDir, MANIFEST, SUMMARY};
pub use report::{render_report, RenderedReport, TABLE_ROWS};
pub use run::{run_campaign, CampaignOutcome, Status};
