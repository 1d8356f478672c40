//! Configuration, initial data, persistence and run orchestration.

pub mod config;
pub mod diagnostics;
pub mod init;
pub mod pipeline;
pub mod snapshot;

pub use config::{Family, RunConfig};
pub use diagnostics::{emit_diagnostics, DiagnosticsRow};
pub use init::initial_data;
pub use pipeline::{run_pipeline, simulate};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};
