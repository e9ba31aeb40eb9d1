//! File formats, run manifests and the command implementations behind the
//! `stochstab` binary.

pub mod config;
pub mod error;
pub mod format;
pub mod grid;
pub mod manifest;
pub mod run;
pub mod spec;

pub use config::RunConfig;
pub use error::{CliError, ExitKind};
pub use manifest::RunManifest;
pub use run::{execute, run, simulate_parallel, Execution, Report};
pub use spec::{parse_system_spec, read_system_spec, SpecError, SystemSpec};
