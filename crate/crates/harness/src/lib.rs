//! Instance files, image ingestion, benchmarks, diagnostics and validation
//! behind the `dsfm` command-line tool.

pub mod bench;
pub mod diagnose;
pub mod error;
pub mod format;
pub mod ingest;
pub mod validate;

pub use error::{HarnessError, Result};
pub use format::{load_instance, read_instance, save_instance, write_instance};
