//! Matrix and label files, model persistence and run configuration.

mod config;
mod matrix_file;
mod model_file;

use std::io::Write;
use std::path::Path;

use crate::error::Result;

pub use config::{parse_bool, RunConfig, TaskSource, TaskSpec};
pub use matrix_file::{
    parse_labels, parse_matrix, read_labels, read_matrix, render_dense, render_matrix, write_labels, write_matrix,
};
pub use model_file::{decode_model, encode_model, load_model, save_model, ModelFile, FORMAT_VERSION, MAGIC};

/// Writes `bytes` to a temporary file beside `path`, then renames it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
