//! File helpers: atomic writes and MPS files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use gridplan_core::lp::mps::{default_row_names, parse_mps, write_mps, MpsError, MpsModel};
use gridplan_core::lp::LinearProgram;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MpsFileError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: MpsError },
}

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Writes `lp` as fixed-format MPS with generated row names.
pub fn export_mps(lp: &LinearProgram, var_names: &[String], path: &Path) -> Result<(), MpsFileError> {
    export_mps_named(lp, var_names, &default_row_names(lp.num_rows()), path)
}

/// Writes `lp` as fixed-format MPS. An LP without columns still produces a
/// header-only file and then reports [`MpsError::NoColumns`].
pub fn export_mps_named(
    lp: &LinearProgram,
    var_names: &[String],
    row_names: &[String],
    path: &Path,
) -> Result<(), MpsFileError> {
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("GRIDPLAN")
        .to_string();
    let mut text = String::new();
    let status = write_mps(&mut text, &name, lp, var_names, row_names);
    if let Err(source @ (MpsError::NameCount { .. } | MpsError::DuplicateName(_) | MpsError::InvalidName(_))) =
        status
    {
        return Err(MpsFileError::Format {
            path: path.to_path_buf(),
            source,
        });
    }
    write_atomic(path, text.as_bytes()).map_err(|source| MpsFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    status.map_err(|source| MpsFileError::Format {
        path: path.to_path_buf(),
        source,
    })
}

pub fn import_mps(path: &Path) -> Result<MpsModel, MpsFileError> {
    let text = fs::read_to_string(path).map_err(|source| MpsFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_mps(&text).map_err(|source| MpsFileError::Format {
        path: path.to_path_buf(),
        source,
    })
}
