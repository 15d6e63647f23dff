//! CSV formatting, atomic file output and run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::CliError;

/// Fixed 17-significant-digit scientific notation, independent of locale.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_bytes<I, R>(header: &[String], rows: I) -> Result<Vec<u8>, CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer
        .into_inner()
        .map_err(|e| CliError::Io(e.into_error()))
}

/// Writes through a temporary file in the destination directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

/// Writes to `path`, or stdout when none is given.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest<C: Serialize> {
    pub command: &'static str,
    pub config: C,
    pub tool_version: &'static str,
    pub timestamp: String,
    pub outputs: Vec<PathBuf>,
}

impl<C: Serialize> RunManifest<C> {
    pub fn new(command: &'static str, config: C, outputs: Vec<PathBuf>) -> Self {
        Self {
            command,
            config,
            tool_version: env!("CARGO_PKG_VERSION"),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            outputs,
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut json = serde_json::to_vec_pretty(self)?;
        json.push(b'\n');
        write_atomic(path, &json)
    }
}

/// Explicit manifest path, else `<out>.manifest.json` next to the data file.
pub fn manifest_path(explicit: Option<&Path>, out: Option<&Path>) -> Option<PathBuf> {
    explicit.map(Path::to_path_buf).or_else(|| {
        out.map(|o| {
            let mut name = o.as_os_str().to_owned();
            name.push(".manifest.json");
            PathBuf::from(name)
        })
    })
}
