//! Deterministic report writers.
//!
//! Tabular reports go to CSV or JSON depending on `--format`; structured
//! dumps (forests, spectra, greedy certificates) are always JSON. Field
//! order follows the row structs, so identical configs produce identical
//! bytes.

use clap::ValueEnum;
use paraosc::error::{Error, Result};
use paraosc::serialize::write_json;
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Output format for tabular reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Writes `rows` as `<stem>.csv` or `<stem>.json` under `dir` and
/// returns the chosen path.
pub fn write_table<T: Serialize>(
    dir: &Path,
    stem: &str,
    format: OutputFormat,
    rows: &[T],
) -> Result<PathBuf> {
    match format {
        OutputFormat::Csv => {
            let path = dir.join(format!("{stem}.csv"));
            let mut writer = csv::Writer::from_path(&path).map_err(flatten_csv)?;
            for row in rows {
                writer.serialize(row).map_err(flatten_csv)?;
            }
            writer.flush()?;
            Ok(path)
        }
        OutputFormat::Json => {
            let path = dir.join(format!("{stem}.json"));
            write_json(&path, &rows)?;
            Ok(path)
        }
    }
}

fn flatten_csv(err: csv::Error) -> Error {
    Error::Io(std::io::Error::other(err))
}
