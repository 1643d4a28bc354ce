use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use arena_core::domain::ScoreRecord;
use serde::Serialize;

use crate::CliError;

/// One JSON document per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut out, item).map_err(|e| CliError::io(path, e))?;
        out.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
    }
    out.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_records(path: &Path, records: &[ScoreRecord]) -> Result<(), CliError> {
    write_jsonl(path, records)
}

/// Parse a results file; blank lines are skipped.
pub fn read_records(path: &Path) -> Result<Vec<ScoreRecord>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CliError::Usage(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}
