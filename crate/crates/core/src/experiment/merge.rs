use std::path::Path;

use super::{Summary, DIAGNOSTICS_FILE};
use crate::error::{Error, Result};
use crate::hyperdiag::CSV_COLUMNS;

/// Concatenates the per-slice CSVs of several run directories, tagging each
/// row with the directory name in a leading `run` column.
///
/// Every directory must hold a summary of the current schema version and a
/// CSV with the standard header.
pub fn merge_reports(dirs: &[&Path]) -> Result<String> {
    if dirs.is_empty() {
        return Err(Error::InvalidArgument("nothing to merge".into()));
    }
    let header = CSV_COLUMNS.join(",");
    let mut out = format!("run,{header}\n");
    for dir in dirs {
        Summary::read(dir)?;
        let name = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| dir.display().to_string());
        if name.contains(',') {
            return Err(Error::InvalidArgument(format!(
                "run name '{name}' contains a comma"
            )));
        }
        let path = dir.join(DIAGNOSTICS_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut lines = text.lines();
        if lines.next() != Some(header.as_str()) {
            return Err(Error::Inconsistent(format!(
                "{}: unexpected header",
                path.display()
            )));
        }
        for row in lines {
            out.push_str(&name);
            out.push(',');
            out.push_str(row);
            out.push('\n');
        }
    }
    Ok(out)
}
