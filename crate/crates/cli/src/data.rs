use std::fs;
use std::path::Path;

use idp_core::Sample;

use crate::CliError;

/// Reads one observation per line. Blank lines and lines starting with `#`
/// are ignored; everything else must parse as a finite real with a `.`
/// decimal separator.
pub fn read_sample(path: &Path) -> Result<Sample, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let token = line.trim();
        if token.is_empty() || token.starts_with('#') {
            continue;
        }
        let value: f64 = token.parse().map_err(|_| {
            CliError::data(format!(
                "{}:{}: not a number: `{token}`",
                path.display(),
                lineno + 1
            ))
        })?;
        values.push(value);
    }
    Sample::new(values).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}
