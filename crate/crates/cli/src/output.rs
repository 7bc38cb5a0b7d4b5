//! Deterministic output writers. Every float is printed as `{:.16e}` so
//! that reruns of the same job produce byte-identical files.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::CliError;

/// JSON formatter that pins `f64` output to 17 significant digits in
/// scientific notation instead of the shortest round-trip form.
struct FixedFloatFormatter;

impl Formatter for FixedFloatFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes `value` as compact JSON with pinned float formatting.
pub fn json_string<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloatFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Invalid(format!("serializing output: {e}")))?;
    String::from_utf8(buf).map_err(|e| CliError::Invalid(format!("serializing output: {e}")))
}

/// Writes `value` to `path` as a single line of JSON.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = json_string(value)?;
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| CliError::Invalid(format!("writing {}: {e}", path.display())))
}

/// Formats one float the same way the JSON writer does.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a CSV file. When `config_echo` is given it becomes a leading
/// `# config: ...` comment line carrying the resolved job config.
pub fn write_csv(
    path: &Path,
    config_echo: Option<&str>,
    header: &[String],
    rows: &[Vec<f64>],
) -> Result<(), CliError> {
    let mut text = String::new();
    if let Some(echo) = config_echo {
        text.push_str("# config: ");
        text.push_str(echo);
        text.push('\n');
    }
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| fmt_float(*x)).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    fs::write(path, text)
        .map_err(|e| CliError::Invalid(format!("writing {}: {e}", path.display())))
}
