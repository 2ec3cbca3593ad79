//! CSV/JSON writers and validated JSON loading.

use crate::errors::{io_context, CliError, CliResult};
use crate::manifest::MANIFEST_FILE;
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// Floats are printed with 17 significant digits so parsing them back
/// recovers the exact f64.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a CSV with a `# manifest:` reference line, a header, and
/// full-precision float rows.
pub fn write_csv<I>(path: &Path, columns: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut buf = String::new();
    buf.push_str(&format!("# manifest: {MANIFEST_FILE}\n"));
    buf.push_str(&columns.join(","));
    buf.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        let cells: Vec<String> = row.iter().map(|v| fmt_float(*v)).collect();
        buf.push_str(&cells.join(","));
        buf.push('\n');
    }
    let mut file = io_context(
        &format!("creating {}", path.display()),
        std::fs::File::create(path),
    )?;
    io_context(&format!("writing {}", path.display()), file.write_all(buf.as_bytes()))
}

/// Serialize a JSON output with the manifest reference injected at the
/// top level.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut v = serde_json::to_value(value).expect("output serialization");
    if let Some(map) = v.as_object_mut() {
        map.insert("manifest".to_string(), serde_json::Value::String(MANIFEST_FILE.into()));
    }
    let text = serde_json::to_string_pretty(&v).expect("output serialization") + "\n";
    io_context(&format!("writing {}", path.display()), std::fs::write(path, text))
}

/// Load and schema-validate a JSON input; parse errors carry the file
/// path and the line/column diagnostics from the parser.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = io_context(&format!("reading {}", path.display()), std::fs::read_to_string(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
