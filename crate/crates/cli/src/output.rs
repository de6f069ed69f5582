//! Deterministic artifact emission: CSV tables and JSON summaries.

use std::path::PathBuf;

use crate::config::Format;
use crate::CliError;

/// Scientific notation with 17 significant digits — enough to reproduce
/// every f64 bit-for-bit when read back.
pub fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

/// Destination for a command's two artifacts.  With a basename, both are
/// written as `<base>.csv` and `<base>.json`; otherwise the chosen format
/// goes to stdout.
pub struct Sink<'a> {
    out: Option<&'a PathBuf>,
    format: Format,
}

impl<'a> Sink<'a> {
    pub fn new(out: Option<&'a PathBuf>, format: Format) -> Self {
        Sink { out, format }
    }

    pub fn emit(&self, csv: &str, json: &str) -> Result<(), CliError> {
        match self.out {
            Some(base) => {
                if let Some(parent) = base.parent() {
                    if !parent.as_os_str().is_empty() {
                        std::fs::create_dir_all(parent)?;
                    }
                }
                std::fs::write(base.with_extension("csv"), csv)?;
                std::fs::write(base.with_extension("json"), json)?;
            }
            None => match self.format {
                Format::Csv => print!("{csv}"),
                Format::Json => print!("{json}"),
            },
        }
        Ok(())
    }
}

/// Pretty JSON with a trailing newline; summaries are plain structs of
/// finite numbers, so serialization cannot fail.
pub fn to_json_string<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summaries serialize");
    s.push('\n');
    s
}
