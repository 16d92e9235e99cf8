//! Output helpers: deterministic number formatting and file-or-stdout
//! writing.

use std::fs;
use std::path::PathBuf;

use screenopt::Error;

/// 17 significant digits: round-trip safe for f64 and byte-stable across
/// runs.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_text(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    let text = if text.ends_with('\n') {
        text.to_string()
    } else {
        format!("{text}\n")
    };
    match out {
        Some(path) => {
            fs::write(path, text)?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
