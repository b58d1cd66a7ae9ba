use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::blockcore::{Block2, C64};

/// IO failure with the path involved.
#[derive(Debug, thiserror::Error)]
#[error("{}: {source}", path.display())]
pub struct IoError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

/// 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// `re+imj` with 17 significant digits on both parts.
pub fn fmt_complex(z: C64) -> String {
    format!("{:.16e}{:+.16e}j", z.re, z.im)
}

/// Collects files in memory and writes them in one go.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(PathBuf, String)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<PathBuf>, body: String) {
        self.files.push((name.into(), body));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut body = serde_json::to_string_pretty(value).expect("report types serialize");
        body.push('\n');
        self.add(name, body);
    }

    /// Writes every file under `dir`, creating directories as needed.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, IoError> {
        let mut written = Vec::new();
        for (name, body) in &self.files {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|source| IoError { path: parent.to_path_buf(), source })?;
            }
            fs::write(&path, body).map_err(|source| IoError { path: path.clone(), source })?;
            written.push(path);
        }
        Ok(written)
    }

    pub fn names(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }
}

/// CSV text from a header and rows of preformatted cells.
pub fn csv(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Two-column whitespace-separated text.
pub fn plot_columns(points: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut out = String::new();
    for (x, y) in points {
        writeln!(out, "{} {}", fmt_real(x), fmt_real(y)).expect("writing to a String");
    }
    out
}

/// The four entries of a block as CSV cells, row-major.
pub fn block_cells(b: &Block2) -> Vec<String> {
    b.0.iter().flatten().map(|&z| fmt_complex(z)).collect()
}

/// Headers `{prefix}11, {prefix}12, {prefix}21, {prefix}22`.
pub fn block_header(prefix: &str) -> Vec<String> {
    ["11", "12", "21", "22"].iter().map(|e| format!("{prefix}{e}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_format_round_trips() {
        let z = C64::new(0.1, -2.0 / 3.0);
        assert_eq!(fmt_complex(z), "1.0000000000000001e-1-6.6666666666666663e-1j");
        assert_eq!(fmt_complex(C64::new(-1.0, 0.0)), "-1.0000000000000000e0+0.0000000000000000e0j");
    }

    #[test]
    fn reals_use_seventeen_digits() {
        assert_eq!(fmt_real(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_real(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
