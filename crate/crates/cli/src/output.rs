//! Report files, their digests and the run manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Digest of an input file, recorded under the name it was given as.
pub fn digest_input(shown: &Path, actual: &Path) -> CliResult<FileDigest> {
    let data = std::fs::read(actual).map_err(|e| CliError::io(actual, e))?;
    Ok(FileDigest {
        path: shown.display().to_string(),
        bytes: data.len() as u64,
        sha256: sha256_hex(&data),
    })
}

/// Output directory that remembers what was written to it.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<FileDigest>,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.written.retain(|f| f.path != name);
        self.written.push(FileDigest {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::data(format!("{name}: {e}")))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// The header is written even when `rows` is empty.
    pub fn write_csv<T: Serialize>(&mut self, name: &str, header: &[&str], rows: &[T]) -> CliResult<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(header).map_err(|e| CliError::data(format!("{name}: {e}")))?;
        for r in rows {
            w.serialize(r).map_err(|e| CliError::data(format!("{name}: {e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::data(format!("{name}: {e}")))?;
        self.write(name, &bytes)
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish<C: Serialize>(mut self, command: &str, config: &C, inputs: Vec<FileDigest>) -> CliResult<PathBuf> {
        let mut outputs = std::mem::take(&mut self.written);
        outputs.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config,
            inputs,
            outputs,
        };
        self.write_json(MANIFEST, &manifest)?;
        Ok(self.root)
    }
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    generated_at: String,
    config: &'a C,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

/// Plain-text table with a header rule. Columns after the first are right-aligned.
pub fn text_table(title: &str, headers: &[&str], rows: &[Vec<String>], notes: &[String]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| -> String {
        let parts: Vec<String> = cells
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = format!("{title}\n\n");
    out += &line(&mut headers.iter().copied());
    out.push('\n');
    out += &"-".repeat(widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1));
    out.push('\n');
    for r in rows {
        out += &line(&mut r.iter().map(String::as_str));
        out.push('\n');
    }
    if !notes.is_empty() {
        out.push('\n');
        for n in notes {
            out += n;
            out.push('\n');
        }
    }
    out
}

/// Fixed decimals with thousands separators.
pub fn grouped(x: f64, decimals: usize) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{:.*}", decimals, x.abs());
    let (int, frac) = s.split_once('.').map_or((s.as_str(), None), |(i, f)| (i, Some(f)));
    let mut g = String::new();
    for (i, ch) in int.chars().enumerate() {
        if i > 0 && (int.len() - i) % 3 == 0 {
            g.push(',');
        }
        g.push(ch);
    }
    let sign = if x < 0.0 && s.chars().any(|c| c.is_ascii_digit() && c != '0') { "-" } else { "" };
    match frac {
        Some(f) => format!("{sign}{g}.{f}"),
        None => format!("{sign}{g}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grouping() {
        assert_eq!(grouped(648_468.84, 1), "648,468.8");
        assert_eq!(grouped(-1234.5, 2), "-1,234.50");
        assert_eq!(grouped(12.0, 0), "12");
        assert_eq!(grouped(-0.0001, 2), "0.00");
        assert_eq!(grouped(f64::INFINITY, 2), "inf");
    }

    #[test]
    fn table_layout() {
        let t = text_table("T", &["name", "v"], &[vec!["a".into(), "10".into()], vec!["bb".into(), "2".into()]], &[]);
        assert_eq!(t, "T\n\nname   v\n--------\na     10\nbb     2\n");
    }

    #[test]
    fn manifest_lists_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        out.write("b.txt", b"b").unwrap();
        out.write("sub/a.txt", b"a").unwrap();
        out.finish("test", &serde_json::json!({"k": 1}), vec![]).unwrap();
        let m: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(MANIFEST)).unwrap()).unwrap();
        assert_eq!(m["outputs"][0]["path"], "b.txt");
        assert_eq!(m["outputs"][1]["sha256"], sha256_hex(b"a"));
        assert_eq!(m["config"]["k"], 1);
    }
}
