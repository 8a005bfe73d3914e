//! Output files: atomic writes, config stamps, CSV and JSON envelopes.

use std::io::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const TOOLKIT: &str = concat!("dbicm ", env!("CARGO_PKG_VERSION"));

/// Identity of the configuration that produced an artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stamp {
    pub toolkit: String,
    pub config_sha256: String,
    pub config: serde_json::Value,
}

impl Stamp {
    pub fn new<T: Serialize>(config: &T) -> Result<Self> {
        let config = serde_json::to_value(config)?;
        let bytes = serde_json::to_vec(&config)?;
        let digest = Sha256::digest(&bytes);
        let config_sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        Ok(Self {
            toolkit: TOOLKIT.to_string(),
            config_sha256,
            config,
        })
    }

    /// `#`-prefixed header lines placed above CSV tables.
    pub fn csv_preamble(&self) -> String {
        format!(
            "# toolkit: {}\n# config_sha256: {}\n# config: {}\n",
            self.toolkit, self.config_sha256, self.config
        )
    }
}

/// Writes to a temporary file in the target directory, then renames it over
/// `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// CSV text with the stamp preamble.
pub fn csv_text(stamp: &Stamp, header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)?;
    Ok(stamp.csv_preamble() + &body)
}

pub fn write_csv(path: &Path, stamp: &Stamp, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    write_atomic(path, csv_text(stamp, header, rows)?.as_bytes())
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    toolkit: &'a str,
    config_sha256: &'a str,
    config: &'a serde_json::Value,
    kind: &'a str,
    result: &'a T,
}

pub fn json_text<T: Serialize>(stamp: &Stamp, kind: &str, result: &T) -> Result<String> {
    let env = Envelope {
        toolkit: &stamp.toolkit,
        config_sha256: &stamp.config_sha256,
        config: &stamp.config,
        kind,
        result,
    };
    Ok(serde_json::to_string_pretty(&env)? + "\n")
}

pub fn write_json<T: Serialize>(path: &Path, stamp: &Stamp, kind: &str, result: &T) -> Result<()> {
    write_atomic(path, json_text(stamp, kind, result)?.as_bytes())
}

/// Reads a CSV written by [`write_csv`], skipping the preamble.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<Result<_, _>>()?;
    Ok((header, rows))
}

/// Shortest decimal form that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Cfg {
        a: u32,
        b: &'static str,
    }

    #[test]
    fn stamp_is_stable_and_sensitive() {
        let s1 = Stamp::new(&Cfg { a: 1, b: "x" }).unwrap();
        let s2 = Stamp::new(&Cfg { a: 1, b: "x" }).unwrap();
        let s3 = Stamp::new(&Cfg { a: 2, b: "x" }).unwrap();
        assert_eq!(s1, s2);
        assert_ne!(s1.config_sha256, s3.config_sha256);
        assert_eq!(s1.config_sha256.len(), 64);
    }

    #[test]
    fn csv_round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/t.csv");
        let st = Stamp::new(&Cfg { a: 1, b: "x" }).unwrap();
        let rows = vec![vec!["1".to_string(), "0.5".to_string()]];
        write_csv(&p, &st, &["k", "v"], &rows).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("# toolkit: dbicm "));
        let (h, r) = read_csv(&p).unwrap();
        assert_eq!(h, vec!["k", "v"]);
        assert_eq!(r, rows);
    }
}
