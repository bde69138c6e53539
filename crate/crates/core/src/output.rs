//! Run directories, atomic file writes, CSV/PGM encoders and manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::circuit::SAMPLER_RNG;
use crate::config::{Config, InputDigest};
use crate::error::{Error, Result};

/// Writes `bytes` to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::param("path", format!("{} has no file name", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// CSV with a header row; values use the shortest exact decimal form.
pub fn csv_table<R: AsRef<[String]>>(header: &[&str], rows: &[R]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.as_ref().join(","));
        out.push('\n');
    }
    out
}

/// Header-less CSV matrix, `columns` values per line.
pub fn csv_matrix(columns: usize, values: &[f64]) -> Result<String> {
    let mut buf = Vec::new();
    crate::field::write_matrix_csv(&mut buf, columns, values)?;
    Ok(String::from_utf8(buf).expect("ascii"))
}

/// Binary 8-bit PGM, linearly scaled so the maximum maps to 255.
pub fn pgm(width: usize, height: usize, values: &[f64]) -> Result<Vec<u8>> {
    if values.len() != width * height {
        return Err(Error::ShapeMismatch(format!(
            "{} values for a {width}x{height} image",
            values.len()
        )));
    }
    let max = values.iter().cloned().fold(0.0_f64, f64::max);
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(values.iter().map(|&v| {
        if max > 0.0 {
            (v.max(0.0) / max * 255.0).round() as u8
        } else {
            0
        }
    }));
    Ok(out)
}

/// Output directory assembled under a hidden staging name and published by
/// rename. Dropping it unpublished deletes everything written so far.
#[derive(Debug)]
pub struct RunDir {
    staging: PathBuf,
    target: PathBuf,
    published: bool,
}

impl RunDir {
    /// Stages `<outdir>/<command>-<timestamp>-<seed>`.
    pub fn create(outdir: &Path, command: &str, timestamp: &str, seed: u64) -> Result<Self> {
        fs::create_dir_all(outdir)?;
        let name = format!("{command}-{timestamp}-{seed}");
        let target = outdir.join(&name);
        if target.exists() {
            return Err(Error::param("outdir", format!("{} already exists", target.display())));
        }
        let staging = outdir.join(format!(".{name}.partial"));
        if staging.exists() {
            fs::remove_dir_all(&staging)?;
        }
        fs::create_dir(&staging)?;
        Ok(RunDir {
            staging,
            target,
            published: false,
        })
    }

    pub fn target(&self) -> &Path {
        &self.target
    }

    pub fn write(&self, name: &str, bytes: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.staging.join(name);
        write_atomic(&path, bytes.as_ref())?;
        Ok(self.target.join(name))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }

    pub fn subdir(&self, name: &str) -> Result<()> {
        fs::create_dir_all(self.staging.join(name))?;
        Ok(())
    }

    pub fn publish(mut self) -> Result<PathBuf> {
        fs::rename(&self.staging, &self.target)?;
        self.published = true;
        Ok(self.target.clone())
    }
}

impl Drop for RunDir {
    fn drop(&mut self) {
        if !self.published {
            let _ = fs::remove_dir_all(&self.staging);
        }
    }
}

/// Provenance of one command invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: Vec<String>,
    pub config: Config,
    pub seed: u64,
    pub rng: String,
    pub version: String,
    pub started: String,
    pub finished: String,
    pub inputs: Vec<InputDigest>,
}

impl RunManifest {
    pub fn new(
        command: &str,
        arguments: Vec<String>,
        config: Config,
        inputs: Vec<InputDigest>,
        started: String,
    ) -> Self {
        RunManifest {
            command: command.to_string(),
            arguments,
            seed: config.seed,
            config,
            rng: SAMPLER_RNG.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            started,
            finished: String::new(),
            inputs,
        }
    }
}
