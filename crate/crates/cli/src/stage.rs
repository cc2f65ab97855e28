//! File helpers shared by the subcommands: opening inputs, fingerprints and
//! the sidecar files that let the pipeline skip finished stages.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::CliError;

pub fn open_input(path: &Path) -> Result<BufReader<File>, CliError> {
    if !path.exists() {
        return Err(CliError::Usage(format!("input path does not exist: {}", path.display())));
    }
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("cannot open {}: {e}", path.display())))
}

pub fn create_output(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", path.display())))
}

pub fn file_digest(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::runtime(format!("cannot read {}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Hash of a stage's name, configuration text and input digests.
pub fn fingerprint(stage: &str, config: &str, inputs: &[String]) -> String {
    let mut h = Sha256::new();
    h.update(stage.as_bytes());
    h.update([0]);
    h.update(config.as_bytes());
    for i in inputs {
        h.update([0]);
        h.update(i.as_bytes());
    }
    hex::encode(h.finalize())
}

fn stamp_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".stamp");
    output.with_file_name(name)
}

/// True when every output exists, matches its recorded digest and was made
/// by a stage with the same fingerprint.
pub fn is_fresh(outputs: &[&Path], stage_fingerprint: &str) -> bool {
    outputs.iter().all(|out| {
        let Ok(stamp) = fs::read_to_string(stamp_path(out)) else {
            return false;
        };
        let mut lines = stamp.lines();
        let (Some(fp), Some(digest)) = (lines.next(), lines.next()) else {
            return false;
        };
        fp == stage_fingerprint && file_digest(out).is_ok_and(|d| d == digest)
    })
}

pub fn write_stamp(output: &Path, stage_fingerprint: &str) -> Result<(), CliError> {
    let digest = file_digest(output)?;
    let mut f = create_output(&stamp_path(output))?;
    writeln!(f, "{stage_fingerprint}\n{digest}").map_err(CliError::io)?;
    f.flush().map_err(CliError::io)
}

/// Path of the metadata sidecar written next to an embedding file.
pub fn meta_path(embedding: &Path) -> PathBuf {
    let mut name = embedding.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.toml");
    embedding.with_file_name(name)
}
