use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use softret::calib::TsaiCamera;
use softret::cascade::{parse_results, FrameResult};
use softret::detect::{parse_detection_stream, DetectionRecord};
use softret::model::{parse_query, parse_sequence, SemanticQuery, SequenceAnnotation};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn annotations(path: &Path) -> Result<SequenceAnnotation> {
    parse_sequence(&read_text(path)?)
        .with_context(|| format!("invalid annotations in {}", path.display()))
}

pub fn calibration(path: &Path) -> Result<TsaiCamera> {
    serde_json::from_str(&read_text(path)?)
        .with_context(|| format!("invalid calibration in {}", path.display()))
}

pub fn query(path: &Path) -> Result<SemanticQuery> {
    parse_query(&read_text(path)?).with_context(|| format!("invalid query in {}", path.display()))
}

pub fn detections(path: &Path) -> Result<Vec<DetectionRecord>> {
    parse_detection_stream(&read_text(path)?)
        .with_context(|| format!("invalid detections in {}", path.display()))
}

pub fn results(path: &Path) -> Result<Vec<FrameResult>> {
    parse_results(&read_text(path)?)
        .with_context(|| format!("invalid results in {}", path.display()))
}

pub fn json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    serde_json::from_str(&read_text(path)?)
        .with_context(|| format!("invalid {what} in {}", path.display()))
}

pub fn require_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        bail!("file not found: {}", path.display());
    }
    Ok(())
}

pub fn require_dir(path: &Path) -> Result<()> {
    if !path.is_dir() {
        bail!("directory not found: {}", path.display());
    }
    Ok(())
}

/// `rel` interpreted relative to `base` unless absolute.
pub fn resolve(base: &Path, rel: &Path) -> PathBuf {
    if rel.is_absolute() {
        rel.to_path_buf()
    } else {
        base.join(rel)
    }
}
