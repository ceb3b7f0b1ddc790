//! `relative_path,label` manifests over P5 PGM files.

use std::fs;
use std::path::{Path, PathBuf};

use scnv_core::data::{decode_pgm, encode_pgm, preprocess, Dataset, Sample};
use scnv_core::metrics::Label;

use crate::error::{Error, Result};

pub const MANIFEST_NAME: &str = "manifest.csv";

fn parse_label(text: &str) -> std::result::Result<Label, String> {
    match text.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(format!("label must be 0 or 1, got {other:?}")),
    }
}

fn load_entry(base: &Path, line: &str) -> std::result::Result<Sample, String> {
    let (rel, label) = line
        .rsplit_once(',')
        .ok_or_else(|| "expected `relative_path,label`".to_string())?;
    let label = parse_label(label)?;
    let rel = rel.trim();
    if rel.is_empty() {
        return Err("empty image path".into());
    }
    let path = base.join(rel);
    let bytes = fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let image = decode_pgm(&bytes)
        .and_then(|img| preprocess(&img))
        .map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(Sample {
        image,
        label,
        source_id: rel.to_string(),
    })
}

/// Loads every manifest entry in order, resizing images to 100×100. Blank
/// lines are skipped; any bad line fails the load, and the error lists each
/// bad line by number.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut samples = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match load_entry(base, line) {
            Ok(s) => samples.push(s),
            Err(msg) => errors.push((i + 1, msg)),
        }
    }
    if !errors.is_empty() {
        return Err(Error::Manifest {
            path: path.to_path_buf(),
            errors,
        });
    }
    if samples.is_empty() {
        return Err(scnv_core::Error::Input(format!("manifest {} has no entries", path.display())).into());
    }
    Ok(Dataset::new(samples)?)
}

/// Writes each sample as `images/<source_id>.pgm` under `dir` plus a
/// manifest listing them in order. Returns the manifest path.
pub fn write_dataset(dataset: &Dataset, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    let images = dir.join("images");
    fs::create_dir_all(&images).map_err(|e| Error::io(&images, e))?;
    let mut manifest = String::new();
    for s in dataset.samples() {
        let rel = format!("images/{}.pgm", s.source_id);
        let file = dir.join(&rel);
        fs::write(&file, encode_pgm(&s.image)?).map_err(|e| Error::io(&file, e))?;
        manifest.push_str(&format!("{rel},{}\n", s.label));
    }
    let path = dir.join(MANIFEST_NAME);
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
