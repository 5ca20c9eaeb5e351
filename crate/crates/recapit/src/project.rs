//! Manifest loading, validation and atomic persistence.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use recapit_core::model::{InvariantError, WorkshopProject};

use crate::error::{Error, Result};

pub const MANIFEST_NAME: &str = "project.json";

/// Manifest file for `path`, which may name the manifest or its directory.
pub fn manifest_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(MANIFEST_NAME)
    } else {
        path.to_path_buf()
    }
}

/// Directory that source paths and derived outputs are relative to.
pub fn project_dir(path: &Path) -> PathBuf {
    let manifest = manifest_path(path);
    match manifest.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

pub fn parse_session_start(value: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(value).ok().map(|t| t.with_timezone(&Utc))
}

/// Deserializes a manifest, reporting schema violations with their field path.
pub fn parse_manifest(bytes: &[u8], origin: &Path) -> Result<WorkshopProject> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        Error::Schema {
            path: origin.to_path_buf(),
            field,
            message: e.into_inner().to_string(),
        }
    })
}

/// Reads, validates and checks that every referenced source exists.
pub fn load_project(path: &Path) -> Result<WorkshopProject> {
    let manifest = manifest_path(path);
    let bytes = fs::read(&manifest).map_err(|e| Error::io(&manifest, e))?;
    let project = parse_manifest(&bytes, &manifest)?;
    project.validate()?;
    if parse_session_start(&project.session_start).is_none() {
        return Err(InvariantError::new("session_start", "not an RFC 3339 timestamp").into());
    }
    let dir = project_dir(path);
    for src in &project.sources {
        let p = dir.join(&src.path);
        if !p.exists() {
            return Err(Error::MissingFile { path: p });
        }
    }
    Ok(project)
}

/// Writes `bytes` to `dest` through a temporary file in the same directory and
/// an atomic rename, so readers see either the old or the new content.
pub fn write_atomic(dest: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match dest.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(dest).map_err(|e| Error::io(dest, e.error))?;
    Ok(())
}

pub fn to_pretty_json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("in-memory values serialize");
    out.push(b'\n');
    out
}

/// Validates and atomically writes the manifest.
pub fn save_project(project: &WorkshopProject, path: &Path) -> Result<()> {
    project.validate()?;
    write_atomic(&manifest_path(path), &to_pretty_json(project))
}
