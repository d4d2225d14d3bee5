use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Component, Path, PathBuf};

use thiserror::Error;
use walkdir::WalkDir;

use super::{parse_resource, serialize, validate_set, ReadError, SerializeError, Severity, ValidationIssue};
use crate::archival_model::find_unit;
use crate::ead_io::{emit_ead, EadDocument};
use crate::iiif_build::ResourceSet;

#[derive(Debug, Error)]
pub enum SiteError {
    #[error("resource set has {} structural error(s); first: {}", .0.len(), .0[0])]
    Invalid(Vec<ValidationIssue>),
    #[error(transparent)]
    Serialize(#[from] SerializeError),
    #[error("{uri} does not map to a file under {base}")]
    UriOutsideBase { uri: String, base: String },
    #[error("no unit {unit_id} in the finding aid for {uri}")]
    MissingUnit { uri: String, unit_id: String },
    #[error("writing {path}: {source}")]
    IoFailure { path: PathBuf, source: io::Error },
}

/// Maps a URI under `base` to a relative file path. Rejects foreign hosts,
/// queries, fragments and any segment that would leave the site root.
pub fn path_for_uri(base: &str, uri: &str) -> Result<PathBuf, SiteError> {
    let outside = || SiteError::UriOutsideBase {
        uri: uri.to_string(),
        base: base.to_string(),
    };
    let rest = uri
        .strip_prefix(base.trim_end_matches('/'))
        .and_then(|r| r.strip_prefix('/'))
        .ok_or_else(outside)?;
    if rest.is_empty() || rest.contains(['?', '#', '\\']) {
        return Err(outside());
    }
    let path = PathBuf::from(rest);
    let clean = path.components().all(|c| matches!(c, Component::Normal(_)));
    if !clean || rest.split('/').any(|s| s.is_empty() || s == "." || s == "..") {
        return Err(outside());
    }
    Ok(path)
}

fn write(out_dir: &Path, rel: &Path, text: &str) -> Result<(), SiteError> {
    let path = out_dir.join(rel);
    let io_err = |source| SiteError::IoFailure {
        path: path.clone(),
        source,
    };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    fs::write(&path, text).map_err(io_err)
}

/// Writes every Collection and Manifest as JSON at the path its id names,
/// plus one EAD export per unit at the path its `seeAlso` names. Returns
/// the relative paths written, sorted. Existing files are overwritten.
pub fn write_site(set: &ResourceSet, doc: &EadDocument, out_dir: &Path) -> Result<Vec<PathBuf>, SiteError> {
    let errors: Vec<_> = validate_set(set)
        .into_iter()
        .filter(|i| i.severity == Severity::Error)
        .collect();
    if !errors.is_empty() {
        return Err(SiteError::Invalid(errors));
    }

    let mut files: BTreeMap<PathBuf, String> = BTreeMap::new();
    for (id, resource) in &set.by_id {
        files.insert(path_for_uri(&set.base_uri, id)?, serialize(resource)?);
        let unit_id = &set.provenance[id];
        for link in resource.see_also.iter().filter(|l| l.format == "text/xml") {
            let rel = path_for_uri(&set.base_uri, &link.id)?;
            if files.contains_key(&rel) {
                continue;
            }
            let unit = find_unit(&doc.root, unit_id).ok_or_else(|| SiteError::MissingUnit {
                uri: link.id.clone(),
                unit_id: unit_id.clone(),
            })?;
            files.insert(rel, emit_ead(&doc.for_unit(unit)));
        }
    }

    for (rel, text) in &files {
        write(out_dir, rel, text)?;
    }
    Ok(files.into_keys().collect())
}

/// Reads every `.json` file under `dir`, sorted by path.
pub fn load_site(dir: &Path) -> io::Result<Vec<(PathBuf, Result<crate::iiif_build::IiifResource, ReadError>)>> {
    let mut out = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(io::Error::other)?;
        if !entry.file_type().is_file() || entry.path().extension().is_none_or(|e| e != "json") {
            continue;
        }
        let text = fs::read_to_string(entry.path())?;
        out.push((entry.path().to_path_buf(), parse_resource(&text)));
    }
    Ok(out)
}
