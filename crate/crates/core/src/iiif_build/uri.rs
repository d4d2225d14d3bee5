use std::collections::HashMap;

use thiserror::Error;

use super::{BuildConfig, ResourceKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MintError {
    #[error("unit ids {first:?} and {second:?} share the slug {slug:?}")]
    SlugCollision {
        first: String,
        second: String,
        slug: String,
    },
    #[error("unit id {0:?} has no alphanumeric characters to build a slug from")]
    EmptySlug(String),
    #[error("canvas URIs need an ordinal")]
    MissingOrdinal,
}

/// Lower-cases, replaces every run of characters outside `[a-z0-9]` with
/// a single `-`, and trims dashes from both ends.
pub fn slugify(unit_id: &str) -> String {
    let mut slug = String::with_capacity(unit_id.len());
    let mut dash = false;
    for c in unit_id.chars().flat_map(char::to_lowercase) {
        if c.is_ascii_alphanumeric() {
            if dash && !slug.is_empty() {
                slug.push('-');
            }
            dash = false;
            slug.push(c);
        } else {
            dash = true;
        }
    }
    slug
}

/// `{base}/collection/{slug}.json`, `{base}/manifest/{slug}.json` or
/// `{base}/manifest/{slug}/canvas/{ordinal}`.
pub fn mint_uri(
    config: &BuildConfig,
    kind: ResourceKind,
    unit_id: &str,
    ordinal: Option<usize>,
) -> Result<String, MintError> {
    let slug = slugify(unit_id);
    if slug.is_empty() {
        return Err(MintError::EmptySlug(unit_id.to_string()));
    }
    let base = config.base_uri();
    Ok(match kind {
        ResourceKind::Collection => format!("{base}/collection/{slug}.json"),
        ResourceKind::Manifest => format!("{base}/manifest/{slug}.json"),
        ResourceKind::Canvas => {
            let n = ordinal.ok_or(MintError::MissingOrdinal)?;
            format!("{base}/manifest/{slug}/canvas/{n}")
        }
    })
}

/// Tracks which unit claimed each slug so two units never share URIs.
#[derive(Debug, Default)]
pub struct SlugRegistry {
    owners: HashMap<String, String>,
}

impl SlugRegistry {
    pub fn claim(&mut self, unit_id: &str) -> Result<String, MintError> {
        let slug = slugify(unit_id);
        if slug.is_empty() {
            return Err(MintError::EmptySlug(unit_id.to_string()));
        }
        match self.owners.get(&slug) {
            Some(owner) if owner != unit_id => Err(MintError::SlugCollision {
                first: owner.clone(),
                second: unit_id.to_string(),
                slug,
            }),
            Some(_) => Ok(slug),
            None => {
                self.owners.insert(slug.clone(), unit_id.to_string());
                Ok(slug)
            }
        }
    }
}
