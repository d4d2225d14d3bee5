//! Media inventory: JSON Lines, one asset per line.
//!
//! ```text
//! {"unit_id":"IL8600011581","asset_id":"v1","kind":"video","format":"video/mp4","location":"media/IL8600011581.mp4","duration_s":1920}
//! ```
//!
//! Required fields are `unit_id`, `asset_id`, `kind` (`image|video|audio`),
//! `format` and `location`; `width_px`, `height_px`, `duration_s` and
//! `thumbnail` are conditional on the kind. Blank lines and lines starting
//! with `#` are ignored.

use serde::Deserialize;
use thiserror::Error;

use crate::archival_model::{MediaAsset, MediaError, MediaInventory, MediaKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InventoryError {
    #[error("inventory row {row}: {message}")]
    SchemaViolation { row: usize, message: String },
    #[error("inventory row {row}: {source}")]
    MissingRequiredExtent { row: usize, source: MediaError },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Row {
    unit_id: String,
    asset_id: String,
    kind: MediaKind,
    format: String,
    location: String,
    width_px: Option<u32>,
    height_px: Option<u32>,
    duration_s: Option<f64>,
    thumbnail: Option<String>,
}

pub fn parse_media_inventory(text: &str) -> Result<MediaInventory, InventoryError> {
    let mut inventory = MediaInventory::new();
    for (idx, line) in text.lines().enumerate() {
        let row = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let schema = |message: String| InventoryError::SchemaViolation { row, message };
        let r: Row = serde_json::from_str(line).map_err(|e| schema(e.to_string()))?;
        if r.unit_id.trim().is_empty() {
            return Err(schema("empty unit_id".into()));
        }
        let asset = MediaAsset {
            asset_id: r.asset_id,
            kind: r.kind,
            location: r.location,
            media_format: r.format,
            width: r.width_px,
            height: r.height_px,
            duration: r.duration_s,
            thumbnail: r.thumbnail,
        };
        match asset.check() {
            Ok(()) => {}
            Err(source @ MediaError::MissingExtent { .. }) if asset.kind != MediaKind::Image => {
                return Err(InventoryError::MissingRequiredExtent { row, source })
            }
            Err(e) => return Err(schema(e.to_string())),
        }
        let assets = inventory.entry(r.unit_id).or_default();
        if assets.iter().any(|a| a.asset_id == asset.asset_id) {
            return Err(schema(format!("duplicate asset_id {:?}", asset.asset_id)));
        }
        assets.push(asset);
    }
    Ok(inventory)
}
