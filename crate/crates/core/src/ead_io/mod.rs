//! EAD3 finding aids in and out, plus the media inventory and the
//! `HH:MM:SS` duration notation used in physical descriptions.

mod duration;
mod emit;
mod inventory;
mod parse;

pub use duration::{extent_duration, format_duration, parse_duration, DurationError};
pub use emit::emit_ead;
pub use inventory::{parse_media_inventory, InventoryError};
pub use parse::{parse_ead, parse_ead_with, EadError};

use crate::archival_model::ArchivalUnit;

pub const EAD3_NAMESPACE: &str = "http://ead3.archivists.org/schema/";

/// A parsed finding aid. The `<control>` block is kept as raw markup and
/// replayed unchanged on emission.
#[derive(Debug, Clone, PartialEq)]
pub struct EadDocument {
    pub control_header: String,
    pub root: ArchivalUnit,
    pub namespace: String,
}

impl EadDocument {
    pub fn new(control_header: impl Into<String>, root: ArchivalUnit) -> Self {
        Self {
            control_header: control_header.into(),
            root,
            namespace: EAD3_NAMESPACE.to_string(),
        }
    }

    /// A standalone finding aid for one unit and its descendants, sharing
    /// this document's control header.
    pub fn for_unit(&self, unit: &ArchivalUnit) -> EadDocument {
        let mut root = unit.clone();
        root.source_order = 0;
        EadDocument {
            control_header: self.control_header.clone(),
            root,
            namespace: self.namespace.clone(),
        }
    }
}

/// Collapses internal whitespace runs to single spaces and trims.
pub(crate) fn normalize_space(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
