//! The archival tree: fonds, series, subseries, files and items, with the
//! integrity rules every other stage relies on.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Archival stratum. The derived ordering is the nesting order: a child
/// must always compare strictly greater than its parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArchivalLevel {
    Fonds,
    Series,
    Subseries,
    File,
    Item,
}

impl ArchivalLevel {
    pub const ALL: [ArchivalLevel; 5] = [
        ArchivalLevel::Fonds,
        ArchivalLevel::Series,
        ArchivalLevel::Subseries,
        ArchivalLevel::File,
        ArchivalLevel::Item,
    ];

    /// The EAD3 `@level` token.
    pub fn ead_name(self) -> &'static str {
        match self {
            ArchivalLevel::Fonds => "fonds",
            ArchivalLevel::Series => "series",
            ArchivalLevel::Subseries => "subseries",
            ArchivalLevel::File => "file",
            ArchivalLevel::Item => "item",
        }
    }

    /// Display name in the given language. Italian follows archival usage
    /// in Italian finding aids; everything else falls back to English.
    pub fn display_name(self, lang: &str) -> &'static str {
        if lang == "it" {
            match self {
                ArchivalLevel::Fonds => "fondo",
                ArchivalLevel::Series => "serie",
                ArchivalLevel::Subseries => "sottoserie",
                ArchivalLevel::File => "fascicolo",
                ArchivalLevel::Item => "documento",
            }
        } else {
            self.ead_name()
        }
    }
}

impl fmt::Display for ArchivalLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.ead_name())
    }
}

/// Maps EAD `@level` strings (and `@otherlevel` values) onto the five
/// modeled levels. Unmapped strings are a hard error at parse time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelMap {
    entries: BTreeMap<String, ArchivalLevel>,
}

impl Default for LevelMap {
    fn default() -> Self {
        let mut entries: BTreeMap<String, ArchivalLevel> = ArchivalLevel::ALL
            .iter()
            .map(|l| (l.ead_name().to_string(), *l))
            .collect();
        entries.insert("collection".into(), ArchivalLevel::Fonds);
        entries.insert("recordgrp".into(), ArchivalLevel::Series);
        entries.insert("subgrp".into(), ArchivalLevel::Subseries);
        entries.insert("subfonds".into(), ArchivalLevel::Series);
        Self { entries }
    }
}

impl LevelMap {
    pub fn insert(&mut self, ead_level: impl Into<String>, level: ArchivalLevel) {
        self.entries.insert(ead_level.into().to_lowercase(), level);
    }

    pub fn resolve(&self, ead_level: &str) -> Option<ArchivalLevel> {
        self.entries.get(&ead_level.trim().to_lowercase()).copied()
    }
}

/// Index-term category; the serialized spelling is the interchange spelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TermCategory {
    #[serde(rename = "subject")]
    Subject,
    #[serde(rename = "place")]
    Place,
    #[serde(rename = "person")]
    Person,
    #[serde(rename = "corporate")]
    CorporateBody,
}

impl TermCategory {
    pub const ALL: [TermCategory; 4] = [
        TermCategory::Subject,
        TermCategory::Place,
        TermCategory::Person,
        TermCategory::CorporateBody,
    ];

    /// Order in which `<controlaccess>` groups terms.
    pub const EMIT_ORDER: [TermCategory; 4] = [
        TermCategory::Subject,
        TermCategory::Place,
        TermCategory::CorporateBody,
        TermCategory::Person,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TermCategory::Subject => "subject",
            TermCategory::Place => "place",
            TermCategory::Person => "person",
            TermCategory::CorporateBody => "corporate",
        }
    }

    pub fn parse(s: &str) -> Option<TermCategory> {
        TermCategory::ALL.into_iter().find(|c| c.as_str() == s)
    }

    /// EAD3 element carrying terms of this category inside `<controlaccess>`.
    pub fn ead_element(self) -> &'static str {
        match self {
            TermCategory::Subject => "subject",
            TermCategory::Place => "geogname",
            TermCategory::Person => "persname",
            TermCategory::CorporateBody => "corpname",
        }
    }

    pub fn from_ead_element(name: &str) -> Option<TermCategory> {
        TermCategory::ALL
            .into_iter()
            .find(|c| c.ead_element() == name)
    }

    pub fn emit_rank(self) -> usize {
        TermCategory::EMIT_ORDER
            .iter()
            .position(|c| *c == self)
            .unwrap_or(usize::MAX)
    }
}

impl fmt::Display for TermCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An index term, possibly normalized against a thesaurus or authority file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessTerm {
    pub category: TermCategory,
    pub part: String,
    pub source: Option<String>,
    pub identifier: Option<String>,
    pub normal_form: Option<String>,
}

impl AccessTerm {
    pub fn new(category: TermCategory, part: impl Into<String>) -> Self {
        Self {
            category,
            part: part.into(),
            source: None,
            identifier: None,
            normal_form: None,
        }
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn with_identifier(mut self, identifier: impl Into<String>) -> Self {
        self.identifier = Some(identifier.into());
        self
    }

    pub fn with_normal_form(mut self, normal: impl Into<String>) -> Self {
        self.normal_form = Some(normal.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MediaKind {
    Image,
    Video,
    Audio,
}

impl MediaKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MediaKind::Image => "image",
            MediaKind::Video => "video",
            MediaKind::Audio => "audio",
        }
    }
}

/// A digitized representation of an item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediaAsset {
    pub asset_id: String,
    pub kind: MediaKind,
    /// Absolute URI, or a path relative to the published media root.
    pub location: String,
    pub media_format: String,
    pub width: Option<u32>,
    pub height: Option<u32>,
    /// Seconds.
    pub duration: Option<f64>,
    pub thumbnail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MediaError {
    #[error("asset {asset_id}: {kind} requires {missing}")]
    MissingExtent {
        asset_id: String,
        kind: &'static str,
        missing: &'static str,
    },
    #[error("asset {asset_id}: duration must be a positive number of seconds")]
    BadDuration { asset_id: String },
    #[error("asset {asset_id}: width and height must be positive")]
    BadDimensions { asset_id: String },
    #[error("asset {asset_id}: empty {field}")]
    EmptyField {
        asset_id: String,
        field: &'static str,
    },
}

impl MediaAsset {
    pub fn image(
        asset_id: impl Into<String>,
        location: impl Into<String>,
        media_format: impl Into<String>,
        width: u32,
        height: u32,
    ) -> Self {
        Self {
            asset_id: asset_id.into(),
            kind: MediaKind::Image,
            location: location.into(),
            media_format: media_format.into(),
            width: Some(width),
            height: Some(height),
            duration: None,
            thumbnail: None,
        }
    }

    pub fn video(
        asset_id: impl Into<String>,
        location: impl Into<String>,
        media_format: impl Into<String>,
        duration: f64,
    ) -> Self {
        Self {
            asset_id: asset_id.into(),
            kind: MediaKind::Video,
            location: location.into(),
            media_format: media_format.into(),
            width: None,
            height: None,
            duration: Some(duration),
            thumbnail: None,
        }
    }

    pub fn audio(
        asset_id: impl Into<String>,
        location: impl Into<String>,
        media_format: impl Into<String>,
        duration: f64,
    ) -> Self {
        Self {
            kind: MediaKind::Audio,
            ..Self::video(asset_id, location, media_format, duration)
        }
    }

    pub fn check(&self) -> Result<(), MediaError> {
        let asset_id = || self.asset_id.clone();
        if self.asset_id.trim().is_empty() {
            return Err(MediaError::EmptyField {
                asset_id: asset_id(),
                field: "asset_id",
            });
        }
        if self.location.trim().is_empty() {
            return Err(MediaError::EmptyField {
                asset_id: asset_id(),
                field: "location",
            });
        }
        if self.media_format.trim().is_empty() {
            return Err(MediaError::EmptyField {
                asset_id: asset_id(),
                field: "format",
            });
        }
        if let Some(d) = self.duration {
            if !(d.is_finite() && d > 0.0) {
                return Err(MediaError::BadDuration {
                    asset_id: asset_id(),
                });
            }
        }
        if self.width == Some(0) || self.height == Some(0) {
            return Err(MediaError::BadDimensions {
                asset_id: asset_id(),
            });
        }
        match self.kind {
            MediaKind::Image => {
                if self.width.is_none() || self.height.is_none() {
                    return Err(MediaError::MissingExtent {
                        asset_id: asset_id(),
                        kind: "image",
                        missing: "width and height",
                    });
                }
            }
            MediaKind::Video | MediaKind::Audio => {
                if self.duration.is_none() {
                    return Err(MediaError::MissingExtent {
                        asset_id: asset_id(),
                        kind: self.kind.as_str(),
                        missing: "duration",
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extent {
    pub quantity: u32,
    pub unit_type: String,
    pub note: String,
}

/// One node of the archival tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchivalUnit {
    pub unit_id: String,
    pub country_code: Option<String>,
    pub level: ArchivalLevel,
    pub title: String,
    pub date_display: String,
    pub date_normal: Option<String>,
    pub extent: Option<Extent>,
    pub scope_note: Option<String>,
    pub repository: Option<String>,
    /// Institution-specific fields in source order, e.g. ("regia", ...).
    pub descriptive_pairs: Vec<(String, String)>,
    pub access_terms: Vec<AccessTerm>,
    pub media: Vec<MediaAsset>,
    pub children: Vec<ArchivalUnit>,
    pub source_order: usize,
}

impl ArchivalUnit {
    pub fn new(unit_id: impl Into<String>, level: ArchivalLevel, title: impl Into<String>) -> Self {
        Self {
            unit_id: unit_id.into(),
            country_code: None,
            level,
            title: title.into(),
            date_display: String::new(),
            date_normal: None,
            extent: None,
            scope_note: None,
            repository: None,
            descriptive_pairs: Vec::new(),
            access_terms: Vec::new(),
            media: Vec::new(),
            children: Vec::new(),
            source_order: 0,
        }
    }

    /// Appends a child, assigning it the next source position.
    pub fn push_child(&mut self, mut child: ArchivalUnit) {
        child.source_order = self.children.len();
        self.children.push(child);
    }

    pub fn with_child(mut self, child: ArchivalUnit) -> Self {
        self.push_child(child);
        self
    }

    /// Pre-order traversal.
    pub fn walk(&self) -> impl Iterator<Item = &ArchivalUnit> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let next = stack.pop()?;
            stack.extend(next.children.iter().rev());
            Some(next)
        })
    }

    pub fn node_count(&self) -> usize {
        self.walk().count()
    }

    pub fn has_item_children(&self) -> bool {
        self.children.iter().any(|c| c.level == ArchivalLevel::Item)
    }

    pub(crate) fn walk_mut(&mut self, f: &mut impl FnMut(&mut ArchivalUnit)) {
        f(self);
        for child in &mut self.children {
            child.walk_mut(f);
        }
    }
}

/// Depth-first lookup by identifier.
pub fn find_unit<'a>(tree: &'a ArchivalUnit, unit_id: &str) -> Option<&'a ArchivalUnit> {
    tree.walk().find(|u| u.unit_id == unit_id)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    RootNotFonds,
    EmptyUnitId,
    DuplicateUnitId,
    LevelNotDeeper,
    ItemHasChildren,
    MediaOnNonItem,
    InvalidMedia,
    SourceOrder,
    ExtentQuantity,
    TermIdentifierNotAbsolute,
    UnknownTermSource,
}

impl Rule {
    pub fn code(self) -> &'static str {
        match self {
            Rule::RootNotFonds => "RootNotFonds",
            Rule::EmptyUnitId => "EmptyUnitId",
            Rule::DuplicateUnitId => "DuplicateUnitId",
            Rule::LevelNotDeeper => "LevelNotDeeper",
            Rule::ItemHasChildren => "ItemHasChildren",
            Rule::MediaOnNonItem => "MediaOnNonItem",
            Rule::InvalidMedia => "InvalidMedia",
            Rule::SourceOrder => "SourceOrder",
            Rule::ExtentQuantity => "ExtentQuantity",
            Rule::TermIdentifierNotAbsolute => "TermIdentifierNotAbsolute",
            Rule::UnknownTermSource => "UnknownTermSource",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub unit_id: String,
    pub rule: Rule,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.rule.code(), self.unit_id, self.message)
    }
}

/// Thesaurus names accepted on normalized access terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeRules {
    pub known_sources: BTreeSet<String>,
}

impl Default for TreeRules {
    fn default() -> Self {
        Self {
            known_sources: ["nuovo soggettario", "viaf"]
                .into_iter()
                .map(String::from)
                .collect(),
        }
    }
}

pub fn validate_tree(tree: &ArchivalUnit) -> Vec<Violation> {
    validate_tree_with(tree, &TreeRules::default())
}

pub fn validate_tree_with(tree: &ArchivalUnit, rules: &TreeRules) -> Vec<Violation> {
    let mut out = Vec::new();
    if tree.level != ArchivalLevel::Fonds {
        out.push(Violation {
            unit_id: tree.unit_id.clone(),
            rule: Rule::RootNotFonds,
            message: format!("root is at level {}, expected fonds", tree.level),
        });
    }
    let mut seen = HashSet::new();
    check_node(tree, None, rules, &mut seen, &mut out);
    out
}

fn check_node<'a>(
    unit: &'a ArchivalUnit,
    parent: Option<&ArchivalUnit>,
    rules: &TreeRules,
    seen: &mut HashSet<&'a str>,
    out: &mut Vec<Violation>,
) {
    let mut flag = |rule: Rule, message: String| {
        out.push(Violation {
            unit_id: unit.unit_id.clone(),
            rule,
            message,
        })
    };

    if unit.unit_id.trim().is_empty() {
        flag(Rule::EmptyUnitId, "unit_id is empty".into());
    } else if !seen.insert(unit.unit_id.as_str()) {
        flag(Rule::DuplicateUnitId, "unit_id occurs more than once".into());
    }
    if let Some(p) = parent {
        if unit.level <= p.level {
            flag(
                Rule::LevelNotDeeper,
                format!("{} nested under {}", unit.level, p.level),
            );
        }
    }
    if unit.level == ArchivalLevel::Item && !unit.children.is_empty() {
        flag(
            Rule::ItemHasChildren,
            format!("item has {} children", unit.children.len()),
        );
    }
    if unit.level != ArchivalLevel::Item && !unit.media.is_empty() {
        flag(
            Rule::MediaOnNonItem,
            format!("{} unit carries {} media assets", unit.level, unit.media.len()),
        );
    }
    for asset in &unit.media {
        if let Err(e) = asset.check() {
            flag(Rule::InvalidMedia, e.to_string());
        }
    }
    if unit
        .children
        .iter()
        .enumerate()
        .any(|(i, c)| c.source_order != i)
    {
        flag(
            Rule::SourceOrder,
            "children are not ordered contiguously from 0".into(),
        );
    }
    if let Some(extent) = &unit.extent {
        if extent.quantity == 0 {
            flag(Rule::ExtentQuantity, "extent quantity must be positive".into());
        }
    }
    for term in &unit.access_terms {
        if let Some(id) = &term.identifier {
            if !is_absolute_uri(id) {
                flag(
                    Rule::TermIdentifierNotAbsolute,
                    format!("term {:?} has relative identifier {id:?}", term.part),
                );
            }
        }
        if term.identifier.is_some() || term.normal_form.is_some() {
            match &term.source {
                Some(s) if rules.known_sources.contains(s) => {}
                Some(s) => flag(
                    Rule::UnknownTermSource,
                    format!("term {:?} cites unknown source {s:?}", term.part),
                ),
                None => {}
            }
        }
    }

    for child in &unit.children {
        check_node(child, Some(unit), rules, seen, out);
    }
}

pub(crate) fn is_absolute_uri(s: &str) -> bool {
    url::Url::parse(s).is_ok()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttachError {
    #[error("inventory entry {unit_id} refers to a {level} unit; media attach to items only")]
    InventoryOnNonItem {
        unit_id: String,
        level: ArchivalLevel,
    },
}

/// Media inventory keyed by item identifier, in row order per item.
pub type MediaInventory = BTreeMap<String, Vec<MediaAsset>>;

#[derive(Debug, Clone, PartialEq)]
pub struct Attached {
    pub tree: ArchivalUnit,
    /// Inventory keys that matched no unit.
    pub unknown_units: Vec<String>,
}

/// Sets each item's media from the inventory. Media is replaced, not
/// appended, so repeated application is a no-op.
pub fn attach_media(tree: &ArchivalUnit, inventory: &MediaInventory) -> Result<Attached, AttachError> {
    let mut unknown_units = Vec::new();
    for unit_id in inventory.keys() {
        match find_unit(tree, unit_id) {
            None => unknown_units.push(unit_id.clone()),
            Some(u) if u.level != ArchivalLevel::Item => {
                return Err(AttachError::InventoryOnNonItem {
                    unit_id: unit_id.clone(),
                    level: u.level,
                })
            }
            Some(_) => {}
        }
    }
    let mut tree = tree.clone();
    tree.walk_mut(&mut |u| {
        if let Some(assets) = inventory.get(&u.unit_id) {
            u.media = assets.clone();
        }
    });
    Ok(Attached {
        tree,
        unknown_units,
    })
}
