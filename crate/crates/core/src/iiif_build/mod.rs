//! Maps the archival tree onto IIIF resources, bottom-up:
//!
//! * item → Manifest, one Canvas per media asset;
//! * file → Manifest showing the first Canvas of each item, plus a
//!   Collection listing that Manifest followed by the item Manifests;
//! * series / subseries → Collection of the children's Collections;
//! * fonds → root Collection.
//!
//! A series or fonds that holds items directly is treated like a file.

mod metadata;
mod resource;
mod uri;

pub use metadata::metadata_pairs;
pub use resource::{
    language_map, BodyKind, Homepage, IiifResource, Item, LanguageMap, LinkedResource, MetadataEntry, PaintedBody,
    ResourceKind, ResourceRef, NO_LANGUAGE,
};
pub use uri::{mint_uri, slugify, MintError, SlugRegistry};

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;
use url::Url;

use crate::archival_model::{
    attach_media, validate_tree, ArchivalLevel, ArchivalUnit, AttachError, MediaAsset, MediaInventory, MediaKind,
    Violation,
};
use metadata::labels_for;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("base URI {0:?} is not an absolute http(s) URI")]
    BadBaseUri(String),
    #[error("template {template:?} does not produce an absolute URI")]
    BadTemplate { template: String },
}

/// Image painted on the single Canvas of an item that has no media, when
/// media is not strictly required.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placeholder {
    pub location: String,
    pub format: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildConfig {
    base_uri: String,
    pub default_language: String,
    /// Template for the `seeAlso` EAD link; `{base}`, `{slug}` and
    /// `{unit_id}` are substituted.
    pub ead_export_uri_pattern: String,
    /// Optional catalogue page, same placeholders as above.
    pub institution_homepage: Option<String>,
    pub strict_media: bool,
    pub placeholder: Option<Placeholder>,
    /// Relative media locations resolve against this; defaults to `{base}/media/`.
    pub media_base: Option<String>,
}

pub const DEFAULT_EAD_PATTERN: &str = "{base}/ead/{slug}.xml";

impl BuildConfig {
    pub fn new(base_uri: &str) -> Result<Self, ConfigError> {
        let trimmed = base_uri.trim().trim_end_matches('/');
        let ok = Url::parse(trimmed).is_ok_and(|u| matches!(u.scheme(), "http" | "https") && u.has_host());
        if !ok {
            return Err(ConfigError::BadBaseUri(base_uri.to_string()));
        }
        Ok(Self {
            base_uri: trimmed.to_string(),
            default_language: "it".to_string(),
            ead_export_uri_pattern: DEFAULT_EAD_PATTERN.to_string(),
            institution_homepage: None,
            strict_media: true,
            placeholder: None,
            media_base: None,
        })
    }

    /// Never ends with a slash.
    pub fn base_uri(&self) -> &str {
        &self.base_uri
    }

    /// Checks that every template expands to an absolute URI.
    pub fn check(&self) -> Result<(), ConfigError> {
        let probe = |t: &str| {
            let expanded = self.expand(t, "probe");
            if Url::parse(&expanded).is_err() {
                return Err(ConfigError::BadTemplate {
                    template: t.to_string(),
                });
            }
            Ok(())
        };
        probe(&self.ead_export_uri_pattern)?;
        if let Some(h) = &self.institution_homepage {
            probe(h)?;
        }
        if let Some(m) = &self.media_base {
            probe(m)?;
        }
        Ok(())
    }

    fn expand(&self, template: &str, unit_id: &str) -> String {
        template
            .replace("{base}", &self.base_uri)
            .replace("{slug}", &slugify(unit_id))
            .replace("{unit_id}", unit_id)
    }

    pub fn ead_export_uri(&self, unit_id: &str) -> String {
        self.expand(&self.ead_export_uri_pattern, unit_id)
    }

    fn media_uri(&self, location: &str) -> String {
        if Url::parse(location).is_ok() {
            return location.to_string();
        }
        let base = match &self.media_base {
            Some(m) => self.expand(m, ""),
            None => format!("{}/media/", self.base_uri),
        };
        let base = if base.ends_with('/') { base } else { format!("{base}/") };
        Url::parse(&base)
            .and_then(|b| b.join(location.trim_start_matches('/')))
            .map(String::from)
            .unwrap_or_else(|_| format!("{base}{location}"))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildErrorKind {
    #[error("archival tree fails validation: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidTree(Vec<Violation>),
    #[error(transparent)]
    Attach(#[from] AttachError),
    #[error(transparent)]
    Mint(#[from] MintError),
    #[error("item has no media")]
    MissingMedia,
    #[error("media asset {asset_id} lacks the extent its kind requires")]
    MediaExtentMissing { asset_id: String },
    #[error("file has no item contributing a canvas")]
    EmptyFile,
    #[error("expected a {expected} unit, found {found}")]
    WrongLevel { expected: &'static str, found: ArchivalLevel },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub struct BuildError {
    pub unit_id: String,
    pub kind: BuildErrorKind,
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unit {}: {}", self.unit_id, self.kind)
    }
}

fn err(unit: &ArchivalUnit, kind: impl Into<BuildErrorKind>) -> BuildError {
    BuildError {
        unit_id: unit.unit_id.clone(),
        kind: kind.into(),
    }
}

/// Everything built from one fonds.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceSet {
    pub base_uri: String,
    pub root_id: String,
    /// Collections and Manifests by id; Canvases live inside their Manifest.
    pub by_id: BTreeMap<String, IiifResource>,
    /// Collection/Manifest id to the unit it was built from.
    pub provenance: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

impl ResourceSet {
    pub fn root(&self) -> &IiifResource {
        &self.by_id[&self.root_id]
    }

    pub fn get(&self, id: &str) -> Option<&IiifResource> {
        self.by_id.get(id)
    }

    pub fn count(&self, kind: ResourceKind) -> usize {
        self.by_id.values().filter(|r| r.kind == kind).count()
    }

    fn insert(&mut self, resource: IiifResource, unit: &ArchivalUnit) -> ResourceRef {
        let r = resource.reference();
        self.provenance.insert(resource.id.clone(), unit.unit_id.clone());
        self.by_id.insert(resource.id.clone(), resource);
        r
    }
}

fn describe(resource: &mut IiifResource, unit: &ArchivalUnit, config: &BuildConfig) {
    let lang = &config.default_language;
    let labels = labels_for(lang);
    resource.metadata = metadata_pairs(unit, lang);
    resource.see_also = vec![LinkedResource {
        id: config.ead_export_uri(&unit.unit_id),
        kind: "Dataset".to_string(),
        format: "text/xml".to_string(),
        label: language_map(labels.lang, labels.ead_link),
    }];
    resource.homepage = config.institution_homepage.as_ref().map(|h| Homepage {
        id: config.expand(h, &unit.unit_id),
        label: language_map(lang, &unit.title),
    });
}

fn mint(config: &BuildConfig, unit: &ArchivalUnit, kind: ResourceKind, ordinal: Option<usize>) -> Result<String, BuildError> {
    mint_uri(config, kind, &unit.unit_id, ordinal).map_err(|e| err(unit, e))
}

fn canvas_for(
    asset: &MediaAsset,
    id: String,
    label: LanguageMap,
    config: &BuildConfig,
    item: &ArchivalUnit,
) -> Result<IiifResource, BuildError> {
    if asset.check().is_err() {
        return Err(err(
            item,
            BuildErrorKind::MediaExtentMissing {
                asset_id: asset.asset_id.clone(),
            },
        ));
    }
    let mut canvas = IiifResource::new(id, ResourceKind::Canvas, label);
    canvas.content = Some(PaintedBody {
        location: config.media_uri(&asset.location),
        kind: match asset.kind {
            MediaKind::Image => BodyKind::Image,
            MediaKind::Video => BodyKind::Video,
            MediaKind::Audio => BodyKind::Sound,
        },
        format: asset.media_format.clone(),
    });
    if asset.kind != MediaKind::Audio {
        canvas.width = asset.width;
        canvas.height = asset.height;
    }
    if asset.kind != MediaKind::Image {
        canvas.duration = asset.duration;
    }
    canvas.thumbnail = asset.thumbnail.as_deref().map(|t| config.media_uri(t));
    Ok(canvas)
}

/// Manifest of one item, with a Canvas per asset in inventory order.
pub fn build_item_manifest(item: &ArchivalUnit, config: &BuildConfig) -> Result<IiifResource, BuildError> {
    if item.level != ArchivalLevel::Item {
        return Err(err(
            item,
            BuildErrorKind::WrongLevel {
                expected: "item",
                found: item.level,
            },
        ));
    }
    let label = language_map(&config.default_language, &item.title);
    let mut manifest = IiifResource::new(mint(config, item, ResourceKind::Manifest, None)?, ResourceKind::Manifest, label.clone());
    describe(&mut manifest, item, config);

    let placeholder;
    let assets: &[MediaAsset] = match (&item.media[..], &config.placeholder) {
        ([], _) if config.strict_media => return Err(err(item, BuildErrorKind::MissingMedia)),
        ([], Some(p)) => {
            placeholder = [MediaAsset::image(
                format!("{}-placeholder", item.unit_id),
                p.location.clone(),
                p.format.clone(),
                p.width,
                p.height,
            )];
            &placeholder
        }
        ([], None) => return Err(err(item, BuildErrorKind::MissingMedia)),
        (media, _) => media,
    };
    for (i, asset) in assets.iter().enumerate() {
        let id = mint(config, item, ResourceKind::Canvas, Some(i))?;
        manifest
            .items
            .push(Item::Canvas(canvas_for(asset, id, label.clone(), config, item)?));
    }
    Ok(manifest)
}

/// Overview Manifest of a file: the first Canvas of each item, re-minted
/// under the file's own URI space.
pub fn build_file_manifest(
    file: &ArchivalUnit,
    item_manifests: &[IiifResource],
    config: &BuildConfig,
) -> Result<IiifResource, BuildError> {
    if file.level == ArchivalLevel::Item {
        return Err(err(
            file,
            BuildErrorKind::WrongLevel {
                expected: "file",
                found: file.level,
            },
        ));
    }
    let label = language_map(&config.default_language, &file.title);
    let mut manifest = IiifResource::new(mint(config, file, ResourceKind::Manifest, None)?, ResourceKind::Manifest, label);
    describe(&mut manifest, file, config);
    for first in item_manifests.iter().filter_map(|m| m.canvases().next()) {
        let mut canvas = first.clone();
        canvas.id = mint(config, file, ResourceKind::Canvas, Some(manifest.items.len()))?;
        manifest.items.push(Item::Canvas(canvas));
    }
    if manifest.items.is_empty() {
        return Err(err(file, BuildErrorKind::EmptyFile));
    }
    Ok(manifest)
}

/// Collection of a file: its overview Manifest first, then its children.
pub fn build_file_collection(
    file: &ArchivalUnit,
    file_manifest: &IiifResource,
    children: &[ResourceRef],
    config: &BuildConfig,
) -> Result<IiifResource, BuildError> {
    let mut collection = IiifResource::new(
        mint(config, file, ResourceKind::Collection, None)?,
        ResourceKind::Collection,
        file_manifest.label.clone(),
    );
    describe(&mut collection, file, config);
    collection.items.push(Item::Ref(file_manifest.reference()));
    collection.items.extend(children.iter().cloned().map(Item::Ref));
    Ok(collection)
}

/// Collection of a series or subseries over its children's resources.
pub fn build_unit_collection(
    unit: &ArchivalUnit,
    children: &[ResourceRef],
    config: &BuildConfig,
) -> Result<IiifResource, BuildError> {
    let label = language_map(&config.default_language, &unit.title);
    let mut collection = IiifResource::new(mint(config, unit, ResourceKind::Collection, None)?, ResourceKind::Collection, label);
    describe(&mut collection, unit, config);
    collection.items = children.iter().cloned().map(Item::Ref).collect();
    Ok(collection)
}

pub fn build_fonds_collection(
    fonds: &ArchivalUnit,
    children: &[ResourceRef],
    config: &BuildConfig,
) -> Result<IiifResource, BuildError> {
    if fonds.level != ArchivalLevel::Fonds {
        return Err(err(
            fonds,
            BuildErrorKind::WrongLevel {
                expected: "fonds",
                found: fonds.level,
            },
        ));
    }
    build_unit_collection(fonds, children, config)
}

/// Builds the whole resource set for a fonds. The inventory is attached
/// first (an empty inventory keeps media already on the tree).
pub fn build_all(tree: &ArchivalUnit, inventory: &MediaInventory, config: &BuildConfig) -> Result<ResourceSet, BuildError> {
    let attached = attach_media(tree, inventory).map_err(|e| err(tree, e))?;
    let tree = attached.tree;
    let violations = validate_tree(&tree);
    if !violations.is_empty() {
        return Err(err(&tree, BuildErrorKind::InvalidTree(violations)));
    }
    let mut slugs = SlugRegistry::default();
    for unit in tree.walk() {
        slugs.claim(&unit.unit_id).map_err(|e| err(unit, e))?;
    }

    let mut set = ResourceSet {
        base_uri: config.base_uri().to_string(),
        root_id: String::new(),
        by_id: BTreeMap::new(),
        provenance: BTreeMap::new(),
        warnings: attached
            .unknown_units
            .iter()
            .map(|u| format!("inventory lists unknown unit {u}"))
            .collect(),
    };
    let root = build_node(&tree, config, &mut set)?.expect("non-item units always yield a collection");
    set.root_id = root.id;
    Ok(set)
}

fn build_node(unit: &ArchivalUnit, config: &BuildConfig, set: &mut ResourceSet) -> Result<Option<ResourceRef>, BuildError> {
    if unit.level == ArchivalLevel::Item {
        return match build_item_manifest(unit, config) {
            Ok(m) => Ok(Some(set.insert(m, unit))),
            Err(BuildError {
                kind: BuildErrorKind::MissingMedia,
                ..
            }) if !config.strict_media => {
                set.warnings
                    .push(format!("item {} has no media and was left out", unit.unit_id));
                Ok(None)
            }
            Err(e) => Err(e),
        };
    }

    let mut refs = Vec::with_capacity(unit.children.len());
    let mut item_manifests = Vec::new();
    for child in &unit.children {
        if let Some(r) = build_node(child, config, set)? {
            if child.level == ArchivalLevel::Item {
                item_manifests.push(set.by_id[&r.id].clone());
            }
            refs.push(r);
        }
    }

    let collection = if unit.level == ArchivalLevel::File || unit.has_item_children() {
        let manifest = build_file_manifest(unit, &item_manifests, config)?;
        let collection = build_file_collection(unit, &manifest, &refs, config)?;
        set.insert(manifest, unit);
        collection
    } else if unit.level == ArchivalLevel::Fonds {
        if refs.is_empty() {
            set.warnings.push(format!("fonds {} has no children", unit.unit_id));
        }
        build_fonds_collection(unit, &refs, config)?
    } else {
        build_unit_collection(unit, &refs, config)?
    };
    Ok(Some(set.insert(collection, unit)))
}
