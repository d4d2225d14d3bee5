use std::collections::BTreeMap;
use std::fmt;

/// Language tag to values; `"none"` marks values without a language.
pub type LanguageMap = BTreeMap<String, Vec<String>>;

pub const NO_LANGUAGE: &str = "none";

pub fn language_map(lang: &str, value: impl Into<String>) -> LanguageMap {
    BTreeMap::from([(lang.to_string(), vec![value.into()])])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResourceKind {
    Collection,
    Manifest,
    Canvas,
}

impl ResourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ResourceKind::Collection => "Collection",
            ResourceKind::Manifest => "Manifest",
            ResourceKind::Canvas => "Canvas",
        }
    }

    pub fn parse(s: &str) -> Option<ResourceKind> {
        [ResourceKind::Collection, ResourceKind::Manifest, ResourceKind::Canvas]
            .into_iter()
            .find(|k| k.as_str() == s)
    }
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetadataEntry {
    pub label: LanguageMap,
    pub value: LanguageMap,
}

/// A `seeAlso` entry: a machine-readable description elsewhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkedResource {
    pub id: String,
    pub kind: String,
    pub format: String,
    pub label: LanguageMap,
}

/// A `homepage` entry, always an HTML page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Homepage {
    pub id: String,
    pub label: LanguageMap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceRef {
    pub id: String,
    pub kind: ResourceKind,
    pub label: LanguageMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyKind {
    Image,
    Video,
    Sound,
}

impl BodyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BodyKind::Image => "Image",
            BodyKind::Video => "Video",
            BodyKind::Sound => "Sound",
        }
    }

    pub fn parse(s: &str) -> Option<BodyKind> {
        [BodyKind::Image, BodyKind::Video, BodyKind::Sound]
            .into_iter()
            .find(|k| k.as_str() == s)
    }
}

/// The media painted onto a Canvas. Its extents are the Canvas extents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaintedBody {
    pub location: String,
    pub kind: BodyKind,
    pub format: String,
}

/// Entry of an `items` list: Collections hold references, Manifests hold
/// their Canvases inline.
#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Ref(ResourceRef),
    Canvas(IiifResource),
}

impl Item {
    pub fn id(&self) -> &str {
        match self {
            Item::Ref(r) => &r.id,
            Item::Canvas(c) => &c.id,
        }
    }

    pub fn kind(&self) -> ResourceKind {
        match self {
            Item::Ref(r) => r.kind,
            Item::Canvas(c) => c.kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IiifResource {
    pub id: String,
    pub kind: ResourceKind,
    pub label: LanguageMap,
    pub metadata: Vec<MetadataEntry>,
    pub see_also: Vec<LinkedResource>,
    pub homepage: Option<Homepage>,
    pub items: Vec<Item>,
    pub content: Option<PaintedBody>,
    pub width: Option<u32>,
    pub height: Option<u32>,
    /// Seconds.
    pub duration: Option<f64>,
    pub thumbnail: Option<String>,
}

impl IiifResource {
    pub fn new(id: impl Into<String>, kind: ResourceKind, label: LanguageMap) -> Self {
        Self {
            id: id.into(),
            kind,
            label,
            metadata: Vec::new(),
            see_also: Vec::new(),
            homepage: None,
            items: Vec::new(),
            content: None,
            width: None,
            height: None,
            duration: None,
            thumbnail: None,
        }
    }

    pub fn reference(&self) -> ResourceRef {
        ResourceRef {
            id: self.id.clone(),
            kind: self.kind,
            label: self.label.clone(),
        }
    }

    pub fn canvases(&self) -> impl Iterator<Item = &IiifResource> {
        self.items.iter().filter_map(|i| match i {
            Item::Canvas(c) => Some(c),
            Item::Ref(_) => None,
        })
    }

    pub fn references(&self) -> impl Iterator<Item = &ResourceRef> {
        self.items.iter().filter_map(|i| match i {
            Item::Ref(r) => Some(r),
            Item::Canvas(_) => None,
        })
    }
}
