use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::archival_model::is_absolute_uri;
use crate::iiif_build::{BodyKind, IiifResource, Item, ResourceKind, ResourceSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IssueRule {
    MissingId,
    RelativeId,
    MissingLabel,
    CollectionBadItem,
    ManifestBadItem,
    ManifestNoCanvas,
    CanvasNoExtent,
    ExtentBodyMismatch,
    DuplicateId,
    DanglingReference,
    Unreachable,
    EmptyMetadata,
    MissingSeeAlso,
    EmptyCollection,
    CanvasNoContent,
}

impl IssueRule {
    pub fn severity(self) -> Severity {
        use IssueRule::*;
        match self {
            EmptyMetadata | MissingSeeAlso | EmptyCollection | CanvasNoContent => Severity::Warning,
            _ => Severity::Error,
        }
    }

    pub fn code(self) -> &'static str {
        use IssueRule::*;
        match self {
            MissingId => "missing-id",
            RelativeId => "relative-id",
            MissingLabel => "missing-label",
            CollectionBadItem => "collection-bad-item",
            ManifestBadItem => "manifest-bad-item",
            ManifestNoCanvas => "manifest-no-canvas",
            CanvasNoExtent => "canvas-no-extent",
            ExtentBodyMismatch => "extent-body-mismatch",
            DuplicateId => "duplicate-id",
            DanglingReference => "dangling-reference",
            Unreachable => "unreachable",
            EmptyMetadata => "empty-metadata",
            MissingSeeAlso => "missing-see-also",
            EmptyCollection => "empty-collection",
            CanvasNoContent => "canvas-no-content",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    pub resource_id: String,
    pub severity: Severity,
    pub rule: IssueRule,
    pub message: String,
}

impl ValidationIssue {
    fn new(resource_id: &str, rule: IssueRule, message: impl Into<String>) -> Self {
        Self {
            resource_id: resource_id.to_string(),
            severity: rule.severity(),
            rule,
            message: message.into(),
        }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} [{}] {}: {}", self.rule.code(), self.resource_id, self.message)
    }
}

/// Structural checks on one resource and its embedded Canvases.
pub fn validate_resource(resource: &IiifResource) -> Vec<ValidationIssue> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    check(resource, &mut out, &mut seen);
    out
}

fn check<'a>(r: &'a IiifResource, out: &mut Vec<ValidationIssue>, seen: &mut HashSet<&'a str>) {
    let id = r.id.as_str();
    let push = |out: &mut Vec<ValidationIssue>, rule, msg: String| out.push(ValidationIssue::new(id, rule, msg));

    if id.is_empty() {
        push(out, IssueRule::MissingId, format!("{} has no id", r.kind));
    } else {
        if !is_absolute_uri(id) {
            push(out, IssueRule::RelativeId, format!("id {id:?} is not an absolute URI"));
        }
        if !seen.insert(id) {
            push(out, IssueRule::DuplicateId, format!("id {id:?} appears twice"));
        }
    }
    let labelled = r.label.values().any(|vs| vs.iter().any(|v| !v.trim().is_empty()));

    match r.kind {
        ResourceKind::Collection | ResourceKind::Manifest => {
            if !labelled {
                push(out, IssueRule::MissingLabel, format!("{} has no label", r.kind));
            }
            if r.metadata.is_empty() {
                push(out, IssueRule::EmptyMetadata, "no metadata".into());
            }
            if r.see_also.is_empty() {
                push(out, IssueRule::MissingSeeAlso, "no seeAlso link".into());
            }
        }
        ResourceKind::Canvas => {}
    }

    match r.kind {
        ResourceKind::Collection => {
            if r.items.is_empty() {
                push(out, IssueRule::EmptyCollection, "collection has no items".into());
            }
            for item in &r.items {
                match item {
                    Item::Ref(rf) if rf.kind != ResourceKind::Canvas => {
                        if !is_absolute_uri(&rf.id) {
                            push(out, IssueRule::RelativeId, format!("item id {:?} is not an absolute URI", rf.id));
                        }
                    }
                    other => push(
                        out,
                        IssueRule::CollectionBadItem,
                        format!("collection item {:?} is a {}", other.id(), other.kind()),
                    ),
                }
            }
        }
        ResourceKind::Manifest => {
            let mut canvases = 0;
            for item in &r.items {
                match item {
                    Item::Canvas(c) if c.kind == ResourceKind::Canvas => {
                        canvases += 1;
                        check(c, out, seen);
                    }
                    other => push(
                        out,
                        IssueRule::ManifestBadItem,
                        format!("manifest item {:?} is a {}", other.id(), other.kind()),
                    ),
                }
            }
            if canvases == 0 {
                push(out, IssueRule::ManifestNoCanvas, "manifest has no canvas".into());
            }
        }
        ResourceKind::Canvas => check_canvas(r, out),
    }
}

fn check_canvas(c: &IiifResource, out: &mut Vec<ValidationIssue>) {
    let spatial = c.width.is_some() && c.height.is_some();
    let temporal = c.duration.is_some();
    let mut push = |rule, msg: String| out.push(ValidationIssue::new(&c.id, rule, msg));
    if !spatial && !temporal {
        push(IssueRule::CanvasNoExtent, "canvas has neither width/height nor duration".into());
    }
    if c.width.is_some() != c.height.is_some() {
        push(IssueRule::CanvasNoExtent, "canvas has only one of width and height".into());
    }
    if let Some(d) = c.duration {
        if !(d.is_finite() && d > 0.0) {
            push(IssueRule::CanvasNoExtent, format!("duration {d} is not positive"));
        }
    }
    if c.width == Some(0) || c.height == Some(0) {
        push(IssueRule::CanvasNoExtent, "zero width or height".into());
    }
    match &c.content {
        None => push(IssueRule::CanvasNoContent, "canvas paints nothing".into()),
        Some(body) => {
            let ok = match body.kind {
                BodyKind::Image => spatial && !temporal,
                BodyKind::Video => temporal,
                BodyKind::Sound => temporal && !spatial,
            };
            if !ok {
                push(
                    IssueRule::ExtentBodyMismatch,
                    format!("{} body on a canvas with the wrong extents", body.kind.as_str()),
                );
            }
        }
    }
}

/// Per-resource checks across a whole set plus the set-level rules: ids
/// unique across resources, references resolve, everything reachable from
/// the root.
pub fn validate_set(set: &ResourceSet) -> Vec<ValidationIssue> {
    let mut out = Vec::new();
    let mut seen: HashSet<&str> = HashSet::new();
    for r in set.by_id.values() {
        for issue in validate_resource(r) {
            if issue.rule != IssueRule::DuplicateId {
                out.push(issue);
            }
        }
        check_ids(r, &mut seen, &mut out);
    }

    match set.by_id.get(&set.root_id) {
        None => out.push(ValidationIssue::new(
            &set.root_id,
            IssueRule::DanglingReference,
            "root resource is missing",
        )),
        Some(root) if root.kind != ResourceKind::Collection => out.push(ValidationIssue::new(
            &set.root_id,
            IssueRule::CollectionBadItem,
            "root is not a Collection",
        )),
        Some(_) => {}
    }

    let mut reached = BTreeSet::new();
    let mut stack = vec![set.root_id.as_str()];
    while let Some(id) = stack.pop() {
        if !reached.insert(id) {
            continue;
        }
        let Some(r) = set.by_id.get(id) else { continue };
        for rf in r.references() {
            match set.by_id.get(&rf.id) {
                Some(target) if target.kind == rf.kind => stack.push(&rf.id),
                Some(target) => out.push(ValidationIssue::new(
                    id,
                    IssueRule::DanglingReference,
                    format!("reference to {:?} says {} but the target is a {}", rf.id, rf.kind, target.kind),
                )),
                None => out.push(ValidationIssue::new(
                    id,
                    IssueRule::DanglingReference,
                    format!("reference to {:?} has no target", rf.id),
                )),
            }
        }
    }
    for id in set.by_id.keys() {
        if !reached.contains(id.as_str()) {
            out.push(ValidationIssue::new(id, IssueRule::Unreachable, "not reachable from the root"));
        }
    }
    out
}

fn check_ids<'a>(r: &'a IiifResource, seen: &mut HashSet<&'a str>, out: &mut Vec<ValidationIssue>) {
    if !r.id.is_empty() && !seen.insert(&r.id) {
        out.push(ValidationIssue::new(&r.id, IssueRule::DuplicateId, format!("id {:?} appears twice", r.id)));
    }
    for c in r.canvases() {
        check_ids(c, seen, out);
    }
}
