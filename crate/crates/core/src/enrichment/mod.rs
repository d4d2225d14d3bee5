//! Normalizes extracted terms against thesauri and authority files and
//! merges them into the `<controlaccess>` terms of archival units.

mod resolver;
mod termlist;
mod viaf;

pub use resolver::{AuthorityRecord, AuthorityResolver, ResolverError, SnapshotError, SnapshotResolver};
pub use termlist::{parse_term_list, ExtractedTerm, TermList, TermListError, TermOrigin};
pub use viaf::{ViafConfig, ViafResolver, DEFAULT_VIAF_ENDPOINT, VIAF_SOURCE};

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use crate::archival_model::{AccessTerm, ArchivalUnit, TermCategory};

pub const NUOVO_SOGGETTARIO: &str = "nuovo soggettario";

/// Which thesauri, by source name and in order of preference, each
/// category is routed to.
#[derive(Debug, Clone, PartialEq)]
pub struct Routing {
    routes: BTreeMap<TermCategory, Vec<String>>,
}

impl Default for Routing {
    fn default() -> Self {
        let mut routes = BTreeMap::new();
        routes.insert(TermCategory::Subject, vec![NUOVO_SOGGETTARIO.to_string()]);
        for c in [TermCategory::Place, TermCategory::Person, TermCategory::CorporateBody] {
            routes.insert(c, vec![VIAF_SOURCE.to_string()]);
        }
        Self { routes }
    }
}

impl Routing {
    pub fn set(&mut self, category: TermCategory, sources: Vec<String>) {
        self.routes.insert(category, sources);
    }

    pub fn sources(&self, category: TermCategory) -> &[String] {
        self.routes.get(&category).map(Vec::as_slice).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizeOptions {
    pub routing: Routing,
    /// Terms scoring below the floor for their origin are dropped.
    /// Unscored terms always pass.
    pub confidence_floor: BTreeMap<TermOrigin, f64>,
    /// Strict mode fails on an unreachable resolver; lenient mode treats
    /// it as a miss and records a warning.
    pub strict: bool,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        Self {
            routing: Routing::default(),
            confidence_floor: BTreeMap::from([(TermOrigin::ObjectDetection, 0.5)]),
            strict: false,
        }
    }
}

impl NormalizeOptions {
    fn floor(&self, origin: TermOrigin) -> f64 {
        self.confidence_floor.get(&origin).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnrichError {
    #[error("no resolver configured for {0} terms")]
    NoResolver(TermCategory),
    #[error(transparent)]
    Resolver(#[from] ResolverError),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Normalized {
    pub terms: Vec<AccessTerm>,
    pub dropped: usize,
    pub warnings: Vec<String>,
}

/// Turns extracted terms into access terms. Resolvers on a category's
/// route are consulted in the order given and the first hit wins; misses
/// keep the surface form without source or identifier. Output order is
/// input order.
pub fn normalize_terms(
    terms: &TermList,
    resolvers: &[&dyn AuthorityResolver],
    options: &NormalizeOptions,
) -> Result<Normalized, EnrichError> {
    let mut out = Normalized::default();
    let mut checked = HashSet::new();
    for term in &terms.terms {
        if term.confidence.is_some_and(|c| c < options.floor(term.origin)) {
            out.dropped += 1;
            continue;
        }
        let route = options.routing.sources(term.category);
        let candidates: Vec<&dyn AuthorityResolver> = resolvers
            .iter()
            .copied()
            .filter(|r| route.iter().any(|s| s == r.source_name()))
            .collect();
        if checked.insert(term.category) && candidates.is_empty() {
            return Err(EnrichError::NoResolver(term.category));
        }

        let surface = term.surface.trim();
        let mut access = AccessTerm::new(term.category, surface);
        for resolver in candidates {
            match resolver.lookup(surface, term.category) {
                Ok(Some(record)) => {
                    access.source = Some(record.source);
                    access.identifier = record.identifier;
                    access.normal_form = record.canonical_label;
                    break;
                }
                Ok(None) => {}
                Err(e) if !options.strict => {
                    out.warnings.push(format!("{}: {e}", terms.unit_id));
                }
                Err(e) => return Err(e.into()),
            }
        }
        out.terms.push(access);
    }
    Ok(out)
}

#[derive(Hash, PartialEq, Eq)]
enum TermKey {
    Identified(TermCategory, String),
    Surface(TermCategory, String),
}

fn term_key(t: &AccessTerm) -> TermKey {
    match &t.identifier {
        Some(id) => TermKey::Identified(t.category, id.clone()),
        None => TermKey::Surface(t.category, t.part.trim().to_lowercase()),
    }
}

/// Appends terms not already present. Existing terms are never modified
/// or reordered.
pub fn merge_control_access(unit: &ArchivalUnit, new_terms: &[AccessTerm]) -> ArchivalUnit {
    let mut unit = unit.clone();
    let mut seen: HashSet<TermKey> = unit.access_terms.iter().map(term_key).collect();
    for term in new_terms {
        if seen.insert(term_key(term)) {
            unit.access_terms.push(term.clone());
        }
    }
    unit
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnrichReport {
    pub units_enriched: usize,
    pub terms_added: usize,
    pub terms_dropped: usize,
    pub warnings: Vec<String>,
}

/// Applies each term list to the unit it names.
pub fn enrich_tree(
    tree: &ArchivalUnit,
    lists: &[TermList],
    resolvers: &[&dyn AuthorityResolver],
    options: &NormalizeOptions,
) -> Result<(ArchivalUnit, EnrichReport), EnrichError> {
    let mut report = EnrichReport::default();
    let mut pending: BTreeMap<&str, Vec<AccessTerm>> = BTreeMap::new();
    for list in lists {
        if crate::archival_model::find_unit(tree, &list.unit_id).is_none() {
            report
                .warnings
                .push(format!("term list for unknown unit {}", list.unit_id));
            continue;
        }
        let normalized = normalize_terms(list, resolvers, options)?;
        report.terms_dropped += normalized.dropped;
        report.warnings.extend(normalized.warnings);
        pending.entry(&list.unit_id).or_default().extend(normalized.terms);
    }

    let mut tree = tree.clone();
    tree.walk_mut(&mut |u| {
        if let Some(terms) = pending.get(u.unit_id.as_str()) {
            let before = u.access_terms.len();
            *u = merge_control_access(u, terms);
            report.units_enriched += 1;
            report.terms_added += u.access_terms.len() - before;
        }
    });
    Ok((tree, report))
}
