use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::archival_model::TermCategory;

/// A thesaurus or authority-file entry a term was normalized against.
/// Name authorities identify by URI; subject thesauri often only supply a
/// preferred form, so each of the two is optional but never both absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorityRecord {
    pub canonical_label: Option<String>,
    pub identifier: Option<String>,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolverError {
    #[error("{source_name} unavailable: {reason}")]
    Unavailable { source_name: String, reason: String },
}

/// Lookup against one thesaurus. Implementations must be deterministic for
/// fixed underlying data and callable from several threads.
pub trait AuthorityResolver: Send + Sync {
    fn source_name(&self) -> &str;

    fn lookup(&self, surface: &str, category: TermCategory) -> Result<Option<AuthorityRecord>, ResolverError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SnapshotError {
    #[error("snapshot row {row}: {message}")]
    BadRow { row: usize, message: String },
    #[error("snapshot table: {0}")]
    Csv(String),
}

/// Offline resolver over a fixed table; matching is exact after case
/// folding.
#[derive(Debug, Clone, Default)]
pub struct SnapshotResolver {
    source: String,
    rows: HashMap<(TermCategory, String), AuthorityRecord>,
}

#[derive(Deserialize)]
struct SnapshotRow {
    surface: String,
    category: String,
    canonical_label: String,
    identifier: String,
    source: String,
}

impl SnapshotResolver {
    pub fn new(source: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            rows: HashMap::new(),
        }
    }

    pub fn insert(&mut self, surface: &str, category: TermCategory, record: AuthorityRecord) {
        self.rows.insert((category, fold(surface)), record);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Reads a CSV table with header `surface,category,canonical_label,identifier,source`
    /// and returns one resolver per distinct source, in order of first
    /// appearance. Empty cells mean "absent".
    pub fn from_csv(text: &str) -> Result<Vec<SnapshotResolver>, SnapshotError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut out: Vec<SnapshotResolver> = Vec::new();
        for (i, rec) in reader.deserialize::<SnapshotRow>().enumerate() {
            let row = i + 1;
            let rec = rec.map_err(|e| SnapshotError::Csv(e.to_string()))?;
            let bad = |message: String| SnapshotError::BadRow { row, message };
            let category =
                TermCategory::parse(&rec.category).ok_or_else(|| bad(format!("unknown category {:?}", rec.category)))?;
            if rec.surface.is_empty() || rec.source.is_empty() {
                return Err(bad("surface and source are required".into()));
            }
            let canonical_label = Some(rec.canonical_label).filter(|s| !s.is_empty());
            let identifier = Some(rec.identifier).filter(|s| !s.is_empty());
            if canonical_label.is_none() && identifier.is_none() {
                return Err(bad("one of canonical_label or identifier is required".into()));
            }
            if let Some(id) = &identifier {
                if !is_http_uri(id) {
                    return Err(bad(format!("identifier {id:?} is not an absolute http(s) URI")));
                }
            }
            let idx = match out.iter().position(|r| r.source == rec.source) {
                Some(idx) => idx,
                None => {
                    out.push(SnapshotResolver::new(rec.source.clone()));
                    out.len() - 1
                }
            };
            out[idx].insert(
                &rec.surface,
                category,
                AuthorityRecord {
                    canonical_label,
                    identifier,
                    source: rec.source,
                },
            );
        }
        Ok(out)
    }
}

impl AuthorityResolver for SnapshotResolver {
    fn source_name(&self) -> &str {
        &self.source
    }

    fn lookup(&self, surface: &str, category: TermCategory) -> Result<Option<AuthorityRecord>, ResolverError> {
        Ok(self.rows.get(&(category, fold(surface))).cloned())
    }
}

fn fold(s: &str) -> String {
    s.trim().to_lowercase()
}

pub(crate) fn is_http_uri(s: &str) -> bool {
    url::Url::parse(s).is_ok_and(|u| matches!(u.scheme(), "http" | "https") && u.has_host())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE: &str = "surface,category,canonical_label,identifier,source
Svizzera,place,,http://viaf.org/viaf/159363991,viaf
Storia contemporanea,subject,Storia contemporanea,,nuovo soggettario
";

    #[test]
    fn groups_by_source_and_folds_case() {
        let resolvers = SnapshotResolver::from_csv(TABLE).unwrap();
        assert_eq!(resolvers.len(), 2);
        let viaf = &resolvers[0];
        assert_eq!(viaf.source_name(), "viaf");
        let hit = viaf.lookup("svizzera", TermCategory::Place).unwrap().unwrap();
        assert_eq!(hit.identifier.as_deref(), Some("http://viaf.org/viaf/159363991"));
        assert_eq!(viaf.lookup("Svizzera", TermCategory::Person).unwrap(), None);

        let ns = &resolvers[1];
        let hit = ns.lookup("Storia contemporanea", TermCategory::Subject).unwrap().unwrap();
        assert_eq!(hit.source, "nuovo soggettario");
        assert_eq!(hit.canonical_label.as_deref(), Some("Storia contemporanea"));
        assert_eq!(ns.lookup("zzzz", TermCategory::Subject).unwrap(), None);
    }

    #[test]
    fn rejects_bad_rows() {
        for bad in [
            "surface,category,canonical_label,identifier,source\nx,topic,x,,viaf\n",
            "surface,category,canonical_label,identifier,source\nx,place,,,viaf\n",
            "surface,category,canonical_label,identifier,source\nx,place,,viaf/1,viaf\n",
            "surface,category,canonical_label,identifier,source\nx,place,x,,\n",
        ] {
            assert!(matches!(SnapshotResolver::from_csv(bad), Err(SnapshotError::BadRow { row: 1, .. })), "{bad}");
        }
        assert!(SnapshotResolver::from_csv("surface,category\nx,place\n").is_err());
    }
}
