//! Term-list interchange: the JSON document exchanged with the extraction
//! tools.
//!
//! ```json
//! {"unit_id": "IL8600011581",
//!  "terms": [{"surface": "Italia", "category": "place", "confidence": 0.93, "origin": "text_nlp"}]}
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::archival_model::TermCategory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TermOrigin {
    TextNlp,
    ObjectDetection,
    TopicModel,
    #[default]
    Manual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractedTerm {
    pub surface: String,
    pub category: TermCategory,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(default)]
    pub origin: TermOrigin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermList {
    pub unit_id: String,
    pub terms: Vec<ExtractedTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("term list schema violation: {0}")]
pub struct TermListError(pub String);

impl TermList {
    pub fn new(unit_id: impl Into<String>) -> Self {
        Self {
            unit_id: unit_id.into(),
            terms: Vec::new(),
        }
    }

    /// Adds a term, trimming its surface and folding it into an existing
    /// entry with the same (surface, category). The folded entry keeps the
    /// higher confidence; an unscored entry counts as fully confident.
    pub fn push(&mut self, mut term: ExtractedTerm) {
        term.surface = term.surface.trim().to_string();
        match self
            .terms
            .iter_mut()
            .find(|t| t.surface == term.surface && t.category == term.category)
        {
            Some(existing) => {
                existing.confidence = match (existing.confidence, term.confidence) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    _ => None,
                }
            }
            None => self.terms.push(term),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("term list serializes");
        s.push('\n');
        s
    }
}

pub fn parse_term_list(text: &str) -> Result<TermList, TermListError> {
    let raw: TermList = serde_json::from_str(text).map_err(|e| TermListError(e.to_string()))?;
    if raw.unit_id.trim().is_empty() {
        return Err(TermListError("empty unit_id".into()));
    }
    let mut list = TermList::new(raw.unit_id);
    for (i, term) in raw.terms.into_iter().enumerate() {
        if term.surface.trim().is_empty() {
            return Err(TermListError(format!("term {i}: empty surface")));
        }
        if let Some(c) = term.confidence {
            if !(0.0..=1.0).contains(&c) {
                return Err(TermListError(format!("term {i}: confidence {c} outside [0, 1]")));
            }
        }
        list.push(term);
    }
    Ok(list)
}
