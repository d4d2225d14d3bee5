use super::resource::{language_map, LanguageMap, MetadataEntry, NO_LANGUAGE};
use crate::archival_model::{ArchivalUnit, TermCategory};

pub(crate) struct Labels {
    pub lang: &'static str,
    pub title: &'static str,
    pub date: &'static str,
    pub id: &'static str,
    pub level: &'static str,
    pub repository: &'static str,
    pub ead_link: &'static str,
    subject: &'static str,
    place: &'static str,
    person: &'static str,
    corporate: &'static str,
}

impl Labels {
    pub fn category(&self, c: TermCategory) -> &'static str {
        match c {
            TermCategory::Subject => self.subject,
            TermCategory::Place => self.place,
            TermCategory::Person => self.person,
            TermCategory::CorporateBody => self.corporate,
        }
    }
}

const ITALIAN: Labels = Labels {
    lang: "it",
    title: "titolo",
    date: "data",
    id: "id",
    level: "livello",
    repository: "soggetto conservatore",
    ead_link: "Descrizione archivistica in EAD",
    subject: "soggetti",
    place: "luoghi",
    person: "persone",
    corporate: "enti",
};

const ENGLISH: Labels = Labels {
    lang: "en",
    title: "title",
    date: "date",
    id: "id",
    level: "level",
    repository: "repository",
    ead_link: "Archival description in EAD",
    subject: "subjects",
    place: "places",
    person: "persons",
    corporate: "corporate bodies",
};

/// Fixed labels exist in Italian and English; other languages get the
/// English labels tagged `en`.
pub(crate) fn labels_for(lang: &str) -> &'static Labels {
    if lang == "it" {
        &ITALIAN
    } else {
        &ENGLISH
    }
}

/// Display pairs for a unit: title, date, id, level and holding
/// institution, then the unit's own descriptive fields in source order,
/// then one entry per access-term category.
pub fn metadata_pairs(unit: &ArchivalUnit, lang: &str) -> Vec<MetadataEntry> {
    let labels = labels_for(lang);
    let pair = |label: &str, value: LanguageMap| MetadataEntry {
        label: language_map(labels.lang, label),
        value,
    };

    let mut out = Vec::new();
    if !unit.title.is_empty() {
        out.push(pair(labels.title, language_map(lang, &unit.title)));
    }
    if !unit.date_display.is_empty() {
        out.push(pair(labels.date, language_map(lang, &unit.date_display)));
    }
    out.push(pair(labels.id, language_map(NO_LANGUAGE, &unit.unit_id)));
    out.push(pair(
        labels.level,
        language_map(lang, unit.level.display_name(lang)),
    ));
    if let Some(repo) = &unit.repository {
        out.push(pair(labels.repository, language_map(lang, repo)));
    }
    for (label, value) in &unit.descriptive_pairs {
        out.push(MetadataEntry {
            label: language_map(lang, label),
            value: language_map(lang, value),
        });
    }
    for category in TermCategory::EMIT_ORDER {
        let mut parts: Vec<String> = Vec::new();
        for t in unit.access_terms.iter().filter(|t| t.category == category) {
            if !parts.contains(&t.part) {
                parts.push(t.part.clone());
            }
        }
        if !parts.is_empty() {
            out.push(MetadataEntry {
                label: language_map(labels.lang, labels.category(category)),
                value: LanguageMap::from([(lang.to_string(), parts)]),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archival_model::{AccessTerm, ArchivalLevel};

    fn flat(entries: &[MetadataEntry]) -> Vec<(String, String)> {
        entries
            .iter()
            .map(|e| {
                let l = e.label.values().next().unwrap().join("; ");
                let v = e.value.values().next().unwrap().join("; ");
                (l, v)
            })
            .collect()
    }

    #[test]
    fn minimal_unit() {
        let u = ArchivalUnit::new("X1", ArchivalLevel::Series, "Serie A");
        let pairs = metadata_pairs(&u, "it");
        assert_eq!(
            flat(&pairs),
            [
                ("titolo".to_string(), "Serie A".to_string()),
                ("id".into(), "X1".into()),
                ("livello".into(), "serie".into())
            ]
        );
        assert_eq!(pairs[1].value, language_map("none", "X1"));
    }

    #[test]
    fn item_pairs_in_order() {
        let mut u = ArchivalUnit::new("IL8600011581", ArchivalLevel::Item, "Emigrazione 68: Italia oltre confine");
        u.date_display = "1968".into();
        u.descriptive_pairs.push(("regia".into(), "Perelli, Luigi (regista)".into()));
        u.access_terms.push(AccessTerm::new(TermCategory::Place, "Italia"));
        u.access_terms.push(AccessTerm::new(TermCategory::Subject, "Emigrazione"));
        u.access_terms.push(AccessTerm::new(TermCategory::Place, "Svizzera"));
        let got = flat(&metadata_pairs(&u, "it"));
        let want: Vec<(String, String)> = [
            ("titolo", "Emigrazione 68: Italia oltre confine"),
            ("data", "1968"),
            ("id", "IL8600011581"),
            ("livello", "documento"),
            ("regia", "Perelli, Luigi (regista)"),
            ("soggetti", "Emigrazione"),
            ("luoghi", "Italia; Svizzera"),
        ]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn english_labels() {
        let u = ArchivalUnit::new("X1", ArchivalLevel::File, "f");
        let got = flat(&metadata_pairs(&u, "en"));
        assert_eq!(got[2], ("level".to_string(), "file".to_string()));
    }
}
