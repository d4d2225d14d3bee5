use std::fmt::Write;

use super::EadDocument;
use crate::archival_model::{AccessTerm, ArchivalUnit, TermCategory};

const XSI_NAMESPACE: &str = "http://www.w3.org/2001/XMLSchema-instance";
const SCHEMA_LOCATION: &str = "http://ead3.archivists.org/schema/ ead3.xsd";

/// Serializes a finding aid: UTF-8, two-space indentation, attributes in
/// alphabetical order. Within a component the order is `<did>`, then
/// `<controlaccess>`, then child components.
pub fn emit_ead(doc: &EadDocument) -> String {
    let mut w = XmlWriter::default();
    w.out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    w.open(
        0,
        "ead",
        &[
            ("xmlns", doc.namespace.as_str()),
            ("xmlns:xsi", XSI_NAMESPACE),
            ("xsi:schemaLocation", SCHEMA_LOCATION),
        ],
    );
    if !doc.control_header.is_empty() {
        w.indent(1);
        w.out.push_str(&doc.control_header);
        w.out.push('\n');
    }
    write_component(&mut w, &doc.root, 1, true);
    w.close(0, "ead");
    w.out
}

fn write_component(w: &mut XmlWriter, unit: &ArchivalUnit, depth: usize, top: bool) {
    let name = if top { "archdesc" } else { "c" };
    w.open(depth, name, &[("level", unit.level.ead_name())]);
    write_did(w, unit, depth + 1);
    write_controlaccess(w, &unit.access_terms, depth + 1);
    if !unit.children.is_empty() {
        let mut child_depth = depth + 1;
        if top {
            w.open(child_depth, "dsc", &[]);
            child_depth += 1;
        }
        for child in &unit.children {
            write_component(w, child, child_depth, false);
        }
        if top {
            w.close(depth + 1, "dsc");
        }
    }
    w.close(depth, name);
}

fn write_did(w: &mut XmlWriter, unit: &ArchivalUnit, depth: usize) {
    w.open(depth, "did", &[]);
    let d = depth + 1;
    let mut unitid_attrs = vec![("identifier", unit.unit_id.as_str())];
    if let Some(cc) = &unit.country_code {
        unitid_attrs.push(("countrycode", cc));
    }
    w.leaf(d, "unitid", &unitid_attrs, &unit.unit_id);
    w.leaf(d, "unittitle", &[], &unit.title);
    if !unit.date_display.is_empty() || unit.date_normal.is_some() {
        let attrs: Vec<_> = unit.date_normal.iter().map(|n| ("normal", n.as_str())).collect();
        w.leaf(d, "unitdate", &attrs, &unit.date_display);
    }
    if let Some(extent) = &unit.extent {
        w.open(
            d,
            "physdescstructured",
            &[("coverage", "whole"), ("physdescstructuredtype", "materialtype")],
        );
        w.leaf(d + 1, "quantity", &[], &extent.quantity.to_string());
        w.leaf(d + 1, "unittype", &[], &extent.unit_type);
        if !extent.note.is_empty() {
            w.open(d + 1, "descriptivenote", &[]);
            w.leaf(d + 2, "p", &[], &extent.note);
            w.close(d + 1, "descriptivenote");
        }
        w.close(d, "physdescstructured");
    }
    if let Some(note) = &unit.scope_note {
        w.leaf(d, "didnote", &[], note);
    }
    for (label, value) in &unit.descriptive_pairs {
        w.leaf(d, "didnote", &[("label", label)], value);
    }
    if let Some(repo) = &unit.repository {
        w.open(d, "repository", &[]);
        w.indent(d + 1);
        w.out.push_str("<corpname><part>");
        escape_into(&mut w.out, repo, false);
        w.out.push_str("</part></corpname>\n");
        w.close(d, "repository");
    }
    w.close(depth, "did");
}

fn write_controlaccess(w: &mut XmlWriter, terms: &[AccessTerm], depth: usize) {
    if terms.is_empty() {
        return;
    }
    w.open(depth, "controlaccess", &[]);
    for category in TermCategory::EMIT_ORDER {
        for term in terms.iter().filter(|t| t.category == category) {
            let mut attrs = Vec::new();
            if let Some(id) = &term.identifier {
                attrs.push(("identifier", id.as_str()));
            }
            if let Some(n) = &term.normal_form {
                attrs.push(("normal", n.as_str()));
            }
            if let Some(s) = &term.source {
                attrs.push(("source", s.as_str()));
            }
            let el = category.ead_element();
            w.indent(depth + 1);
            w.start_tag(el, &attrs);
            w.out.push_str("<part>");
            escape_into(&mut w.out, &term.part, false);
            let _ = writeln!(w.out, "</part></{el}>");
        }
    }
    w.close(depth, "controlaccess");
}

#[derive(Default)]
struct XmlWriter {
    out: String,
}

impl XmlWriter {
    fn indent(&mut self, depth: usize) {
        for _ in 0..depth {
            self.out.push_str("  ");
        }
    }

    fn start_tag(&mut self, name: &str, attrs: &[(&str, &str)]) {
        let mut sorted = attrs.to_vec();
        sorted.sort_by(|a, b| a.0.cmp(b.0));
        self.out.push('<');
        self.out.push_str(name);
        for (k, v) in sorted {
            let _ = write!(self.out, " {k}=\"");
            escape_into(&mut self.out, v, true);
            self.out.push('"');
        }
        self.out.push('>');
    }

    fn open(&mut self, depth: usize, name: &str, attrs: &[(&str, &str)]) {
        self.indent(depth);
        self.start_tag(name, attrs);
        self.out.push('\n');
    }

    fn close(&mut self, depth: usize, name: &str) {
        self.indent(depth);
        let _ = writeln!(self.out, "</{name}>");
    }

    fn leaf(&mut self, depth: usize, name: &str, attrs: &[(&str, &str)], text: &str) {
        self.indent(depth);
        self.start_tag(name, attrs);
        escape_into(&mut self.out, text, false);
        let _ = writeln!(self.out, "</{name}>");
    }
}

fn escape_into(out: &mut String, s: &str, attr: bool) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' if attr => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archival_model::ArchivalLevel;
    use crate::ead_io::parse_ead;

    fn item() -> ArchivalUnit {
        let mut u = ArchivalUnit::new("IL8600011581", ArchivalLevel::Item, "Emigrazione 68: Italia oltre confine");
        u.country_code = Some("IT".into());
        u.date_display = "1968".into();
        u.date_normal = Some("1968".into());
        u
    }

    #[test]
    fn subject_renders_with_normal_and_source() {
        let mut u = item();
        u.access_terms.push(
            AccessTerm::new(TermCategory::Subject, "Immigrazione")
                .with_normal_form("Immigrazione")
                .with_source("nuovo soggettario"),
        );
        let xml = emit_ead(&EadDocument::new("", u));
        assert!(xml.contains(
            r#"<subject normal="Immigrazione" source="nuovo soggettario"><part>Immigrazione</part></subject>"#
        ));
    }

    #[test]
    fn no_terms_no_controlaccess() {
        let xml = emit_ead(&EadDocument::new("", item()));
        assert!(!xml.contains("controlaccess"));
    }

    #[test]
    fn exact_layout_of_a_small_item() {
        let mut u = item();
        u.descriptive_pairs.push(("regia".into(), "Perelli, Luigi (regista)".into()));
        u.access_terms.push(AccessTerm::new(TermCategory::Person, "Perelli, Luigi"));
        u.access_terms.push(
            AccessTerm::new(TermCategory::Place, "Italia")
                .with_identifier("http://viaf.org/viaf/152361066")
                .with_source("viaf"),
        );
        let xml = emit_ead(&EadDocument::new("<control/>", u));
        let expected = r#"<?xml version="1.0" encoding="UTF-8"?>
<ead xmlns="http://ead3.archivists.org/schema/" xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" xsi:schemaLocation="http://ead3.archivists.org/schema/ ead3.xsd">
  <control/>
  <archdesc level="item">
    <did>
      <unitid countrycode="IT" identifier="IL8600011581">IL8600011581</unitid>
      <unittitle>Emigrazione 68: Italia oltre confine</unittitle>
      <unitdate normal="1968">1968</unitdate>
      <didnote label="regia">Perelli, Luigi (regista)</didnote>
    </did>
    <controlaccess>
      <geogname identifier="http://viaf.org/viaf/152361066" source="viaf"><part>Italia</part></geogname>
      <persname><part>Perelli, Luigi</part></persname>
    </controlaccess>
  </archdesc>
</ead>
"#;
        assert_eq!(xml, expected);
    }

    #[test]
    fn escaping_round_trips() {
        let mut u = item();
        u.title = "A & B <c> \"d\"".into();
        u.descriptive_pairs.push(("l\"x".into(), "v&w".into()));
        let doc = EadDocument::new("", u);
        assert_eq!(parse_ead(&emit_ead(&doc)).unwrap(), doc);
    }
}
