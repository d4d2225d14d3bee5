use roxmltree::{Document, Node, ParsingOptions};
use thiserror::Error;

use super::{normalize_space, EadDocument, EAD3_NAMESPACE};
use crate::archival_model::{AccessTerm, ArchivalUnit, Extent, LevelMap, TermCategory};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EadError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("root element is not in the EAD3 namespace (found {found:?})")]
    WrongNamespace { found: Option<String> },
    #[error("expected an <ead> root element, found <{0}>")]
    NotEad(String),
    #[error("no <archdesc> element")]
    MissingArchdesc,
    #[error("line {line}: component {path} has no <did>/<unitid>")]
    MissingUnitId { path: String, line: u32 },
    #[error("line {line}: level {level:?} of {path} is not mapped to an archival level")]
    UnmappedLevel {
        level: String,
        path: String,
        line: u32,
    },
    #[error("line {line}: unit {unit_id}: extent quantity {value:?} is not a positive integer")]
    BadQuantity {
        unit_id: String,
        value: String,
        line: u32,
    },
}

pub fn parse_ead(xml_text: &str) -> Result<EadDocument, EadError> {
    parse_ead_with(xml_text, &LevelMap::default())
}

pub fn parse_ead_with(xml_text: &str, levels: &LevelMap) -> Result<EadDocument, EadError> {
    let opts = ParsingOptions {
        allow_dtd: true,
        ..ParsingOptions::default()
    };
    let doc = Document::parse_with_options(xml_text, opts)
        .map_err(|e| EadError::MalformedXml(e.to_string()))?;
    let root = doc.root_element();
    let ns = root.tag_name().namespace();
    if ns != Some(EAD3_NAMESPACE) {
        return Err(EadError::WrongNamespace {
            found: ns.map(str::to_string),
        });
    }
    if root.tag_name().name() != "ead" {
        return Err(EadError::NotEad(root.tag_name().name().to_string()));
    }

    let control_header = ead_child(root, "control")
        .map(|c| xml_text[c.range()].to_string())
        .unwrap_or_default();
    let archdesc = ead_child(root, "archdesc").ok_or(EadError::MissingArchdesc)?;

    let ctx = Ctx { doc: &doc, levels };
    let unit = ctx.component(archdesc, "archdesc".to_string(), 0)?;
    Ok(EadDocument {
        control_header,
        root: unit,
        namespace: EAD3_NAMESPACE.to_string(),
    })
}

struct Ctx<'a, 'input> {
    doc: &'a Document<'input>,
    levels: &'a LevelMap,
}

impl Ctx<'_, '_> {
    fn line(&self, node: Node) -> u32 {
        self.doc.text_pos_at(node.range().start).row
    }

    fn component(&self, node: Node, path: String, source_order: usize) -> Result<ArchivalUnit, EadError> {
        let raw_level = node.attribute("level").unwrap_or("");
        let lookup = if raw_level == "otherlevel" {
            node.attribute("otherlevel").unwrap_or("")
        } else {
            raw_level
        };
        let level = self.levels.resolve(lookup).ok_or_else(|| EadError::UnmappedLevel {
            level: lookup.to_string(),
            path: path.clone(),
            line: self.line(node),
        })?;

        let missing_id = || EadError::MissingUnitId {
            path: path.clone(),
            line: self.line(node),
        };
        let did = ead_child(node, "did").ok_or_else(missing_id)?;
        let unitid = ead_child(did, "unitid").ok_or_else(missing_id)?;
        let mut unit_id = text_of(unitid);
        if unit_id.is_empty() {
            unit_id = unitid.attribute("identifier").map(normalize_space).unwrap_or_default();
        }
        if unit_id.is_empty() {
            return Err(missing_id());
        }

        let mut unit = ArchivalUnit::new(unit_id, level, "");
        unit.source_order = source_order;
        unit.country_code = unitid.attribute("countrycode").map(str::to_string);
        self.read_did(did, &mut unit)?;

        for ca in ead_children(node).filter(|n| n.tag_name().name() == "controlaccess") {
            read_controlaccess(ca, &mut unit.access_terms);
        }

        let container = if node.tag_name().name() == "archdesc" {
            ead_child(node, "dsc")
        } else {
            Some(node)
        };
        if let Some(container) = container {
            for (i, c) in ead_children(container)
                .filter(|n| is_component(n.tag_name().name()))
                .enumerate()
            {
                let child_path = format!("{path}/{}[{}]", c.tag_name().name(), i + 1);
                unit.children.push(self.component(c, child_path, i)?);
            }
        }
        Ok(unit)
    }

    fn read_did(&self, did: Node, unit: &mut ArchivalUnit) -> Result<(), EadError> {
        let mut title_seen = false;
        let mut date_seen = false;
        for el in ead_children(did) {
            match el.tag_name().name() {
                "unitid" => {}
                "unittitle" if !title_seen => {
                    title_seen = true;
                    unit.title = text_of(el);
                }
                "unitdate" if !date_seen => {
                    date_seen = true;
                    unit.date_display = text_of(el);
                    unit.date_normal = el.attribute("normal").map(str::to_string);
                }
                "physdescstructured" if unit.extent.is_none() => {
                    unit.extent = Some(self.read_extent(el, &unit.unit_id)?);
                }
                "didnote" if el.attribute("label").is_none() && unit.scope_note.is_none() => {
                    unit.scope_note = Some(text_of(el));
                }
                "repository" if unit.repository.is_none() => {
                    let name = ead_child(el, "corpname").map(text_of).unwrap_or_else(|| text_of(el));
                    unit.repository = Some(name);
                }
                other => {
                    let label = el.attribute("label").map(normalize_space).unwrap_or_else(|| other.to_string());
                    unit.descriptive_pairs.push((label, text_of(el)));
                }
            }
        }
        Ok(())
    }

    fn read_extent(&self, el: Node, unit_id: &str) -> Result<Extent, EadError> {
        let raw = ead_child(el, "quantity").map(text_of).unwrap_or_default();
        let quantity = raw
            .parse::<u32>()
            .ok()
            .filter(|q| *q > 0)
            .ok_or_else(|| EadError::BadQuantity {
                unit_id: unit_id.to_string(),
                value: raw.clone(),
                line: self.line(el),
            })?;
        let unit_type = ead_child(el, "unittype").map(text_of).unwrap_or_default();
        let note = ead_child(el, "descriptivenote")
            .map(|dn| {
                let paras: Vec<String> = ead_children(dn)
                    .filter(|p| p.tag_name().name() == "p")
                    .map(text_of)
                    .collect();
                if paras.is_empty() {
                    text_of(dn)
                } else {
                    paras.join(" ")
                }
            })
            .unwrap_or_default();
        Ok(Extent {
            quantity,
            unit_type,
            note,
        })
    }
}

fn read_controlaccess(ca: Node, terms: &mut Vec<AccessTerm>) {
    for el in ead_children(ca) {
        let Some(category) = TermCategory::from_ead_element(el.tag_name().name()) else {
            continue;
        };
        let parts: Vec<String> = ead_children(el)
            .filter(|p| p.tag_name().name() == "part")
            .map(text_of)
            .collect();
        let part = if parts.is_empty() {
            text_of(el)
        } else {
            parts.join(" -- ")
        };
        terms.push(AccessTerm {
            category,
            part,
            source: el.attribute("source").map(str::to_string),
            identifier: el.attribute("identifier").map(str::to_string),
            normal_form: el.attribute("normal").map(str::to_string),
        });
    }
}

fn is_component(name: &str) -> bool {
    name == "c"
        || (name.len() == 3
            && name.starts_with('c')
            && name[1..].parse::<u8>().is_ok_and(|n| (1..=12).contains(&n)))
}

fn ead_children<'a, 'input: 'a>(node: Node<'a, 'input>) -> impl Iterator<Item = Node<'a, 'input>> {
    node.children()
        .filter(|n| n.is_element() && n.tag_name().namespace() == Some(EAD3_NAMESPACE))
}

fn ead_child<'a, 'input: 'a>(node: Node<'a, 'input>, name: &str) -> Option<Node<'a, 'input>> {
    ead_children(node).find(|n| n.tag_name().name() == name)
}

fn text_of(node: Node) -> String {
    let raw: String = node
        .descendants()
        .filter(|n| n.is_text())
        .filter_map(|n| n.text())
        .collect::<Vec<_>>()
        .join(" ");
    normalize_space(&raw)
}
