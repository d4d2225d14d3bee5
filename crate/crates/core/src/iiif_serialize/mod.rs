//! Canonical Presentation 3 JSON-LD for built resources, the structural
//! validator, and the static site layout.
//!
//! Canonical form: keys in the order `@context, id, type, label, metadata,
//! homepage, seeAlso, items`, then type-specific keys; two-space
//! indentation; a trailing newline; integral numbers without a fractional
//! part; language-map values always arrays.

mod site;
mod validate;

pub use site::{load_site, path_for_uri, write_site, SiteError};
pub use validate::{validate_resource, validate_set, IssueRule, Severity, ValidationIssue};

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::iiif_build::{
    BodyKind, Homepage, IiifResource, Item, LanguageMap, LinkedResource, MetadataEntry, PaintedBody, ResourceKind,
    ResourceRef,
};

pub const PRESENTATION_3_CONTEXT: &str = "http://iiif.io/api/presentation/3/context.json";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SerializeError {
    #[error("resource {id} violates structural rules: {}", .issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    UnserializableResource { id: String, issues: Vec<ValidationIssue> },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReadError {
    #[error("not JSON: {0}")]
    Json(String),
    #[error("{0}")]
    Shape(String),
}

pub fn serialize(resource: &IiifResource) -> Result<String, SerializeError> {
    let errors: Vec<_> = validate_resource(resource)
        .into_iter()
        .filter(|i| i.severity == Severity::Error)
        .collect();
    if !errors.is_empty() {
        return Err(SerializeError::UnserializableResource {
            id: resource.id.clone(),
            issues: errors,
        });
    }
    let mut text = serde_json::to_string_pretty(&to_json(resource, true)).expect("JSON values serialize");
    text.push('\n');
    Ok(text)
}

fn number(x: f64) -> Value {
    if x.fract() == 0.0 && x.abs() < 9.0e15 {
        Value::from(x as i64)
    } else {
        Value::from(x)
    }
}

fn lang_map(map: &LanguageMap) -> Value {
    Value::Object(map.iter().map(|(k, v)| (k.clone(), json!(v))).collect())
}

fn to_json(r: &IiifResource, top: bool) -> Value {
    let mut o = Map::new();
    if top {
        o.insert("@context".into(), json!(PRESENTATION_3_CONTEXT));
    }
    o.insert("id".into(), json!(r.id));
    o.insert("type".into(), json!(r.kind.as_str()));
    if !r.label.is_empty() {
        o.insert("label".into(), lang_map(&r.label));
    }
    if !r.metadata.is_empty() {
        let entries = r
            .metadata
            .iter()
            .map(|m| json!({"label": lang_map(&m.label), "value": lang_map(&m.value)}))
            .collect();
        o.insert("metadata".into(), Value::Array(entries));
    }
    if let Some(h) = &r.homepage {
        o.insert(
            "homepage".into(),
            json!([{"id": h.id, "type": "Text", "label": lang_map(&h.label), "format": "text/html"}]),
        );
    }
    if !r.see_also.is_empty() {
        let links = r
            .see_also
            .iter()
            .map(|s| json!({"id": s.id, "type": s.kind, "label": lang_map(&s.label), "format": s.format}))
            .collect();
        o.insert("seeAlso".into(), Value::Array(links));
    }

    match r.kind {
        ResourceKind::Canvas => {
            let mut pages = Vec::new();
            if let Some(body) = &r.content {
                let page = format!("{}/page", r.id);
                pages.push(json!({
                    "id": page,
                    "type": "AnnotationPage",
                    "items": [{
                        "id": format!("{page}/painting"),
                        "type": "Annotation",
                        "motivation": "painting",
                        "body": body_json(r, body),
                        "target": r.id,
                    }],
                }));
            }
            o.insert("items".into(), Value::Array(pages));
            extents(r, &mut o);
            if let Some(t) = &r.thumbnail {
                o.insert("thumbnail".into(), json!([{"id": t, "type": "Image"}]));
            }
        }
        _ => {
            let items = r
                .items
                .iter()
                .map(|i| match i {
                    Item::Ref(rf) => json!({"id": rf.id, "type": rf.kind.as_str(), "label": lang_map(&rf.label)}),
                    Item::Canvas(c) => to_json(c, false),
                })
                .collect();
            o.insert("items".into(), Value::Array(items));
        }
    }
    Value::Object(o)
}

fn extents(r: &IiifResource, o: &mut Map<String, Value>) {
    if let Some(w) = r.width {
        o.insert("width".into(), json!(w));
    }
    if let Some(h) = r.height {
        o.insert("height".into(), json!(h));
    }
    if let Some(d) = r.duration {
        o.insert("duration".into(), number(d));
    }
}

fn body_json(canvas: &IiifResource, body: &PaintedBody) -> Value {
    let mut o = Map::new();
    o.insert("id".into(), json!(body.location));
    o.insert("type".into(), json!(body.kind.as_str()));
    o.insert("format".into(), json!(body.format));
    extents(canvas, &mut o);
    Value::Object(o)
}

/// Reads a resource back from JSON. Lenient about missing properties so
/// that broken files can still be validated.
pub fn parse_resource(text: &str) -> Result<IiifResource, ReadError> {
    let v: Value = serde_json::from_str(text).map_err(|e| ReadError::Json(e.to_string()))?;
    from_json(&v)
}

fn shape(msg: impl Into<String>) -> ReadError {
    ReadError::Shape(msg.into())
}

fn str_field(v: &Value, key: &str) -> String {
    v.get(key).and_then(Value::as_str).unwrap_or_default().to_string()
}

fn read_lang_map(v: Option<&Value>) -> Result<LanguageMap, ReadError> {
    let Some(v) = v else {
        return Ok(LanguageMap::new());
    };
    let obj = v.as_object().ok_or_else(|| shape("language map is not an object"))?;
    obj.iter()
        .map(|(k, vals)| {
            let values = match vals {
                Value::String(s) => vec![s.clone()],
                Value::Array(a) => a
                    .iter()
                    .map(|x| x.as_str().map(str::to_string).ok_or_else(|| shape("language map value is not a string")))
                    .collect::<Result<_, _>>()?,
                _ => return Err(shape("language map values must be strings")),
            };
            Ok((k.clone(), values))
        })
        .collect()
}

fn array<'a>(v: &'a Value, key: &str) -> &'a [Value] {
    v.get(key).and_then(Value::as_array).map(Vec::as_slice).unwrap_or_default()
}

fn kind_of(v: &Value) -> Result<ResourceKind, ReadError> {
    let t = str_field(v, "type");
    ResourceKind::parse(&t).ok_or_else(|| shape(format!("unsupported type {t:?}")))
}

fn from_json(v: &Value) -> Result<IiifResource, ReadError> {
    if !v.is_object() {
        return Err(shape("resource is not an object"));
    }
    let kind = kind_of(v)?;
    let mut r = IiifResource::new(str_field(v, "id"), kind, read_lang_map(v.get("label"))?);
    r.metadata = array(v, "metadata")
        .iter()
        .map(|m| {
            Ok(MetadataEntry {
                label: read_lang_map(m.get("label"))?,
                value: read_lang_map(m.get("value"))?,
            })
        })
        .collect::<Result<_, ReadError>>()?;
    r.homepage = match array(v, "homepage").first() {
        Some(h) => Some(Homepage {
            id: str_field(h, "id"),
            label: read_lang_map(h.get("label"))?,
        }),
        None => None,
    };
    r.see_also = array(v, "seeAlso")
        .iter()
        .map(|s| {
            Ok(LinkedResource {
                id: str_field(s, "id"),
                kind: str_field(s, "type"),
                format: str_field(s, "format"),
                label: read_lang_map(s.get("label"))?,
            })
        })
        .collect::<Result<_, ReadError>>()?;

    r.width = v.get("width").and_then(Value::as_u64).map(|w| w as u32);
    r.height = v.get("height").and_then(Value::as_u64).map(|h| h as u32);
    r.duration = v.get("duration").and_then(Value::as_f64);
    r.thumbnail = array(v, "thumbnail").first().map(|t| str_field(t, "id"));

    if kind == ResourceKind::Canvas {
        let body = array(v, "items")
            .first()
            .and_then(|page| array(page, "items").first())
            .and_then(|anno| anno.get("body"));
        if let Some(body) = body {
            let t = str_field(body, "type");
            r.content = Some(PaintedBody {
                location: str_field(body, "id"),
                kind: BodyKind::parse(&t).ok_or_else(|| shape(format!("unsupported body type {t:?}")))?,
                format: str_field(body, "format"),
            });
        }
    } else {
        for it in array(v, "items") {
            let item_kind = kind_of(it)?;
            let embedded = kind == ResourceKind::Manifest || item_kind == ResourceKind::Canvas;
            r.items.push(if embedded {
                Item::Canvas(from_json(it)?)
            } else {
                Item::Ref(ResourceRef {
                    id: str_field(it, "id"),
                    kind: item_kind,
                    label: read_lang_map(it.get("label"))?,
                })
            });
        }
    }
    Ok(r)
}
