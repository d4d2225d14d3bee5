#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use archiiif::archival_model::{
    AccessTerm, ArchivalLevel, ArchivalUnit, Extent, MediaAsset, MediaInventory, TermCategory,
};
use archiiif::ead_io::{parse_ead, parse_media_inventory, EadDocument};
use archiiif::enrichment::{enrich_tree, parse_term_list, AuthorityResolver, NormalizeOptions, SnapshotResolver};
use archiiif::iiif_build::{build_all, BuildConfig, ResourceSet};
use proptest::prelude::*;

pub const FIXTURE_BASE: &str = "http://127.0.0.1:5501";

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn fixture_doc() -> EadDocument {
    parse_ead(&read_fixture("pci_unitefilm.xml")).expect("fixture parses")
}

pub fn fixture_inventory() -> MediaInventory {
    parse_media_inventory(&read_fixture("inventory.jsonl")).expect("fixture inventory parses")
}

pub fn snapshot_resolvers() -> Vec<SnapshotResolver> {
    SnapshotResolver::from_csv(&read_fixture("snapshot.csv")).expect("snapshot parses")
}

/// The fixture finding aid after applying the bundled term list with the
/// snapshot resolvers.
pub fn enriched_fixture_doc() -> EadDocument {
    let mut doc = fixture_doc();
    let list = parse_term_list(&read_fixture("termlists/IL8600011581.json")).unwrap();
    let snapshots = snapshot_resolvers();
    let resolvers: Vec<&dyn AuthorityResolver> = snapshots.iter().map(|s| s as &dyn AuthorityResolver).collect();
    let (tree, _) = enrich_tree(&doc.root, &[list], &resolvers, &NormalizeOptions::default()).unwrap();
    doc.root = tree;
    doc
}

pub fn config(base: &str) -> BuildConfig {
    BuildConfig::new(base).unwrap()
}

pub fn fixture_set(base: &str) -> (EadDocument, ResourceSet) {
    let doc = enriched_fixture_doc();
    let set = build_all(&doc.root, &fixture_inventory(), &config(base)).expect("fixture builds");
    (doc, set)
}

/// Copies the project file and its inputs into a scratch directory so
/// builds write there instead of into the source tree.
pub fn scratch_project() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for name in ["pci_unitefilm.xml", "inventory.jsonl", "snapshot.csv", "project.toml"] {
        std::fs::copy(fixture(name), dir.path().join(name)).unwrap();
    }
    std::fs::create_dir(dir.path().join("termlists")).unwrap();
    std::fs::copy(
        fixture("termlists/IL8600011581.json"),
        dir.path().join("termlists/IL8600011581.json"),
    )
    .unwrap();
    dir
}

pub fn sha256_tree(dir: &Path) -> BTreeMap<PathBuf, String> {
    use sha2::{Digest, Sha256};
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let digest = Sha256::digest(std::fs::read(&path).unwrap());
                let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
                out.insert(path.strip_prefix(dir).unwrap().to_path_buf(), hex);
            }
        }
    }
    out
}

// Generated trees.

fn text() -> impl Strategy<Value = String> {
    "[A-Za-zàèéìòù0-9&<>\"' ]{1,24}".prop_filter_map("blank", |s| {
        let t = s.split_whitespace().collect::<Vec<_>>().join(" ");
        (!t.is_empty()).then_some(t)
    })
}

fn access_term() -> impl Strategy<Value = AccessTerm> {
    (
        prop::sample::select(TermCategory::ALL.to_vec()),
        text(),
        prop::option::of(prop::sample::select(vec!["nuovo soggettario", "viaf"])),
        prop::option::of(1u32..999_999_999),
        prop::option::of(text()),
    )
        .prop_map(|(category, part, source, id, normal)| {
            let mut t = AccessTerm::new(category, part);
            if let Some(s) = source {
                t = t.with_source(s);
            }
            if let Some(n) = id {
                t = t.with_identifier(format!("http://viaf.org/viaf/{n}"));
            }
            if let Some(n) = normal {
                t = t.with_normal_form(n);
            }
            t
        })
}

/// Descriptive content shared by every level. Terms come out in emission
/// order so a parse of the emitted XML can reproduce the list exactly.
fn describe(level: ArchivalLevel) -> impl Strategy<Value = ArchivalUnit> {
    (
        text(),
        prop::option::of((text(), prop::option::of("[0-9]{4}"))),
        prop::option::of((1u32..500, text(), prop::option::of(text()))),
        prop::option::of(text()),
        prop::option::of(text()),
        prop::collection::vec((text(), text()), 0..3),
        prop::collection::vec(access_term(), 0..4),
        any::<bool>(),
    )
        .prop_map(move |(title, date, extent, scope, repo, pairs, mut terms, cc)| {
            let mut u = ArchivalUnit::new("", level, title);
            if let Some((display, normal)) = date {
                u.date_display = display;
                u.date_normal = normal;
            }
            u.extent = extent.map(|(quantity, unit_type, note)| Extent {
                quantity,
                unit_type,
                note: note.unwrap_or_default(),
            });
            u.scope_note = scope;
            u.repository = repo;
            u.descriptive_pairs = pairs;
            terms.sort_by_key(|t| t.category.emit_rank());
            u.access_terms = terms;
            u.country_code = cc.then(|| "IT".to_string());
            u
        })
}

fn media_asset() -> impl Strategy<Value = MediaAsset> {
    prop_oneof![
        (1u32..6000, 1u32..6000).prop_map(|(w, h)| MediaAsset::image("", "scan.jpg", "image/jpeg", w, h)),
        (1u32..20_000).prop_map(|d| MediaAsset::video("", "film.mp4", "video/mp4", f64::from(d))),
        (1u32..20_000, 0u32..4).prop_map(|(d, q)| MediaAsset::audio(
            "",
            "tape.mp3",
            "audio/mpeg",
            f64::from(d) + f64::from(q) * 0.25
        )),
    ]
}

fn item() -> impl Strategy<Value = ArchivalUnit> {
    (describe(ArchivalLevel::Item), prop::collection::vec(media_asset(), 1..3)).prop_map(|(mut u, media)| {
        u.media = media;
        u
    })
}

fn with_children(parent: ArchivalUnit, children: Vec<ArchivalUnit>) -> ArchivalUnit {
    children.into_iter().fold(parent, ArchivalUnit::with_child)
}

fn file() -> impl Strategy<Value = ArchivalUnit> {
    (describe(ArchivalLevel::File), prop::collection::vec(item(), 1..4)).prop_map(|(u, c)| with_children(u, c))
}

fn subseries() -> impl Strategy<Value = ArchivalUnit> {
    (
        describe(ArchivalLevel::Subseries),
        prop::collection::vec(prop_oneof![3 => file(), 1 => item()], 0..3),
    )
        .prop_map(|(u, c)| with_children(u, c))
}

fn series() -> impl Strategy<Value = ArchivalUnit> {
    (
        describe(ArchivalLevel::Series),
        prop::collection::vec(prop_oneof![3 => file(), 2 => subseries(), 1 => item()], 0..4),
    )
        .prop_map(|(u, c)| with_children(u, c))
}

/// Valid archival trees: a fonds over series, subseries, files and items,
/// every item carrying media. Series and subseries sometimes hold items
/// directly. Unit ids are `U0`, `U1`, ... in pre-order.
pub fn archival_tree() -> impl Strategy<Value = ArchivalUnit> {
    (
        describe(ArchivalLevel::Fonds),
        prop::collection::vec(prop_oneof![4 => series(), 1 => file()], 0..4),
    )
        .prop_map(|(u, c)| {
            let mut tree = with_children(u, c);
            number_units(&mut tree, &mut 0);
            tree
        })
}

fn number_units(u: &mut ArchivalUnit, next: &mut usize) {
    u.unit_id = format!("U{next}");
    *next += 1;
    for (k, m) in u.media.iter_mut().enumerate() {
        m.asset_id = format!("{}-a{k}", u.unit_id);
    }
    for c in &mut u.children {
        number_units(c, next);
    }
}

pub fn strip_media(u: &ArchivalUnit) -> ArchivalUnit {
    let mut u = u.clone();
    u.media.clear();
    u.children = u.children.iter().map(strip_media).collect();
    u
}

pub fn inventory_of(tree: &ArchivalUnit) -> MediaInventory {
    tree.walk()
        .filter(|u| !u.media.is_empty())
        .map(|u| (u.unit_id.clone(), u.media.clone()))
        .collect()
}

// Recorded VIAF AutoSuggest responses served from loopback.

#[derive(Debug, Clone, Copy)]
pub enum ViafMode {
    Recorded,
    Status(u16),
    Stall(std::time::Duration),
}

pub struct CannedViaf {
    pub endpoint: String,
    pub hits: std::sync::Arc<std::sync::atomic::AtomicUsize>,
}

fn recorded_body(query: &str) -> String {
    let name = match query.to_lowercase().as_str() {
        "italia" => "viaf/autosuggest_italia.json",
        "svizzera" => "viaf/autosuggest_svizzera.json",
        _ => "viaf/autosuggest_empty.json",
    };
    read_fixture(name)
}

pub fn canned_viaf(mode: ViafMode) -> CannedViaf {
    use std::io::{BufRead, BufReader, Write};
    use std::sync::atomic::Ordering;

    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let endpoint = format!("http://{}/viaf/", listener.local_addr().unwrap());
    let hits = std::sync::Arc::new(std::sync::atomic::AtomicUsize::new(0));
    let counter = hits.clone();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            counter.fetch_add(1, Ordering::SeqCst);
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            if reader.read_line(&mut request_line).is_err() {
                continue;
            }
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                    break;
                }
            }
            let target = request_line.split_whitespace().nth(1).unwrap_or("/");
            let url = url::Url::parse(&format!("http://canned{target}")).unwrap();
            let query = url
                .query_pairs()
                .find(|(k, _)| k == "query")
                .map(|(_, v)| v.into_owned())
                .unwrap_or_default();
            let (status, body) = match mode {
                ViafMode::Recorded => (200, recorded_body(&query)),
                ViafMode::Status(code) => (code, "Service Unavailable".to_string()),
                ViafMode::Stall(d) => {
                    std::thread::sleep(d);
                    (200, recorded_body(&query))
                }
            };
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    CannedViaf { endpoint, hits }
}

// Oracles over generated trees. Expected ids are spelled out directly:
// generated unit ids are `U<n>`, whose slug is `u<n>`.

pub fn collection_id(base: &str, u: &ArchivalUnit) -> String {
    format!("{base}/collection/{}.json", u.unit_id.to_lowercase())
}

pub fn manifest_id(base: &str, u: &ArchivalUnit) -> String {
    format!("{base}/manifest/{}.json", u.unit_id.to_lowercase())
}

pub fn file_like(u: &ArchivalUnit) -> bool {
    u.level == ArchivalLevel::File || u.children.iter().any(|c| c.level == ArchivalLevel::Item)
}

/// (Collections, Manifests) the five-element mapping must produce.
pub fn expected_counts(tree: &ArchivalUnit) -> (usize, usize) {
    let non_items = tree.walk().filter(|u| u.level != ArchivalLevel::Item).count();
    let file_like = tree.walk().filter(|u| u.level != ArchivalLevel::Item && file_like(u)).count();
    let media_items = tree
        .walk()
        .filter(|u| u.level == ArchivalLevel::Item && !u.media.is_empty())
        .count();
    (non_items, file_like + media_items)
}

/// Every parent-child edge must appear as a reference, in sibling order,
/// with a file's own Manifest first; file Manifests paint one Canvas per
/// item in order; item Manifests one Canvas per asset.
pub fn bond_violations(base: &str, tree: &ArchivalUnit, set: &ResourceSet) -> Vec<String> {
    use archiiif::iiif_build::{language_map, ResourceKind};
    let mut out = Vec::new();
    if set.root_id != collection_id(base, tree) {
        out.push(format!("root is {}", set.root_id));
    }
    for u in tree.walk() {
        if u.level == ArchivalLevel::Item {
            match set.get(&manifest_id(base, u)) {
                Some(m) if m.canvases().count() == u.media.len() => {}
                Some(_) => out.push(format!("{}: canvas count", u.unit_id)),
                None => out.push(format!("{}: no item manifest", u.unit_id)),
            }
            continue;
        }
        let Some(c) = set.get(&collection_id(base, u)) else {
            out.push(format!("{}: no collection", u.unit_id));
            continue;
        };
        let got: Vec<(String, ResourceKind)> = c.items.iter().map(|i| (i.id().to_string(), i.kind())).collect();
        let mut want = Vec::new();
        if file_like(u) {
            want.push((manifest_id(base, u), ResourceKind::Manifest));
            let titles: Vec<_> = u
                .children
                .iter()
                .filter(|c| c.level == ArchivalLevel::Item)
                .map(|i| language_map("it", &i.title))
                .collect();
            match set.get(&manifest_id(base, u)) {
                Some(m) if m.canvases().map(|c| c.label.clone()).collect::<Vec<_>>() == titles => {}
                _ => out.push(format!("{}: file manifest canvases", u.unit_id)),
            }
        }
        for child in &u.children {
            want.push(if child.level == ArchivalLevel::Item {
                (manifest_id(base, child), ResourceKind::Manifest)
            } else {
                (collection_id(base, child), ResourceKind::Collection)
            });
        }
        if got != want {
            out.push(format!("{}: references {got:?}, expected {want:?}", u.unit_id));
        }
    }
    out
}
