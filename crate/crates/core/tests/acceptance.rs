//! One line per acceptance criterion. Runs without the libtest harness so
//! the verdicts show up in plain `cargo test` output.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use archiiif::archival_model::{find_unit, TermCategory};
use archiiif::cli::{cmd_build, cmd_validate, ProjectConfig};
use archiiif::ead_io::{emit_ead, parse_ead, EadDocument};
use archiiif::enrichment::{AuthorityResolver, ResolverError, ViafConfig, ViafResolver};
use archiiif::iiif_build::{build_all, LanguageMap, ResourceKind};
use archiiif::iiif_serialize::{validate_set, write_site, Severity};
use archiiif::publisher::{serve, ServerConfig};
use common::*;
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn one(lang: &str, v: &str) -> LanguageMap {
    LanguageMap::from([(lang.to_string(), vec![v.to_string()])])
}

fn runner() -> TestRunner {
    TestRunner::new(Config {
        cases: 200,
        failure_persistence: None,
        ..Config::default()
    })
}

const GEN_BASE: &str = "http://example.org/iiif";

fn record_metadata() -> Outcome {
    let started = Instant::now();
    let doc = fixture_doc();
    let set = build_all(&doc.root, &fixture_inventory(), &config(FIXTURE_BASE)).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let m = set
        .get(&format!("{FIXTURE_BASE}/manifest/il8600011581.json"))
        .ok_or("no manifest for IL8600011581")?;
    for (label, lang, value) in [
        ("data", "it", "1968"),
        ("id", "none", "IL8600011581"),
        ("livello", "it", "documento"),
        ("regia", "it", "Perelli, Luigi (regista)"),
    ] {
        ensure!(
            m.metadata.iter().any(|e| e.label == one("it", label) && e.value == one(lang, value)),
            "pair ({label}, {value}) missing"
        );
    }
    ensure!(elapsed < Duration::from_secs(5), "build took {elapsed:?}");
    Ok(())
}

fn controlaccess() -> Outcome {
    let doc = enriched_fixture_doc();
    let item = find_unit(&doc.root, "IL8600011581").ok_or("item missing")?;
    let xml = emit_ead(&doc.for_unit(item));
    for entry in [
        r#"<subject normal="Emigrazione" source="nuovo soggettario"><part>Emigrazione</part></subject>"#,
        r#"<subject normal="Immigrazione" source="nuovo soggettario"><part>Immigrazione</part></subject>"#,
        r#"<subject normal="Storia contemporanea" source="nuovo soggettario"><part>Storia contemporanea</part></subject>"#,
        r#"<geogname identifier="http://viaf.org/viaf/152361066" source="viaf"><part>Italia</part></geogname>"#,
        r#"<geogname identifier="http://viaf.org/viaf/159363991" source="viaf"><part>Svizzera</part></geogname>"#,
        r#"<corpname identifier="https://viaf.org/viaf/159457224/" source="viaf"><part>Partito Comunista Italiano</part></corpname>"#,
    ] {
        ensure!(xml.contains(entry), "missing {entry}");
    }
    ensure!(item.access_terms.len() == 6, "{} access terms", item.access_terms.len());
    ensure!(xml == read_fixture("golden/il8600011581.enriched.xml"), "differs from golden EAD");
    Ok(())
}

fn five_elements() -> Outcome {
    runner()
        .run(&archival_tree(), |tree| {
            let set = build_all(&tree, &Default::default(), &config(GEN_BASE)).unwrap();
            let want = expected_counts(&tree);
            let got = (set.count(ResourceKind::Collection), set.count(ResourceKind::Manifest));
            proptest::prop_assert_eq!(got, want);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let (_, set) = fixture_set(FIXTURE_BASE);
    let counts = (set.count(ResourceKind::Collection), set.count(ResourceKind::Manifest));
    ensure!(counts == (4, 3), "fixture counts {counts:?}");
    Ok(())
}

fn archival_bond() -> Outcome {
    runner()
        .run(&archival_tree(), |tree| {
            let set = build_all(&tree, &Default::default(), &config(GEN_BASE)).unwrap();
            proptest::prop_assert_eq!(bond_violations(GEN_BASE, &tree, &set), Vec::<String>::new());
            let dangling = validate_set(&set).iter().filter(|i| i.severity == Severity::Error).count();
            proptest::prop_assert_eq!(dangling, 0);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let (_, set) = fixture_set(FIXTURE_BASE);
    let file = set
        .get(&format!("{FIXTURE_BASE}/collection/pci-unitefilm-s01-f01.json"))
        .ok_or("file collection missing")?;
    ensure!(
        file.items.first().map(|i| i.id().to_string())
            == Some(format!("{FIXTURE_BASE}/manifest/pci-unitefilm-s01-f01.json")),
        "file collection does not open with its manifest"
    );
    Ok(())
}

fn mixed_media() -> Outcome {
    let (doc, set) = fixture_set(FIXTURE_BASE);
    let video = set
        .get(&format!("{FIXTURE_BASE}/manifest/il8600011581.json"))
        .and_then(|m| m.canvases().next())
        .ok_or("video canvas missing")?;
    ensure!(video.duration == Some(1920.0), "duration {:?}", video.duration);
    let canvases: Vec<_> = set.by_id.values().flat_map(|r| r.canvases()).collect();
    let images: Vec<_> = canvases
        .iter()
        .filter(|c| c.content.as_ref().is_some_and(|b| b.kind == archiiif::iiif_build::BodyKind::Image))
        .collect();
    ensure!(!images.is_empty(), "no image canvases");
    ensure!(
        images.iter().all(|c| c.width == Some(1240) && c.height == Some(1754)),
        "image canvas without width/height"
    );
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    write_site(&set, &doc, out.path()).map_err(|e| e.to_string())?;
    let issues = cmd_validate(out.path()).map_err(|e| e.to_string())?;
    let errors: Vec<_> = issues.iter().filter(|i| i.severity == Severity::Error).collect();
    ensure!(errors.is_empty(), "validator errors: {errors:?}");
    Ok(())
}

/// Serves an empty site, then builds the fixture project into it with the
/// server's own URL as base.
fn served_build() -> Result<(tempfile::TempDir, archiiif::publisher::ServerHandle, ProjectConfig), String> {
    let project = scratch_project();
    let root = project.path().join("site");
    std::fs::create_dir_all(root.join("collection")).map_err(|e| e.to_string())?;
    std::fs::create_dir_all(root.join("manifest")).map_err(|e| e.to_string())?;
    let mut server_config = ServerConfig::new(&root);
    server_config.bind_address = "127.0.0.1:0".into();
    let server = serve(server_config).map_err(|e| e.to_string())?;
    let mut config = ProjectConfig::load(&project.path().join("project.toml")).map_err(|e| e.to_string())?;
    config.base_uri = server.base_url();
    config.media_base = Some(format!("{}/media/", server.base_url()));
    cmd_build(&config, true).map_err(|e| e.to_string())?;
    for name in ["IL8600011581.mp4", "IL8600011581_thumb.jpg", "IL8600011581_visto.jpg"] {
        std::fs::create_dir_all(root.join("media")).map_err(|e| e.to_string())?;
        std::fs::copy(fixture(&format!("media/{name}")), root.join("media").join(name)).map_err(|e| e.to_string())?;
    }
    Ok((project, server, config))
}

fn http() -> reqwest::blocking::Client {
    reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(10))
        .build()
        .unwrap()
}

fn see_also() -> Outcome {
    let (_project, server, config) = served_build()?;
    let client = http();
    let doc = enriched_fixture_doc();
    let set = build_all(&doc.root, &fixture_inventory(), &config.build_config().map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ensure!(set.base_uri == server.base_url(), "base mismatch");
    for (id, resource) in &set.by_id {
        let link = resource
            .see_also
            .iter()
            .find(|l| l.format == "text/xml")
            .ok_or(format!("{id} has no text/xml seeAlso"))?;
        let res = client.get(&link.id).send().map_err(|e| e.to_string())?;
        ensure!(res.status() == 200, "{} -> {}", link.id, res.status());
        let ead = parse_ead(&res.text().map_err(|e| e.to_string())?).map_err(|e| format!("{}: {e}", link.id))?;
        ensure!(ead.root.unit_id == set.provenance[id], "{} describes {}", link.id, ead.root.unit_id);
    }
    Ok(())
}

fn round_trip_and_determinism() -> Outcome {
    runner()
        .run(&archival_tree(), |tree| {
            let doc = EadDocument::new("<control><recordid>x</recordid></control>", strip_media(&tree));
            let back = parse_ead(&emit_ead(&doc)).unwrap();
            proptest::prop_assert_eq!(back, doc);
            Ok(())
        })
        .map_err(|e| e.to_string())?;

    let project = scratch_project();
    let load = || ProjectConfig::load(&project.path().join("project.toml")).map_err(|e| e.to_string());
    let mut first = load()?;
    first.out_dir = project.path().join("run1");
    let mut second = load()?;
    second.out_dir = project.path().join("run2");
    cmd_build(&first, true).map_err(|e| e.to_string())?;
    cmd_build(&second, true).map_err(|e| e.to_string())?;
    ensure!(
        sha256_tree(&first.out_dir) == sha256_tree(&second.out_dir),
        "two builds differ"
    );

    let (_p, server, config) = served_build()?;
    let doc = enriched_fixture_doc();
    let set = build_all(&doc.root, &fixture_inventory(), &config.build_config().map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let mut uris: Vec<String> = Vec::new();
    for (id, r) in &set.by_id {
        uris.push(id.clone());
        uris.extend(r.see_also.iter().map(|l| l.id.clone()));
        for c in r.canvases() {
            uris.extend(c.content.iter().map(|b| b.location.clone()));
            uris.extend(c.thumbnail.iter().cloned());
        }
    }
    uris.sort();
    uris.dedup();
    let client = http();
    let started = Instant::now();
    for uri in &uris {
        let res = client.get(uri).send().map_err(|e| format!("{uri}: {e}"))?;
        ensure!(res.status() == 200, "{uri} -> {}", res.status());
        ensure!(
            res.headers().get("access-control-allow-origin").is_some_and(|v| v == "*"),
            "{uri} lacks CORS header"
        );
    }
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "GETs took {elapsed:?}");
    ensure!(uris.len() >= 16, "only {} URIs checked", uris.len());
    drop(server);
    Ok(())
}

fn viaf_contract() -> Outcome {
    let resolver = |endpoint: &str| {
        let mut c = ViafConfig::with_endpoint(endpoint).unwrap();
        c.timeout = Duration::from_millis(500);
        ViafResolver::new(c).unwrap()
    };
    let recorded = canned_viaf(ViafMode::Recorded);
    let hit = resolver(&recorded.endpoint)
        .lookup("Italia", TermCategory::Place)
        .map_err(|e| e.to_string())?
        .ok_or("no match for Italia")?;
    ensure!(
        hit.identifier.as_deref() == Some("http://viaf.org/viaf/152361066"),
        "Italia -> {:?}",
        hit.identifier
    );
    let down = canned_viaf(ViafMode::Status(503));
    ensure!(
        matches!(
            resolver(&down.endpoint).lookup("Italia", TermCategory::Place),
            Err(ResolverError::Unavailable { .. })
        ),
        "503 not reported as unavailable"
    );
    let slow = canned_viaf(ViafMode::Stall(Duration::from_secs(3)));
    ensure!(
        matches!(
            resolver(&slow.endpoint).lookup("Italia", TermCategory::Place),
            Err(ResolverError::Unavailable { .. })
        ),
        "timeout not reported as unavailable"
    );
    Ok(())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("record metadata fidelity", record_metadata),
        ("controlaccess fidelity", controlaccess),
        ("five-element structure", five_elements),
        ("archival bond preservation", archival_bond),
        ("mixed-media support", mixed_media),
        ("seeAlso semantics", see_also),
        ("round-trip and determinism", round_trip_and_determinism),
        ("VIAF client contract", viaf_contract),
    ];
    let hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        let ms = started.elapsed().as_millis();
        match outcome {
            Ok(()) => println!("PASS  {name} ({ms} ms)"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name} ({ms} ms): {why}");
            }
        }
    }
    std::panic::set_hook(hook);
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
