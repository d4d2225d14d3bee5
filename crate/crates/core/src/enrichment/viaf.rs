//! Remote VIAF name-authority lookups through the AutoSuggest endpoint.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::Deserialize;
use url::Url;

use super::resolver::{AuthorityRecord, AuthorityResolver, ResolverError};
use crate::archival_model::TermCategory;

pub const VIAF_SOURCE: &str = "viaf";
pub const DEFAULT_VIAF_ENDPOINT: &str = "https://viaf.org/viaf/";

#[derive(Debug, Clone)]
pub struct ViafConfig {
    /// Base URI; `AutoSuggest?query=...` is resolved against it.
    pub endpoint: Url,
    pub timeout: Duration,
    pub max_in_flight: usize,
    /// JSON file memoizing answers per (endpoint, category, surface).
    pub cache_path: Option<PathBuf>,
}

impl Default for ViafConfig {
    fn default() -> Self {
        Self {
            endpoint: Url::parse(DEFAULT_VIAF_ENDPOINT).expect("static URL"),
            timeout: Duration::from_secs(10),
            max_in_flight: 4,
            cache_path: None,
        }
    }
}

impl ViafConfig {
    pub fn with_endpoint(endpoint: &str) -> Result<Self, url::ParseError> {
        Ok(Self {
            endpoint: Url::parse(endpoint)?,
            ..Self::default()
        })
    }
}

pub struct ViafResolver {
    config: ViafConfig,
    http: reqwest::blocking::Client,
    gate: Gate,
    cache: Option<Mutex<DiskCache>>,
}

#[derive(Deserialize)]
struct Suggest {
    result: Option<Vec<Suggestion>>,
}

#[derive(Deserialize)]
struct Suggestion {
    term: Option<String>,
    #[serde(rename = "displayForm")]
    display_form: Option<String>,
    nametype: Option<String>,
    viafid: Option<serde_json::Value>,
}

impl ViafResolver {
    pub fn new(mut config: ViafConfig) -> Result<Self, ResolverError> {
        if !config.endpoint.path().ends_with('/') {
            let path = format!("{}/", config.endpoint.path());
            config.endpoint.set_path(&path);
        }
        let http = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .user_agent(concat!("archiiif/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| unavailable(e.to_string()))?;
        let cache = match &config.cache_path {
            Some(path) => Some(Mutex::new(DiskCache::load(path.clone())?)),
            None => None,
        };
        Ok(Self {
            gate: Gate::new(config.max_in_flight.max(1)),
            config,
            http,
            cache,
        })
    }

    /// Top-ranked suggestion whose VIAF name type matches the category.
    /// Subjects have no VIAF name type and never match.
    pub fn viaf_lookup(&self, surface: &str, category: TermCategory) -> Result<Option<AuthorityRecord>, ResolverError> {
        let surface = surface.trim();
        let Some(wanted) = name_type(category) else {
            return Ok(None);
        };
        if surface.is_empty() {
            return Ok(None);
        }
        let key = format!("{}\u{1f}{}\u{1f}{}", self.config.endpoint, category.as_str(), surface);
        if let Some(cache) = &self.cache {
            if let Some(hit) = cache.lock().expect("cache lock").get(&key) {
                return Ok(hit);
            }
        }

        let found = self.query(surface, wanted)?;
        if let Some(cache) = &self.cache {
            cache.lock().expect("cache lock").put(key, found.clone())?;
        }
        Ok(found)
    }

    fn query(&self, surface: &str, wanted: &str) -> Result<Option<AuthorityRecord>, ResolverError> {
        let mut url = self
            .config
            .endpoint
            .join("AutoSuggest")
            .map_err(|e| unavailable(e.to_string()))?;
        url.query_pairs_mut().append_pair("query", surface);

        let body = {
            let _slot = self.gate.acquire();
            let resp = self.http.get(url).send().map_err(|e| unavailable(e.to_string()))?;
            let status = resp.status();
            if !status.is_success() {
                return Err(unavailable(format!("HTTP {status}")));
            }
            resp.text().map_err(|e| unavailable(e.to_string()))?
        };
        let parsed: Suggest =
            serde_json::from_str(&body).map_err(|e| unavailable(format!("unreadable response: {e}")))?;

        let hit = parsed
            .result
            .unwrap_or_default()
            .into_iter()
            .find(|s| s.nametype.as_deref() == Some(wanted) && viaf_id(s).is_some());
        Ok(hit.map(|s| AuthorityRecord {
            identifier: Some(format!("http://viaf.org/viaf/{}", viaf_id(&s).expect("filtered"))),
            canonical_label: s.display_form.or(s.term).map(|l| l.trim().to_string()),
            source: VIAF_SOURCE.to_string(),
        }))
    }
}

impl AuthorityResolver for ViafResolver {
    fn source_name(&self) -> &str {
        VIAF_SOURCE
    }

    fn lookup(&self, surface: &str, category: TermCategory) -> Result<Option<AuthorityRecord>, ResolverError> {
        self.viaf_lookup(surface, category)
    }
}

fn name_type(category: TermCategory) -> Option<&'static str> {
    match category {
        TermCategory::Place => Some("geographic"),
        TermCategory::Person => Some("personal"),
        TermCategory::CorporateBody => Some("corporate"),
        TermCategory::Subject => None,
    }
}

fn viaf_id(s: &Suggestion) -> Option<String> {
    let id = match s.viafid.as_ref()? {
        serde_json::Value::String(v) => v.trim().to_string(),
        serde_json::Value::Number(n) => n.to_string(),
        _ => return None,
    };
    (!id.is_empty() && id.bytes().all(|b| b.is_ascii_digit())).then_some(id)
}

fn unavailable(reason: String) -> ResolverError {
    ResolverError::Unavailable {
        source_name: VIAF_SOURCE.to_string(),
        reason,
    }
}

struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Slot<'a>(&'a Gate);

impl Gate {
    fn new(max: usize) -> Self {
        Self {
            free: Mutex::new(max),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> Slot<'_> {
        let mut free = self.free.lock().expect("gate lock");
        while *free == 0 {
            free = self.cv.wait(free).expect("gate lock");
        }
        *free -= 1;
        Slot(self)
    }
}

impl Drop for Slot<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("gate lock") += 1;
        self.0.cv.notify_one();
    }
}

struct DiskCache {
    path: PathBuf,
    entries: BTreeMap<String, Option<AuthorityRecord>>,
}

impl DiskCache {
    fn load(path: PathBuf) -> Result<Self, ResolverError> {
        let entries = match std::fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text).map_err(|e| unavailable(format!("cache {}: {e}", path.display())))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(unavailable(format!("cache {}: {e}", path.display()))),
        };
        Ok(Self { path, entries })
    }

    fn get(&self, key: &str) -> Option<Option<AuthorityRecord>> {
        self.entries.get(key).cloned()
    }

    fn put(&mut self, key: String, value: Option<AuthorityRecord>) -> Result<(), ResolverError> {
        self.entries.insert(key, value);
        let text = serde_json::to_string_pretty(&self.entries).expect("cache serializes");
        let tmp = self.path.with_extension("tmp");
        std::fs::write(&tmp, text)
            .and_then(|_| std::fs::rename(&tmp, &self.path))
            .map_err(|e| unavailable(format!("cache {}: {e}", self.path.display())))
    }
}
