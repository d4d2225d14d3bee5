//! Command-line front end: `build`, `validate`, `serve` and `enrich`.
//!
//! Exit status is 0 on success, 1 when the output would be structurally
//! invalid, 2 when the inputs cannot be read or make no sense.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::archival_model::ArchivalUnit;
use crate::ead_io::{emit_ead, parse_ead, parse_media_inventory, EadDocument};
use crate::enrichment::{
    enrich_tree, parse_term_list, AuthorityResolver, EnrichReport, NormalizeOptions, SnapshotResolver, TermList,
    ViafConfig, ViafResolver,
};
use crate::iiif_build::{build_all, BuildConfig, BuildErrorKind, Placeholder, ResourceKind, ResourceSet};
use crate::iiif_serialize::{
    load_site, parse_resource, path_for_uri, validate_resource, validate_set, write_site, IssueRule, Severity,
    SiteError, ValidationIssue,
};
use crate::publisher::{serve, ServerConfig, DEFAULT_BIND};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "archiiif", version, about = "Publish EAD3 finding aids as IIIF Presentation 3 resources")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse, optionally enrich, build, validate and write the static site.
    Build(BuildArgs),
    /// Check an exported site directory or a single JSON resource.
    Validate {
        path: PathBuf,
    },
    /// Serve an exported site over HTTP until interrupted.
    Serve(ServeArgs),
    /// Apply term lists to the finding aid and rewrite the EAD exports only.
    Enrich(EnrichArgs),
}

#[derive(Debug, Args)]
struct BuildArgs {
    /// Project file (TOML).
    #[arg(short, long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    base_uri: Option<String>,
    #[arg(long)]
    language: Option<String>,
    /// Normalize and merge term lists before building.
    #[arg(long)]
    enrich: bool,
    /// Leave out items without media instead of failing.
    #[arg(long)]
    lenient: bool,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value = "site")]
    root: PathBuf,
    #[arg(long, default_value = DEFAULT_BIND)]
    bind: String,
    #[arg(long, default_value = "*")]
    cors_origin: String,
    #[arg(long)]
    media_dir: Option<PathBuf>,
    /// Answer OPTIONS requests as CORS preflights.
    #[arg(long)]
    preflight: bool,
}

#[derive(Debug, Args)]
struct EnrichArgs {
    #[arg(short, long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Project file contents. Relative paths are taken relative to the file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub ead_path: PathBuf,
    pub inventory_path: PathBuf,
    pub termlist_dir: Option<PathBuf>,
    pub snapshot_path: Option<PathBuf>,
    pub viaf_endpoint: Option<String>,
    pub viaf_cache: Option<PathBuf>,
    pub base_uri: String,
    #[serde(default = "default_language")]
    pub default_language: String,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_strict")]
    pub strict_media: bool,
    pub ead_export_uri_pattern: Option<String>,
    pub institution_homepage: Option<String>,
    pub media_base: Option<String>,
    pub placeholder: Option<PlaceholderConfig>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaceholderConfig {
    pub location: String,
    pub format: String,
    pub width: u32,
    pub height: u32,
}

fn default_language() -> String {
    "it".to_string()
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("site")
}

fn default_strict() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Input(String),
    Invalid(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Invalid(_) => EXIT_INVALID,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Invalid(m) => f.write_str(m),
        }
    }
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

impl ProjectConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        let mut config: ProjectConfig =
            toml::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        rebase(&mut config.ead_path);
        rebase(&mut config.inventory_path);
        rebase(&mut config.out_dir);
        for p in [&mut config.termlist_dir, &mut config.snapshot_path, &mut config.viaf_cache]
            .into_iter()
            .flatten()
        {
            rebase(p);
        }
        Ok(config)
    }

    pub fn build_config(&self) -> Result<BuildConfig, CliError> {
        let mut c = BuildConfig::new(&self.base_uri).map_err(|e| input(e.to_string()))?;
        c.default_language = self.default_language.clone();
        c.strict_media = self.strict_media;
        if let Some(p) = &self.ead_export_uri_pattern {
            c.ead_export_uri_pattern = p.clone();
        }
        c.institution_homepage = self.institution_homepage.clone();
        c.media_base = self.media_base.clone();
        c.placeholder = self.placeholder.as_ref().map(|p| Placeholder {
            location: p.location.clone(),
            format: p.format.clone(),
            width: p.width,
            height: p.height,
        });
        c.check().map_err(|e| input(e.to_string()))?;
        Ok(c)
    }
}

/// What a successful build produced.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildSummary {
    pub collections: usize,
    pub manifests: usize,
    pub canvases: usize,
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub enrichment: Option<EnrichReport>,
}

impl fmt::Display for BuildSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} Collections / {} Manifests / {} Canvases, {} files written",
            self.collections,
            self.manifests,
            self.canvases,
            self.files.len()
        )?;
        if let Some(r) = &self.enrichment {
            writeln!(
                f,
                "enrichment: {} units, {} terms added, {} dropped",
                r.units_enriched, r.terms_added, r.terms_dropped
            )?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

fn load_ead(config: &ProjectConfig) -> Result<EadDocument, CliError> {
    let text = read(&config.ead_path)?;
    parse_ead(&text).map_err(|e| input(format!("{}: {e}", config.ead_path.display())))
}

fn load_term_lists(dir: &Path) -> Result<Vec<TermList>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| input(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| parse_term_list(&read(p)?).map_err(|e| input(format!("{}: {e}", p.display()))))
        .collect()
}

fn enrich_document(config: &ProjectConfig, doc: &mut EadDocument) -> Result<EnrichReport, CliError> {
    let dir = config
        .termlist_dir
        .as_ref()
        .ok_or_else(|| input("enrichment needs termlist_dir in the project file"))?;
    let lists = load_term_lists(dir)?;

    let mut owned: Vec<Box<dyn AuthorityResolver>> = Vec::new();
    if let Some(path) = &config.snapshot_path {
        let snapshots =
            SnapshotResolver::from_csv(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
        owned.extend(snapshots.into_iter().map(|s| Box::new(s) as Box<dyn AuthorityResolver>));
    }
    if let Some(endpoint) = &config.viaf_endpoint {
        let mut vc = ViafConfig::with_endpoint(endpoint).map_err(|e| input(format!("viaf_endpoint: {e}")))?;
        vc.cache_path = config.viaf_cache.clone();
        owned.push(Box::new(ViafResolver::new(vc).map_err(|e| input(e.to_string()))?));
    }
    let resolvers: Vec<&dyn AuthorityResolver> = owned.iter().map(|b| b.as_ref()).collect();

    let (tree, report) =
        enrich_tree(&doc.root, &lists, &resolvers, &NormalizeOptions::default()).map_err(|e| input(e.to_string()))?;
    doc.root = tree;
    Ok(report)
}

fn count_canvases(set: &ResourceSet) -> usize {
    set.by_id.values().map(|r| r.canvases().count()).sum()
}

pub fn cmd_build(config: &ProjectConfig, enrich: bool) -> Result<BuildSummary, CliError> {
    let build_config = config.build_config()?;
    let mut doc = load_ead(config)?;
    let inventory = parse_media_inventory(&read(&config.inventory_path)?)
        .map_err(|e| input(format!("{}: {e}", config.inventory_path.display())))?;
    let enrichment = if enrich {
        Some(enrich_document(config, &mut doc)?)
    } else {
        None
    };

    let set = build_all(&doc.root, &inventory, &build_config).map_err(|e| match e.kind {
        BuildErrorKind::InvalidTree(_) | BuildErrorKind::Attach(_) | BuildErrorKind::Mint(_) => input(e.to_string()),
        _ => CliError::Invalid(e.to_string()),
    })?;
    let errors: Vec<String> = validate_set(&set)
        .iter()
        .filter(|i| i.severity == Severity::Error)
        .map(ToString::to_string)
        .collect();
    if !errors.is_empty() {
        return Err(CliError::Invalid(errors.join("\n")));
    }
    let files = write_site(&set, &doc, &config.out_dir).map_err(|e| match e {
        SiteError::IoFailure { .. } => input(e.to_string()),
        _ => CliError::Invalid(e.to_string()),
    })?;

    let mut warnings = set.warnings.clone();
    if let Some(r) = &enrichment {
        warnings.extend(r.warnings.iter().cloned());
    }
    Ok(BuildSummary {
        collections: set.count(ResourceKind::Collection),
        manifests: set.count(ResourceKind::Manifest),
        canvases: count_canvases(&set),
        files,
        warnings,
        enrichment,
    })
}

/// Validates a site directory (every `.json` under it, plus references
/// between them) or one JSON file.
pub fn cmd_validate(path: &Path) -> Result<Vec<ValidationIssue>, CliError> {
    if path.is_file() {
        let resource = parse_resource(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
        return Ok(validate_resource(&resource));
    }
    if !path.is_dir() {
        return Err(input(format!("{}: no such file or directory", path.display())));
    }
    let found = load_site(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    if found.is_empty() {
        return Err(input(format!("{}: no JSON resources found", path.display())));
    }
    let mut resources = Vec::with_capacity(found.len());
    for (p, parsed) in found {
        resources.push(parsed.map_err(|e| input(format!("{}: {e}", p.display())))?);
    }

    let ids: std::collections::HashSet<&str> = resources.iter().map(|r| r.id.as_str()).collect();
    let mut issues = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for r in &resources {
        issues.extend(validate_resource(r));
        if !seen.insert(r.id.as_str()) {
            issues.push(issue(&r.id, IssueRule::DuplicateId, "id used by two files".into()));
        }
        for rf in r.references().filter(|rf| !ids.contains(rf.id.as_str())) {
            issues.push(issue(&r.id, IssueRule::DanglingReference, format!("{} is not in the site", rf.id)));
        }
    }
    Ok(issues)
}

fn issue(id: &str, rule: IssueRule, message: String) -> ValidationIssue {
    ValidationIssue {
        resource_id: id.to_string(),
        severity: rule.severity(),
        rule,
        message,
    }
}

/// Rewrites the EAD export of every unit from the enriched finding aid.
pub fn cmd_enrich(config: &ProjectConfig) -> Result<(EnrichReport, Vec<PathBuf>), CliError> {
    let build_config = config.build_config()?;
    let mut doc = load_ead(config)?;
    let report = enrich_document(config, &mut doc)?;
    let mut written = Vec::new();
    let units: Vec<&ArchivalUnit> = doc.root.walk().collect();
    for unit in units {
        let uri = build_config.ead_export_uri(&unit.unit_id);
        let rel = path_for_uri(build_config.base_uri(), &uri).map_err(|e| input(e.to_string()))?;
        let path = config.out_dir.join(&rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| input(format!("{}: {e}", parent.display())))?;
        }
        fs::write(&path, emit_ead(&doc.for_unit(unit))).map_err(|e| input(format!("{}: {e}", path.display())))?;
        written.push(rel);
    }
    Ok((report, written))
}

fn cmd_serve(args: ServeArgs) -> Result<(), CliError> {
    let config = ServerConfig {
        root_dir: args.root,
        bind_address: args.bind,
        cors_allow_origin: args.cors_origin,
        media_dir: args.media_dir,
        preflight: args.preflight,
    };
    let handle = serve(config).map_err(|e| input(e.to_string()))?;
    eprintln!("serving on {} (ctrl-c to stop)", handle.base_url());
    let waiter = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .map_err(|e| input(e.to_string()))?;
    waiter
        .block_on(tokio::signal::ctrl_c())
        .map_err(|e| input(format!("cannot listen for ctrl-c: {e}")))?;
    handle.shutdown();
    Ok(())
}

fn report<T>(result: Result<T, CliError>, ok: impl FnOnce(T) -> i32) -> i32 {
    match result {
        Ok(v) => ok(v),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Build(a) => {
            let result = ProjectConfig::load(&a.config).and_then(|mut config| {
                if let Some(out) = a.out {
                    config.out_dir = out;
                }
                if let Some(base) = a.base_uri {
                    config.base_uri = base;
                }
                if let Some(lang) = a.language {
                    config.default_language = lang;
                }
                if a.lenient {
                    config.strict_media = false;
                }
                cmd_build(&config, a.enrich)
            });
            report(result, |summary| {
                print!("{summary}");
                EXIT_OK
            })
        }
        Command::Validate { path } => report(cmd_validate(&path), |issues| {
            for i in &issues {
                println!("{i}");
            }
            let errors = issues.iter().filter(|i| i.severity == Severity::Error).count();
            println!("{errors} error(s), {} warning(s)", issues.len() - errors);
            if errors == 0 {
                EXIT_OK
            } else {
                EXIT_INVALID
            }
        }),
        Command::Serve(a) => report(cmd_serve(a), |()| EXIT_OK),
        Command::Enrich(a) => {
            let result = ProjectConfig::load(&a.config).and_then(|mut config| {
                if let Some(out) = a.out {
                    config.out_dir = out;
                }
                cmd_enrich(&config)
            });
            report(result, |(r, files)| {
                println!(
                    "{} units enriched, {} terms added, {} dropped; {} EAD files written",
                    r.units_enriched,
                    r.terms_added,
                    r.terms_dropped,
                    files.len()
                );
                for w in &r.warnings {
                    println!("warning: {w}");
                }
                EXIT_OK
            })
        }
    }
}
