//! Directory ingestion: model files plus optional `<stem>.meta.json`
//! sidecars become catalog documents.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::catalog::{content_id, Catalog, CatalogDocument, Lexicon, SdgLabel, GOAL_COUNT};
use crate::model::Severity;
use crate::xmile::{parse_xmile, MODEL_EXTENSIONS};

/// Vendor formats recognised only to be reported as unsupported.
const FOREIGN_EXTENSIONS: [&str; 2] = ["mdl", "vpm"];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Paper metadata paired with a model file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub title: Option<String>,
    #[serde(rename = "abstract")]
    pub abstract_text: Option<String>,
    #[serde(default)]
    pub authors: Vec<String>,
    pub year: Option<i32>,
    pub doi: Option<String>,
    #[serde(default)]
    pub topics: Vec<String>,
    /// Replaces classification when present.
    pub sdg: Option<Vec<SdgEntry>>,
}

/// A sidecar SDG label: either a bare goal number or a full label.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SdgEntry {
    Goal(u8),
    Label(SdgLabel),
}

impl SdgEntry {
    fn label(&self) -> SdgLabel {
        match self {
            SdgEntry::Goal(goal) => SdgLabel { goal: *goal, target: None, confidence: 1.0 },
            SdgEntry::Label(l) => l.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FileStatus {
    Ok,
    Warnings(usize),
    Skipped(String),
}

impl fmt::Display for FileStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FileStatus::Ok => f.write_str("ok"),
            FileStatus::Warnings(_) => f.write_str("warnings"),
            FileStatus::Skipped(reason) => write!(f, "skipped: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileReport {
    /// Path relative to the ingested directory.
    pub path: PathBuf,
    pub status: FileStatus,
    pub variables: usize,
    pub links: usize,
    pub loops: usize,
    pub warnings: usize,
    /// Rendered diagnostics, most severe first.
    pub diagnostics: Vec<String>,
}

impl FileReport {
    fn skipped(path: PathBuf, reason: impl Into<String>) -> Self {
        Self {
            path,
            status: FileStatus::Skipped(reason.into()),
            variables: 0,
            links: 0,
            loops: 0,
            warnings: 0,
            diagnostics: Vec::new(),
        }
    }

    /// `path<TAB>status<TAB>counts`.
    pub fn line(&self) -> String {
        format!(
            "{}\t{}\tvariables={} links={} loops={} warnings={}",
            self.path.display(),
            self.status,
            self.variables,
            self.links,
            self.loops,
            self.warnings
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub files: Vec<FileReport>,
}

impl IngestReport {
    pub fn indexed(&self) -> usize {
        self.files.iter().filter(|f| !matches!(f.status, FileStatus::Skipped(_))).count()
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension().map(|e| e.to_string_lossy().to_ascii_lowercase())
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), IngestError> {
    let io = |source| IngestError::Io { path: dir.to_path_buf(), source };
    for entry in fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

fn sidecar_path(model: &Path) -> PathBuf {
    let stem = model.file_stem().unwrap_or_default().to_string_lossy();
    model.with_file_name(format!("{stem}.meta.json"))
}

fn read_sidecar(path: &Path) -> Result<Option<Sidecar>, String> {
    match fs::read(path) {
        Ok(bytes) => serde_json::from_slice(&bytes).map(Some).map_err(|e| format!("invalid_sidecar ({e})")),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(format!("unreadable_sidecar ({e})")),
    }
}

fn ingest_file(path: &Path, rel: PathBuf, lexicon: &Lexicon) -> Result<(FileReport, Option<CatalogDocument>), IngestError> {
    let bytes = fs::read(path).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })?;
    let model = match parse_xmile(&bytes) {
        Ok(m) => m,
        Err(e) => return Ok((FileReport::skipped(rel, e.code()), None)),
    };
    let sidecar = match read_sidecar(&sidecar_path(path)) {
        Ok(s) => s.unwrap_or_default(),
        Err(reason) => return Ok((FileReport::skipped(rel, reason), None)),
    };
    let mut diagnostics = model.diagnostics.clone();
    diagnostics.sort();
    let rendered: Vec<String> = diagnostics.iter().map(|d| d.to_string()).collect();
    if let Some(first) = diagnostics.iter().find(|d| d.severity == Severity::Error) {
        let mut report = FileReport::skipped(rel, first.code.as_str());
        report.variables = model.variables.len();
        report.diagnostics = rendered;
        return Ok((report, None));
    }
    let warnings = diagnostics.len();

    let stem = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
    let title = sidecar.title.clone().unwrap_or_else(|| if model.name.trim().is_empty() { stem } else { model.name.clone() });
    let mut doc = CatalogDocument::new(content_id(&bytes), title);
    doc.abstract_text = sidecar.abstract_text.clone().unwrap_or_default();
    doc.authors = sidecar.authors.clone();
    doc.year = sidecar.year;
    doc.doi = sidecar.doi.clone();
    doc.topics = sidecar.topics.clone();
    let variables = model.variables.len();
    let truncated = match doc.attach_model(model) {
        Ok(t) => t,
        Err(e) => return Ok((FileReport::skipped(rel, format!("analysis_failed ({e})")), None)),
    };
    doc.sdg_labels = match &sidecar.sdg {
        Some(entries) => {
            let labels: Vec<SdgLabel> = entries.iter().map(SdgEntry::label).collect();
            if labels.iter().any(|l| !(1..=GOAL_COUNT).contains(&l.goal)) {
                return Ok((FileReport::skipped(rel, "invalid_sidecar (SDG goal out of range)"), None));
            }
            labels
        }
        None => lexicon.classify(&format!("{}\n{}", doc.title, doc.abstract_text)),
    };
    if let Err(e) = doc.validate() {
        return Ok((FileReport::skipped(rel, format!("{} ({e})", e.code())), None));
    }

    let warnings = warnings + usize::from(truncated);
    let report = FileReport {
        path: rel,
        status: if warnings == 0 { FileStatus::Ok } else { FileStatus::Warnings(warnings) },
        variables,
        links: doc.diagram.as_ref().map_or(0, |d| d.links.len()),
        loops: doc.loop_count,
        warnings,
        diagnostics: rendered,
    };
    Ok((report, Some(doc)))
}

/// Ingests every model file under `dir`, visiting paths in lexicographic
/// order. Files that cannot be used are reported as skipped; only
/// directory-level I/O failures are errors.
pub fn ingest_dir(dir: &Path, lexicon: &Lexicon) -> Result<(Catalog, IngestReport), IngestError> {
    let mut files = Vec::new();
    collect_files(dir, &mut files)?;
    files.sort();

    let mut catalog = Catalog::new();
    let mut report = IngestReport::default();
    let mut seen: BTreeMap<String, PathBuf> = BTreeMap::new();
    for path in files {
        let rel = path.strip_prefix(dir).unwrap_or(&path).to_path_buf();
        let Some(ext) = extension(&path) else { continue };
        if FOREIGN_EXTENSIONS.contains(&ext.as_str()) {
            report.files.push(FileReport::skipped(rel, "unsupported_format"));
            continue;
        }
        if !MODEL_EXTENSIONS.contains(&ext.as_str()) {
            continue;
        }
        let (mut file_report, doc) = ingest_file(&path, rel.clone(), lexicon)?;
        if let Some(doc) = doc {
            if let Some(first) = seen.get(&doc.id) {
                file_report = FileReport::skipped(rel, format!("duplicate_content ({})", first.display()));
            } else {
                seen.insert(doc.id.clone(), rel);
                catalog.index_document(doc).expect("document validated during ingestion");
            }
        }
        report.files.push(file_report);
    }
    Ok((catalog, report))
}
