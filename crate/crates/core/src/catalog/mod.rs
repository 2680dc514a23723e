//! Document store with hybrid keyword and vector search, SDG labelling and
//! on-disk snapshots.

mod sdg;
mod snapshot;
mod text;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{derive_causal_graph, enumerate_loops, GraphError};
use crate::model::SystemModel;
use crate::narrative::{to_structured, StructuredDiagram};

pub use sdg::{classify_sdg, GoalEntry, Lexicon, GOAL_COUNT};
pub use snapshot::{load_snapshot, save_snapshot, SNAPSHOT_FORMAT_VERSION};
pub use text::{cosine, embed, tokenize, EMBEDDING_DIM};

pub const BM25_K1: f64 = 1.2;
pub const BM25_B: f64 = 0.75;
pub const DEFAULT_LIMIT: usize = 20;
pub const MAX_LIMIT: usize = 100;
/// Loop length used when a model has too many loops to list in full.
pub const FALLBACK_LOOP_LENGTH: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("invalid document: {0}")]
    InvalidDocument(String),
    #[error("query needs text, an SDG or a topic")]
    EmptyQuery,
    #[error("limit {0} is outside 1..=100")]
    BadLimit(usize),
    #[error("SDG {0} is outside 1..=17")]
    BadSdg(u8),
    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(String),
    #[error("snapshot format {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("invalid SDG lexicon: {0}")]
    InvalidLexicon(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CatalogError {
    pub fn code(&self) -> &'static str {
        match self {
            CatalogError::InvalidDocument(_) => "invalid_document",
            CatalogError::EmptyQuery => "empty_query",
            CatalogError::BadLimit(_) => "bad_limit",
            CatalogError::BadSdg(_) => "bad_sdg",
            CatalogError::CorruptSnapshot(_) => "corrupt_snapshot",
            CatalogError::VersionMismatch { .. } => "version_mismatch",
            CatalogError::InvalidLexicon(_) => "invalid_lexicon",
            CatalogError::Io(_) => "io_error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdgLabel {
    pub goal: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    pub confidence: f64,
}

impl SdgLabel {
    fn check(&self) -> Result<(), String> {
        if !(1..=GOAL_COUNT).contains(&self.goal) {
            return Err(format!("SDG goal {} out of range", self.goal));
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(format!("SDG confidence {} out of range", self.confidence));
        }
        if let Some(t) = &self.target {
            let major = t.split('.').next().and_then(|m| m.parse::<u8>().ok());
            if major != Some(self.goal) {
                return Err(format!("target {t} does not belong to goal {}", self.goal));
            }
        }
        Ok(())
    }
}

/// A model and the metadata of the paper it comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogDocument {
    pub id: String,
    pub title: String,
    #[serde(rename = "abstract", default)]
    pub abstract_text: String,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub doi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<SystemModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagram: Option<StructuredDiagram>,
    #[serde(default)]
    pub sdg_labels: Vec<SdgLabel>,
    #[serde(default)]
    pub topics: Vec<String>,
    #[serde(default)]
    pub has_cld: bool,
    #[serde(default)]
    pub has_sfd: bool,
    #[serde(default)]
    pub loop_count: usize,
}

/// Hex SHA-256 of a document's source bytes.
pub fn content_id(source: &[u8]) -> String {
    Sha256::digest(source).iter().map(|b| format!("{b:02x}")).collect()
}

impl CatalogDocument {
    /// A metadata-only document.
    pub fn new(id: impl Into<String>, title: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            title: title.into(),
            abstract_text: String::new(),
            authors: Vec::new(),
            year: None,
            doi: None,
            model: None,
            diagram: None,
            sdg_labels: Vec::new(),
            topics: Vec::new(),
            has_cld: false,
            has_sfd: false,
            loop_count: 0,
        }
    }

    /// Attaches a model with its derived diagram and sets the structure
    /// flags. Returns whether the loop list had to be cut at
    /// [`FALLBACK_LOOP_LENGTH`].
    pub fn attach_model(&mut self, model: SystemModel) -> Result<bool, GraphError> {
        let graph = derive_causal_graph(&model)?;
        let (loops, truncated) = match enumerate_loops(&graph, None) {
            Ok(e) => (e.loops, false),
            Err(GraphError::LoopBudgetExceeded { .. }) => {
                let e = enumerate_loops(&graph, Some(FALLBACK_LOOP_LENGTH))?;
                (e.loops, e.truncated)
            }
            Err(e) => return Err(e),
        };
        let diagram = to_structured(&graph, &loops).expect("loops come from the same graph");
        self.has_sfd = model.stock_count() > 0;
        self.has_cld = !diagram.links.is_empty();
        self.loop_count = diagram.loops.len();
        self.diagram = Some(diagram);
        self.model = Some(model);
        Ok(truncated)
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        let bad = |m: String| Err(CatalogError::InvalidDocument(m));
        if self.id.trim().is_empty() {
            return bad("empty id".into());
        }
        if self.has_cld && self.diagram.is_none() {
            return bad("has_cld is set but there is no diagram".into());
        }
        if self.has_sfd && !self.model.as_ref().is_some_and(|m| m.stock_count() > 0) {
            return bad("has_sfd is set but there is no model with a stock".into());
        }
        let loops = self.diagram.as_ref().map_or(0, |d| d.loops.len());
        if self.loop_count != loops {
            return bad(format!("loop_count {} but the diagram has {loops} loops", self.loop_count));
        }
        for label in &self.sdg_labels {
            label.check().map_err(CatalogError::InvalidDocument)?;
        }
        Ok(())
    }

    /// Variable display names, from the model if present and otherwise the
    /// diagram.
    fn variable_names(&self) -> Vec<&str> {
        if let Some(m) = &self.model {
            m.variables.iter().map(|v| v.display_name.as_str()).collect()
        } else if let Some(d) = &self.diagram {
            d.variables.iter().map(|v| if v.display_name.is_empty() { &v.name } else { &v.display_name }.as_str()).collect()
        } else {
            Vec::new()
        }
    }

    /// The document without its model and diagram.
    pub fn summary(&self) -> CatalogDocument {
        CatalogDocument { model: None, diagram: None, ..self.clone() }
    }

    fn has_diagram(&self) -> bool {
        self.has_cld || self.has_sfd
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchQuery {
    #[serde(default)]
    pub text: Option<String>,
    #[serde(default)]
    pub sdg: Option<u8>,
    #[serde(default)]
    pub topic: Option<String>,
    #[serde(default)]
    pub require_diagram: bool,
    #[serde(default = "default_limit")]
    pub limit: usize,
}

fn default_limit() -> usize {
    DEFAULT_LIMIT
}

impl Default for SearchQuery {
    fn default() -> Self {
        Self { text: None, sdg: None, topic: None, require_diagram: false, limit: DEFAULT_LIMIT }
    }
}

impl SearchQuery {
    pub fn text(text: impl Into<String>) -> Self {
        Self { text: Some(text.into()), ..Self::default() }
    }

    fn query_text(&self) -> Option<&str> {
        self.text.as_deref().filter(|t| !t.trim().is_empty())
    }

    fn topic_filter(&self) -> Option<&str> {
        self.topic.as_deref().map(str::trim).filter(|t| !t.is_empty())
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        if self.query_text().is_none() && self.sdg.is_none() && self.topic_filter().is_none() {
            return Err(CatalogError::EmptyQuery);
        }
        if !(1..=MAX_LIMIT).contains(&self.limit) {
            return Err(CatalogError::BadLimit(self.limit));
        }
        if let Some(g) = self.sdg {
            if !(1..=GOAL_COUNT).contains(&g) {
                return Err(CatalogError::BadSdg(g));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub id: String,
    pub title: String,
    pub score: f64,
    pub keyword_score: f64,
    pub vector_score: f64,
    pub matched_fields: Vec<String>,
}

const FIELDS: [&str; 3] = ["title", "abstract", "variables"];

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    doc: CatalogDocument,
    vector: Vec<f32>,
    term_freq: BTreeMap<String, u32>,
    length: u32,
    field_terms: [BTreeSet<String>; 3],
}

impl Entry {
    fn build(doc: CatalogDocument, vector: Vec<f32>) -> Self {
        let title = tokenize(&doc.title);
        let abstract_terms = tokenize(&doc.abstract_text);
        let variables: Vec<String> = doc.variable_names().iter().flat_map(|n| tokenize(n)).collect();
        let mut term_freq = BTreeMap::new();
        for t in title.iter().chain(&abstract_terms).chain(&variables) {
            *term_freq.entry(t.clone()).or_insert(0) += 1;
        }
        let length = (title.len() + abstract_terms.len() + variables.len()) as u32;
        let field_terms = [title, abstract_terms, variables].map(|f| f.into_iter().collect());
        Self { doc, vector, term_freq, length, field_terms }
    }
}

/// Embedding of the text a document is searched by, at stored precision.
pub fn document_vector(doc: &CatalogDocument) -> Vec<f32> {
    embed(&format!("{}\n{}", doc.title, doc.abstract_text)).into_iter().map(|x| x as f32).collect()
}

/// In-memory index. Mutation takes `&mut self`; share behind a lock for
/// concurrent readers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Catalog {
    entries: BTreeMap<String, Entry>,
    doc_freq: BTreeMap<String, usize>,
    total_length: u64,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&CatalogDocument> {
        self.entries.get(id).map(|e| &e.doc)
    }

    /// Documents in id order.
    pub fn documents(&self) -> impl Iterator<Item = &CatalogDocument> {
        self.entries.values().map(|e| &e.doc)
    }

    pub(crate) fn vector(&self, id: &str) -> Option<&[f32]> {
        self.entries.get(id).map(|e| e.vector.as_slice())
    }

    /// Stores `doc`, replacing any document with the same id.
    pub fn index_document(&mut self, doc: CatalogDocument) -> Result<String, CatalogError> {
        doc.validate()?;
        let vector = document_vector(&doc);
        Ok(self.insert(doc, vector))
    }

    pub(crate) fn insert(&mut self, doc: CatalogDocument, vector: Vec<f32>) -> String {
        let id = doc.id.clone();
        self.remove(&id);
        let entry = Entry::build(doc, vector);
        for term in entry.term_freq.keys() {
            *self.doc_freq.entry(term.clone()).or_insert(0) += 1;
        }
        self.total_length += u64::from(entry.length);
        self.entries.insert(id.clone(), entry);
        id
    }

    pub fn remove(&mut self, id: &str) -> Option<CatalogDocument> {
        let old = self.entries.remove(id)?;
        for term in old.term_freq.keys() {
            if let Some(n) = self.doc_freq.get_mut(term) {
                *n -= 1;
                if *n == 0 {
                    self.doc_freq.remove(term);
                }
            }
        }
        self.total_length -= u64::from(old.length);
        Some(old.doc)
    }

    fn passes_filters(q: &SearchQuery, doc: &CatalogDocument) -> bool {
        q.sdg.is_none_or(|g| doc.sdg_labels.iter().any(|l| l.goal == g))
            && q.topic_filter().is_none_or(|t| doc.topics.iter().any(|d| d.trim().eq_ignore_ascii_case(t)))
            && (!q.require_diagram || doc.has_diagram())
    }

    fn bm25(&self, terms: &[String], e: &Entry) -> f64 {
        let n = self.entries.len() as f64;
        let avg = if self.entries.is_empty() { 0.0 } else { self.total_length as f64 / n };
        let mut score = 0.0;
        for t in terms {
            let Some(&tf) = e.term_freq.get(t) else { continue };
            let df = self.doc_freq.get(t).copied().unwrap_or(0) as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            let tf = f64::from(tf);
            let norm = if avg > 0.0 { f64::from(e.length) / avg } else { 0.0 };
            score += idf * tf * (BM25_K1 + 1.0) / (tf + BM25_K1 * (1.0 - BM25_B + BM25_B * norm));
        }
        score
    }

    /// Filters, then ranks. With text, the score is an even blend of BM25
    /// (divided by the best BM25 among the filtered documents) and the
    /// positive part of the embedding cosine, and only documents scoring
    /// above zero are returned, best first with ties by id. Without text
    /// every filtered document is returned, newest first, then by id.
    pub fn search(&self, q: &SearchQuery) -> Result<Vec<SearchResult>, CatalogError> {
        q.validate()?;
        let candidates: Vec<&Entry> = self.entries.values().filter(|e| Self::passes_filters(q, &e.doc)).collect();

        let Some(text) = q.query_text() else {
            let mut docs = candidates;
            docs.sort_by(|a, b| b.doc.year.cmp(&a.doc.year).then_with(|| a.doc.id.cmp(&b.doc.id)));
            return Ok(docs
                .into_iter()
                .take(q.limit)
                .map(|e| SearchResult {
                    id: e.doc.id.clone(),
                    title: e.doc.title.clone(),
                    score: 0.0,
                    keyword_score: 0.0,
                    vector_score: 0.0,
                    matched_fields: Vec::new(),
                })
                .collect());
        };

        let mut terms = tokenize(text);
        terms.sort();
        terms.dedup();
        let qv = embed(text);
        let scored: Vec<(&Entry, f64, f64)> = candidates
            .into_iter()
            .map(|e| {
                let dv: Vec<f64> = e.vector.iter().map(|&x| f64::from(x)).collect();
                (e, self.bm25(&terms, e), cosine(&qv, &dv))
            })
            .collect();
        let max_bm25 = scored.iter().map(|s| s.1).fold(0.0, f64::max);

        let mut results: Vec<SearchResult> = scored
            .into_iter()
            .filter_map(|(e, keyword, vector)| {
                let normalized = if max_bm25 > 0.0 { keyword / max_bm25 } else { 0.0 };
                let score = 0.5 * normalized + 0.5 * vector.max(0.0);
                (score > 0.0).then(|| SearchResult {
                    id: e.doc.id.clone(),
                    title: e.doc.title.clone(),
                    score,
                    keyword_score: keyword,
                    vector_score: vector,
                    matched_fields: FIELDS
                        .iter()
                        .zip(&e.field_terms)
                        .filter(|(_, f)| terms.iter().any(|t| f.contains(t)))
                        .map(|(name, _)| name.to_string())
                        .collect(),
                })
            })
            .collect();
        results.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
        results.truncate(q.limit);
        Ok(results)
    }

    /// Number of documents labelled with each goal, including goals with none.
    pub fn sdg_counts(&self) -> BTreeMap<u8, usize> {
        let mut counts: BTreeMap<u8, usize> = (1..=GOAL_COUNT).map(|g| (g, 0)).collect();
        for doc in self.documents() {
            let goals: BTreeSet<u8> = doc.sdg_labels.iter().map(|l| l.goal).collect();
            for g in goals {
                *counts.entry(g).or_insert(0) += 1;
            }
        }
        counts
    }
}
