//! Causal-loop structure derived from models: polarized links, elementary
//! feedback loops and a deterministic layout.

mod derive;
mod layout;
mod loops;
mod polarity;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::VariableKind;

pub use derive::{derive_causal_graph, derive_causal_graph_reporting, GraphWarning};
pub use layout::{layout, layout_with_hints, LayoutResult, Point, HINT_COVERAGE, MIN_SEPARATION};
pub use loops::{classify_loop, enumerate_loops, enumerate_loops_with_cap, LoopEnumeration, DEFAULT_LOOP_CAP};
pub use polarity::infer_polarity;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("model has error diagnostics")]
    ModelHasErrors,
    #[error("{0} does not occur in the expression")]
    DependencyAbsent(String),
    #[error("more than {cap} feedback loops; pass a maximum loop length")]
    LoopBudgetExceeded { cap: usize },
    #[error("link {from} -> {to} references an unknown node")]
    DanglingLink { from: String, to: String },
    #[error("duplicate link {from} -> {to}")]
    DuplicateLink { from: String, to: String },
    #[error("duplicate node {0}")]
    DuplicateNode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
    #[serde(rename = "?")]
    Unknown,
}

impl Polarity {
    pub fn symbol(self) -> &'static str {
        match self {
            Polarity::Positive => "+",
            Polarity::Negative => "-",
            Polarity::Unknown => "?",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Equation,
    Inflow,
    Outflow,
    Declared,
    Edit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalLink {
    pub from: String,
    pub to: String,
    pub polarity: Polarity,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalNode {
    pub name: String,
    pub display_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<VariableKind>,
}

impl CausalNode {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        Self {
            display_name: name.clone(),
            name,
            kind: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoopType {
    Reinforcing,
    Balancing,
    Undetermined,
}

impl LoopType {
    pub fn as_str(self) -> &'static str {
        match self {
            LoopType::Reinforcing => "reinforcing",
            LoopType::Balancing => "balancing",
            LoopType::Undetermined => "undetermined",
        }
    }

    /// Label prefix: `R`, `B` or `U`.
    pub fn prefix(self) -> char {
        match self {
            LoopType::Reinforcing => 'R',
            LoopType::Balancing => 'B',
            LoopType::Undetermined => 'U',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackLoop {
    /// Members in traversal order, starting at the lexicographically
    /// smallest name.
    pub cycle: Vec<String>,
    pub links: Vec<CausalLink>,
    pub loop_type: LoopType,
}

/// Directed graph of variables with polarized links.
///
/// Nodes are kept sorted by name and links sorted by `(from, to)`, with at
/// most one link per ordered pair.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct CausalGraph {
    nodes: Vec<CausalNode>,
    links: Vec<CausalLink>,
}

impl CausalGraph {
    pub fn new(mut nodes: Vec<CausalNode>, mut links: Vec<CausalLink>) -> Result<Self, GraphError> {
        nodes.sort_by(|a, b| a.name.cmp(&b.name));
        if let Some(w) = nodes.windows(2).find(|w| w[0].name == w[1].name) {
            return Err(GraphError::DuplicateNode(w[0].name.clone()));
        }
        links.sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));
        if let Some(w) = links.windows(2).find(|w| w[0].from == w[1].from && w[0].to == w[1].to) {
            return Err(GraphError::DuplicateLink {
                from: w[0].from.clone(),
                to: w[0].to.clone(),
            });
        }
        let graph = Self { nodes, links };
        for l in &graph.links {
            if graph.index_of(&l.from).is_none() || graph.index_of(&l.to).is_none() {
                return Err(GraphError::DanglingLink {
                    from: l.from.clone(),
                    to: l.to.clone(),
                });
            }
        }
        Ok(graph)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn nodes(&self) -> &[CausalNode] {
        &self.nodes
    }

    pub fn links(&self) -> &[CausalLink] {
        &self.links
    }

    pub fn node_names(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.name.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.name.as_str().cmp(name)).ok()
    }

    pub fn node(&self, name: &str) -> Option<&CausalNode> {
        self.index_of(name).map(|i| &self.nodes[i])
    }

    pub fn display_name(&self, name: &str) -> String {
        self.node(name).map_or_else(|| name.to_string(), |n| n.display_name.clone())
    }

    pub fn link(&self, from: &str, to: &str) -> Option<&CausalLink> {
        self.links
            .binary_search_by(|l| (l.from.as_str(), l.to.as_str()).cmp(&(from, to)))
            .ok()
            .map(|i| &self.links[i])
    }

    pub fn links_from<'a>(&'a self, from: &'a str) -> impl Iterator<Item = &'a CausalLink> + 'a {
        self.links.iter().filter(move |l| l.from == from)
    }

    /// Inserts a node if absent. Returns whether it was inserted.
    pub fn insert_node(&mut self, node: CausalNode) -> bool {
        match self.nodes.binary_search_by(|n| n.name.cmp(&node.name)) {
            Ok(_) => false,
            Err(pos) => {
                self.nodes.insert(pos, node);
                true
            }
        }
    }

    /// Removes a node and every incident link.
    pub fn remove_node(&mut self, name: &str) -> Option<CausalNode> {
        let idx = self.index_of(name)?;
        self.links.retain(|l| l.from != name && l.to != name);
        Some(self.nodes.remove(idx))
    }

    /// Inserts or replaces the link for `(from, to)`. Both endpoints must exist.
    pub fn upsert_link(&mut self, link: CausalLink) -> Result<Option<CausalLink>, GraphError> {
        if self.index_of(&link.from).is_none() || self.index_of(&link.to).is_none() {
            return Err(GraphError::DanglingLink {
                from: link.from,
                to: link.to,
            });
        }
        match self
            .links
            .binary_search_by(|l| (l.from.as_str(), l.to.as_str()).cmp(&(link.from.as_str(), link.to.as_str())))
        {
            Ok(i) => Ok(Some(std::mem::replace(&mut self.links[i], link))),
            Err(i) => {
                self.links.insert(i, link);
                Ok(None)
            }
        }
    }

    pub fn remove_link(&mut self, from: &str, to: &str) -> Option<CausalLink> {
        let i = self
            .links
            .binary_search_by(|l| (l.from.as_str(), l.to.as_str()).cmp(&(from, to)))
            .ok()?;
        Some(self.links.remove(i))
    }

    /// Equality of nodes (names, display names, kinds) and links (endpoints
    /// and polarity). Link provenance is not compared.
    pub fn structurally_eq(&self, other: &CausalGraph) -> bool {
        self.nodes == other.nodes
            && self.links.len() == other.links.len()
            && self
                .links
                .iter()
                .zip(&other.links)
                .all(|(a, b)| a.from == b.from && a.to == b.to && a.polarity == b.polarity)
    }

    /// `(from, to, polarity)` for every link, sorted.
    pub fn link_set(&self) -> Vec<(String, String, Polarity)> {
        self.links.iter().map(|l| (l.from.clone(), l.to.clone(), l.polarity)).collect()
    }

    pub(crate) fn adjacency(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for l in &self.links {
            let (a, b) = (self.index_of(&l.from).unwrap(), self.index_of(&l.to).unwrap());
            adj.entry(a).or_default().push(b);
        }
        adj
    }
}
