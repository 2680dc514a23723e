use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{NarrativeError, NarrativeWarning};
use crate::graph::{enumerate_loops, CausalGraph, CausalLink, CausalNode, FeedbackLoop, LoopType, Polarity, Provenance};
use crate::model::{canonicalize_name, VariableKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramVariable {
    pub name: String,
    #[serde(default)]
    pub display_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<VariableKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramLink {
    pub from: String,
    pub to: String,
    pub polarity: Polarity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramLoop {
    pub id: String,
    pub variables: Vec<String>,
    #[serde(rename = "type")]
    pub loop_type: LoopType,
}

/// Wire form of a causal-loop diagram.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructuredDiagram {
    #[serde(default)]
    pub variables: Vec<DiagramVariable>,
    #[serde(default)]
    pub links: Vec<DiagramLink>,
    #[serde(default)]
    pub loops: Vec<DiagramLoop>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredImport {
    pub graph: CausalGraph,
    pub warnings: Vec<NarrativeWarning>,
}

/// Loop labels: `R`, `B` and `U` numbered independently in list order.
pub fn loop_ids(loops: &[FeedbackLoop]) -> Vec<String> {
    let mut counters: BTreeMap<char, usize> = BTreeMap::new();
    loops
        .iter()
        .map(|l| {
            let prefix = l.loop_type.prefix();
            let n = counters.entry(prefix).or_default();
            *n += 1;
            format!("{prefix}{n}")
        })
        .collect()
}

pub fn to_structured(graph: &CausalGraph, loops: &[FeedbackLoop]) -> Result<StructuredDiagram, NarrativeError> {
    for l in loops {
        let k = l.cycle.len();
        let consistent = k > 0 && (0..k).all(|i| graph.link(&l.cycle[i], &l.cycle[(i + 1) % k]).is_some());
        if !consistent {
            return Err(NarrativeError::InconsistentLoops(l.cycle.clone()));
        }
    }
    Ok(project(graph, loops))
}

/// Projection without the loop consistency check.
pub(crate) fn project(graph: &CausalGraph, loops: &[FeedbackLoop]) -> StructuredDiagram {
    StructuredDiagram {
        variables: graph
            .nodes()
            .iter()
            .map(|n| DiagramVariable {
                name: n.name.clone(),
                display_name: n.display_name.clone(),
                kind: n.kind,
            })
            .collect(),
        links: graph
            .links()
            .iter()
            .map(|l| DiagramLink {
                from: l.from.clone(),
                to: l.to.clone(),
                polarity: l.polarity,
            })
            .collect(),
        loops: loop_ids(loops)
            .into_iter()
            .zip(loops)
            .map(|(id, l)| DiagramLoop {
                id,
                variables: l.cycle.clone(),
                loop_type: l.loop_type,
            })
            .collect(),
    }
}

fn canonical(raw: &str) -> Result<String, NarrativeError> {
    canonicalize_name(raw).map_err(|_| NarrativeError::InvalidName(raw.to_string()))
}

fn rotate_to_min(cycle: &[String]) -> Vec<String> {
    let Some(start) = cycle.iter().enumerate().min_by_key(|(_, n)| *n).map(|(i, _)| i) else {
        return Vec::new();
    };
    cycle[start..].iter().chain(&cycle[..start]).cloned().collect()
}

/// Builds a graph from a diagram. Names are canonicalized; a missing
/// display name defaults to the given name. Declared loops are checked
/// against the loops recomputed from the links and only produce warnings.
pub fn from_structured(diagram: &StructuredDiagram) -> Result<StructuredImport, NarrativeError> {
    let mut nodes = Vec::with_capacity(diagram.variables.len());
    let mut seen = BTreeSet::new();
    for v in &diagram.variables {
        let name = canonical(&v.name)?;
        if !seen.insert(name.clone()) {
            return Err(NarrativeError::DuplicateVariable(name));
        }
        let display_name = if v.display_name.trim().is_empty() { v.name.trim() } else { v.display_name.trim() };
        nodes.push(CausalNode {
            name,
            display_name: display_name.to_string(),
            kind: v.kind,
        });
    }
    let resolve = |raw: &str| -> Result<String, NarrativeError> {
        let name = canonical(raw)?;
        if seen.contains(&name) {
            Ok(name)
        } else {
            Err(NarrativeError::DanglingReference(name))
        }
    };

    let mut links = Vec::with_capacity(diagram.links.len());
    let mut pairs = BTreeSet::new();
    for l in &diagram.links {
        let (from, to) = (resolve(&l.from)?, resolve(&l.to)?);
        if !pairs.insert((from.clone(), to.clone())) {
            return Err(NarrativeError::DuplicateLink { from, to });
        }
        links.push(CausalLink {
            from,
            to,
            polarity: l.polarity,
            provenance: Provenance::Declared,
        });
    }
    let declared: Vec<(String, Vec<String>, LoopType)> = diagram
        .loops
        .iter()
        .map(|l| {
            let members = l.variables.iter().map(|v| resolve(v)).collect::<Result<Vec<_>, _>>()?;
            Ok((l.id.clone(), rotate_to_min(&members), l.loop_type))
        })
        .collect::<Result<_, NarrativeError>>()?;

    let graph = CausalGraph::new(nodes, links)?;
    let mut warnings = Vec::new();
    if !declared.is_empty() {
        let computed: BTreeMap<Vec<String>, LoopType> =
            enumerate_loops(&graph, None)?.loops.into_iter().map(|l| (l.cycle, l.loop_type)).collect();
        for (id, cycle, declared_type) in declared {
            let message = match computed.get(&cycle) {
                None => format!("{} is not a feedback loop of the diagram's links", cycle.join(" -> ")),
                Some(actual) if *actual != declared_type => {
                    format!("declared {} but the links make it {}", declared_type.as_str(), actual.as_str())
                }
                Some(_) => continue,
            };
            warnings.push(NarrativeWarning::LoopMismatch { id, message });
        }
    }
    Ok(StructuredImport { graph, warnings })
}
