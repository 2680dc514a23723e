use std::collections::BTreeMap;

use serde::Serialize;

use super::structured::project;
use super::{DiagramLink, DiagramLoop, StructuredDiagram};
use crate::graph::{CausalGraph, FeedbackLoop, LoopType, Polarity};

/// Plain-English rendering of a diagram, one sentence per link and loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NarrativeDocument {
    pub overview: String,
    pub links: Vec<String>,
    pub loops: Vec<String>,
}

impl NarrativeDocument {
    /// The link sentences on one line each, suitable for re-parsing.
    pub fn links_section(&self) -> String {
        self.links.join("\n")
    }

    /// All three sections under their headings.
    pub fn render(&self) -> String {
        let mut out = format!("Overview\n{}\n", self.overview);
        for (heading, lines) in [("Links", &self.links), ("Loops", &self.loops)] {
            out.push('\n');
            out.push_str(heading);
            out.push('\n');
            for line in lines {
                out.push_str(line);
                out.push('\n');
            }
        }
        out
    }
}

pub fn describe(graph: &CausalGraph, loops: &[FeedbackLoop]) -> NarrativeDocument {
    describe_diagram(&project(graph, loops))
}

pub(crate) struct Names<'a>(BTreeMap<&'a str, &'a str>);

impl<'a> Names<'a> {
    pub(crate) fn of(diagram: &'a StructuredDiagram) -> Self {
        Names(
            diagram
                .variables
                .iter()
                .map(|v| {
                    let shown = if v.display_name.is_empty() { &v.name } else { &v.display_name };
                    (v.name.as_str(), shown.as_str())
                })
                .collect(),
        )
    }

    pub(crate) fn get(&self, name: &'a str) -> &'a str {
        self.0.get(name).copied().unwrap_or(name)
    }
}

pub(crate) fn overview(diagram: &StructuredDiagram) -> String {
    let count = |t: LoopType| diagram.loops.iter().filter(|l| l.loop_type == t).count();
    format!(
        "This model has {} variables, {} causal links, and {} feedback loops ({} reinforcing, {} balancing).",
        diagram.variables.len(),
        diagram.links.len(),
        diagram.loops.len(),
        count(LoopType::Reinforcing),
        count(LoopType::Balancing),
    )
}

pub(crate) fn link_sentence(link: &DiagramLink, names: &Names) -> String {
    let (from, to) = (names.get(&link.from), names.get(&link.to));
    match link.polarity {
        Polarity::Positive => format!("An increase in {from} causes {to} to increase."),
        Polarity::Negative => format!("An increase in {from} causes {to} to decrease."),
        Polarity::Unknown => format!("{from} influences {to} (direction unclear)."),
    }
}

pub(crate) fn loop_sentence(l: &DiagramLoop, names: &Names) -> String {
    let mut path: Vec<&str> = l.variables.iter().map(|v| names.get(v)).collect();
    if let Some(first) = path.first().copied() {
        path.push(first);
    }
    let article = if l.loop_type == LoopType::Undetermined { "an" } else { "a" };
    format!("{} is {article} {} loop through {}.", l.id, l.loop_type.as_str(), path.join(" → "))
}

pub fn describe_diagram(diagram: &StructuredDiagram) -> NarrativeDocument {
    let names = Names::of(diagram);
    NarrativeDocument {
        overview: overview(diagram),
        links: diagram.links.iter().map(|l| link_sentence(l, &names)).collect(),
        loops: diagram.loops.iter().map(|l| loop_sentence(l, &names)).collect(),
    }
}
