use std::collections::BTreeSet;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::describe::{loop_sentence, overview, Names};
use super::structured::project;
use super::{NarrativeError, StructuredDiagram};
use crate::graph::{CausalGraph, FeedbackLoop, LoopType, Polarity};
use crate::model::canonicalize_name;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopilotRequest {
    pub question: String,
    pub diagram: StructuredDiagram,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopilotReply {
    pub text: String,
    /// Loop ids (`R1`), link pairs (`from->to`) and variable names the answer
    /// relies on.
    pub facts_used: Vec<String>,
    pub intent: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdapterError {
    #[error("co-pilot adapter unavailable: {0}")]
    Unavailable(String),
    #[error("co-pilot adapter timed out")]
    Timeout,
}

/// A question-answering backend over a structured diagram.
pub trait CopilotAdapter: Send + Sync {
    fn respond(&self, request: &CopilotRequest) -> Result<CopilotReply, AdapterError>;
}

/// Keyword-intent adapter answering from the diagram alone.
#[derive(Debug, Clone, Copy, Default)]
pub struct DeterministicAdapter;

static EXPLAIN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\bexplain\s+(?:loop\s+)?([RBU]\d+)\b").unwrap());
static WHAT_IF: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\bwhat\s+happens\s+(?:if|when)\s+(.+?)\s+(increases|decreases)\b").unwrap()
});
static LOOP_COUNT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\bhow\s+many\b.*\b(loops?|feedback)\b").unwrap());
static LIST_VARIABLES: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\blist\b.*\bvariables?\b").unwrap());

fn reply(text: String, facts_used: Vec<String>, intent: &str) -> Option<CopilotReply> {
    Some(CopilotReply { text, facts_used, intent: intent.to_string() })
}

fn join_and(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn explain(d: &StructuredDiagram, q: &str) -> Option<CopilotReply> {
    let id = EXPLAIN.captures(q)?[1].to_ascii_uppercase();
    let names = Names::of(d);
    match d.loops.iter().find(|l| l.id == id) {
        Some(l) => reply(loop_sentence(l, &names), vec![id], "explain_loop"),
        None => reply(format!("This model has no loop labelled {id}."), vec![], "explain_loop"),
    }
}

fn what_if(d: &StructuredDiagram, q: &str) -> Option<CopilotReply> {
    let caps = WHAT_IF.captures(q)?;
    let subject = canonicalize_name(caps[1].trim()).ok()?;
    let rising = caps[2].eq_ignore_ascii_case("increases");
    d.variables.iter().find(|v| v.name == subject)?;
    let names = Names::of(d);
    let shown = names.get(&subject);
    let verb = if rising { "increases" } else { "decreases" };
    let mut facts = vec![subject.clone()];
    let effects: Vec<String> = d
        .links
        .iter()
        .filter(|l| l.from == subject)
        .map(|l| {
            facts.push(format!("{}->{}", l.from, l.to));
            let effect = match (l.polarity, rising) {
                (Polarity::Positive, true) | (Polarity::Negative, false) => "increases",
                (Polarity::Positive, false) | (Polarity::Negative, true) => "decreases",
                (Polarity::Unknown, _) => "changes in an unclear direction",
            };
            format!("{} {effect}", names.get(&l.to))
        })
        .collect();
    let text = if effects.is_empty() {
        format!("If {shown} {verb}, no other variable responds directly.")
    } else {
        format!("If {shown} {verb}, {}.", join_and(&effects))
    };
    reply(text, facts, "what_if")
}

fn loop_count(d: &StructuredDiagram, q: &str) -> Option<CopilotReply> {
    LOOP_COUNT.captures(q)?;
    let count = |t: LoopType| d.loops.iter().filter(|l| l.loop_type == t).count();
    let undetermined = count(LoopType::Undetermined);
    let mut text = format!(
        "This model has {} feedback loops: {} reinforcing, {} balancing",
        d.loops.len(),
        count(LoopType::Reinforcing),
        count(LoopType::Balancing)
    );
    if undetermined > 0 {
        text.push_str(&format!(", {undetermined} undetermined"));
    }
    text.push('.');
    reply(text, d.loops.iter().map(|l| l.id.clone()).collect(), "loop_count")
}

fn list_variables(d: &StructuredDiagram, q: &str) -> Option<CopilotReply> {
    LIST_VARIABLES.captures(q)?;
    let names = Names::of(d);
    let shown: Vec<String> = d.variables.iter().map(|v| names.get(&v.name).to_string()).collect();
    let text = if shown.is_empty() {
        "This model has no variables.".to_string()
    } else {
        format!("The variables are {}.", join_and(&shown))
    };
    reply(text, d.variables.iter().map(|v| v.name.clone()).collect(), "list_variables")
}

impl CopilotAdapter for DeterministicAdapter {
    fn respond(&self, request: &CopilotRequest) -> Result<CopilotReply, AdapterError> {
        let (d, q) = (&request.diagram, request.question.as_str());
        let answer = explain(d, q)
            .or_else(|| what_if(d, q))
            .or_else(|| loop_count(d, q))
            .or_else(|| list_variables(d, q))
            .unwrap_or_else(|| CopilotReply { text: overview(d), facts_used: vec![], intent: "fallback".into() });
        Ok(answer)
    }
}

/// Asks `adapter` about the graph. Fact tags in the reply that do not
/// resolve against the graph are dropped.
pub fn copilot_respond(
    question: &str,
    graph: &CausalGraph,
    loops: &[FeedbackLoop],
    adapter: &dyn CopilotAdapter,
) -> Result<CopilotReply, NarrativeError> {
    let diagram = project(graph, loops);
    let request = CopilotRequest { question: question.to_string(), diagram };
    let mut answer = adapter.respond(&request)?;
    let d = &request.diagram;
    let known: BTreeSet<String> = d
        .variables
        .iter()
        .map(|v| v.name.clone())
        .chain(d.links.iter().map(|l| format!("{}->{}", l.from, l.to)))
        .chain(d.loops.iter().map(|l| l.id.clone()))
        .collect();
    answer.facts_used.retain(|f| known.contains(f));
    Ok(answer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{CausalLink, CausalNode, Provenance};

    struct Down;
    impl CopilotAdapter for Down {
        fn respond(&self, _: &CopilotRequest) -> Result<CopilotReply, AdapterError> {
            Err(AdapterError::Unavailable("offline".into()))
        }
    }

    struct Inventive;
    impl CopilotAdapter for Inventive {
        fn respond(&self, _: &CopilotRequest) -> Result<CopilotReply, AdapterError> {
            Ok(CopilotReply { text: "x".into(), facts_used: vec!["a".into(), "ghost".into()], intent: "x".into() })
        }
    }

    #[test]
    fn adapter_failures_are_errors() {
        let g = CausalGraph::empty();
        let err = copilot_respond("hi", &g, &[], &Down).unwrap_err();
        assert_eq!(err.code(), "adapter_unavailable");
    }

    #[test]
    fn unresolved_facts_are_dropped() {
        let g = CausalGraph::new(vec![CausalNode::new("a")], vec![]).unwrap();
        assert_eq!(copilot_respond("?", &g, &[], &Inventive).unwrap().facts_used, vec!["a"]);
    }

    #[test]
    fn unclear_effects() {
        let g = CausalGraph::new(
            vec![CausalNode::new("a"), CausalNode::new("b"), CausalNode::new("c")],
            vec![
                CausalLink { from: "a".into(), to: "b".into(), polarity: Polarity::Unknown, provenance: Provenance::Edit },
                CausalLink { from: "a".into(), to: "c".into(), polarity: Polarity::Negative, provenance: Provenance::Edit },
            ],
        )
        .unwrap();
        let r = copilot_respond("What happens if a decreases?", &g, &[], &DeterministicAdapter).unwrap();
        assert_eq!(r.text, "If a decreases, b changes in an unclear direction and c increases.");
        let r = copilot_respond("what happens if c increases", &g, &[], &DeterministicAdapter).unwrap();
        assert_eq!(r.text, "If c increases, no other variable responds directly.");
        let r = copilot_respond("What happens if zzz increases?", &g, &[], &DeterministicAdapter).unwrap();
        assert_eq!(r.intent, "fallback");
    }
}
