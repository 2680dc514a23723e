use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::NarrativeError;
use crate::graph::{CausalGraph, CausalLink, CausalNode, Polarity, Provenance};
use crate::model::canonicalize_name;

/// One change to a causal graph. Names are taken as written and
/// canonicalized when applied; the written form becomes the display name of
/// any variable the edit creates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelEdit {
    AddLink { from: String, to: String, polarity: Polarity },
    RemoveLink { from: String, to: String },
    AddVariable { name: String },
    RemoveVariable { name: String },
    RenameVariable { old: String, new: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnparsedSentence {
    /// Byte offset of the sentence in the input.
    pub offset: usize,
    pub sentence: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParsedEdits {
    pub edits: Vec<ModelEdit>,
    pub unparsed: Vec<UnparsedSentence>,
}

fn re(pattern: &str) -> Regex {
    Regex::new(&format!(r"(?is)^{pattern}$")).expect("grammar pattern")
}

static REMOVE_LINK: LazyLock<Regex> = LazyLock::new(|| re(r"remove\s+the\s+link\s+from\s+(.+?)\s+to\s+(.+)"));
static ADD_VARIABLE: LazyLock<Regex> = LazyLock::new(|| re(r"add\s+variable\s+(.+)"));
static REMOVE_VARIABLE: LazyLock<Regex> = LazyLock::new(|| re(r"remove\s+variable\s+(.+)"));
static RENAME: LazyLock<Regex> = LazyLock::new(|| re(r"rename\s+(.+?)\s+to\s+(.+)"));
static CAUSES: LazyLock<Regex> =
    LazyLock::new(|| re(r"an\s+increase\s+in\s+(.+?)\s+causes\s+(.+)\s+to\s+(increase|decrease)"));
static INFLUENCES: LazyLock<Regex> =
    LazyLock::new(|| re(r"(.+?)\s+influences\s+(.+?)(?:\s+\(direction\s+unclear\))?"));
static CHANGES: LazyLock<Regex> = LazyLock::new(|| re(r"(.+?)\s+(increases|decreases)\s+(.+)"));

/// Sentences with their byte offsets. A sentence ends at `.`, `!` or `?`
/// followed by whitespace or the end of the text.
fn sentences(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    let bytes = text.as_bytes();
    for (i, c) in text.char_indices() {
        if matches!(c, '.' | '!' | '?') {
            let next = bytes.get(i + 1).copied();
            if next.is_none_or(|b| b.is_ascii_whitespace()) {
                push_trimmed(text, start, i, &mut out);
                start = i + 1;
            }
        }
    }
    push_trimmed(text, start, text.len(), &mut out);
    out
}

fn push_trimmed<'a>(text: &'a str, start: usize, end: usize, out: &mut Vec<(usize, &'a str)>) {
    let raw = &text[start..end];
    let trimmed = raw.trim_start();
    let offset = start + (raw.len() - trimmed.len());
    let trimmed = trimmed.trim_end();
    if !trimmed.is_empty() {
        out.push((offset, trimmed));
    }
}

fn name(s: &str) -> Option<String> {
    let s = s.split_whitespace().collect::<Vec<_>>().join(" ");
    canonicalize_name(&s).ok().map(|_| s)
}

fn match_sentence(s: &str) -> Option<ModelEdit> {
    if let Some(c) = REMOVE_LINK.captures(s) {
        return Some(ModelEdit::RemoveLink { from: name(&c[1])?, to: name(&c[2])? });
    }
    if let Some(c) = ADD_VARIABLE.captures(s) {
        return Some(ModelEdit::AddVariable { name: name(&c[1])? });
    }
    if let Some(c) = REMOVE_VARIABLE.captures(s) {
        return Some(ModelEdit::RemoveVariable { name: name(&c[1])? });
    }
    if let Some(c) = RENAME.captures(s) {
        return Some(ModelEdit::RenameVariable { old: name(&c[1])?, new: name(&c[2])? });
    }
    if let Some(c) = CAUSES.captures(s) {
        let polarity = if c[3].eq_ignore_ascii_case("increase") { Polarity::Positive } else { Polarity::Negative };
        return Some(ModelEdit::AddLink { from: name(&c[1])?, to: name(&c[2])?, polarity });
    }
    if let Some(c) = INFLUENCES.captures(s) {
        return Some(ModelEdit::AddLink { from: name(&c[1])?, to: name(&c[2])?, polarity: Polarity::Unknown });
    }
    if let Some(c) = CHANGES.captures(s) {
        let polarity = if c[2].eq_ignore_ascii_case("increases") { Polarity::Positive } else { Polarity::Negative };
        return Some(ModelEdit::AddLink { from: name(&c[1])?, to: name(&c[3])?, polarity });
    }
    None
}

/// Parses edit sentences:
///
/// - `A increases B.` / `A decreases B.` / `A influences B.`
/// - `An increase in A causes B to increase.` (or `to decrease.`)
/// - `Remove the link from A to B.`
/// - `Add variable A.` / `Remove variable A.`
/// - `Rename A to B.`
///
/// Sentences that match nothing are returned in `unparsed`. When none
/// match, the result is `NoEditsParsed`.
pub fn parse_controlled_nl(text: &str) -> Result<ParsedEdits, NarrativeError> {
    let mut edits = Vec::new();
    let mut unparsed = Vec::new();
    for (offset, sentence) in sentences(text) {
        match match_sentence(sentence) {
            Some(edit) => edits.push(edit),
            None => unparsed.push(UnparsedSentence { offset, sentence: sentence.to_string() }),
        }
    }
    if edits.is_empty() {
        return Err(NarrativeError::NoEditsParsed { unparsed });
    }
    Ok(ParsedEdits { edits, unparsed })
}

fn canonical(raw: &str) -> Result<String, NarrativeError> {
    canonicalize_name(raw).map_err(|_| NarrativeError::InvalidName(raw.to_string()))
}

fn ensure_node(graph: &mut CausalGraph, raw: &str) -> Result<String, NarrativeError> {
    let name = canonical(raw)?;
    graph.insert_node(CausalNode {
        name: name.clone(),
        display_name: raw.trim().to_string(),
        kind: None,
    });
    Ok(name)
}

fn apply_one(graph: &mut CausalGraph, edit: &ModelEdit) -> Result<(), String> {
    let conflict = |e: NarrativeError| e.to_string();
    match edit {
        ModelEdit::AddLink { from, to, polarity } => {
            let from = ensure_node(graph, from).map_err(conflict)?;
            let to = ensure_node(graph, to).map_err(conflict)?;
            graph
                .upsert_link(CausalLink { from, to, polarity: *polarity, provenance: Provenance::Edit })
                .map_err(|e| e.to_string())?;
        }
        ModelEdit::RemoveLink { from, to } => {
            let (from, to) = (canonical(from).map_err(conflict)?, canonical(to).map_err(conflict)?);
            if graph.remove_link(&from, &to).is_none() {
                return Err(format!("there is no link from {from} to {to}"));
            }
        }
        ModelEdit::AddVariable { name } => {
            ensure_node(graph, name).map_err(conflict)?;
        }
        ModelEdit::RemoveVariable { name } => {
            let name = canonical(name).map_err(conflict)?;
            if graph.remove_node(&name).is_none() {
                return Err(format!("there is no variable {name}"));
            }
        }
        ModelEdit::RenameVariable { old, new } => {
            let (old, new_raw) = (canonical(old).map_err(conflict)?, new);
            let new = canonical(new_raw).map_err(conflict)?;
            let Some(node) = graph.node(&old).cloned() else {
                return Err(format!("there is no variable {old}"));
            };
            if new != old && graph.node(&new).is_some() {
                return Err(format!("a variable named {new} already exists"));
            }
            let links: Vec<CausalLink> =
                graph.links().iter().filter(|l| l.from == old || l.to == old).cloned().collect();
            graph.remove_node(&old);
            graph.insert_node(CausalNode {
                name: new.clone(),
                display_name: new_raw.trim().to_string(),
                kind: node.kind,
            });
            let swap = |n: String| if n == old { new.clone() } else { n };
            for l in links {
                graph
                    .upsert_link(CausalLink { from: swap(l.from), to: swap(l.to), ..l })
                    .map_err(|e| e.to_string())?;
            }
        }
    }
    Ok(())
}

/// Applies edits in order to a copy of `graph`. Adding a link creates
/// missing endpoints, removing a variable drops its links, and adding an
/// existing variable does nothing. Removing an absent link or variable, or
/// renaming an absent variable or onto an existing one, aborts the whole
/// batch with `EditConflict`.
pub fn apply_edits(graph: &CausalGraph, edits: &[ModelEdit]) -> Result<CausalGraph, NarrativeError> {
    let mut out = graph.clone();
    for (index, edit) in edits.iter().enumerate() {
        apply_one(&mut out, edit).map_err(|reason| NarrativeError::EditConflict { index, reason })?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn link(from: &str, to: &str, polarity: Polarity) -> ModelEdit {
        ModelEdit::AddLink { from: from.into(), to: to.into(), polarity }
    }

    #[test]
    fn sentence_forms() {
        let parsed = parse_controlled_nl(
            "Population increases Births. Deaths DECREASES Population! a influences b? \
             Remove the link from a to b. Add variable Birth Rate. remove variable x. Rename a to c. \
             An increase in birth rate causes Births to increase. x influences y (direction unclear).",
        )
        .unwrap();
        assert_eq!(
            parsed.edits,
            vec![
                link("Population", "Births", Polarity::Positive),
                link("Deaths", "Population", Polarity::Negative),
                link("a", "b", Polarity::Unknown),
                ModelEdit::RemoveLink { from: "a".into(), to: "b".into() },
                ModelEdit::AddVariable { name: "Birth Rate".into() },
                ModelEdit::RemoveVariable { name: "x".into() },
                ModelEdit::RenameVariable { old: "a".into(), new: "c".into() },
                link("birth rate", "Births", Polarity::Positive),
                link("x", "y", Polarity::Unknown),
            ]
        );
        assert!(parsed.unparsed.is_empty());
    }

    #[test]
    fn unmatched_sentences_are_reported() {
        assert_eq!(
            parse_controlled_nl("Hello there."),
            Err(NarrativeError::NoEditsParsed {
                unparsed: vec![UnparsedSentence { offset: 0, sentence: "Hello there".into() }]
            })
        );
        assert!(matches!(parse_controlled_nl("  "), Err(NarrativeError::NoEditsParsed { unparsed }) if unparsed.is_empty()));
        let parsed = parse_controlled_nl("a increases b. What now?").unwrap();
        assert_eq!(parsed.unparsed, vec![UnparsedSentence { offset: 15, sentence: "What now".into() }]);
    }

    #[test]
    fn decimal_points_do_not_split() {
        let s = sentences("rate 2.5 increases b. next");
        assert_eq!(s, vec![(0, "rate 2.5 increases b"), (22, "next")]);
    }

    #[test]
    fn edits_build_and_modify_graphs() {
        let g = apply_edits(
            &CausalGraph::empty(),
            &parse_controlled_nl("Population increases Births. Deaths decreases Population.").unwrap().edits,
        )
        .unwrap();
        assert_eq!(g.nodes().len(), 3);
        assert_eq!(g.node("births").unwrap().display_name, "Births");
        assert_eq!(
            g.link_set(),
            vec![
                ("deaths".into(), "population".into(), Polarity::Negative),
                ("population".into(), "births".into(), Polarity::Positive),
            ]
        );

        let ab = apply_edits(&CausalGraph::empty(), &[link("a", "b", Polarity::Positive)]).unwrap();
        let removed = apply_edits(&ab, &[ModelEdit::RemoveVariable { name: "a".into() }]).unwrap();
        assert_eq!(removed.node_names().collect::<Vec<_>>(), vec!["b"]);
        assert!(removed.links().is_empty());

        let err = apply_edits(&ab, &[ModelEdit::RemoveLink { from: "b".into(), to: "a".into() }]).unwrap_err();
        assert!(matches!(err, NarrativeError::EditConflict { index: 0, .. }));
    }

    #[test]
    fn failed_batches_leave_no_trace() {
        let ab = apply_edits(&CausalGraph::empty(), &[link("a", "b", Polarity::Positive)]).unwrap();
        let before = ab.clone();
        let edits = [link("c", "a", Polarity::Negative), ModelEdit::RenameVariable { old: "zz".into(), new: "q".into() }];
        assert!(matches!(apply_edits(&ab, &edits), Err(NarrativeError::EditConflict { index: 1, .. })));
        assert_eq!(ab, before);
    }

    #[test]
    fn rename_moves_links() {
        let g = apply_edits(
            &CausalGraph::empty(),
            &[link("a", "b", Polarity::Positive), link("b", "a", Polarity::Negative), link("a", "a", Polarity::Positive)],
        )
        .unwrap();
        let r = apply_edits(&g, &[ModelEdit::RenameVariable { old: "A".into(), new: "Zed".into() }]).unwrap();
        assert_eq!(
            r.link_set(),
            vec![
                ("b".into(), "zed".into(), Polarity::Negative),
                ("zed".into(), "b".into(), Polarity::Positive),
                ("zed".into(), "zed".into(), Polarity::Positive),
            ]
        );
        assert_eq!(r.node("zed").unwrap().display_name, "Zed");
        let onto = apply_edits(&g, &[ModelEdit::RenameVariable { old: "a".into(), new: "b".into() }]);
        assert!(matches!(onto, Err(NarrativeError::EditConflict { .. })));
    }

    #[test]
    fn edit_wire_form() {
        let e: ModelEdit = serde_json::from_str(r#"{"op":"add_link","from":"a","to":"b","polarity":"-"}"#).unwrap();
        assert_eq!(e, link("a", "b", Polarity::Negative));
        assert!(serde_json::from_str::<ModelEdit>(r#"{"op":"add_variable","name":"a","extra":1}"#).is_err());
    }
}
