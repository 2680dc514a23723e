#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use sdatlas::model::{SystemModel, Variable, VariableKind};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn corpus() -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(fixture_dir().join("corpus"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "xmile"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_stem().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

pub fn corpus_file(name: &str) -> Vec<u8> {
    std::fs::read(fixture_dir().join("corpus").join(format!("{name}.xmile"))).unwrap()
}

/// The population model built by hand, independent of the parser.
pub fn population_model() -> SystemModel {
    SystemModel::new("Population")
        .with_variable(
            Variable::new("Population", VariableKind::Stock)
                .unwrap()
                .with_equation("100")
                .unwrap()
                .with_inflow("Births")
                .unwrap()
                .with_outflow("Deaths")
                .unwrap(),
        )
        .with_variable(Variable::new("Births", VariableKind::Flow).unwrap().with_equation("population * birth_rate").unwrap())
        .with_variable(Variable::new("Deaths", VariableKind::Flow).unwrap().with_equation("population / lifetime").unwrap())
        .with_variable(Variable::new("birth rate", VariableKind::Constant).unwrap().with_equation("0.02").unwrap())
        .with_variable(Variable::new("lifetime", VariableKind::Constant).unwrap().with_equation("70").unwrap())
}

/// Brute-force elementary-cycle enumeration: a DFS over every simple path
/// from every start node, keeping cycles that return to the start. Cycles are
/// reported in canonical rotation (smallest member first).
pub fn naive_cycles(nodes: &[String], arcs: &BTreeSet<(String, String)>) -> BTreeSet<Vec<String>> {
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (a, b) in arcs {
        succ.entry(a.as_str()).or_default().push(b.as_str());
    }
    let mut out = BTreeSet::new();
    fn walk<'a>(
        start: &'a str,
        at: &'a str,
        path: &mut Vec<&'a str>,
        succ: &BTreeMap<&'a str, Vec<&'a str>>,
        out: &mut BTreeSet<Vec<String>>,
    ) {
        for &next in succ.get(at).map(Vec::as_slice).unwrap_or(&[]) {
            if next == start {
                let min = path.iter().enumerate().min_by_key(|(_, n)| **n).unwrap().0;
                let rotated: Vec<String> = path[min..].iter().chain(&path[..min]).map(|s| s.to_string()).collect();
                out.insert(rotated);
            } else if !path.contains(&next) {
                path.push(next);
                walk(start, next, path, succ, out);
                path.pop();
            }
        }
    }
    for n in nodes {
        let mut path = vec![n.as_str()];
        walk(n, n, &mut path, &succ, &mut out);
    }
    out
}

const VOCABULARY: &[&str] = &[
    "malaria", "transmission", "urban", "traffic", "congestion", "fishery", "harvest", "energy", "renewable",
    "population", "growth", "school", "teachers", "water", "supply", "climate", "emissions", "housing", "poverty",
    "inventory", "workforce", "feedback", "dynamics", "policy", "health", "community", "forest", "carbon",
];

fn phrase(rng: &mut impl rand::Rng, max: usize) -> String {
    let k = rng.gen_range(1..=max);
    (0..k).map(|_| VOCABULARY[rng.gen_range(0..VOCABULARY.len())]).collect::<Vec<_>>().join(" ")
}

/// A random catalog of up to `max_docs` metadata documents over a small
/// vocabulary, with random SDG labels, topics, years and diagram flags.
pub fn random_documents(rng: &mut impl rand::Rng, max_docs: usize) -> Vec<sdatlas::catalog::CatalogDocument> {
    use sdatlas::catalog::{CatalogDocument, SdgLabel};
    use sdatlas::model::Variable;
    let n = rng.gen_range(1..=max_docs);
    (0..n)
        .map(|i| {
            let mut doc = CatalogDocument::new(format!("doc{i:03}"), phrase(rng, 4));
            doc.abstract_text = phrase(rng, 12);
            doc.year = if rng.gen_bool(0.8) { Some(rng.gen_range(1990..2030)) } else { None };
            doc.topics = (0..rng.gen_range(0..3)).map(|_| VOCABULARY[rng.gen_range(0..6)].to_string()).collect();
            doc.sdg_labels = (0..rng.gen_range(0..3))
                .map(|_| SdgLabel { goal: rng.gen_range(1..=17), target: None, confidence: rng.gen_range(0.0..=1.0) })
                .collect();
            if rng.gen_bool(0.4) {
                let mut m = SystemModel::new("m");
                for _ in 0..rng.gen_range(1..4) {
                    let kind = if rng.gen_bool(0.5) { VariableKind::Stock } else { VariableKind::Auxiliary };
                    let name = format!("{} {}", phrase(rng, 1), m.variables.len());
                    m = m.with_variable(Variable::new(&name, kind).unwrap().with_equation("1").unwrap());
                }
                doc.has_sfd = m.stock_count() > 0;
                doc.model = Some(m);
            }
            doc
        })
        .collect()
}

pub fn vocabulary() -> &'static [&'static str] {
    VOCABULARY
}
