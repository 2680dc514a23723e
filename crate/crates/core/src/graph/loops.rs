//! Elementary-cycle enumeration (Johnson's circuit-finding algorithm) and
//! loop classification.

use std::collections::{BTreeSet, VecDeque};

use super::{CausalGraph, FeedbackLoop, GraphError, LoopType, Polarity};

pub const DEFAULT_LOOP_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopEnumeration {
    pub loops: Vec<FeedbackLoop>,
    /// Set when a maximum length was given and at least one longer cycle was
    /// left out.
    pub truncated: bool,
}

/// Reinforcing for an even number of negative links, balancing for an odd
/// number, undetermined as soon as any polarity is unknown.
pub fn classify_loop(polarities: &[Polarity]) -> LoopType {
    if polarities.contains(&Polarity::Unknown) {
        return LoopType::Undetermined;
    }
    let negatives = polarities.iter().filter(|p| **p == Polarity::Negative).count();
    if negatives % 2 == 0 {
        LoopType::Reinforcing
    } else {
        LoopType::Balancing
    }
}

struct Budget {
    cap: Option<usize>,
    found: Vec<Vec<usize>>,
}

impl Budget {
    fn emit(&mut self, cycle: &[usize]) -> Result<(), GraphError> {
        self.found.push(cycle.to_vec());
        match self.cap {
            Some(cap) if self.found.len() > cap => Err(GraphError::LoopBudgetExceeded { cap }),
            _ => Ok(()),
        }
    }
}

/// Nodes `>= s` that lie on a cycle through `s` within the subgraph induced
/// by nodes `>= s`.
fn component_of(s: usize, succ: &[Vec<usize>], pred: &[Vec<usize>]) -> Vec<bool> {
    let n = succ.len();
    let reach = |adj: &[Vec<usize>]| {
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([s]);
        seen[s] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if w >= s && !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    };
    let fwd = reach(succ);
    let back = reach(pred);
    fwd.iter().zip(&back).map(|(a, b)| *a && *b).collect()
}

struct Johnson<'a> {
    succ: &'a [Vec<usize>],
    start: usize,
    in_scc: Vec<bool>,
    blocked: Vec<bool>,
    blocked_by: Vec<BTreeSet<usize>>,
    stack: Vec<usize>,
}

impl Johnson<'_> {
    fn unblock(&mut self, u: usize) {
        let mut work = vec![u];
        while let Some(x) = work.pop() {
            if !self.blocked[x] {
                continue;
            }
            self.blocked[x] = false;
            work.extend(std::mem::take(&mut self.blocked_by[x]));
        }
    }

    fn circuit(&mut self, v: usize, budget: &mut Budget) -> Result<bool, GraphError> {
        let mut closed = false;
        self.stack.push(v);
        self.blocked[v] = true;
        for &w in self.succ[v].iter() {
            if !self.in_scc[w] {
                continue;
            }
            if w == self.start {
                budget.emit(&self.stack)?;
                closed = true;
            } else if !self.blocked[w] && self.circuit(w, budget)? {
                closed = true;
            }
        }
        if closed {
            self.unblock(v);
        } else {
            for &w in self.succ[v].iter() {
                if self.in_scc[w] {
                    self.blocked_by[w].insert(v);
                }
            }
        }
        self.stack.pop();
        Ok(closed)
    }
}

fn all_cycles(succ: &[Vec<usize>], pred: &[Vec<usize>], budget: &mut Budget) -> Result<(), GraphError> {
    let n = succ.len();
    for s in 0..n {
        let in_scc = component_of(s, succ, pred);
        let cyclic = succ[s].iter().any(|&w| in_scc[w]);
        if !cyclic {
            continue;
        }
        let mut j = Johnson {
            succ,
            start: s,
            in_scc,
            blocked: vec![false; n],
            blocked_by: vec![BTreeSet::new(); n],
            stack: Vec::new(),
        };
        j.circuit(s, budget)?;
    }
    Ok(())
}

/// Whether `from` reaches `target` through nodes above `floor` that are not
/// on `path`.
fn reaches(from: usize, target: usize, floor: usize, path: &[usize], succ: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; succ.len()];
    for &p in path {
        seen[p] = true;
    }
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        for &w in &succ[v] {
            if w == target {
                return true;
            }
            if w > floor && !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    false
}

/// Depth-bounded simple-path search used when a maximum length is given.
/// Returns whether some cycle longer than `max_len` was left out.
fn bounded_cycles(succ: &[Vec<usize>], max_len: usize, budget: &mut Budget) -> Result<bool, GraphError> {
    struct Search<'a> {
        succ: &'a [Vec<usize>],
        start: usize,
        max_len: usize,
        path: Vec<usize>,
        truncated: bool,
    }
    impl Search<'_> {
        fn dfs(&mut self, v: usize, budget: &mut Budget) -> Result<(), GraphError> {
            for &w in self.succ[v].iter() {
                if w == self.start {
                    budget.emit(&self.path)?;
                } else if w > self.start && !self.path.contains(&w) {
                    if self.path.len() < self.max_len {
                        self.path.push(w);
                        self.dfs(w, budget)?;
                        self.path.pop();
                    } else if !self.truncated {
                        self.truncated = reaches(w, self.start, self.start, &self.path, self.succ);
                    }
                }
            }
            Ok(())
        }
    }

    let mut truncated = false;
    for s in 0..succ.len() {
        if max_len == 0 {
            truncated |= reaches(s, s, s, &[], succ);
            continue;
        }
        let mut search = Search { succ, start: s, max_len, path: vec![s], truncated: false };
        search.dfs(s, budget)?;
        truncated |= search.truncated;
    }
    Ok(truncated)
}

fn predecessors(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut pred = vec![Vec::new(); succ.len()];
    for (v, ws) in succ.iter().enumerate() {
        for &w in ws {
            pred[w].push(v);
        }
    }
    pred
}

/// Every elementary cycle of `graph`, classified and sorted by length and
/// then lexicographically. Fails with `LoopBudgetExceeded` when more than
/// [`DEFAULT_LOOP_CAP`] cycles exist and no `max_length` is given.
pub fn enumerate_loops(graph: &CausalGraph, max_length: Option<usize>) -> Result<LoopEnumeration, GraphError> {
    enumerate_loops_with_cap(graph, max_length, DEFAULT_LOOP_CAP)
}

pub fn enumerate_loops_with_cap(
    graph: &CausalGraph,
    max_length: Option<usize>,
    cap: usize,
) -> Result<LoopEnumeration, GraphError> {
    let n = graph.nodes().len();
    let mut succ = vec![Vec::new(); n];
    for (v, ws) in graph.adjacency() {
        succ[v] = ws;
    }
    let mut budget = Budget {
        cap: if max_length.is_none() { Some(cap) } else { None },
        found: Vec::new(),
    };
    let truncated = match max_length {
        None => {
            let pred = predecessors(&succ);
            all_cycles(&succ, &pred, &mut budget)?;
            false
        }
        Some(max_len) => bounded_cycles(&succ, max_len, &mut budget)?,
    };

    let mut cycles = budget.found;
    cycles.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    cycles.dedup();

    let names: Vec<&str> = graph.node_names().collect();
    let loops = cycles
        .into_iter()
        .map(|cycle| {
            let links: Vec<_> = (0..cycle.len())
                .map(|i| {
                    let (a, b) = (names[cycle[i]], names[cycle[(i + 1) % cycle.len()]]);
                    graph.link(a, b).expect("cycle follows graph links").clone()
                })
                .collect();
            let polarities: Vec<_> = links.iter().map(|l| l.polarity).collect();
            FeedbackLoop {
                cycle: cycle.iter().map(|&i| names[i].to_string()).collect(),
                loop_type: classify_loop(&polarities),
                links,
            }
        })
        .collect();
    Ok(LoopEnumeration { loops, truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{CausalLink, CausalNode, Provenance};

    fn graph(nodes: &[&str], arcs: &[(&str, &str, Polarity)]) -> CausalGraph {
        CausalGraph::new(
            nodes.iter().map(|n| CausalNode::new(*n)).collect(),
            arcs.iter()
                .map(|(a, b, p)| CausalLink {
                    from: a.to_string(),
                    to: b.to_string(),
                    polarity: *p,
                    provenance: Provenance::Declared,
                })
                .collect(),
        )
        .unwrap()
    }

    fn cycles(e: &LoopEnumeration) -> Vec<Vec<&str>> {
        e.loops.iter().map(|l| l.cycle.iter().map(String::as_str).collect()).collect()
    }

    use Polarity::{Negative as N, Positive as P, Unknown as U};

    #[test]
    fn classification() {
        assert_eq!(classify_loop(&[P, P]), LoopType::Reinforcing);
        assert_eq!(classify_loop(&[P, N]), LoopType::Balancing);
        assert_eq!(classify_loop(&[N, N]), LoopType::Reinforcing);
        assert_eq!(classify_loop(&[P, U]), LoopType::Undetermined);
        assert_eq!(classify_loop(&[N, U, N]), LoopType::Undetermined);
    }

    #[test]
    fn complete_digraph_on_three_nodes() {
        let arcs: Vec<_> = [("a", "b"), ("b", "a"), ("a", "c"), ("c", "a"), ("b", "c"), ("c", "b")]
            .into_iter()
            .map(|(x, y)| (x, y, P))
            .collect();
        let e = enumerate_loops(&graph(&["a", "b", "c"], &arcs), None).unwrap();
        assert_eq!(
            cycles(&e),
            vec![vec!["a", "b"], vec!["a", "c"], vec!["b", "c"], vec!["a", "b", "c"], vec!["a", "c", "b"]]
        );
        assert!(e.loops.iter().all(|l| l.loop_type == LoopType::Reinforcing));
        assert!(!e.truncated);
    }

    #[test]
    fn chain_has_no_loops() {
        let e = enumerate_loops(&graph(&["a", "b", "c"], &[("a", "b", P), ("b", "c", P)]), None).unwrap();
        assert!(e.loops.is_empty());
    }

    #[test]
    fn self_loops_are_cycles() {
        let e = enumerate_loops(&graph(&["a", "b"], &[("a", "a", N), ("a", "b", P), ("b", "a", P)]), None).unwrap();
        assert_eq!(cycles(&e), vec![vec!["a"], vec!["a", "b"]]);
        assert_eq!(e.loops[0].loop_type, LoopType::Balancing);
    }

    #[test]
    fn max_length_truncates() {
        let arcs: Vec<_> = [("a", "b"), ("b", "a"), ("a", "c"), ("c", "a"), ("b", "c"), ("c", "b")]
            .into_iter()
            .map(|(x, y)| (x, y, P))
            .collect();
        let g = graph(&["a", "b", "c"], &arcs);
        let e = enumerate_loops(&g, Some(2)).unwrap();
        assert_eq!(e.loops.len(), 3);
        assert!(e.truncated);
        let e = enumerate_loops(&g, Some(3)).unwrap();
        assert_eq!(e.loops.len(), 5);
        assert!(!e.truncated);
        let e = enumerate_loops(&g, Some(0)).unwrap();
        assert!(e.loops.is_empty() && e.truncated);
        // Only a 3-cycle: bound 2 must report truncation.
        let tri = graph(&["a", "b", "c"], &[("a", "b", P), ("b", "c", P), ("c", "a", P)]);
        let e = enumerate_loops(&tri, Some(2)).unwrap();
        assert!(e.loops.is_empty() && e.truncated);
        // A DAG never truncates.
        let dag = graph(&["a", "b", "c"], &[("a", "b", P), ("b", "c", P), ("a", "c", P)]);
        assert!(!enumerate_loops(&dag, Some(1)).unwrap().truncated);
    }

    #[test]
    fn budget_is_enforced() {
        let names: Vec<String> = (0..7).map(|i| format!("n{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let mut arcs = Vec::new();
        for a in &refs {
            for b in &refs {
                if a != b {
                    arcs.push((*a, *b, P));
                }
            }
        }
        let g = graph(&refs, &arcs);
        assert_eq!(
            enumerate_loops_with_cap(&g, None, 100),
            Err(GraphError::LoopBudgetExceeded { cap: 100 })
        );
        // Complete digraph on 7 nodes: sum over k of C(7,k)(k-1)! = 2365 cycles.
        assert_eq!(enumerate_loops(&g, None).unwrap().loops.len(), 2365);
        assert!(enumerate_loops_with_cap(&g, Some(2), 5).is_ok());
    }
}
