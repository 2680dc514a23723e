use std::collections::BTreeMap;

use super::{infer_polarity, CausalGraph, CausalLink, CausalNode, GraphError, Polarity, Provenance};
use crate::model::SystemModel;

/// Non-fatal problems found while deriving a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphWarning {
    /// An equation-derived link disagreed with the stock/flow rule for the
    /// same pair; the stock/flow polarity was kept.
    ConflictingLink {
        from: String,
        to: String,
        equation: Polarity,
        kept: Polarity,
    },
}

/// Builds the causal graph of `model`.
///
/// Links come from equation dependencies (polarity inferred from the
/// equation), inflows (flow -> stock, positive) and outflows (flow -> stock,
/// negative). References to names that are not variables produce no link.
pub fn derive_causal_graph_reporting(model: &SystemModel) -> Result<(CausalGraph, Vec<GraphWarning>), GraphError> {
    if model.has_errors() {
        return Err(GraphError::ModelHasErrors);
    }
    let vars = model.variables_by_name();
    let nodes: Vec<CausalNode> = vars
        .values()
        .map(|v| CausalNode {
            name: v.name.clone(),
            display_name: v.display_name.clone(),
            kind: Some(v.kind),
        })
        .collect();

    let mut links: BTreeMap<(String, String), CausalLink> = BTreeMap::new();
    let mut warnings = Vec::new();

    for v in vars.values() {
        let Some(ast) = v.equation.as_ref().and_then(|e| e.ast()) else { continue };
        for dep in crate::model::dependencies(ast) {
            if !vars.contains_key(dep.as_str()) {
                continue;
            }
            let polarity = infer_polarity(ast, &dep)?;
            links.insert(
                (dep.clone(), v.name.clone()),
                CausalLink {
                    from: dep,
                    to: v.name.clone(),
                    polarity,
                    provenance: Provenance::Equation,
                },
            );
        }
    }

    for v in vars.values() {
        let attached = v
            .inflows
            .iter()
            .map(|f| (f, Polarity::Positive, Provenance::Inflow))
            .chain(v.outflows.iter().map(|f| (f, Polarity::Negative, Provenance::Outflow)));
        for (flow, polarity, provenance) in attached {
            if !vars.contains_key(flow.as_str()) {
                continue;
            }
            let key = (flow.clone(), v.name.clone());
            if let Some(existing) = links.get(&key) {
                if existing.provenance == Provenance::Equation && existing.polarity != polarity {
                    warnings.push(GraphWarning::ConflictingLink {
                        from: flow.clone(),
                        to: v.name.clone(),
                        equation: existing.polarity,
                        kept: polarity,
                    });
                }
            }
            links.insert(
                key,
                CausalLink {
                    from: flow.clone(),
                    to: v.name.clone(),
                    polarity,
                    provenance,
                },
            );
        }
    }

    let graph = CausalGraph::new(nodes, links.into_values().collect())?;
    Ok((graph, warnings))
}

/// [`derive_causal_graph_reporting`] without the warnings.
pub fn derive_causal_graph(model: &SystemModel) -> Result<CausalGraph, GraphError> {
    derive_causal_graph_reporting(model).map(|(g, _)| g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Diagnostic, DiagnosticCode, Equation, Variable, VariableKind};

    fn triple(g: &CausalGraph) -> Vec<(&str, &str, Polarity)> {
        g.links().iter().map(|l| (l.from.as_str(), l.to.as_str(), l.polarity)).collect()
    }

    #[test]
    fn difference_links() {
        let m = SystemModel::new("d")
            .with_variable(Variable::new("a", VariableKind::Constant).unwrap().with_equation("1").unwrap())
            .with_variable(Variable::new("b", VariableKind::Constant).unwrap().with_equation("2").unwrap())
            .with_variable(Variable::new("c", VariableKind::Auxiliary).unwrap().with_equation("a - b").unwrap());
        let g = derive_causal_graph(&m).unwrap();
        assert_eq!(triple(&g), vec![("a", "c", Polarity::Positive), ("b", "c", Polarity::Negative)]);
    }

    #[test]
    fn one_stock_without_flows() {
        let m = SystemModel::new("s").with_variable(Variable::new("Population", VariableKind::Stock).unwrap().with_equation("100").unwrap());
        let g = derive_causal_graph(&m).unwrap();
        assert_eq!(g.nodes().len(), 1);
        assert!(g.links().is_empty());
    }

    #[test]
    fn flow_rule_wins_conflicts() {
        // A stock carrying an equation that contradicts its inflow.
        let mut stock = Variable::new("s", VariableKind::Stock).unwrap().with_equation("1").unwrap().with_inflow("f").unwrap();
        stock.equation = Some(Equation::Parsed { ast: crate::model::parse_equation("-f").unwrap() });
        let m = SystemModel::new("c")
            .with_variable(stock)
            .with_variable(Variable::new("f", VariableKind::Flow).unwrap().with_equation("2").unwrap());
        let (g, warnings) = derive_causal_graph_reporting(&m).unwrap();
        assert_eq!(triple(&g), vec![("f", "s", Polarity::Positive)]);
        assert_eq!(g.links()[0].provenance, Provenance::Inflow);
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn unresolved_names_and_error_models() {
        let m = SystemModel::new("u")
            .with_variable(Variable::new("x", VariableKind::Auxiliary).unwrap().with_equation("ghost * 2").unwrap());
        assert!(derive_causal_graph(&m).unwrap().links().is_empty());

        let mut bad = m.clone();
        bad.diagnostics.push(Diagnostic::error(DiagnosticCode::DuplicateName, "dup"));
        assert_eq!(derive_causal_graph(&bad), Err(GraphError::ModelHasErrors));
    }
}
