use std::collections::{BTreeMap, BTreeSet};

use crate::model::{Diagnostic, DiagnosticCode, SystemModel, VariableKind};

fn structural(model: &SystemModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for v in &model.variables {
        *counts.entry(v.name.as_str()).or_default() += 1;
    }
    for (name, n) in &counts {
        if *n > 1 {
            out.push(
                Diagnostic::error(DiagnosticCode::DuplicateName, format!("{n} variables share the canonical name"))
                    .at_variable(*name),
            );
        }
    }

    let vars = model.variables_by_name();
    let mut attached: BTreeSet<&str> = BTreeSet::new();

    for v in vars.values() {
        for eq in [&v.equation, &v.initial].into_iter().flatten() {
            let deps = eq.dependencies();
            for dep in &deps {
                if !vars.contains_key(dep.as_str()) {
                    out.push(
                        Diagnostic::warning(DiagnosticCode::UnresolvedReference, format!("references undefined {dep:?}"))
                            .at_variable(&v.name),
                    );
                }
            }
            if deps.contains(&v.name) {
                out.push(
                    Diagnostic::warning(DiagnosticCode::SelfReference, "equation references the variable itself")
                        .at_variable(&v.name),
                );
            }
        }

        match v.kind {
            VariableKind::Stock => {
                if v.initial.is_none() {
                    out.push(
                        Diagnostic::error(DiagnosticCode::MissingInitial, "stock has no initial value")
                            .at_variable(&v.name),
                    );
                }
                for f in v.inflows.iter().chain(&v.outflows) {
                    attached.insert(f);
                    match vars.get(f.as_str()) {
                        Some(fv) if fv.kind == VariableKind::Flow => {}
                        Some(_) => out.push(
                            Diagnostic::error(DiagnosticCode::UnknownFlow, format!("{f:?} is attached but is not a flow"))
                                .at_variable(&v.name),
                        ),
                        None => out.push(
                            Diagnostic::error(DiagnosticCode::UnknownFlow, format!("attached flow {f:?} does not exist"))
                                .at_variable(&v.name),
                        ),
                    }
                }
            }
            _ => {
                if !v.inflows.is_empty() || !v.outflows.is_empty() {
                    out.push(
                        Diagnostic::error(DiagnosticCode::UnknownFlow, "only stocks may have inflows or outflows")
                            .at_variable(&v.name),
                    );
                }
                if v.equation.is_none() {
                    out.push(
                        Diagnostic::warning(DiagnosticCode::MissingEquation, "variable has no equation")
                            .at_variable(&v.name),
                    );
                }
            }
        }

        if v.kind == VariableKind::Constant {
            if let Some(eq) = &v.equation {
                if !eq.dependencies().is_empty() {
                    out.push(
                        Diagnostic::error(
                            DiagnosticCode::ConstantWithDependencies,
                            "constant equation depends on other variables",
                        )
                        .at_variable(&v.name),
                    );
                }
            }
        }
    }

    for v in vars.values() {
        if v.kind == VariableKind::Flow && !attached.contains(v.name.as_str()) {
            out.push(Diagnostic::warning(DiagnosticCode::OrphanFlow, "flow is attached to no stock").at_variable(&v.name));
        }
    }

    for hint in &model.views {
        if !vars.contains_key(hint.variable.as_str()) {
            out.push(
                Diagnostic::warning(DiagnosticCode::DanglingView, "view position names no variable")
                    .at_variable(&hint.variable),
            );
        }
    }
    out
}

/// The model's own diagnostics plus structural checks, deduplicated and
/// ordered by severity and then location.
pub fn validate_model(model: &SystemModel) -> Vec<Diagnostic> {
    let mut all: Vec<Diagnostic> = model.diagnostics.iter().cloned().chain(structural(model)).collect();
    all.sort();
    all.dedup();
    all
}

pub(crate) fn finish_diagnostics(model: &mut SystemModel) {
    model.diagnostics = validate_model(model);
}
