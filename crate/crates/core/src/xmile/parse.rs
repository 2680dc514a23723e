use std::collections::{BTreeMap, BTreeSet};

use super::dom::{self, Element};
use super::validate::finish_diagnostics;
use super::{XmileError, XMILE_NAMESPACE, XMILE_NAMESPACE_HTTPS, XMILE_VERSION};
use crate::model::{
    canonicalize_name, parse_equation, Diagnostic, DiagnosticCode, Equation, ModelError, SimSpec, SystemModel,
    Variable, VariableKind, ViewHint,
};

/// Child elements of a variable that put it outside the supported grammar.
const UNSUPPORTED_VARIABLE_PARTS: [&str; 6] = ["dimensions", "element", "gf", "conveyor", "queue", "oven"];

#[derive(Default)]
struct Collector {
    diagnostics: Vec<Diagnostic>,
    vendor: BTreeMap<String, usize>,
}

impl Collector {
    fn push(&mut self, d: Diagnostic) {
        self.diagnostics.push(d);
    }

    fn vendor(&mut self, el: &Element) {
        *self.vendor.entry(el.qualified_name()).or_default() += 1;
    }

    fn finish(mut self) -> Vec<Diagnostic> {
        for (name, count) in self.vendor {
            self.diagnostics.push(Diagnostic::warning(
                DiagnosticCode::VendorElement,
                format!("skipped {count} vendor element(s) <{name}>"),
            ));
        }
        self.diagnostics
    }
}

fn check_format(root: &Element) -> Result<(), XmileError> {
    if root.local != "xmile" {
        return Err(XmileError::UnsupportedFormat(format!(
            "root element is <{}>, expected <xmile>",
            root.qualified_name()
        )));
    }
    let ns_attr = match &root.prefix {
        Some(p) => format!("xmlns:{p}"),
        None => "xmlns".to_string(),
    };
    match root.attr(&ns_attr) {
        Some(ns) if ns == XMILE_NAMESPACE || ns == XMILE_NAMESPACE_HTTPS => {}
        Some(ns) => return Err(XmileError::UnsupportedFormat(format!("unrecognized namespace {ns}"))),
        None => return Err(XmileError::UnsupportedFormat("missing XMILE namespace".into())),
    }
    match root.attr("version") {
        None => Ok(()),
        Some(v) if v.trim() == XMILE_VERSION => Ok(()),
        Some(v) => Err(XmileError::UnsupportedFormat(format!("unsupported XMILE version {v}"))),
    }
}

/// Elements in the document's own namespace. `root_prefix` is the prefix the
/// XMILE namespace is bound to, if any.
fn is_native(el: &Element, root_prefix: Option<&str>) -> bool {
    el.prefix.as_deref() == root_prefix
}

fn parse_real(text: &str) -> Option<f64> {
    text.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_sim_spec(el: &Element, out: &mut Collector) -> Option<SimSpec> {
    let field = |name: &str| el.child_text(name).and_then(|t| parse_real(&t));
    let (Some(start), Some(stop)) = (field("start"), field("stop")) else {
        out.push(Diagnostic::warning(
            DiagnosticCode::InvalidSimSpec,
            "sim_specs lacks a numeric start or stop; ignored",
        ));
        return None;
    };
    let mut dt = match el.child("dt") {
        None => 1.0,
        Some(d) => match parse_real(&d.text) {
            Some(v) => v,
            None => {
                out.push(Diagnostic::error(DiagnosticCode::InvalidSimSpec, "dt is not a number"));
                return None;
            }
        },
    };
    if el.child("dt").and_then(|d| d.attr("reciprocal")) == Some("true") && dt != 0.0 {
        dt = 1.0 / dt;
    }
    let spec = SimSpec { start, stop, dt };
    if !spec.is_valid() {
        out.push(Diagnostic::error(
            DiagnosticCode::InvalidSimSpec,
            format!("sim_specs must satisfy stop > start and dt > 0 (start={start}, stop={stop}, dt={dt})"),
        ));
        return None;
    }
    Some(spec)
}

fn parse_variable(el: &Element, root_prefix: Option<&str>, out: &mut Collector) -> Option<Variable> {
    let Some(raw_name) = el.attr("name").filter(|n| !n.trim().is_empty()) else {
        out.push(
            Diagnostic::warning(
                DiagnosticCode::UnsupportedConstruct,
                format!("<{}> without a name skipped", el.local),
            )
            .at_offset(el.offset),
        );
        return None;
    };
    let name = canonicalize_name(raw_name).ok()?;
    let kind = match el.local.as_str() {
        "stock" => VariableKind::Stock,
        "flow" => VariableKind::Flow,
        _ => VariableKind::Auxiliary,
    };

    let mut unsupported: Vec<&str> = Vec::new();
    for child in &el.children {
        if !is_native(child, root_prefix) {
            out.vendor(child);
        } else if UNSUPPORTED_VARIABLE_PARTS.contains(&child.local.as_str()) {
            unsupported.push(child.local.as_str());
        }
    }

    let equation = el.child_text("eqn").filter(|t| !t.is_empty()).map(|text| {
        if !unsupported.is_empty() {
            out.push(
                Diagnostic::warning(
                    DiagnosticCode::UnsupportedConstruct,
                    format!("uses unsupported <{}>; equation kept as opaque text", unsupported.join(">, <")),
                )
                .at_variable(&name),
            );
            return Equation::Opaque { text };
        }
        match parse_equation(&text) {
            Ok(ast) => Equation::Parsed { ast },
            Err(ModelError::UnknownFunction(f)) => {
                out.push(
                    Diagnostic::warning(
                        DiagnosticCode::UnsupportedConstruct,
                        format!("unsupported function {f}; equation kept as opaque text"),
                    )
                    .at_variable(&name),
                );
                Equation::Opaque { text }
            }
            Err(err) => {
                out.push(Diagnostic::error(DiagnosticCode::EquationSyntax, err.to_string()).at_variable(&name));
                Equation::Opaque { text }
            }
        }
    });
    if equation.is_none() && !unsupported.is_empty() {
        out.push(
            Diagnostic::warning(
                DiagnosticCode::UnsupportedConstruct,
                format!("uses unsupported <{}>", unsupported.join(">, <")),
            )
            .at_variable(&name),
        );
    }

    let kind = match (&kind, &equation) {
        (VariableKind::Auxiliary, Some(Equation::Parsed { ast })) if Variable::is_literal(ast) => VariableKind::Constant,
        _ => kind,
    };

    let flows = |tag: &str| -> Vec<String> {
        el.children
            .iter()
            .filter(|c| c.prefix.as_deref() == root_prefix && c.local == tag)
            .filter_map(|c| canonicalize_name(&c.text).ok())
            .collect()
    };
    let (inflows, outflows) = if kind == VariableKind::Stock {
        (flows("inflow"), flows("outflow"))
    } else {
        (Vec::new(), Vec::new())
    };

    let (equation, initial) = if kind == VariableKind::Stock { (None, equation) } else { (equation, None) };
    Some(Variable {
        name,
        display_name: raw_name.trim().to_string(),
        kind,
        equation,
        initial,
        inflows,
        outflows,
        units: el.child_text("units").filter(|t| !t.is_empty()),
        documentation: el.child_text("doc").filter(|t| !t.is_empty()),
    })
}

fn parse_views(views: &Element, root_prefix: Option<&str>, out: &mut Collector, hints: &mut Vec<ViewHint>) {
    let mut seen = BTreeSet::new();
    for view in &views.children {
        if !is_native(view, root_prefix) {
            out.vendor(view);
            continue;
        }
        if view.local != "view" {
            continue;
        }
        for item in &view.children {
            if !is_native(item, root_prefix) {
                out.vendor(item);
                continue;
            }
            let (Some(name), Some(x), Some(y)) = (
                item.attr("name").and_then(|n| canonicalize_name(n).ok()),
                item.attr("x").and_then(parse_real),
                item.attr("y").and_then(parse_real),
            ) else {
                continue;
            };
            if seen.insert(name.clone()) {
                hints.push(ViewHint { variable: name, x, y });
            }
        }
    }
}

/// Parses an XMILE document into a [`SystemModel`].
pub fn parse_xmile(document: &[u8]) -> Result<SystemModel, XmileError> {
    let text = dom::decode(document)?;
    let root = dom::parse_tree(&text)?;
    check_format(&root)?;
    let root_prefix = root.prefix.as_deref();

    let mut out = Collector::default();
    let mut model = SystemModel::default();
    let mut model_el: Option<&Element> = None;

    for section in &root.children {
        if !is_native(section, root_prefix) {
            out.vendor(section);
            continue;
        }
        match section.local.as_str() {
            "header" => {
                if let Some(name) = section.child_text("name").filter(|n| !n.is_empty()) {
                    model.name = name;
                }
            }
            "sim_specs" => model.sim_spec = parse_sim_spec(section, &mut out),
            "model" if model_el.is_none() => model_el = Some(section),
            "model" => out.push(
                Diagnostic::warning(
                    DiagnosticCode::UnsupportedConstruct,
                    format!("additional model {:?} skipped", section.attr("name").unwrap_or("")),
                )
                .at_offset(section.offset),
            ),
            other => out.push(
                Diagnostic::warning(DiagnosticCode::SkippedSection, format!("section <{other}> skipped"))
                    .at_offset(section.offset),
            ),
        }
    }

    let Some(model_el) = model_el else {
        return Err(XmileError::EmptyModel);
    };
    if model.name.is_empty() {
        model.name = model_el.attr("name").unwrap_or("").to_string();
    }

    let mut names = BTreeSet::new();
    for part in &model_el.children {
        if !is_native(part, root_prefix) {
            out.vendor(part);
            continue;
        }
        match part.local.as_str() {
            "variables" => {
                for el in &part.children {
                    if !is_native(el, root_prefix) {
                        out.vendor(el);
                        continue;
                    }
                    match el.local.as_str() {
                        "stock" | "flow" | "aux" => {
                            let Some(var) = parse_variable(el, root_prefix, &mut out) else { continue };
                            if !names.insert(var.name.clone()) {
                                out.push(
                                    Diagnostic::error(
                                        DiagnosticCode::DuplicateName,
                                        format!("{:?} collides with an earlier variable; first kept", var.display_name),
                                    )
                                    .at_variable(&var.name),
                                );
                                continue;
                            }
                            model.variables.push(var);
                        }
                        "group" => out.push(
                            Diagnostic::warning(DiagnosticCode::SkippedSection, "section <group> skipped")
                                .at_offset(el.offset),
                        ),
                        other => out.push(
                            Diagnostic::warning(
                                DiagnosticCode::UnsupportedConstruct,
                                format!("<{other}> {:?} skipped", el.attr("name").unwrap_or("")),
                            )
                            .at_offset(el.offset),
                        ),
                    }
                }
            }
            "views" => parse_views(part, root_prefix, &mut out, &mut model.views),
            other => out.push(
                Diagnostic::warning(DiagnosticCode::SkippedSection, format!("section <{other}> skipped"))
                    .at_offset(part.offset),
            ),
        }
    }

    if model.variables.is_empty() {
        return Err(XmileError::EmptyModel);
    }
    model.diagnostics = out.finish();
    finish_diagnostics(&mut model);
    Ok(model)
}
