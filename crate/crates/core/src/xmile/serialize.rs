use std::fmt::Write;

use quick_xml::escape::escape;

use super::{XmileError, XMILE_NAMESPACE, XMILE_VERSION};
use crate::model::{render_equation, Equation, SystemModel, Variable, VariableKind};

fn tag(kind: VariableKind) -> &'static str {
    match kind {
        VariableKind::Stock => "stock",
        VariableKind::Flow => "flow",
        VariableKind::Auxiliary | VariableKind::Constant => "aux",
    }
}

fn line(out: &mut String, depth: usize, text: &str) {
    for _ in 0..depth {
        out.push_str("  ");
    }
    out.push_str(text);
    out.push('\n');
}

fn text_element(out: &mut String, depth: usize, name: &str, text: &str) {
    line(out, depth, &format!("<{name}>{}</{name}>", escape(text)));
}

fn equation_text(var: &Variable, eq: &Equation) -> Result<String, XmileError> {
    match eq {
        Equation::Parsed { ast } => Ok(render_equation(ast)),
        Equation::Opaque { .. } => Err(XmileError::OpaqueEquation(var.name.clone())),
    }
}

/// Writes `model` as a UTF-8 XMILE document. Variables and view entries are
/// sorted by canonical name, so the output is a pure function of the model.
pub fn serialize_xmile(model: &SystemModel) -> Result<Vec<u8>, XmileError> {
    if model.has_errors() {
        return Err(XmileError::ModelHasErrors);
    }
    let mut vars: Vec<&Variable> = model.variables.iter().collect();
    vars.sort_by(|a, b| a.name.cmp(&b.name));

    let mut out = String::new();
    line(&mut out, 0, "<?xml version=\"1.0\" encoding=\"utf-8\"?>");
    line(&mut out, 0, &format!("<xmile version=\"{XMILE_VERSION}\" xmlns=\"{XMILE_NAMESPACE}\">"));
    line(&mut out, 1, "<header>");
    text_element(&mut out, 2, "name", &model.name);
    line(&mut out, 1, "</header>");
    if let Some(spec) = &model.sim_spec {
        line(&mut out, 1, "<sim_specs>");
        text_element(&mut out, 2, "start", &spec.start.to_string());
        text_element(&mut out, 2, "stop", &spec.stop.to_string());
        text_element(&mut out, 2, "dt", &spec.dt.to_string());
        line(&mut out, 1, "</sim_specs>");
    }
    line(&mut out, 1, "<model>");
    line(&mut out, 2, "<variables>");
    for var in &vars {
        line(&mut out, 3, &format!("<{} name=\"{}\">", tag(var.kind), escape(&var.display_name)));
        let eq = if var.kind == VariableKind::Stock { &var.initial } else { &var.equation };
        if let Some(eq) = eq {
            text_element(&mut out, 4, "eqn", &equation_text(var, eq)?);
        }
        for f in &var.inflows {
            text_element(&mut out, 4, "inflow", f);
        }
        for f in &var.outflows {
            text_element(&mut out, 4, "outflow", f);
        }
        if let Some(units) = &var.units {
            text_element(&mut out, 4, "units", units);
        }
        if let Some(doc) = &var.documentation {
            text_element(&mut out, 4, "doc", doc);
        }
        line(&mut out, 3, &format!("</{}>", tag(var.kind)));
    }
    line(&mut out, 2, "</variables>");
    if !model.views.is_empty() {
        let mut hints: Vec<_> = model.views.iter().collect();
        hints.sort_by(|a, b| a.variable.cmp(&b.variable));
        line(&mut out, 2, "<views>");
        line(&mut out, 3, "<view>");
        for h in hints {
            let kind = model.variable(&h.variable).map_or("aux", |v| tag(v.kind));
            let mut el = String::new();
            let _ = write!(el, "<{kind} name=\"{}\" x=\"{}\" y=\"{}\"/>", escape(&h.variable), h.x, h.y);
            line(&mut out, 4, &el);
        }
        line(&mut out, 3, "</view>");
        line(&mut out, 2, "</views>");
    }
    line(&mut out, 1, "</model>");
    line(&mut out, 0, "</xmile>");
    Ok(out.into_bytes())
}
