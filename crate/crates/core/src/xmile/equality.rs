use std::collections::BTreeMap;

use crate::model::{SimSpec, SystemModel};

const COORD_TOLERANCE: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= COORD_TOLERANCE
}

fn sim_specs_match(a: &Option<SimSpec>, b: &Option<SimSpec>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => close(x.start, y.start) && close(x.stop, y.stop) && close(x.dt, y.dt),
        _ => false,
    }
}

/// First structural difference between two models, if any.
///
/// Compared: canonical names, kinds, equations as trees, flow lists,
/// sim specs and view coordinates (within 1e-9), and display names up to
/// case. Variable order, units, documentation and diagnostics are ignored.
pub fn structural_difference(a: &SystemModel, b: &SystemModel) -> Option<String> {
    let av: BTreeMap<_, _> = a.variables.iter().map(|v| (v.name.as_str(), v)).collect();
    let bv: BTreeMap<_, _> = b.variables.iter().map(|v| (v.name.as_str(), v)).collect();
    if av.len() != a.variables.len() || bv.len() != b.variables.len() {
        return Some("duplicate canonical names".into());
    }
    let an: Vec<_> = av.keys().collect();
    let bn: Vec<_> = bv.keys().collect();
    if an != bn {
        return Some(format!("variable sets differ: {an:?} vs {bn:?}"));
    }
    for (name, x) in &av {
        let y = bv[name];
        if x.kind != y.kind {
            return Some(format!("{name}: kind {:?} vs {:?}", x.kind, y.kind));
        }
        if x.display_name.to_lowercase() != y.display_name.to_lowercase() {
            return Some(format!("{name}: display name {:?} vs {:?}", x.display_name, y.display_name));
        }
        if x.equation != y.equation {
            return Some(format!("{name}: equation {:?} vs {:?}", x.equation, y.equation));
        }
        if x.initial != y.initial {
            return Some(format!("{name}: initial {:?} vs {:?}", x.initial, y.initial));
        }
        if x.inflows != y.inflows || x.outflows != y.outflows {
            return Some(format!("{name}: flow lists differ"));
        }
    }
    if !sim_specs_match(&a.sim_spec, &b.sim_spec) {
        return Some(format!("sim_spec {:?} vs {:?}", a.sim_spec, b.sim_spec));
    }
    let ah: BTreeMap<_, _> = a.views.iter().map(|h| (h.variable.as_str(), (h.x, h.y))).collect();
    let bh: BTreeMap<_, _> = b.views.iter().map(|h| (h.variable.as_str(), (h.x, h.y))).collect();
    if ah.len() != bh.len() || ah.keys().ne(bh.keys()) {
        return Some("view hints name different variables".into());
    }
    for (name, (x, y)) in &ah {
        let (x2, y2) = bh[name];
        if !close(*x, x2) || !close(*y, y2) {
            return Some(format!("view {name}: ({x}, {y}) vs ({x2}, {y2})"));
        }
    }
    None
}

pub fn structurally_equal(a: &SystemModel, b: &SystemModel) -> bool {
    structural_difference(a, b).is_none()
}
