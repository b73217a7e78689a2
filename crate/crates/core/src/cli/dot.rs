//! Graphviz export.

use std::fmt::Write as _;

use crate::models::ModelKind;
use crate::tree::EquivariantTree;

/// `digraph` with one vertex per node, labeled by its weight, and one arc
/// per edge labeled `parent_site -> child_site`. `CP2` vertices are boxes,
/// `S4` vertices ellipses.
pub fn to_dot(t: &EquivariantTree) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "digraph tree {{");
    let _ = writeln!(s, "  label=\"C{} type {}\";", t.m, t.tree_type);
    for n in &t.nodes {
        let shape = match n.kind {
            ModelKind::Cp2 => "box",
            ModelKind::S4 => "ellipse",
        };
        let _ = writeln!(
            s,
            "  n{} [shape={shape}, label=\"{} ({},{};{})\"];",
            n.id,
            n.kind.label(),
            n.weight.0,
            n.weight.1,
            n.stab
        );
    }
    for e in &t.edges {
        let _ = writeln!(s, "  n{} -> n{} [label=\"{} - {}\"];", e.parent, e.child, e.parent_site, e.child_site);
    }
    s.push_str("}\n");
    s
}
