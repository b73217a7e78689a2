//! Admissible weighted trees in quotient form.
//!
//! One node stands for a whole orbit of vertices: it records the order of
//! the stabilizer of the orbit and the linear model glued in at each vertex
//! of it. An edge says at which site of the parent model and which site of
//! the child model the equivariant connected sum is made. Point sites are
//! consumed by the sum; spheres and the free part take any number of edges.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modular::{ArithError, Modulus, Rotation};
use crate::models::{LinearModel, ModelKind, Site, SiteKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TreeType {
    I,
    II,
}

impl fmt::Display for TreeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TreeType::I => "I",
            TreeType::II => "II",
        })
    }
}

/// A vertex orbit. `weight` is the ordered representative the model is
/// written in, reduced modulo `stab` whenever `stab` is positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub id: u32,
    pub kind: ModelKind,
    pub stab: u64,
    pub weight: (i64, i64),
}

impl TreeNode {
    pub fn new(id: u32, model: LinearModel) -> Self {
        let r = model.rotation();
        TreeNode { id, kind: model.kind(), stab: model.order(), weight: (r.a() as i64, r.b() as i64) }
    }

    pub fn model(&self) -> Result<LinearModel, ArithError> {
        let m = Modulus::new(self.stab)?;
        LinearModel::new(self.kind, Rotation::new(self.weight.0, self.weight.1, m))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TreeEdge {
    pub parent: u32,
    pub child: u32,
    pub parent_site: Site,
    pub child_site: Site,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivariantTree {
    pub m: u64,
    pub tree_type: TreeType,
    pub nodes: Vec<TreeNode>,
    pub edges: Vec<TreeEdge>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ViolationCode {
    EvenModulus,
    NonDivisorStabilizer,
    GcdViolation,
    NotATree,
    RootMismatch,
    TypeIIExtraFixedVertex,
    SiteReused,
    SiteKindMismatch,
    RotationMismatch,
    ExactIsotropyMismatch,
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge: Option<usize>,
    pub message: String,
}

impl Violation {
    fn new(code: ViolationCode, message: impl Into<String>) -> Self {
        Violation { code, node: None, edge: None, message: message.into() }
    }

    fn at_node(mut self, id: u32) -> Self {
        self.node = Some(id);
        self
    }

    fn at_edge(mut self, e: usize) -> Self {
        self.edge = Some(e);
        self
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code)?;
        if let Some(n) = self.node {
            write!(f, " [node {n}]")?;
        }
        if let Some(e) = self.edge {
            write!(f, " [edge {e}]")?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("the homologically trivial subtree is defined for type I trees only")]
    NotTypeI,
}

/// Exact isotropy order of a site, or `None` if the label is foreign to the
/// model.
fn site_isotropy(model: &LinearModel, site: Site) -> Option<u64> {
    model.site_isotropy(site)
}

/// Whether a child model can be summed onto a parent along the given
/// sites, the child having stabilizer `d`.
pub fn match_edge(
    parent_model: &LinearModel,
    parent_stab: u64,
    parent_site: Site,
    child_model: &LinearModel,
    child_site: Site,
    d: u64,
) -> Result<bool, ArithError> {
    Modulus::new(parent_stab)?.subgroup(d)?;
    if parent_site.kind() != child_site.kind() {
        return Ok(false);
    }
    if child_model.order() != d {
        return Ok(false);
    }
    let (Some(p_iso), Some(c_iso)) = (site_isotropy(parent_model, parent_site), site_isotropy(child_model, child_site))
    else {
        return Ok(false);
    };
    if p_iso != d || c_iso != d {
        return Ok(false);
    }
    Ok(match parent_site.kind() {
        SiteKind::Free => d == 1,
        SiteKind::Point => {
            let here = parent_model.rotation_at(parent_site).expect("label checked").reduce(d)?;
            let there = child_model.rotation_at(child_site).expect("label checked");
            here.reversed().equivalent(&there)
        }
        SiteKind::Sphere => {
            let here = parent_model.sphere(parent_site).expect("label checked");
            let there = child_model.sphere(child_site).expect("label checked");
            here.normal == there.normal
        }
    })
}

/// A tree that passed [`validate_tree`], with its models and adjacency
/// precomputed.
#[derive(Clone, Debug)]
pub struct ValidTree {
    tree: EquivariantTree,
    m: Modulus,
    models: Vec<LinearModel>,
    root: usize,
    /// `(parent index, child index)` per edge.
    ends: Vec<(usize, usize)>,
    parent_edge: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    preorder: Vec<usize>,
}

impl ValidTree {
    pub fn tree(&self) -> &EquivariantTree {
        &self.tree
    }

    pub fn into_tree(self) -> EquivariantTree {
        self.tree
    }

    pub fn m(&self) -> Modulus {
        self.m
    }

    pub fn tree_type(&self) -> TreeType {
        self.tree.tree_type
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node(&self, i: usize) -> &TreeNode {
        &self.tree.nodes[i]
    }

    pub fn model(&self, i: usize) -> &LinearModel {
        &self.models[i]
    }

    pub fn stab(&self, i: usize) -> u64 {
        self.models[i].order()
    }

    /// Size of the orbit of vertices the node stands for.
    pub fn orbit_size(&self, i: usize) -> u64 {
        self.m.get() / self.stab(i)
    }

    pub fn edge(&self, e: usize) -> &TreeEdge {
        &self.tree.edges[e]
    }

    pub fn edge_ends(&self, e: usize) -> (usize, usize) {
        self.ends[e]
    }

    pub fn edge_count(&self) -> usize {
        self.ends.len()
    }

    /// Edges to the children of `i`.
    pub fn child_edges(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn parent_edge(&self, i: usize) -> Option<usize> {
        self.parent_edge[i]
    }

    /// The site of `i` used by the edge to its parent.
    pub fn incoming_site(&self, i: usize) -> Option<Site> {
        self.parent_edge[i].map(|e| self.tree.edges[e].child_site)
    }

    pub fn depth(&self, i: usize) -> usize {
        self.depth[i]
    }

    /// Node indices, parents before children.
    pub fn preorder(&self) -> &[usize] {
        &self.preorder
    }

    /// Number of `CP^2` summands: the rank of `H_2`.
    pub fn rank(&self) -> u64 {
        (0..self.len()).filter(|&i| self.models[i].kind() == ModelKind::Cp2).map(|i| self.orbit_size(i)).sum()
    }

    /// A type II tree consisting of its root alone describes `S^4` itself,
    /// which is not a connected sum of copies of `CP^2`.
    pub fn is_bare_s4(&self) -> bool {
        self.tree.tree_type == TreeType::II && self.len() == 1
    }

    /// Point sites of `i` that no edge uses.
    pub fn free_points(&self, i: usize) -> Vec<Site> {
        let used: Vec<Site> = self.children[i]
            .iter()
            .map(|&e| self.tree.edges[e].parent_site)
            .chain(self.incoming_site(i))
            .filter(|s| s.is_point())
            .collect();
        self.models[i].point_labels().iter().copied().filter(|p| !used.contains(p)).collect()
    }
}

/// Check every admissibility condition. All violations found are
/// reported, except that structural failures stop the check early.
pub fn validate_tree(t: &EquivariantTree) -> Result<ValidTree, Vec<Violation>> {
    use ViolationCode::*;
    let mut out = Vec::new();

    let m = match Modulus::new(t.m) {
        Ok(m) => m,
        Err(e) => return Err(vec![Violation::new(EvenModulus, e.to_string())]),
    };
    if t.nodes.is_empty() {
        return Err(vec![Violation::new(NotATree, "the tree has no nodes")]);
    }

    let mut index = HashMap::new();
    for (i, node) in t.nodes.iter().enumerate() {
        if index.insert(node.id, i).is_some() {
            out.push(Violation::new(NotATree, format!("duplicate node id {}", node.id)).at_node(node.id));
        }
    }
    let mut models = Vec::with_capacity(t.nodes.len());
    for node in &t.nodes {
        if !m.divides(node.stab) {
            out.push(
                Violation::new(NonDivisorStabilizer, format!("stabilizer {} does not divide {}", node.stab, m))
                    .at_node(node.id),
            );
            continue;
        }
        match node.model() {
            Ok(model) => models.push(model),
            Err(e) => out.push(Violation::new(GcdViolation, e.to_string()).at_node(node.id)),
        }
    }

    let n = t.nodes.len();
    let mut ends = Vec::with_capacity(t.edges.len());
    let mut parent_edge = vec![None; n];
    let mut children = vec![Vec::new(); n];
    for (e, edge) in t.edges.iter().enumerate() {
        let (Some(&p), Some(&c)) = (index.get(&edge.parent), index.get(&edge.child)) else {
            out.push(Violation::new(NotATree, "edge refers to a missing node").at_edge(e));
            continue;
        };
        if parent_edge[c].is_some() {
            out.push(Violation::new(NotATree, "node has two parents").at_node(edge.child).at_edge(e));
            continue;
        }
        parent_edge[c] = Some(e);
        children[p].push(e);
        ends.push((p, c));
    }
    if !out.is_empty() {
        return Err(out);
    }
    let roots: Vec<usize> = (0..n).filter(|&i| parent_edge[i].is_none()).collect();
    if roots.len() != 1 {
        return Err(vec![Violation::new(NotATree, format!("expected one root, found {}", roots.len()))]);
    }
    let root = roots[0];
    let mut depth = vec![usize::MAX; n];
    let mut preorder = Vec::with_capacity(n);
    let mut stack = vec![root];
    depth[root] = 0;
    while let Some(i) = stack.pop() {
        preorder.push(i);
        for &e in children[i].iter().rev() {
            let c = ends[e].1;
            if depth[c] != usize::MAX {
                return Err(vec![Violation::new(NotATree, "cycle through edges").at_edge(e)]);
            }
            depth[c] = depth[i] + 1;
            stack.push(c);
        }
    }
    if preorder.len() != n {
        return Err(vec![Violation::new(NotATree, "the edges do not connect every node to the root")]);
    }

    let root_node = &t.nodes[root];
    let want = match t.tree_type {
        TreeType::I => ModelKind::Cp2,
        TreeType::II => ModelKind::S4,
    };
    if root_node.kind != want || root_node.stab != m.get() {
        out.push(
            Violation::new(
                RootMismatch,
                format!("a type {} tree needs a {} root fixed by the whole group", t.tree_type, want),
            )
            .at_node(root_node.id),
        );
    }
    for (i, node) in t.nodes.iter().enumerate() {
        if i == root {
            continue;
        }
        if node.kind == ModelKind::S4 {
            out.push(Violation::new(RootMismatch, "S4 is allowed only as the root").at_node(node.id));
        }
        if t.tree_type == TreeType::II && node.stab == m.get() {
            out.push(
                Violation::new(TypeIIExtraFixedVertex, "only the root of a type II tree is fixed by the whole group")
                    .at_node(node.id),
            );
        }
    }

    let mut used_points: HashSet<(usize, Site)> = HashSet::new();
    let mut claim = |i: usize, site: Site, e: usize, out: &mut Vec<Violation>| {
        if site.is_point() && !used_points.insert((i, site)) {
            out.push(
                Violation::new(SiteReused, format!("fixed point {site} is used twice"))
                    .at_node(t.nodes[i].id)
                    .at_edge(e),
            );
        }
    };
    for (e, edge) in t.edges.iter().enumerate() {
        let (p, c) = ends[e];
        let (pm, cm) = (&models[p], &models[c]);
        let d = cm.order();
        if pm.order() % d != 0 {
            out.push(
                Violation::new(
                    NonDivisorStabilizer,
                    format!("child stabilizer {d} does not divide parent stabilizer {}", pm.order()),
                )
                .at_edge(e),
            );
            continue;
        }
        if !edge.parent_site.belongs_to(pm.kind()) || !edge.child_site.belongs_to(cm.kind()) {
            out.push(Violation::new(SiteKindMismatch, "site label does not exist on the model").at_edge(e));
            continue;
        }
        if edge.parent_site.kind() != edge.child_site.kind() {
            out.push(
                Violation::new(
                    SiteKindMismatch,
                    format!("{} is summed onto {}", edge.child_site, edge.parent_site),
                )
                .at_edge(e),
            );
            continue;
        }
        if d == 1 && edge.parent_site != Site::Free {
            out.push(Violation::new(SiteKindMismatch, "free orbits are summed along free sites").at_edge(e));
            continue;
        }
        claim(p, edge.parent_site, e, &mut out);
        claim(c, edge.child_site, e, &mut out);
        let p_iso = site_isotropy(pm, edge.parent_site).expect("label checked");
        let c_iso = site_isotropy(cm, edge.child_site).expect("label checked");
        if p_iso != d || c_iso != d {
            out.push(
                Violation::new(
                    ExactIsotropyMismatch,
                    format!(
                        "{} has isotropy {p_iso} and {} has isotropy {c_iso}, but the child stabilizer is {d}",
                        edge.parent_site, edge.child_site
                    ),
                )
                .at_edge(e),
            );
            continue;
        }
        match match_edge(pm, pm.order(), edge.parent_site, cm, edge.child_site, d) {
            Ok(true) => {}
            Ok(false) => out.push(
                Violation::new(
                    RotationMismatch,
                    format!("rotations at {} of {pm} and {} of {cm} do not match", edge.parent_site, edge.child_site),
                )
                .at_edge(e),
            ),
            Err(err) => out.push(Violation::new(RotationMismatch, err.to_string()).at_edge(e)),
        }
    }

    if !out.is_empty() {
        return Err(out);
    }
    Ok(ValidTree { tree: t.clone(), m, models, root, ends, parent_edge, children, depth, preorder })
}

/// Extract the subtree below `top` as a tree over the stabilizer of `top`.
/// The edge into `top` is dropped.
fn subtree(t: &ValidTree, top: usize, keep: impl Fn(usize) -> bool) -> EquivariantTree {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut stack = vec![top];
    while let Some(i) = stack.pop() {
        nodes.push(t.node(i).clone());
        for &e in t.child_edges(i).iter().rev() {
            let c = t.edge_ends(e).1;
            if keep(c) {
                edges.push(*t.edge(e));
                stack.push(c);
            }
        }
    }
    let kind = t.model(top).kind();
    EquivariantTree {
        m: t.stab(top),
        tree_type: if kind == ModelKind::S4 { TreeType::II } else { TreeType::I },
        nodes,
        edges,
    }
}

/// The subtree `T_0` of vertices fixed by the whole group.
pub fn trivial_subtree(t: &ValidTree) -> Result<EquivariantTree, TreeError> {
    if t.tree_type() != TreeType::I {
        return Err(TreeError::NotTypeI);
    }
    let m = t.m().get();
    Ok(subtree(t, t.root(), |i| t.stab(i) == m))
}

/// The branches hanging off `T_0` (type I) or off the root (type II), each
/// tagged with its stabilizer and rewritten as a tree over that subgroup.
pub fn branch_decomposition(t: &ValidTree) -> Vec<(u64, EquivariantTree)> {
    let m = t.m().get();
    let mut out = Vec::new();
    for &i in t.preorder() {
        if t.stab(i) != m {
            continue;
        }
        for &e in t.child_edges(i) {
            let c = t.edge_ends(e).1;
            if t.stab(c) != m {
                out.push((t.stab(c), subtree(t, c, |_| true)));
            }
        }
    }
    out
}

/// A byte string that identifies the tree up to isomorphism, where each
/// node may be rewritten in any relabeling of its model (see
/// [`crate::models::Relabeling`]) with its sites renamed accordingly.
pub fn canonical_encode(t: &ValidTree) -> Vec<u8> {
    let mut enc: Vec<Option<String>> = vec![None; t.len()];
    for &i in t.preorder().iter().rev() {
        let model = t.model(i);
        let (best, frames) = model.canonical_frames();
        let incoming = t.incoming_site(i);
        let mut candidate = None::<String>;
        for g in frames {
            let mut kids: Vec<String> = t
                .child_edges(i)
                .iter()
                .map(|&e| {
                    let c = t.edge_ends(e).1;
                    format!("{}:{}", g.map_site(t.edge(e).parent_site), enc[c].as_deref().expect("postorder"))
                })
                .collect();
            kids.sort_unstable();
            let s = format!(
                "{}/{}({},{})<{}>[{}]",
                model.kind(),
                model.order(),
                best.a(),
                best.b(),
                incoming.map(|s| g.map_site(s).label()).unwrap_or("-"),
                kids.join(",")
            );
            if candidate.as_ref().is_none_or(|c| s < *c) {
                candidate = Some(s);
            }
        }
        enc[i] = candidate;
    }
    let root = enc[t.root()].take().expect("root encoded");
    format!("{};{};{}", t.m(), t.tree_type(), root).into_bytes()
}
