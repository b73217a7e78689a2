//! Explicit trees realizing a permutation module once the multiplicities of
//! the maximal stabilizers are large enough.

use num_integer::Integer;

use crate::modular::{Generator as Gen, Modulus, Rotation};
use crate::models::{LinearModel, ModelKind, Site};
use crate::tree::{EquivariantTree, TreeEdge, TreeNode, TreeType};

use super::{maximal_elements, ModuleSpec, RealizeError};

/// Largest number of root weights tried before falling back to a chain.
const ROOT_SCAN_LIMIT: u64 = 1 << 22;

struct Builder {
    m: u64,
    nodes: Vec<TreeNode>,
    models: Vec<LinearModel>,
    edges: Vec<TreeEdge>,
}

impl Builder {
    fn new(root: LinearModel) -> Self {
        Builder { m: root.order(), nodes: vec![TreeNode::new(0, root)], models: vec![root], edges: Vec::new() }
    }

    fn attach(&mut self, parent: usize, parent_site: Site, child: LinearModel, child_site: Site) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TreeNode::new(id as u32, child));
        self.models.push(child);
        self.edges.push(TreeEdge { parent: parent as u32, child: id as u32, parent_site, child_site });
        id
    }

    /// `k` one-node branches on a sphere of `parent`, each `CP^2(s,0;o)`
    /// entered through its sphere `S2`, which has order `o` and normal `s`.
    fn hang_on_sphere(&mut self, parent: usize, site: Site, k: u64) {
        let sphere = self.models[parent].sphere(site).expect("sphere label");
        let sub = Modulus::new(sphere.order).expect("divisor of an odd modulus");
        let child = LinearModel::new(ModelKind::Cp2, Rotation::new(sphere.normal as i64, 0, sub)).expect("unit normal");
        for _ in 0..k {
            self.attach(parent, site, child, Site::S2);
        }
    }

    fn hang_free(&mut self, parent: usize, k: u64) {
        let free = LinearModel::cp2(0, 0, 1).expect("trivial group");
        for _ in 0..k {
            self.attach(parent, Site::Free, free, Site::Free);
        }
    }

    /// Extend from `start` through `p2 -> p1` sums until the chain has `len`
    /// nodes; each new weight is `L` times the previous one. Returns the
    /// chain, `start` first.
    fn chain(&mut self, start: usize, len: u64) -> Vec<usize> {
        let mut out = vec![start];
        let l = Gen::L.matrix();
        while (out.len() as u64) < len {
            let last = *out.last().unwrap();
            let next = self.models[last].rotation().apply(&l);
            let model = LinearModel::new(ModelKind::Cp2, next).expect("L is invertible");
            out.push(self.attach(last, Site::P2, model, Site::P1));
        }
        out
    }

    fn finish(self, tree_type: TreeType) -> EquivariantTree {
        EquivariantTree { m: self.m, tree_type, nodes: self.nodes, edges: self.edges }
    }
}

/// A root `CP^2(a,b;m)` in canonical form whose three spheres have, among
/// their orders, every element of `wanted`.
fn covering_root(m: Modulus, wanted: &[u64]) -> Option<LinearModel> {
    let mut tried = 0u64;
    for a in 0..m.get() {
        for b in a..m.get() {
            tried += 1;
            if tried > ROOT_SCAN_LIMIT {
                return None;
            }
            let r = Rotation::new(a as i64, b as i64, m);
            if !r.is_effective() || r.canonical() != r {
                continue;
            }
            let model = LinearModel::new(ModelKind::Cp2, r).expect("effective");
            let orders: Vec<u64> = model.spheres().iter().map(|s| s.order).collect();
            if wanted.iter().all(|d| orders.contains(d)) {
                return Some(model);
            }
        }
    }
    None
}

fn sphere_of_order(model: &LinearModel, d: u64) -> Option<Site> {
    model.spheres().into_iter().find(|s| s.order == d).map(|s| s.label)
}

pub(super) fn type_one(spec: &ModuleSpec) -> Result<EquivariantTree, RealizeError> {
    let m = spec.modulus();
    let k0 = spec.multiplicity(m.get());
    let proper: Vec<(u64, u64)> = spec.entries().iter().copied().filter(|&(d, _)| d != m.get() && d != 1).collect();
    // over the trivial group the trivial summand is the free one
    let free = if m.get() == 1 { 0 } else { spec.multiplicity(1) };
    let wanted: Vec<u64> = proper.iter().map(|e| e.0).collect();

    let pairwise_coprime = wanted.iter().enumerate().all(|(i, a)| wanted[i + 1..].iter().all(|b| a.gcd(b) == 1));
    if wanted.len() <= 3 && pairwise_coprime {
        if let Some(root) = covering_root(m, &wanted) {
            let mut b = Builder::new(root);
            for &(d, k) in &proper {
                let site = sphere_of_order(&root, d).expect("root covers every order");
                b.hang_on_sphere(0, site, k);
            }
            b.hang_free(0, free);
            b.chain(0, k0);
            return Ok(b.finish(TreeType::I));
        }
    }

    // chain from (1,0): the node at depth i is ±(1,-i), whose S1 has order
    // gcd(i+1, m), so order d is first met at depth d-1
    let need = wanted.iter().copied().max().unwrap_or(1);
    if k0 < need {
        return Err(RealizeError::Infeasible(format!(
            "the trivial summand has multiplicity {k0}, the chain needs {need} fixed vertices"
        )));
    }
    let root = LinearModel::cp2(1, 0, m.get()).expect("effective");
    let mut b = Builder::new(root);
    let chain = b.chain(0, k0);
    for &(d, k) in &proper {
        let node = chain[d as usize - 1];
        debug_assert_eq!(b.models[node].sphere(Site::S1).map(|s| s.order), Some(d));
        b.hang_on_sphere(node, Site::S1, k);
    }
    b.hang_free(0, free);
    Ok(b.finish(TreeType::I))
}

pub(super) fn type_two(spec: &ModuleSpec) -> Result<EquivariantTree, RealizeError> {
    let m = spec.modulus();
    let maximal: Vec<u64> = maximal_elements(&spec.stabilizers()).into_iter().filter(|&d| d > 1).collect();
    let (d1, d2) = match maximal.as_slice() {
        [] => (1, 1),
        [a] => (*a, 1),
        [a, b] => (*a, *b),
        _ => return Err(RealizeError::Infeasible("more than two maximal stabilizers".into())),
    };
    let root = LinearModel::s4(d1 as i64, d2 as i64, m.get())
        .map_err(|_| RealizeError::Infeasible("the maximal stabilizers are not coprime".into()))?;
    let mut b = Builder::new(root);
    for (top, site) in [(d1, Site::T1), (d2, Site::T2)] {
        if top == 1 {
            continue;
        }
        let k = spec.multiplicity(top);
        let inner: Vec<(u64, u64)> =
            spec.entries().iter().copied().filter(|&(d, _)| d > 1 && d < top && top % d == 0).collect();
        if inner.is_empty() {
            b.hang_on_sphere(0, site, k);
            continue;
        }
        let need = inner.iter().map(|e| e.0).max().unwrap();
        if k < need {
            return Err(RealizeError::Infeasible(format!(
                "the summand with stabilizer {top} has multiplicity {k}, its chain needs {need} vertices"
            )));
        }
        // the first vertex enters T_i through its own S2; the chain below it
        // meets a sphere of order d at depth d-1, as in type I
        let sphere = root.sphere(site).expect("sphere label");
        let sub = Modulus::new(top).expect("divisor of an odd modulus");
        let first = LinearModel::new(ModelKind::Cp2, Rotation::new(sphere.normal as i64, 0, sub)).expect("unit normal");
        let start = b.attach(0, site, first, Site::S2);
        let chain = b.chain(start, k);
        for &(d, kd) in &inner {
            let node = chain[d as usize - 1];
            debug_assert_eq!(b.models[node].sphere(Site::S1).map(|s| s.order), Some(d));
            b.hang_on_sphere(node, Site::S1, kd);
        }
    }
    b.hang_free(0, spec.multiplicity(1));
    Ok(b.finish(TreeType::II))
}
