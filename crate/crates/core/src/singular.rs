//! Fixed sets of the subgroups of `C_m` on a tree manifold, and the
//! permutation module `H_2`.
//!
//! For each `d > 1` the fixed set of `C_d` is assembled from the fixed sets
//! of the vertex models: every edge whose child is fixed by `C_d` glues two
//! components. Gluing two isolated points removes both, gluing two spheres
//! along a point yields one sphere. The Euler characteristic of the result
//! is checked against `2 + tr(g | H_2)`.

use std::collections::BTreeMap;
use std::fmt;

use petgraph::unionfind::UnionFind;
use serde::Serialize;
use thiserror::Error;

use crate::modular::{ArithError, Modulus, Rotation};
use crate::models::{ModelKind, Site, SiteKind};
use crate::tree::ValidTree;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SingularError {
    #[error("the singular set contains isotropy spheres, so the semi-free test does not apply")]
    NotDiscrete,
    #[error("module summand with stabilizer {d} has multiplicity 0")]
    ZeroMultiplicity { d: u64 },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// `H_2` as `⊕ Z[C_m / C_d]^k`, stored as `(d, k)` pairs with `d` the
/// stabilizer order, in descending `d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PermutationModule {
    m: Modulus,
    entries: Vec<(u64, u64)>,
}

impl PermutationModule {
    /// Repeated stabilizers are merged.
    pub fn new(m: Modulus, entries: impl IntoIterator<Item = (u64, u64)>) -> Result<Self, SingularError> {
        let mut merged: BTreeMap<u64, u64> = BTreeMap::new();
        for (d, k) in entries {
            m.subgroup(d)?;
            if k == 0 {
                return Err(SingularError::ZeroMultiplicity { d });
            }
            *merged.entry(d).or_insert(0) += k;
        }
        Ok(PermutationModule { m, entries: merged.into_iter().rev().collect() })
    }

    pub fn modulus(&self) -> Modulus {
        self.m
    }

    pub fn entries(&self) -> &[(u64, u64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn multiplicity(&self, d: u64) -> u64 {
        self.entries.iter().find(|e| e.0 == d).map_or(0, |e| e.1)
    }

    pub fn rank(&self) -> u64 {
        self.entries.iter().map(|&(d, k)| k * (self.m.get() / d)).sum()
    }

    /// Stabilizer orders present.
    pub fn stabilizers(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.0).collect()
    }

    /// Summands written as quotient groups: `(d, k)` becomes
    /// `Z[C_{m/d}]^k`, and the trivial module `Z`.
    pub fn notation(&self) -> String {
        if self.entries.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for &(d, k) in &self.entries {
            let q = self.m.get() / d;
            let base = if q == 1 { "Z".to_string() } else { format!("Z[C{q}]") };
            parts.push(if k == 1 { base } else { format!("{base}^{k}") });
        }
        parts.join(" ⊕ ")
    }
}

impl fmt::Display for PermutationModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.notation())
    }
}

/// One summand per `CP^2` node.
pub fn permutation_module(t: &ValidTree) -> PermutationModule {
    let entries = (0..t.len()).filter(|&i| t.model(i).kind() == ModelKind::Cp2).map(|i| (t.stab(i), 1));
    PermutationModule::new(t.m(), entries).expect("validated stabilizers divide m")
}

/// `2 + tr(g | H_2)` for a generator `g` of `C_d`. A permutation summand
/// `Z[C_m / C_e]` contributes its number of `g`-fixed cosets, which is
/// `m/e` when `d | e` and `0` otherwise.
pub fn lefschetz_euler(module: &PermutationModule, d: u64) -> Result<i64, ArithError> {
    let m = module.m;
    m.subgroup(d)?;
    let trace: u64 = module.entries.iter().filter(|&&(e, _)| e % d == 0).map(|&(e, k)| k * (m.get() / e)).sum();
    Ok(2 + trace as i64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ComponentKind {
    Point,
    Sphere,
}

/// Rotation data of a singular component: the tangent rotation pair at a
/// point, or the normal rotation of a sphere taken up to sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RotationData {
    Point(Rotation),
    Sphere { order: u64, normal: u64 },
}

impl fmt::Display for RotationData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RotationData::Point(r) => write!(f, "({},{})", r.a(), r.b()),
            RotationData::Sphere { order, normal } => write!(f, "±{normal} mod {order}"),
        }
    }
}

/// An orbit class of components of `Fix(X, C_d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingularComponent {
    pub kind: ComponentKind,
    /// Exact isotropy order of the component's generic points.
    pub isotropy: u64,
    /// Number of components in the class.
    pub count: u64,
    pub rotation: RotationData,
    /// Ids of the nodes whose models contribute to the component, ascending.
    pub provenance: Vec<u32>,
    /// Node and site the class is named after.
    pub anchor: (u32, Site),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupProfile {
    pub d: u64,
    pub components: Vec<SingularComponent>,
}

impl SubgroupProfile {
    pub fn points(&self) -> u64 {
        self.components.iter().filter(|c| c.kind == ComponentKind::Point).map(|c| c.count).sum()
    }

    pub fn spheres(&self) -> u64 {
        self.components.iter().filter(|c| c.kind == ComponentKind::Sphere).map(|c| c.count).sum()
    }

    pub fn euler(&self) -> i64 {
        self.points() as i64 + 2 * self.spheres() as i64
    }
}

/// Singular sets for every non-trivial subgroup, ascending in `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsotropyProfile {
    pub m: Modulus,
    pub subgroups: Vec<SubgroupProfile>,
}

impl IsotropyProfile {
    pub fn get(&self, d: u64) -> Option<&SubgroupProfile> {
        self.subgroups.iter().find(|s| s.d == d)
    }

    pub fn has_spheres(&self) -> bool {
        self.subgroups.iter().any(|s| s.spheres() > 0)
    }

    /// Pointwise isotropy orders of the spheres in the singular set.
    pub fn sphere_orders(&self) -> Vec<u64> {
        let mut out: Vec<u64> = self
            .subgroups
            .iter()
            .flat_map(|s| s.components.iter())
            .filter(|c| c.kind == ComponentKind::Sphere)
            .map(|c| c.isotropy)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// The fixed set of `C_d` on a valid tree, `d > 1` dividing `m`.
pub fn subgroup_profile(t: &ValidTree, d: u64) -> Result<SubgroupProfile, ArithError> {
    t.m().subgroup(d)?;
    let mut index: BTreeMap<(usize, Site), usize> = BTreeMap::new();
    let mut elements: Vec<(usize, Site)> = Vec::new();
    for &i in t.preorder() {
        if t.stab(i) % d != 0 {
            continue;
        }
        let fix = t.model(i).fix_structure(d).expect("d > 1 divides the stabilizer");
        let labels = fix.points.iter().map(|p| p.label).chain(fix.spheres.iter().map(|s| s.label));
        for label in labels {
            index.insert((i, label), elements.len());
            elements.push((i, label));
        }
    }

    let mut deleted = vec![false; elements.len()];
    let mut classes = UnionFind::<usize>::new(elements.len());
    for e in 0..t.edge_count() {
        let (p, c) = t.edge_ends(e);
        if t.stab(c) % d != 0 {
            continue;
        }
        let edge = t.edge(e);
        let (Some(cp), Some(cc)) =
            (t.model(p).component_of(edge.parent_site, d), t.model(c).component_of(edge.child_site, d))
        else {
            unreachable!("a validated edge into a C_d-fixed child runs between C_d-fixed sites");
        };
        let (x, y) = (index[&(p, cp)], index[&(c, cc)]);
        match (cp.kind(), cc.kind()) {
            (SiteKind::Point, SiteKind::Point) => {
                deleted[x] = true;
                deleted[y] = true;
            }
            (SiteKind::Sphere, SiteKind::Sphere) => {
                classes.union(x, y);
            }
            _ => unreachable!("matching rotations give matching fixed components"),
        }
    }

    let m = t.m().get();
    let mut components = Vec::new();
    let mut sphere_classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, &(i, label)) in elements.iter().enumerate() {
        match label.kind() {
            SiteKind::Point if !deleted[k] => {
                let model = t.model(i);
                components.push(SingularComponent {
                    kind: ComponentKind::Point,
                    isotropy: model.order(),
                    count: m / model.order(),
                    rotation: RotationData::Point(model.rotation_at(label).expect("point label")),
                    provenance: vec![t.node(i).id],
                    anchor: (t.node(i).id, label),
                });
            }
            SiteKind::Sphere => sphere_classes.entry(classes.find(k)).or_default().push(k),
            _ => {}
        }
    }
    for members in sphere_classes.into_values() {
        let &top = members.iter().min_by_key(|&&k| t.depth(elements[k].0)).expect("class is non-empty");
        let (i, label) = elements[top];
        let sphere = t.model(i).sphere(label).expect("sphere label");
        let mut provenance: Vec<u32> = members.iter().map(|&k| t.node(elements[k].0).id).collect();
        provenance.sort_unstable();
        provenance.dedup();
        components.push(SingularComponent {
            kind: ComponentKind::Sphere,
            isotropy: sphere.order,
            count: m / t.stab(i),
            rotation: RotationData::Sphere { order: sphere.order, normal: sphere.normal },
            provenance,
            anchor: (t.node(i).id, label),
        });
    }
    Ok(SubgroupProfile { d, components })
}

pub fn singular_profile(t: &ValidTree) -> IsotropyProfile {
    let subgroups = t
        .m()
        .nontrivial_divisors()
        .into_iter()
        .map(|d| subgroup_profile(t, d).expect("divisor of m"))
        .collect();
    IsotropyProfile { m: t.m(), subgroups }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationEntry {
    pub node: u32,
    pub site: Site,
    pub kind: ComponentKind,
    pub isotropy: u64,
    pub count: u64,
    pub rotation: RotationData,
    /// For points: no singular sphere passes through the point.
    pub isolated: bool,
}

/// Tangential isotropy data at every singular point, and the normal data
/// of every sphere segment, node by node.
pub fn rotation_table(t: &ValidTree) -> Vec<RotationEntry> {
    let m = t.m().get();
    let mut out = Vec::new();
    for &i in t.preorder() {
        let model = t.model(i);
        let stab = model.order();
        if stab == 1 {
            continue;
        }
        let spheres: Vec<_> = model.spheres().into_iter().filter(|s| s.is_singular()).collect();
        for p in t.free_points(i) {
            out.push(RotationEntry {
                node: t.node(i).id,
                site: p,
                kind: ComponentKind::Point,
                isotropy: stab,
                count: m / stab,
                rotation: RotationData::Point(model.rotation_at(p).expect("point label")),
                isolated: !spheres.iter().any(|s| s.poles.contains(&p)),
            });
        }
        for s in spheres {
            out.push(RotationEntry {
                node: t.node(i).id,
                site: s.label,
                kind: ComponentKind::Sphere,
                isotropy: s.order,
                count: m / stab,
                rotation: RotationData::Sphere { order: s.order, normal: s.normal },
                isolated: false,
            });
        }
    }
    out
}

/// On a tree with discrete singular set, whether every singular point is
/// fixed by the whole group.
pub fn semifree_check(t: &ValidTree) -> Result<bool, SingularError> {
    let profile = singular_profile(t);
    if profile.has_spheres() {
        return Err(SingularError::NotDiscrete);
    }
    let m = t.m().get();
    Ok(profile.subgroups.iter().flat_map(|s| s.components.iter()).all(|c| c.isotropy == m))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EulerRow {
    pub d: u64,
    pub points: u64,
    pub spheres: u64,
    pub euler: i64,
    pub lefschetz: i64,
}

impl EulerRow {
    pub fn agrees(&self) -> bool {
        self.euler == self.lefschetz
    }
}

/// Fixed-set Euler characteristic against the trace formula, per subgroup.
pub fn euler_check(t: &ValidTree, profile: &IsotropyProfile) -> Vec<EulerRow> {
    let module = permutation_module(t);
    profile
        .subgroups
        .iter()
        .map(|s| EulerRow {
            d: s.d,
            points: s.points(),
            spheres: s.spheres(),
            euler: s.euler(),
            lefschetz: lefschetz_euler(&module, s.d).expect("divisor of m"),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind::{Cp2, S4};
    use crate::tree::tests::{edge, node, star};
    use crate::tree::{validate_tree, EquivariantTree, TreeType};

    fn m(x: u64) -> Modulus {
        Modulus::new(x).unwrap()
    }

    #[test]
    fn module_of_star() {
        let t = validate_tree(&star()).unwrap();
        let module = permutation_module(&t);
        assert_eq!(module.entries(), &[(105, 1), (7, 1), (5, 1), (3, 1)]);
        assert_eq!(module.rank(), 72);
        assert_eq!(module.notation(), "Z ⊕ Z[C15] ⊕ Z[C21] ⊕ Z[C35]");
    }

    #[test]
    fn module_of_single_and_bare() {
        let single = EquivariantTree {
            m: 105,
            tree_type: TreeType::I,
            nodes: vec![node(0, Cp2, 105, 10, 3)],
            edges: vec![],
        };
        let module = permutation_module(&validate_tree(&single).unwrap());
        assert_eq!((module.entries(), module.rank()), (&[(105, 1)][..], 1));
        let bare = EquivariantTree { m: 9, tree_type: TreeType::II, nodes: vec![node(0, S4, 9, 1, 1)], edges: vec![] };
        let module = permutation_module(&validate_tree(&bare).unwrap());
        assert!(module.is_empty());
        assert_eq!(module.rank(), 0);
        assert_eq!(module.notation(), "0");
    }

    #[test]
    fn module_construction_errors() {
        assert!(PermutationModule::new(m(105), [(11, 1)]).is_err());
        assert_eq!(PermutationModule::new(m(105), [(7, 0)]), Err(SingularError::ZeroMultiplicity { d: 7 }));
        let merged = PermutationModule::new(m(27), [(3, 1), (27, 2), (3, 4)]).unwrap();
        assert_eq!(merged.entries(), &[(27, 2), (3, 5)]);
        assert_eq!(merged.notation(), "Z^2 ⊕ Z[C9]^5");
    }

    #[test]
    fn lefschetz_of_star() {
        let module = PermutationModule::new(m(105), [(105, 1), (7, 1), (5, 1), (3, 1)]).unwrap();
        assert_eq!(lefschetz_euler(&module, 105).unwrap(), 3);
        assert_eq!(lefschetz_euler(&module, 7).unwrap(), 18);
        assert_eq!(lefschetz_euler(&module, 3).unwrap(), 38);
        assert!(lefschetz_euler(&module, 2).is_err());
    }

    #[test]
    fn star_fold_at_seven() {
        let t = validate_tree(&star()).unwrap();
        let p = subgroup_profile(&t, 7).unwrap();
        assert_eq!((p.points(), p.spheres(), p.euler()), (16, 1, 18));
        let sphere = p.components.iter().find(|c| c.kind == ComponentKind::Sphere).unwrap();
        assert_eq!(sphere.provenance, vec![0, 1]);
        assert_eq!(sphere.rotation, RotationData::Sphere { order: 7, normal: 3 });
        for row in euler_check(&t, &singular_profile(&t)) {
            assert!(row.agrees(), "{row:?}");
        }
    }

    #[test]
    fn single_model_at_five() {
        let t = EquivariantTree {
            m: 105,
            tree_type: TreeType::I,
            nodes: vec![node(0, Cp2, 105, 10, 3)],
            edges: vec![],
        };
        let p = subgroup_profile(&validate_tree(&t).unwrap(), 5).unwrap();
        let anchors: Vec<_> = p.components.iter().map(|c| (c.kind, c.anchor.1)).collect();
        assert_eq!(anchors, vec![(ComponentKind::Point, Site::P3), (ComponentKind::Sphere, Site::S3)]);
    }

    #[test]
    fn free_orbit_adds_nothing_singular() {
        let t = EquivariantTree {
            m: 9,
            tree_type: TreeType::II,
            nodes: vec![node(0, S4, 9, 1, 1), node(1, Cp2, 1, 0, 0)],
            edges: vec![edge(0, 1, Site::Free, Site::Free)],
        };
        let t = validate_tree(&t).unwrap();
        let profile = singular_profile(&t);
        for d in [3, 9] {
            let labels: Vec<_> = profile.get(d).unwrap().components.iter().map(|c| c.anchor.1).collect();
            assert_eq!(labels, vec![Site::Q1, Site::Q2]);
        }
        assert_eq!(semifree_check(&t), Ok(true));
    }

    #[test]
    fn point_sum_removes_points() {
        // CP2(1,2;5) has no singular spheres; summing at p1 removes one
        // fixed point from each side
        let t = EquivariantTree {
            m: 5,
            tree_type: TreeType::I,
            nodes: vec![node(0, Cp2, 5, 1, 2), node(1, Cp2, 5, 1, -2)],
            edges: vec![edge(0, 1, Site::P1, Site::P1)],
        };
        let t = validate_tree(&t).unwrap();
        let p = subgroup_profile(&t, 5).unwrap();
        assert_eq!((p.points(), p.spheres()), (4, 0));
        assert_eq!(semifree_check(&t), Ok(true));
        let table = rotation_table(&t);
        assert_eq!(table.len(), 4);
        assert!(table.iter().all(|e| e.site != Site::P1 && e.isolated));
    }

    #[test]
    fn rotation_table_of_single_and_star() {
        let t = validate_tree(&star()).unwrap();
        let table = rotation_table(&t);
        let root: Vec<_> = table.iter().filter(|e| e.node == 0).collect();
        assert_eq!(root.len(), 6);
        let pts: Vec<_> = root.iter().filter(|e| e.kind == ComponentKind::Point).map(|e| e.rotation).collect();
        let r = |a, b| RotationData::Point(Rotation::new(a, b, m(105)));
        assert_eq!(pts, vec![r(10, 3), r(-10, -7), r(-3, 7)]);
        let sph: Vec<_> = root.iter().filter(|e| e.kind == ComponentKind::Sphere).map(|e| e.rotation).collect();
        assert_eq!(
            sph,
            vec![
                RotationData::Sphere { order: 7, normal: 3 },
                RotationData::Sphere { order: 3, normal: 1 },
                RotationData::Sphere { order: 5, normal: 2 }
            ]
        );
        assert!(root.iter().all(|e| e.isotropy > 1 && !(e.kind == ComponentKind::Point && e.isolated)));
    }

    #[test]
    fn spheres_make_semifree_vacuous() {
        let t = validate_tree(&star()).unwrap();
        assert_eq!(semifree_check(&t), Err(SingularError::NotDiscrete));
    }

    #[test]
    fn point_sum_on_sphere_pole_merges_spheres() {
        // (1,0;9) has the sphere S2 through p1 fixed by the whole group;
        // its p1 continues as (1,0) again, whose S2 also passes through p1
        let t = EquivariantTree {
            m: 9,
            tree_type: TreeType::I,
            nodes: vec![node(0, Cp2, 9, 1, 0), node(1, Cp2, 9, 1, 0)],
            edges: vec![edge(0, 1, Site::P1, Site::P1)],
        };
        let t = validate_tree(&t).unwrap();
        let p = subgroup_profile(&t, 9).unwrap();
        assert_eq!((p.points(), p.spheres()), (2, 1));
        for row in euler_check(&t, &singular_profile(&t)) {
            assert!(row.agrees(), "{row:?}");
        }
    }
}
