//! Exhaustive generation of trees, one per equivalence class.
//!
//! Every child is written in a normal form fixed by the site it is summed
//! onto: a child on a fixed point with rotation `r` is the `CP^2` whose `p1`
//! carries the reverse of `r`, a child on a sphere of order `o` and normal
//! `±s` is `CP^2(s,s;o)` entered through `S1`, and a free child is
//! `CP^2(0,0;1)`. A node is therefore determined by a [`Key`] and by what
//! hangs on each of its sites. Subtrees are interned, so equal subtrees share
//! an id, and an assignment of subtrees to sites is kept only if it is least
//! among its images under the relabelings that fix the key.

use std::collections::HashMap;
use std::rc::Rc;

use crate::modular::{Modulus, Rotation};
use crate::models::{LinearModel, ModelKind, Relabeling, Site};
use crate::tree::{EquivariantTree, TreeEdge, TreeNode, TreeType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Key {
    pub kind: ModelKind,
    pub rep: Rotation,
    pub incoming: Option<Site>,
}

impl Key {
    fn model(&self) -> LinearModel {
        LinearModel::new(self.kind, self.rep).expect("keys are effective")
    }
}

/// Remaining allowance: node counts per divisor of `m` and total rank.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Allowance {
    pub caps: Box<[u32]>,
    pub rank: u64,
}

struct Sub {
    key: Key,
    children: Vec<(Site, u32)>,
    cost: Box<[u32]>,
    rank: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Exhausted;

enum SlotShape {
    Single,
    Multi,
}

struct Slot {
    pos: usize,
    shape: SlotShape,
    options: Rc<[u32]>,
}

pub(crate) struct Generator {
    m: Modulus,
    divisors: Vec<u64>,
    /// Orbit size `m/d` for each divisor.
    weights: Vec<u64>,
    arena: Vec<Sub>,
    interned: HashMap<(Key, Vec<(Site, u32)>), u32>,
    memo: HashMap<(Key, Allowance), Rc<[u32]>>,
    explored: u64,
    cap: u64,
}

fn automorphisms(key: &Key) -> Vec<Relabeling> {
    Relabeling::all(key.kind)
        .into_iter()
        .filter(|g| g.apply(key.rep) == key.rep && key.incoming.is_none_or(|s| g.map_site(s) == s))
        .collect()
}

/// Least representative of each relabeling class of effective models of
/// the given kind over `m`, ascending.
pub(crate) fn model_classes(kind: ModelKind, m: Modulus) -> Vec<Rotation> {
    let mut out = Vec::new();
    for a in 0..m.get() {
        for b in 0..m.get() {
            let r = Rotation::new(a as i64, b as i64, m);
            if !r.is_effective() {
                continue;
            }
            let model = LinearModel::new(kind, r).expect("effective");
            if model.canonical_frames().0 == r {
                out.push(r);
            }
        }
    }
    out
}

impl Generator {
    pub fn new(m: Modulus, cap: u64) -> Self {
        let divisors = m.divisors();
        let weights = divisors.iter().map(|d| m.get() / d).collect();
        Generator {
            m,
            divisors,
            weights,
            arena: Vec::new(),
            interned: HashMap::new(),
            memo: HashMap::new(),
            explored: 0,
            cap,
        }
    }

    pub fn explored(&self) -> u64 {
        self.explored
    }

    pub fn divisors(&self) -> &[u64] {
        &self.divisors
    }

    fn index_of(&self, d: u64) -> usize {
        self.divisors.binary_search(&d).expect("stabilizers divide m")
    }

    /// Drop caps that the rank bound makes unreachable, so equivalent
    /// allowances share memo entries.
    pub fn normalize(&self, mut a: Allowance) -> Allowance {
        for (c, w) in a.caps.iter_mut().zip(&self.weights) {
            *c = (*c as u64).min(a.rank / w) as u32;
        }
        a
    }

    /// Allowance for every tree of rank at most `n`.
    pub fn rank_allowance(&self, n: u64) -> Allowance {
        self.normalize(Allowance { caps: vec![u32::MAX; self.divisors.len()].into(), rank: n })
    }

    pub fn cost(&self, id: u32) -> (&[u32], u64) {
        let s = &self.arena[id as usize];
        (&s.cost, s.rank)
    }

    fn fits(&self, cost: &[u32], rank: u64, a: &Allowance) -> bool {
        rank <= a.rank && cost.iter().zip(a.caps.iter()).all(|(c, cap)| c <= cap)
    }

    fn slots(&self, key: &Key) -> Vec<(usize, SlotShape, Key)> {
        let model = key.model();
        let stab = model.order();
        let mut out = Vec::new();
        for (pos, &site) in model.sites().iter().enumerate() {
            if site.is_point() && Some(site) == key.incoming {
                continue;
            }
            if site.is_point() {
                if key.kind == ModelKind::S4 || stab == 1 {
                    continue;
                }
                let r = model.rotation_at(site).expect("point label").reversed().canonical();
                out.push((pos, SlotShape::Single, Key { kind: ModelKind::Cp2, rep: r, incoming: Some(Site::P1) }));
            } else if site.is_sphere() {
                let sphere = model.sphere(site).expect("sphere label");
                let o = sphere.order;
                if o == 1 || (key.kind == ModelKind::S4 && o == stab) {
                    continue;
                }
                let sub = Modulus::new(o).expect("divisor of an odd modulus");
                let s = sphere.normal as i64;
                let rep = Rotation::new(s, s, sub).canonical();
                out.push((pos, SlotShape::Multi, Key { kind: ModelKind::Cp2, rep, incoming: Some(Site::S1) }));
            } else {
                // over the trivial group a free child would be a second fixed vertex
                if key.kind == ModelKind::S4 && stab == 1 {
                    continue;
                }
                let rep = Rotation::new(0, 0, Modulus::TRIVIAL);
                out.push((pos, SlotShape::Multi, Key { kind: ModelKind::Cp2, rep, incoming: Some(Site::Free) }));
            }
        }
        out
    }

    /// Ids of every subtree rooted at `key` within the allowance, ascending.
    pub fn subtrees(&mut self, key: Key, allowance: &Allowance) -> Result<Rc<[u32]>, Exhausted> {
        let allowance = self.normalize(allowance.clone());
        if let Some(hit) = self.memo.get(&(key, allowance.clone())) {
            return Ok(hit.clone());
        }
        let stab = key.rep.modulus().get();
        let mut base_cost = vec![0u32; self.divisors.len()];
        let mut base_rank = 0;
        if key.kind == ModelKind::Cp2 {
            base_cost[self.index_of(stab)] = 1;
            base_rank = self.m.get() / stab;
        }
        let mut found = Vec::new();
        if self.fits(&base_cost, base_rank, &allowance) {
            let mut rest = allowance.clone();
            rest.rank -= base_rank;
            for (c, b) in rest.caps.iter_mut().zip(&base_cost) {
                *c -= b;
            }
            let mut slots = Vec::new();
            for (pos, shape, child) in self.slots(&key) {
                let options = self.subtrees(child, &rest)?;
                slots.push(Slot { pos, shape, options });
            }
            let autos: Vec<Vec<usize>> = {
                let model = key.model();
                let sites = model.sites();
                automorphisms(&key)
                    .into_iter()
                    .filter(|g| sites.iter().any(|&s| g.map_site(s) != s))
                    .map(|g| sites.iter().map(|&s| sites.iter().position(|&t| t == g.map_site(s)).unwrap()).collect())
                    .collect()
            };
            let n_sites = key.model().sites().len();
            let mut assignment: Vec<Vec<u32>> = vec![Vec::new(); n_sites];
            let mut search = Search {
                gen: self,
                slots: &slots,
                autos: &autos,
                key,
                base_cost,
                base_rank,
                allowance: &allowance,
                found: &mut found,
            };
            search.fill(0, &mut assignment)?;
        }
        found.sort_unstable();
        let found: Rc<[u32]> = found.into();
        self.memo.insert((key, allowance), found.clone());
        Ok(found)
    }

    fn intern(&mut self, key: Key, children: Vec<(Site, u32)>, cost: Box<[u32]>, rank: u64) -> u32 {
        let lookup = (key, children);
        if let Some(&id) = self.interned.get(&lookup) {
            return id;
        }
        let id = self.arena.len() as u32;
        self.arena.push(Sub { key, children: lookup.1.clone(), cost, rank });
        self.interned.insert(lookup, id);
        id
    }

    /// Write out the subtree `id` as a tree over its own stabilizer.
    pub fn materialize(&self, id: u32) -> EquivariantTree {
        let root = &self.arena[id as usize];
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        let mut stack = vec![(id, None::<(u32, Site)>)];
        while let Some((sid, parent)) = stack.pop() {
            let sub = &self.arena[sid as usize];
            let nid = nodes.len() as u32;
            nodes.push(TreeNode::new(nid, sub.key.model()));
            if let Some((p, site)) = parent {
                edges.push(TreeEdge {
                    parent: p,
                    child: nid,
                    parent_site: site,
                    child_site: sub.key.incoming.expect("children have an incoming site"),
                });
            }
            for &(site, c) in sub.children.iter().rev() {
                stack.push((c, Some((nid, site))));
            }
        }
        EquivariantTree {
            m: root.key.rep.modulus().get(),
            tree_type: if root.key.kind == ModelKind::S4 { TreeType::II } else { TreeType::I },
            nodes,
            edges,
        }
    }
}

struct Search<'a> {
    gen: &'a mut Generator,
    slots: &'a [Slot],
    autos: &'a [Vec<usize>],
    key: Key,
    base_cost: Vec<u32>,
    base_rank: u64,
    allowance: &'a Allowance,
    found: &'a mut Vec<u32>,
}

impl Search<'_> {
    fn fill(&mut self, k: usize, assignment: &mut Vec<Vec<u32>>) -> Result<(), Exhausted> {
        if k == self.slots.len() {
            return self.emit(assignment);
        }
        let slots = self.slots;
        let slot = &slots[k];
        match slot.shape {
            SlotShape::Single => {
                self.fill(k + 1, assignment)?;
                for &id in slot.options.iter() {
                    if self.add(id) {
                        assignment[slot.pos].push(id);
                        self.fill(k + 1, assignment)?;
                        assignment[slot.pos].pop();
                        self.remove(id);
                    }
                }
            }
            SlotShape::Multi => self.fill_multi(k, 0, assignment)?,
        }
        Ok(())
    }

    /// Multisets as non-decreasing runs of option indices starting at `from`.
    fn fill_multi(&mut self, k: usize, from: usize, assignment: &mut Vec<Vec<u32>>) -> Result<(), Exhausted> {
        self.fill(k + 1, assignment)?;
        let slots = self.slots;
        let slot = &slots[k];
        for j in from..slot.options.len() {
            let id = slot.options[j];
            if self.add(id) {
                assignment[slot.pos].push(id);
                self.fill_multi(k, j, assignment)?;
                assignment[slot.pos].pop();
                self.remove(id);
            }
        }
        Ok(())
    }

    fn add(&mut self, id: u32) -> bool {
        let (cost, rank) = self.gen.cost(id);
        let rank_ok = self.base_rank + rank <= self.allowance.rank;
        let caps_ok = self.base_cost.iter().zip(cost).zip(self.allowance.caps.iter()).all(|((b, c), cap)| b + c <= *cap);
        if !(rank_ok && caps_ok) {
            return false;
        }
        let cost: Vec<u32> = cost.to_vec();
        self.base_rank += rank;
        for (b, c) in self.base_cost.iter_mut().zip(cost) {
            *b += c;
        }
        true
    }

    fn remove(&mut self, id: u32) {
        let (cost, rank) = self.gen.cost(id);
        let cost: Vec<u32> = cost.to_vec();
        self.base_rank -= rank;
        for (b, c) in self.base_cost.iter_mut().zip(cost) {
            *b -= c;
        }
    }

    fn emit(&mut self, assignment: &[Vec<u32>]) -> Result<(), Exhausted> {
        self.gen.explored += 1;
        if self.gen.explored > self.gen.cap {
            return Err(Exhausted);
        }
        for perm in self.autos {
            let mut image = vec![Vec::new(); assignment.len()];
            for (pos, ids) in assignment.iter().enumerate() {
                image[perm[pos]] = ids.clone();
            }
            if image.as_slice() < assignment {
                return Ok(());
            }
        }
        let model = self.key.model();
        let sites = model.sites();
        let children: Vec<(Site, u32)> =
            assignment.iter().enumerate().flat_map(|(pos, ids)| ids.iter().map(move |&id| (sites[pos], id))).collect();
        let id = self.gen.intern(self.key, children, self.base_cost.clone().into(), self.base_rank);
        self.found.push(id);
        Ok(())
    }
}

/// Every tree over `m` within the allowance, roots in ascending class
/// order. The callback sees each tree together with its cost vector over
/// `gen.divisors()` and its rank.
pub(crate) fn for_each_tree(
    gen: &mut Generator,
    kinds: &[ModelKind],
    allowance: &Allowance,
    mut visit: impl FnMut(&Generator, u32) -> bool,
) -> Result<(), Exhausted> {
    for &kind in kinds {
        for rep in model_classes(kind, gen.m) {
            let key = Key { kind, rep, incoming: None };
            let ids = gen.subtrees(key, allowance)?;
            for &id in ids.iter() {
                if !visit(gen, id) {
                    return Ok(());
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::validate_tree;

    fn m(x: u64) -> Modulus {
        Modulus::new(x).unwrap()
    }

    #[test]
    fn class_counts() {
        // orbit counts taken by hand: mod 5 the effective CP2 pairs fall into
        // the classes of (0,1), (0,2), (1,2), (1,3); S4 pairs into those of
        // (0,1), (0,2), (1,1), (1,2), (2,2)
        let cp2 = model_classes(ModelKind::Cp2, m(5));
        assert_eq!(cp2.len(), 4);
        assert!(cp2.iter().all(|r| r.is_effective()));
        assert_eq!(model_classes(ModelKind::S4, m(5)).len(), 5);
        assert_eq!(model_classes(ModelKind::Cp2, m(1)).len(), 1);
    }

    #[test]
    fn generated_trees_validate() {
        let mut gen = Generator::new(m(9), u64::MAX);
        let a = gen.rank_allowance(3);
        let mut count = 0;
        for_each_tree(&mut gen, &[ModelKind::Cp2, ModelKind::S4], &a, |g, id| {
            let t = g.materialize(id);
            let v = validate_tree(&t).unwrap_or_else(|e| panic!("{t:?}: {e:?}"));
            assert!(v.rank() <= 3);
            assert_eq!(v.rank(), g.cost(id).1);
            count += 1;
            true
        })
        .unwrap();
        assert!(count > 0);
    }

    #[test]
    fn cap_is_enforced() {
        let mut gen = Generator::new(m(9), 10);
        let a = gen.rank_allowance(3);
        assert_eq!(for_each_tree(&mut gen, &[ModelKind::Cp2], &a, |_, _| true), Err(Exhausted));
    }
}
