//! Which permutation modules occur as `H_2` of a tree manifold.
//!
//! [`necessary_conditions`] applies the restriction on maximal stabilizers,
//! [`realize_stable`] builds a tree once the maximal summands have large
//! multiplicity, and the searches run the generator of [`generate`]
//! exhaustively within a budget.

mod construct;
mod generate;

use std::fmt;

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::modular::{ArithError, Modulus};
use crate::models::ModelKind;
use crate::singular::{permutation_module, singular_profile, PermutationModule};
use crate::tree::{canonical_encode, validate_tree, EquivariantTree};

use generate::{for_each_tree, Allowance, Generator};

/// A target module, in the same `(stabilizer, multiplicity)` form as
/// [`PermutationModule`].
pub type ModuleSpec = PermutationModule;

/// Orders of the isotropy spheres a homologically trivial action must have.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsotropySpec {
    m: Modulus,
    orders: Vec<u64>,
}

impl IsotropySpec {
    pub fn new(m: Modulus, orders: impl IntoIterator<Item = u64>) -> Result<Self, RealizeError> {
        let mut orders: Vec<u64> = orders.into_iter().collect();
        orders.sort_unstable();
        orders.dedup();
        if orders.is_empty() {
            return Err(RealizeError::EmptySpec);
        }
        for &d in &orders {
            m.subgroup(d)?;
            if d == 1 {
                return Err(RealizeError::TrivialIsotropy);
            }
        }
        Ok(IsotropySpec { m, orders })
    }

    pub fn modulus(&self) -> Modulus {
        self.m
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchBudget {
    pub n_max: u64,
    pub node_cap: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { n_max: 6, node_cap: 50_000_000 }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RealizeError {
    #[error("the specification is empty")]
    EmptySpec,
    #[error("isotropy spheres have non-trivial isotropy")]
    TrivialIsotropy,
    #[error("necessary conditions fail: {0}")]
    ConditionsFailed(Rejection),
    #[error("the construction does not apply: {0}")]
    Infeasible(String),
    #[error("search budget exhausted after {explored} candidate vertices")]
    BudgetExhausted { explored: u64 },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum Rejection {
    /// Nothing to realize.
    Empty,
    /// No full-group summand, and more than two maximal stabilizers.
    TooManyMaximal { maximal: Vec<u64> },
    /// No full-group summand, and two maximal stabilizers that intersect.
    MaximalNotDisjoint { maximal: Vec<u64> },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::Empty => f.write_str("the module is empty"),
            Rejection::TooManyMaximal { maximal } => write!(
                f,
                "no summand is fixed by the whole group and the stabilizers have {} maximal elements {:?}; at most two are possible",
                maximal.len(),
                maximal
            ),
            Rejection::MaximalNotDisjoint { maximal } => write!(
                f,
                "no summand is fixed by the whole group and the maximal stabilizers {maximal:?} intersect non-trivially"
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject(Rejection),
}

/// Elements of `orders` not properly dividing another element, ascending.
pub fn maximal_elements(orders: &[u64]) -> Vec<u64> {
    let mut out: Vec<u64> =
        orders.iter().copied().filter(|&d| !orders.iter().any(|&e| e != d && e % d == 0)).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// A type I tree has a summand fixed by the whole group. A type II tree has
/// none, and its stabilizers have at most two maximal elements, which are
/// disjoint subgroups. Passing does not imply realizability.
pub fn necessary_conditions(spec: &ModuleSpec) -> Verdict {
    let m = spec.modulus().get();
    if spec.is_empty() {
        return Verdict::Reject(Rejection::Empty);
    }
    if spec.multiplicity(m) > 0 {
        return Verdict::Accept;
    }
    let maximal = maximal_elements(&spec.stabilizers());
    if maximal.len() > 2 {
        return Verdict::Reject(Rejection::TooManyMaximal { maximal });
    }
    if maximal.len() == 2 && maximal[0].gcd(&maximal[1]) != 1 {
        return Verdict::Reject(Rejection::MaximalNotDisjoint { maximal });
    }
    Verdict::Accept
}

/// A tree whose `H_2` is `spec`, following the stable constructions: a
/// chain of fixed vertices carrying spheres of every needed order (type I),
/// or an `S^4` root whose two spheres carry the maximal branches (type II).
/// When every proper stabilizer can sit on a sphere of a single root the
/// root is used directly.
pub fn realize_stable(spec: &ModuleSpec) -> Result<EquivariantTree, RealizeError> {
    if let Verdict::Reject(r) = necessary_conditions(spec) {
        return Err(RealizeError::ConditionsFailed(r));
    }
    let tree = if spec.multiplicity(spec.modulus().get()) > 0 {
        construct::type_one(spec)?
    } else {
        construct::type_two(spec)?
    };
    let valid = validate_tree(&tree).unwrap_or_else(|v| panic!("constructed tree is invalid: {v:?}"));
    assert_eq!(&permutation_module(&valid), spec, "constructed tree realizes a different module");
    Ok(tree)
}

/// Result of an exhaustive enumeration.
#[derive(Clone, Debug)]
pub struct Enumeration {
    pub trees: Vec<EquivariantTree>,
    /// False when the budget ran out before the enumeration finished.
    pub complete: bool,
    pub explored: u64,
}

/// Every valid tree over `m` of rank at most `budget.n_max`, one per
/// equivalence class (see [`crate::tree::canonical_encode`]). Type I trees
/// come first, roots in ascending weight order; bare `S^4` trees are
/// included.
pub fn enumerate_trees(m: Modulus, budget: SearchBudget) -> Enumeration {
    let mut gen = Generator::new(m, budget.node_cap);
    let allowance = gen.rank_allowance(budget.n_max);
    let mut trees = Vec::new();
    let done = for_each_tree(&mut gen, &[ModelKind::Cp2, ModelKind::S4], &allowance, |g, id| {
        trees.push(g.materialize(id));
        true
    });
    Enumeration { trees, complete: done.is_ok(), explored: gen.explored() }
}

#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Found(EquivariantTree),
    /// Excluded by [`necessary_conditions`] without searching.
    Excluded(Rejection),
    /// The search finished without finding a tree.
    NoneWithin { explored: u64 },
}

/// Look for a tree whose `H_2` is exactly `spec`. The rank is fixed by the
/// module, so the search is finite; `node_cap` bounds the work.
pub fn search_module(spec: &ModuleSpec, budget: SearchBudget) -> Result<SearchOutcome, RealizeError> {
    if let Verdict::Reject(r) = necessary_conditions(spec) {
        return Ok(SearchOutcome::Excluded(r));
    }
    search_exact(spec, budget)
}

/// The exhaustive part of [`search_module`], without the shortcut through
/// the necessary conditions.
pub fn search_exact(spec: &ModuleSpec, budget: SearchBudget) -> Result<SearchOutcome, RealizeError> {
    let m = spec.modulus();
    let mut gen = Generator::new(m, budget.node_cap);
    let caps: Box<[u32]> = gen.divisors().iter().map(|&d| spec.multiplicity(d) as u32).collect();
    let target = caps.clone();
    let allowance = gen.normalize(Allowance { caps, rank: spec.rank() });
    let root = if spec.multiplicity(m.get()) > 0 { ModelKind::Cp2 } else { ModelKind::S4 };
    let mut found = None;
    let outcome = for_each_tree(&mut gen, &[root], &allowance, |g, id| {
        if g.cost(id).0 == &target[..] {
            found = Some(g.materialize(id));
            return false;
        }
        true
    });
    if let Some(tree) = found {
        return Ok(SearchOutcome::Found(tree));
    }
    match outcome {
        Ok(()) => Ok(SearchOutcome::NoneWithin { explored: gen.explored() }),
        Err(_) => Err(RealizeError::BudgetExhausted { explored: gen.explored() }),
    }
}

#[derive(Clone, Debug)]
pub enum MinN {
    Found { n: u64, tree: EquivariantTree },
    NoneWithin { n_max: u64, explored: u64 },
}

/// Least rank of a homologically trivial tree (every vertex fixed by the
/// whole group) whose isotropy spheres have exactly the orders in `spec`.
/// Among trees of that rank the one with least canonical encoding wins.
pub fn min_n_for_isotropy(spec: &IsotropySpec, budget: SearchBudget) -> Result<MinN, RealizeError> {
    let m = spec.modulus();
    let mut explored = 0;
    for n in 1..=budget.n_max {
        let mut gen = Generator::new(m, budget.node_cap.saturating_sub(explored));
        let caps: Box<[u32]> = gen.divisors().iter().map(|&d| if d == m.get() { n as u32 } else { 0 }).collect();
        let allowance = gen.normalize(Allowance { caps, rank: n });
        let mut best: Option<(Vec<u8>, EquivariantTree)> = None;
        let outcome = for_each_tree(&mut gen, &[ModelKind::Cp2], &allowance, |g, id| {
            if g.cost(id).1 != n {
                return true;
            }
            let tree = g.materialize(id);
            let valid = validate_tree(&tree).expect("generated trees are valid");
            if singular_profile(&valid).sphere_orders() == spec.orders() {
                let code = canonical_encode(&valid);
                if best.as_ref().is_none_or(|(c, _)| code < *c) {
                    best = Some((code, tree));
                }
            }
            true
        });
        explored += gen.explored();
        if outcome.is_err() {
            return Err(RealizeError::BudgetExhausted { explored });
        }
        if let Some((_, tree)) = best {
            return Ok(MinN::Found { n, tree });
        }
    }
    Ok(MinN::NoneWithin { n_max: budget.n_max, explored })
}
