//! JSON documents: trees, module specs and isotropy specs.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modular::Modulus;
use crate::models::{ModelKind, Site};
use crate::realize::{IsotropySpec, ModuleSpec, RealizeError};
use crate::singular::SingularError;
use crate::tree::{EquivariantTree, TreeEdge, TreeNode, TreeType};

#[derive(Debug, Error)]
pub enum DocError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown site label {0:?}")]
    UnknownSite(String),
    #[error("node id {0} appears twice")]
    DuplicateId(u32),
    #[error("edge refers to node {0}, which does not exist")]
    UnknownRef(u32),
    #[error("invalid specification: {0}")]
    Spec(String),
}

impl From<serde_json::Error> for DocError {
    fn from(e: serde_json::Error) -> Self {
        DocError::Syntax { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDoc {
    pub m: u64,
    #[serde(rename = "type")]
    pub tree_type: TreeType,
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: u32,
    pub model: ModelKind,
    pub stab: u64,
    pub weight: [i64; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub parent: u32,
    pub child: u32,
    pub parent_site: String,
    pub child_site: String,
}

fn site(label: &str) -> Result<Site, DocError> {
    label.parse().map_err(|_| DocError::UnknownSite(label.to_string()))
}

impl TreeDoc {
    pub fn from_tree(t: &EquivariantTree) -> Self {
        TreeDoc {
            m: t.m,
            tree_type: t.tree_type,
            nodes: t
                .nodes
                .iter()
                .map(|n| NodeDoc { id: n.id, model: n.kind, stab: n.stab, weight: [n.weight.0, n.weight.1] })
                .collect(),
            edges: t
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    parent: e.parent,
                    child: e.child,
                    parent_site: e.parent_site.label().to_string(),
                    child_site: e.child_site.label().to_string(),
                })
                .collect(),
        }
    }

    /// Structural conversion; admissibility is left to the validator.
    pub fn into_tree(self) -> Result<EquivariantTree, DocError> {
        let mut ids = HashSet::new();
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for n in self.nodes {
            if !ids.insert(n.id) {
                return Err(DocError::DuplicateId(n.id));
            }
            let [mut a, mut b] = n.weight;
            if n.stab > 0 {
                let s = n.stab as i128;
                a = (a as i128).rem_euclid(s) as i64;
                b = (b as i128).rem_euclid(s) as i64;
            }
            nodes.push(TreeNode { id: n.id, kind: n.model, stab: n.stab, weight: (a, b) });
        }
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in self.edges {
            for id in [e.parent, e.child] {
                if !ids.contains(&id) {
                    return Err(DocError::UnknownRef(id));
                }
            }
            edges.push(TreeEdge {
                parent: e.parent,
                child: e.child,
                parent_site: site(&e.parent_site)?,
                child_site: site(&e.child_site)?,
            });
        }
        Ok(EquivariantTree { m: self.m, tree_type: self.tree_type, nodes, edges })
    }
}

pub fn parse_tree(text: &str) -> Result<EquivariantTree, DocError> {
    serde_json::from_str::<TreeDoc>(text)?.into_tree()
}

pub fn emit_tree(t: &EquivariantTree) -> String {
    serde_json::to_string_pretty(&TreeDoc::from_tree(t)).expect("plain data serializes")
}

/// One line, for streams of trees.
pub fn emit_tree_compact(t: &EquivariantTree) -> String {
    serde_json::to_string(&TreeDoc::from_tree(t)).expect("plain data serializes")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummandDoc {
    pub stab: u64,
    pub mult: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleDoc {
    pub m: u64,
    pub module: Vec<SummandDoc>,
}

pub fn parse_module_spec(text: &str) -> Result<ModuleSpec, DocError> {
    let doc: ModuleDoc = serde_json::from_str(text)?;
    let m = Modulus::new(doc.m).map_err(|e| DocError::Spec(e.to_string()))?;
    ModuleSpec::new(m, doc.module.iter().map(|s| (s.stab, s.mult))).map_err(|e: SingularError| DocError::Spec(e.to_string()))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsotropyDoc {
    pub m: u64,
    pub orders: Vec<u64>,
}

pub fn parse_isotropy_spec(text: &str) -> Result<IsotropySpec, DocError> {
    let doc: IsotropyDoc = serde_json::from_str(text)?;
    let m = Modulus::new(doc.m).map_err(|e| DocError::Spec(e.to_string()))?;
    IsotropySpec::new(m, doc.orders).map_err(|e: RealizeError| DocError::Spec(e.to_string()))
}
