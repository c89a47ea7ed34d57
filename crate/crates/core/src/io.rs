//! JSON documents for trees and graphs, and DOT export.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::ends::surrogate::GeneratorSpec;
use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, TruncatedGraph, TruncationNotice, VertexLabel};
use crate::ladder::SparseTGraph;
use crate::tree::{NodeId, NodeKey, OrderTree};

pub const SCHEMA_VERSION: u32 = 1;

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parses any document, mapping syntax and schema problems to [`Error::Parse`].
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(parse_error)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNodeRecord {
    pub id: NodeId,
    pub key: NodeKey,
    pub parent: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<NodeId>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDocument {
    pub schema_version: u32,
    #[serde(default)]
    pub branching_profile: Vec<usize>,
    pub nodes: Vec<TreeNodeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antichains: Option<Vec<Vec<NodeId>>>,
}

fn check_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::Validation(format!(
            "schema_version {v} is not supported (expected {SCHEMA_VERSION})"
        )));
    }
    Ok(())
}

impl TreeDocument {
    pub fn from_tree(tree: &OrderTree, ladders: Option<&[Vec<NodeId>]>) -> Self {
        let nodes = tree
            .node_ids()
            .map(|t| TreeNodeRecord {
                id: t,
                key: tree.key(t).clone(),
                parent: tree.parent(t),
                ladder: ladders.filter(|_| tree.is_top(t)).map(|l| l[t].clone()),
            })
            .collect();
        TreeDocument {
            schema_version: SCHEMA_VERSION,
            branching_profile: tree.branching_profile().to_vec(),
            nodes,
            antichains: tree.antichains().map(<[_]>::to_vec),
        }
    }

    pub fn to_tree(&self) -> Result<OrderTree> {
        check_version(self.schema_version)?;
        let mut t = OrderTree::root_only();
        for (pos, rec) in self.nodes.iter().enumerate() {
            if rec.id != pos {
                return Err(Error::Validation(format!("node record {pos} has id {}", rec.id)));
            }
            if pos == 0 {
                if rec.parent.is_some() || rec.key != NodeKey::root() {
                    return Err(Error::Validation("node 0 must be the root r".into()));
                }
                continue;
            }
            t.push_node(rec.key.clone(), rec.parent)?;
        }
        t.set_branching_profile(self.branching_profile.clone());
        t.validate()?;
        match &self.antichains {
            Some(a) => t.with_antichains(a.clone()),
            None => Ok(t),
        }
    }

    pub fn to_sparse(&self) -> Result<SparseTGraph> {
        let tree = self.to_tree()?;
        let mut ladders = BTreeMap::new();
        for &x in tree.tops() {
            let l = self.nodes[x]
                .ladder
                .clone()
                .ok_or_else(|| Error::Validation(format!("top {} has no ladder", tree.key(x))))?;
            ladders.insert(x, l);
        }
        SparseTGraph::new(tree, ladders)
    }
}

impl From<SparseTGraph> for TreeDocument {
    fn from(g: SparseTGraph) -> Self {
        TreeDocument::from_tree(g.tree(), Some(g.ladders()))
    }
}

impl TryFrom<TreeDocument> for SparseTGraph {
    type Error = Error;
    fn try_from(d: TreeDocument) -> Result<Self> {
        d.to_sparse()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: usize,
    pub depth: usize,
    pub label: VertexLabel,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub truncation: Vec<TruncationNotice>,
}

impl From<TruncatedGraph> for GraphDocument {
    fn from(g: TruncatedGraph) -> Self {
        GraphDocument::from_graph(&g)
    }
}

impl GraphDocument {
    pub fn from_graph(g: &TruncatedGraph) -> Self {
        GraphDocument {
            schema_version: SCHEMA_VERSION,
            generator: g.generator().cloned(),
            depth: (g.vertex_count() > 0).then(|| g.max_depth()),
            vertices: g
                .vertices()
                .map(|v| VertexRecord {
                    id: v,
                    depth: g.depth(v),
                    label: g.label(v).clone(),
                })
                .collect(),
            edges: g.edges().map(|(u, v)| [u, v]).collect(),
            truncation: g.notices().to_vec(),
        }
    }

    pub fn to_graph(&self) -> Result<TruncatedGraph> {
        check_version(self.schema_version)?;
        let mut b = GraphBuilder::new();
        let mut cells = BTreeSet::new();
        for (pos, v) in self.vertices.iter().enumerate() {
            if v.id != pos {
                return Err(Error::Validation(format!("vertex record {pos} has id {}", v.id)));
            }
            if let VertexLabel::Cell { node, n } = &v.label {
                if !cells.insert((node.clone(), *n)) {
                    return Err(Error::Validation(format!("cell ({node}|{n}) appears twice")));
                }
            }
            b.add_vertex(v.label.clone(), v.depth);
        }
        let n = self.vertices.len();
        for (i, &[u, v]) in self.edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::Validation(format!(
                    "edge {i} ({u}, {v}) references a missing vertex"
                )));
            }
            if u == v {
                return Err(Error::Validation(format!("edge {i} is a loop at {u}")));
            }
            if !b.add_edge(u, v)? {
                return Err(Error::Validation(format!("edge {i} ({u}, {v}) is repeated")));
            }
        }
        for notice in &self.truncation {
            b.notice(notice.clone());
        }
        let mut g = b.build();
        g.set_generator(self.generator.clone());
        Ok(g)
    }
}

impl TryFrom<GraphDocument> for TruncatedGraph {
    type Error = Error;
    fn try_from(d: GraphDocument) -> Result<Self> {
        d.to_graph()
    }
}

pub fn emit_graph(g: &TruncatedGraph) -> Result<String> {
    to_json(&GraphDocument::from_graph(g))
}

pub fn parse_graph(text: &str) -> Result<TruncatedGraph> {
    from_json::<GraphDocument>(text)?.to_graph()
}

pub fn emit_tree(tree: &OrderTree, ladders: Option<&[Vec<NodeId>]>) -> Result<String> {
    to_json(&TreeDocument::from_tree(tree, ladders))
}

pub fn emit_sparse(g: &SparseTGraph) -> Result<String> {
    emit_tree(g.tree(), Some(g.ladders()))
}

pub fn parse_tree(text: &str) -> Result<OrderTree> {
    from_json::<TreeDocument>(text)?.to_tree()
}

pub fn parse_sparse(text: &str) -> Result<SparseTGraph> {
    from_json::<TreeDocument>(text)?.to_sparse()
}

fn dot_label(l: &VertexLabel, v: usize) -> String {
    match l {
        VertexLabel::Plain => format!("v{v}"),
        VertexLabel::Cell { node, n } => format!("({node}|{n})"),
        VertexLabel::Lift { base, copy, n } => format!("(X{base}.{copy}|{n})"),
    }
}

/// Graphviz rendering with one rank per depth, so rows appear as columns
/// aligned by ray position.
pub fn to_dot(g: &TruncatedGraph) -> String {
    let mut out = String::from("graph G {\n  node [shape=box, fontsize=10];\n");
    let mut by_depth: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in g.vertices() {
        by_depth.entry(g.depth(v)).or_default().push(v);
    }
    for v in g.vertices() {
        let _ = writeln!(out, "  v{v} [label=\"{}\"];", dot_label(g.label(v), v));
    }
    for (d, vs) in &by_depth {
        let names: Vec<String> = vs.iter().map(|v| format!("v{v}")).collect();
        let _ = writeln!(out, "  {{ rank=same; /* n={d} */ {}; }}", names.join("; "));
    }
    for (u, v) in g.edges() {
        let _ = writeln!(out, "  v{u} -- v{v};");
    }
    out.push_str("}\n");
    out
}
