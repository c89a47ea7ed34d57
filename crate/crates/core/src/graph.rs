//! Finite slices of lazily generated graphs: simple undirected graphs whose
//! vertices carry a depth and an optional provenance label.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::NodeKey;

pub type VertexId = usize;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VertexLabel {
    Plain,
    /// The vertex `(t, n)` of a ray inflation.
    Cell {
        node: NodeKey,
        n: usize,
    },
    /// The `n`th vertex of copy `copy` of lifted ray `base`.
    Lift {
        base: usize,
        copy: usize,
        n: usize,
    },
}

/// Rule-(3) edges that a truncated ladder could not supply.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationNotice {
    pub top: String,
    pub ladder_len: usize,
    pub missing_edges: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "crate::io::GraphDocument", try_from = "crate::io::GraphDocument")]
pub struct TruncatedGraph {
    adj: Vec<Vec<VertexId>>,
    depth: Vec<usize>,
    labels: Vec<VertexLabel>,
    rows: BTreeMap<NodeKey, Vec<VertexId>>,
    notices: Vec<TruncationNotice>,
    generator: Option<crate::ends::surrogate::GeneratorSpec>,
}

#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    adj: Vec<BTreeSet<VertexId>>,
    depth: Vec<usize>,
    labels: Vec<VertexLabel>,
    notices: Vec<TruncationNotice>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_vertices(n: usize) -> Self {
        let mut b = Self::new();
        for _ in 0..n {
            b.add_vertex(VertexLabel::Plain, 0);
        }
        b
    }

    pub fn add_vertex(&mut self, label: VertexLabel, depth: usize) -> VertexId {
        self.adj.push(BTreeSet::new());
        self.depth.push(depth);
        self.labels.push(label);
        self.adj.len() - 1
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn set_depth(&mut self, v: VertexId, depth: usize) {
        self.depth[v] = depth;
    }

    /// Adds `{u, v}`; returns whether the edge is new.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<bool> {
        let n = self.adj.len();
        if u >= n || v >= n {
            return Err(Error::Validation(format!(
                "edge ({u}, {v}) references a missing vertex"
            )));
        }
        if u == v {
            return Err(Error::Validation(format!("loop at vertex {u}")));
        }
        let fresh = self.adj[u].insert(v);
        self.adj[v].insert(u);
        Ok(fresh)
    }

    pub fn notice(&mut self, notice: TruncationNotice) {
        self.notices.push(notice);
    }

    pub fn build(self) -> TruncatedGraph {
        let mut rows: BTreeMap<NodeKey, Vec<(usize, VertexId)>> = BTreeMap::new();
        for (v, l) in self.labels.iter().enumerate() {
            if let VertexLabel::Cell { node, n } = l {
                rows.entry(node.clone()).or_default().push((*n, v));
            }
        }
        let rows = rows
            .into_iter()
            .map(|(k, mut r)| {
                r.sort_unstable();
                (k, r.into_iter().map(|(_, v)| v).collect())
            })
            .collect();
        TruncatedGraph {
            adj: self.adj.into_iter().map(|s| s.into_iter().collect()).collect(),
            depth: self.depth,
            labels: self.labels,
            rows,
            notices: self.notices,
            generator: None,
        }
    }
}

impl TruncatedGraph {
    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let mut b = GraphBuilder::with_vertices(n);
        for &(u, v) in edges {
            b.add_edge(u, v)?;
        }
        Ok(b.build())
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.adj.len()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn depth(&self, v: VertexId) -> usize {
        self.depth[v]
    }

    pub fn max_depth(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    pub fn frontier(&self) -> Vec<VertexId> {
        let d = self.max_depth();
        self.vertices().filter(|&v| self.depth[v] == d).collect()
    }

    pub fn is_frontier(&self, v: VertexId) -> bool {
        self.depth[v] == self.max_depth()
    }

    pub fn label(&self, v: VertexId) -> &VertexLabel {
        &self.labels[v]
    }

    pub fn notices(&self) -> &[TruncationNotice] {
        &self.notices
    }

    pub fn generator(&self) -> Option<&crate::ends::surrogate::GeneratorSpec> {
        self.generator.as_ref()
    }

    pub(crate) fn set_generator(&mut self, g: Option<crate::ends::surrogate::GeneratorSpec>) {
        self.generator = g;
    }

    /// Whether every vertex is a labelled cell `(t, n)`.
    pub fn has_provenance(&self) -> bool {
        !self.labels.is_empty() && self.labels.iter().all(|l| matches!(l, VertexLabel::Cell { .. }))
    }

    /// Vertices `(t, 0), (t, 1), ...` of the row of `t`.
    pub fn row(&self, key: &NodeKey) -> Option<&[VertexId]> {
        self.rows.get(key).map(Vec::as_slice)
    }

    pub fn cell(&self, key: &NodeKey, n: usize) -> Option<VertexId> {
        self.row(key).and_then(|r| r.get(n).copied())
    }

    pub fn row_keys(&self) -> impl Iterator<Item = &NodeKey> {
        self.rows.keys()
    }

    /// The horizontal ray of `t`.
    pub fn horizontal_ray(&self, key: &NodeKey) -> Result<Ray> {
        let row = self
            .row(key)
            .ok_or_else(|| Error::invalid(format!("no row for node {key}")))?;
        Ok(Ray::with_owner(row.to_vec(), key.clone()))
    }

    /// Vertices of copy `copy` of lifted ray `base`, ordered by position.
    pub fn lifted_ray(&self, base: usize, copy: usize) -> Option<Ray> {
        let mut found: Vec<(usize, VertexId)> = self
            .vertices()
            .filter_map(|v| match self.labels[v] {
                VertexLabel::Lift { base: b, copy: c, n } if b == base && c == copy => Some((n, v)),
                _ => None,
            })
            .collect();
        if found.is_empty() {
            return None;
        }
        found.sort_unstable();
        Some(Ray::new(found.into_iter().map(|(_, v)| v).collect()))
    }

    /// Connected components of the subgraph induced by `allowed`, each sorted,
    /// ordered by least vertex.
    pub fn components_within(&self, allowed: &[bool]) -> Vec<Vec<VertexId>> {
        let mut seen = vec![false; self.vertex_count()];
        let mut comps = Vec::new();
        for s in self.vertices() {
            if !allowed[s] || seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &y in &self.adj[x] {
                    if allowed[y] && !seen[y] {
                        seen[y] = true;
                        comp.push(y);
                        queue.push_back(y);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn components(&self) -> Vec<Vec<VertexId>> {
        self.components_within(&vec![true; self.vertex_count()])
    }

    /// Vertices reachable from `from` without entering `blocked`.
    pub fn reachable(&self, from: &[VertexId], blocked: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = VecDeque::new();
        for &s in from {
            if !blocked[s] && !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(x) = queue.pop_front() {
            for &y in &self.adj[x] {
                if !blocked[y] && !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    /// Re-opens the graph for extension, keeping labels, depths and notices.
    pub fn to_builder(&self) -> GraphBuilder {
        GraphBuilder {
            adj: self.adj.iter().map(|n| n.iter().copied().collect()).collect(),
            depth: self.depth.clone(),
            labels: self.labels.clone(),
            notices: self.notices.clone(),
        }
    }
}

/// A finite initial segment of a ray.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Ray {
    pub vertices: Vec<VertexId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owner: Option<NodeKey>,
}

impl Ray {
    pub fn new(vertices: Vec<VertexId>) -> Self {
        Ray { vertices, owner: None }
    }

    pub fn with_owner(vertices: Vec<VertexId>, owner: NodeKey) -> Self {
        Ray {
            vertices,
            owner: Some(owner),
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn first(&self) -> Option<VertexId> {
        self.vertices.first().copied()
    }

    pub fn last(&self) -> Option<VertexId> {
        self.vertices.last().copied()
    }

    pub fn vertex_set(&self) -> BTreeSet<VertexId> {
        self.vertices.iter().copied().collect()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn is_frontier_reaching(&self, g: &TruncatedGraph) -> bool {
        self.last().is_some_and(|v| g.is_frontier(v))
    }

    /// Non-empty, distinct vertices, consecutive ones adjacent.
    pub fn validate(&self, g: &TruncatedGraph) -> Result<()> {
        if self.vertices.is_empty() {
            return Err(Error::Validation("empty ray".into()));
        }
        check_path(g, &self.vertices)
    }
}

/// Checks that `p` is a path of `g`: vertices exist, are distinct, and
/// consecutive ones are adjacent.
pub fn check_path(g: &TruncatedGraph, p: &[VertexId]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (i, &v) in p.iter().enumerate() {
        if v >= g.vertex_count() {
            return Err(Error::Validation(format!("vertex {v} does not exist")));
        }
        if !seen.insert(v) {
            return Err(Error::Validation(format!("vertex {v} repeats")));
        }
        if i > 0 && !g.has_edge(p[i - 1], v) {
            return Err(Error::Validation(format!("{} and {v} are not adjacent", p[i - 1])));
        }
    }
    Ok(())
}

/// Fails unless the rays are pairwise vertex-disjoint.
pub fn check_disjoint_rays(rays: &[Ray]) -> Result<()> {
    let mut owner: BTreeMap<VertexId, usize> = BTreeMap::new();
    for (i, r) in rays.iter().enumerate() {
        for &v in &r.vertices {
            if let Some(j) = owner.insert(v, i) {
                if j != i {
                    return Err(Error::invalid(format!("rays {j} and {i} share vertex {v}")));
                }
            }
        }
    }
    Ok(())
}

pub(crate) fn mask(n: usize, vs: impl IntoIterator<Item = VertexId>) -> Vec<bool> {
    let mut m = vec![false; n];
    for v in vs {
        m[v] = true;
    }
    m
}
