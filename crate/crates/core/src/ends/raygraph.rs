//! Graphs on disjoint rays whose edges are witnessed by independent paths.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::ends::frayed::{frayed_decompose, FrayedDecomposition, RootedTree};
use crate::ends::paths::max_disjoint_paths;
use crate::error::{Error, Result};
use crate::graph::{check_disjoint_rays, check_path, Ray, TruncatedGraph, VertexId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RayEdge {
    pub a: usize,
    pub b: usize,
    /// Disjoint connecting paths available when the pair was packed.
    pub multiplicity: usize,
    /// The `m` paths reserved for this edge.
    pub witnesses: Vec<Vec<VertexId>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RayGraph {
    pub rays: usize,
    pub m: usize,
    pub edges: Vec<RayEdge>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum RayGraphShape {
    Disconnected {
        components: Vec<Vec<usize>>,
    },
    Star {
        centre: usize,
    },
    Path {
        order: Vec<usize>,
    },
    Frayed {
        threshold: usize,
        decomposition: FrayedDecomposition,
    },
    Connected,
}

impl RayGraph {
    pub fn adjacency(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.rays];
        for e in &self.edges {
            adj[e.a].insert(e.b);
            adj[e.b].insert(e.a);
        }
        adj
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.rays];
        let mut out = Vec::new();
        for s in 0..self.rays {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut q = VecDeque::from([s]);
            while let Some(x) = q.pop_front() {
                for &y in &adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        comp.push(y);
                        q.push_back(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn classify(&self) -> RayGraphShape {
        let comps = self.components();
        if comps.len() > 1 {
            return RayGraphShape::Disconnected { components: comps };
        }
        let n = self.rays;
        let adj = self.adjacency();
        if n <= 1 {
            return RayGraphShape::Star { centre: 0 };
        }
        if let Some(c) = (0..n).find(|&v| adj[v].len() == n - 1) {
            return RayGraphShape::Star { centre: c };
        }
        if self.edges.len() == n - 1 && adj.iter().all(|a| a.len() <= 2) {
            let start = (0..n).find(|&v| adj[v].len() == 1).unwrap_or(0);
            let mut order = vec![start];
            let mut prev = usize::MAX;
            while let Some(&next) = adj[*order.last().unwrap()].iter().find(|&&y| y != prev) {
                prev = *order.last().unwrap();
                order.push(next);
            }
            return RayGraphShape::Path { order };
        }
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut q = VecDeque::from([0]);
        while let Some(x) = q.pop_front() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some(x);
                    q.push_back(y);
                }
            }
        }
        let tree = RootedTree::from_parents(&parent).expect("BFS parents form a tree");
        for threshold in (1..n).rev() {
            if let Ok(d) = frayed_decompose(&tree, threshold) {
                return RayGraphShape::Frayed {
                    threshold,
                    decomposition: d,
                };
            }
        }
        RayGraphShape::Connected
    }

    /// Witness paths are valid, join their rays, avoid all other rays, and
    /// the interiors of all witnesses are pairwise disjoint.
    pub fn validate(&self, g: &TruncatedGraph, rays: &[Ray]) -> Result<()> {
        let mut ray_of = BTreeMap::new();
        for (i, r) in rays.iter().enumerate() {
            for &v in &r.vertices {
                ray_of.insert(v, i);
            }
        }
        let mut used = BTreeSet::new();
        for e in &self.edges {
            if e.witnesses.len() < self.m {
                return Err(Error::Validation(format!("edge {}-{} has too few witnesses", e.a, e.b)));
            }
            for p in &e.witnesses {
                check_path(g, p)?;
                let last = p.len() - 1;
                if ray_of.get(&p[0]) != Some(&e.a) || ray_of.get(&p[last]) != Some(&e.b) {
                    return Err(Error::Validation(format!(
                        "witness {p:?} does not join rays {} and {}",
                        e.a, e.b
                    )));
                }
                for v in &p[1..last] {
                    if ray_of.contains_key(v) || !used.insert(*v) {
                        return Err(Error::Validation(format!("witness interior vertex {v} is not private")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Packs connecting paths pair by pair (lexicographic order); a pair becomes
/// an edge when at least `m` paths avoid all other rays and all interiors
/// already reserved.
pub fn ray_graph(g: &TruncatedGraph, rays: &[Ray], m: usize) -> Result<RayGraph> {
    if m == 0 {
        return Err(Error::invalid("m must be positive"));
    }
    for r in rays {
        r.validate(g)?;
    }
    check_disjoint_rays(rays)?;
    let mut used: BTreeSet<VertexId> = BTreeSet::new();
    let mut edges = Vec::new();
    for a in 0..rays.len() {
        for b in a + 1..rays.len() {
            let mut blocked = used.clone();
            for (i, r) in rays.iter().enumerate() {
                if i != a && i != b {
                    blocked.extend(&r.vertices);
                }
            }
            let p = max_disjoint_paths(g, &rays[a].vertices, &rays[b].vertices, &blocked)?;
            if p.count() >= m {
                let witnesses: Vec<Vec<VertexId>> = p.paths.into_iter().take(m).collect();
                for w in &witnesses {
                    used.extend(&w[1..w.len() - 1]);
                }
                edges.push(RayEdge {
                    a,
                    b,
                    multiplicity: p.cut.map_or(m, |c| c.len()),
                    witnesses,
                });
            }
        }
    }
    Ok(RayGraph {
        rays: rays.len(),
        m,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconnected_rays() {
        let g = TruncatedGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let rays = vec![Ray::new(vec![0, 1]), Ray::new(vec![2, 3])];
        let rg = ray_graph(&g, &rays, 1).unwrap();
        assert!(rg.edges.is_empty());
        assert!(matches!(rg.classify(), RayGraphShape::Disconnected { .. }));
        assert!(ray_graph(&g, &rays, 0).is_err());
    }
}
