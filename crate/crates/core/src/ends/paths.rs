//! Vertex-disjoint path packing with a Menger cut certificate.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{FlowNetwork, INF};
use crate::graph::{check_path, mask, TruncatedGraph, VertexId};

/// Pairwise vertex-disjoint source-target paths, and a vertex cut of the same
/// size when the packing is maximum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathPacking {
    pub paths: Vec<Vec<VertexId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut: Option<Vec<VertexId>>,
}

impl PathPacking {
    pub fn count(&self) -> usize {
        self.paths.len()
    }
}

/// Split-vertex network for `g` with `blocked` vertices removed. Vertex `v`
/// becomes `2v -> 2v+1` with capacity one.
struct SplitNetwork {
    net: FlowNetwork,
    s: usize,
    t: usize,
}

impl SplitNetwork {
    fn new(g: &TruncatedGraph, source: &[bool], target: &[bool], blocked: &[bool]) -> Self {
        let n = g.vertex_count();
        let mut net = FlowNetwork::new(2 * n + 2);
        let (s, t) = (2 * n, 2 * n + 1);
        for v in g.vertices() {
            if blocked[v] {
                continue;
            }
            if source[v] {
                net.add_arc(s, 2 * v, INF);
            }
        }
        for v in g.vertices() {
            if blocked[v] {
                continue;
            }
            net.add_arc(2 * v, 2 * v + 1, 1);
            if target[v] {
                net.add_arc(2 * v + 1, t, INF);
            }
            for &w in g.neighbors(v) {
                if !blocked[w] {
                    net.add_arc(2 * v + 1, 2 * w, INF);
                }
            }
        }
        SplitNetwork { net, s, t }
    }

    fn paths(&self, source: &[bool], target: &[bool]) -> Vec<Vec<VertexId>> {
        self.net
            .decompose(self.s, self.t)
            .into_iter()
            .map(|walk| {
                let mut vs: Vec<VertexId> = walk[1..walk.len() - 1].iter().step_by(2).map(|&x| x / 2).collect();
                let start = vs.iter().rposition(|&v| source[v]).unwrap_or(0);
                vs.drain(..start);
                let end = vs.iter().position(|&v| target[v]).unwrap_or(vs.len() - 1);
                vs.truncate(end + 1);
                vs
            })
            .collect()
    }

    fn cut(&self, g: &TruncatedGraph, blocked: &[bool]) -> Vec<VertexId> {
        let r = self.net.residual_reachable(self.s);
        g.vertices()
            .filter(|&v| !blocked[v] && r[2 * v] && !r[2 * v + 1])
            .collect()
    }
}

fn validate_sets(g: &TruncatedGraph, source: &[VertexId], target: &[VertexId]) -> Result<()> {
    if source.is_empty() || target.is_empty() {
        return Err(Error::invalid("source and target must be non-empty"));
    }
    if let Some(&v) = source.iter().chain(target).find(|&&v| v >= g.vertex_count()) {
        return Err(Error::invalid(format!("vertex {v} does not exist")));
    }
    Ok(())
}

/// Up to `k` pairwise vertex-disjoint paths from `source` to `target`. When
/// fewer than `k` exist the packing is maximum and carries a vertex cut of
/// equal size. Vertices in both sets yield single-vertex paths.
pub fn disjoint_paths(g: &TruncatedGraph, source: &[VertexId], target: &[VertexId], k: usize) -> Result<PathPacking> {
    disjoint_paths_avoiding(g, source, target, k, &BTreeSet::new())
}

/// As [`disjoint_paths`] in `g - blocked`.
pub fn disjoint_paths_avoiding(
    g: &TruncatedGraph,
    source: &[VertexId],
    target: &[VertexId],
    k: usize,
    blocked: &BTreeSet<VertexId>,
) -> Result<PathPacking> {
    validate_sets(g, source, target)?;
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    let n = g.vertex_count();
    let (sm, tm) = (mask(n, source.iter().copied()), mask(n, target.iter().copied()));
    let bm = mask(n, blocked.iter().copied());
    let mut net = SplitNetwork::new(g, &sm, &tm, &bm);
    let value = net.net.max_flow(net.s, net.t, k as i64) as usize;
    let paths = net.paths(&sm, &tm);
    debug_assert_eq!(paths.len(), value);
    let cut = (value < k).then(|| net.cut(g, &bm));
    Ok(PathPacking { paths, cut })
}

/// A maximum packing together with its cut.
pub fn max_disjoint_paths(
    g: &TruncatedGraph,
    source: &[VertexId],
    target: &[VertexId],
    blocked: &BTreeSet<VertexId>,
) -> Result<PathPacking> {
    let k = g.vertex_count() + 1;
    disjoint_paths_avoiding(g, source, target, k, blocked)
}

/// Checks a packing from scratch: paths are valid, disjoint, run from
/// `source` to `target` avoiding `blocked`; a cut has the same size as the
/// packing and leaves no target reachable from the source once deleted.
pub fn verify_packing(
    g: &TruncatedGraph,
    source: &[VertexId],
    target: &[VertexId],
    blocked: &BTreeSet<VertexId>,
    packing: &PathPacking,
) -> Result<()> {
    let src: BTreeSet<VertexId> = source.iter().copied().collect();
    let tgt: BTreeSet<VertexId> = target.iter().copied().collect();
    let mut used = BTreeSet::new();
    for p in &packing.paths {
        check_path(g, p)?;
        let (first, last) = (p[0], p[p.len() - 1]);
        if !src.contains(&first) || !tgt.contains(&last) {
            return Err(Error::Validation(format!("path {p:?} does not join source to target")));
        }
        for &v in p {
            if blocked.contains(&v) {
                return Err(Error::Validation(format!("path uses blocked vertex {v}")));
            }
            if !used.insert(v) {
                return Err(Error::Validation(format!("paths share vertex {v}")));
            }
        }
    }
    if let Some(cut) = &packing.cut {
        if cut.len() != packing.paths.len() {
            return Err(Error::Validation(format!(
                "cut of size {} for {} paths",
                cut.len(),
                packing.paths.len()
            )));
        }
        let n = g.vertex_count();
        let removed = mask(n, blocked.iter().chain(cut).copied());
        let reach = g.reachable(source, &removed);
        if let Some(&v) = target.iter().find(|&&v| reach[v]) {
            return Err(Error::Validation(format!("cut leaves target {v} reachable")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k33() -> TruncatedGraph {
        let mut e = Vec::new();
        for a in 0..3 {
            for b in 3..6 {
                e.push((a, b));
            }
        }
        TruncatedGraph::from_edges(6, &e).unwrap()
    }

    #[test]
    fn complete_bipartite() {
        let g = k33();
        let p = disjoint_paths(&g, &[0, 1, 2], &[3, 4, 5], 5).unwrap();
        assert_eq!(p.count(), 3);
        assert_eq!(p.cut.as_ref().unwrap().len(), 3);
        verify_packing(&g, &[0, 1, 2], &[3, 4, 5], &BTreeSet::new(), &p).unwrap();
    }

    #[test]
    fn path_graph() {
        let g = TruncatedGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let p = disjoint_paths(&g, &[0], &[3], 2).unwrap();
        assert_eq!(p.paths, vec![vec![0, 1, 2, 3]]);
        let cut = p.cut.clone().unwrap();
        assert_eq!(cut.len(), 1);
        verify_packing(&g, &[0], &[3], &BTreeSet::new(), &p).unwrap();
    }

    #[test]
    fn shared_vertices_are_trivial_paths() {
        let g = TruncatedGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let p = disjoint_paths(&g, &[0, 1], &[1, 2], 3).unwrap();
        assert!(p.paths.contains(&vec![1]));
        verify_packing(&g, &[0, 1], &[1, 2], &BTreeSet::new(), &p).unwrap();
    }

    #[test]
    fn enough_paths_means_no_cut() {
        let g = k33();
        let p = disjoint_paths(&g, &[0, 1, 2], &[3, 4, 5], 2).unwrap();
        assert_eq!(p.count(), 2);
        assert!(p.cut.is_none());
        assert!(disjoint_paths(&g, &[], &[3], 1).is_err());
    }
}
