//! Ray inflations of sparse T-graphs, the level-component check, the
//! neighbourhood-containment check, and star lifting of rays.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    check_disjoint_rays, mask, GraphBuilder, Ray, TruncatedGraph, TruncationNotice, VertexId, VertexLabel,
};
use crate::ladder::{AttachmentMap, SparseTGraph};
use crate::tree::{Height, Level, NodeClass, NodeId, NodeKey};

/// Edge counts split by the rule that produced them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleCounts {
    pub horizontal: usize,
    pub successor: usize,
    pub top: usize,
}

impl RuleCounts {
    pub fn total(&self) -> usize {
        self.horizontal + self.successor + self.top
    }
}

/// Closed-form counts for `inflate(g, depth)`.
pub fn predicted_counts(g: &SparseTGraph, depth: usize) -> (usize, RuleCounts) {
    let n = g.tree().len();
    let top = g.tree().tops().iter().map(|&x| g.ladder(x).len().min(depth + 1)).sum();
    (
        n * (depth + 1),
        RuleCounts {
            horizontal: n * depth,
            successor: g.successor_count() * (depth + 1),
            top,
        },
    )
}

/// Vertex id of `(t, n)` in `inflate(_, depth)`.
pub fn cell_id(t: NodeId, n: usize, depth: usize) -> VertexId {
    t * (depth + 1) + n
}

/// Builds the truncation of `G#N` with rows cut at `depth`.
pub fn inflate(g: &SparseTGraph, depth: usize) -> TruncatedGraph {
    inflate_counted(g, depth).0
}

/// As [`inflate`], also returning how many edges each rule contributed.
pub fn inflate_counted(g: &SparseTGraph, depth: usize) -> (TruncatedGraph, RuleCounts) {
    let tree = g.tree();
    let mut b = GraphBuilder::new();
    for t in tree.node_ids() {
        for n in 0..=depth {
            b.add_vertex(
                VertexLabel::Cell {
                    node: tree.key(t).clone(),
                    n,
                },
                n,
            );
        }
    }
    let mut counts = RuleCounts::default();
    let add = |b: &mut GraphBuilder, u, v| b.add_edge(u, v).expect("inflation edges are valid");
    for t in tree.node_ids() {
        for n in 0..depth {
            add(&mut b, cell_id(t, n, depth), cell_id(t, n + 1, depth));
            counts.horizontal += 1;
        }
        match tree.classify(t) {
            NodeClass::Root => {}
            NodeClass::Successor => {
                let p = tree.parent(t).unwrap();
                for n in 0..=depth {
                    add(&mut b, cell_id(t, n, depth), cell_id(p, n, depth));
                    counts.successor += 1;
                }
            }
            NodeClass::Top => {
                let ladder = g.ladder(t);
                for (n, &x) in ladder.iter().enumerate().take(depth + 1) {
                    add(&mut b, cell_id(t, n, depth), cell_id(x, n, depth));
                    counts.top += 1;
                }
                if ladder.len() < depth + 1 {
                    b.notice(TruncationNotice {
                        top: tree.key(t).to_string(),
                        ladder_len: ladder.len(),
                        missing_edges: depth + 1 - ladder.len(),
                    });
                }
            }
        }
    }
    let mut h = b.build();
    h.set_generator(Some(crate::ends::surrogate::GeneratorSpec::Inflation {
        tree: Box::new(g.clone()),
    }));
    (h, counts)
}

/// One component above a level, with the node it corresponds to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelledComponent {
    pub node: NodeKey,
    pub vertices: Vec<VertexId>,
}

fn node_of(h: &TruncatedGraph, v: VertexId) -> &NodeKey {
    match h.label(v) {
        VertexLabel::Cell { node, .. } => node,
        _ => unreachable!("provenance checked by caller"),
    }
}

/// Components of `h - (T^{<i} x N)`, each matched to the node `t` of level
/// `i` whose up-closure rows it consists of.
pub fn components_above(g: &SparseTGraph, h: &TruncatedGraph, level: Level) -> Result<Vec<LabelledComponent>> {
    if !h.has_provenance() {
        return Err(Error::invalid("graph carries no (t, n) provenance"));
    }
    let tree = g.tree();
    if let Level::Finite(i) = level {
        if i > tree.finite_height() {
            return Err(Error::invalid(format!(
                "level {i} exceeds the tree height {}",
                tree.finite_height()
            )));
        }
    }
    let below: BTreeSet<NodeKey> = tree
        .nodes_below(level)
        .into_iter()
        .map(|t| tree.key(t).clone())
        .collect();
    let allowed: Vec<bool> = h.vertices().map(|v| !below.contains(node_of(h, v))).collect();
    let comps = h.components_within(&allowed);

    let mut expected: BTreeMap<Vec<VertexId>, NodeKey> = BTreeMap::new();
    for &t in tree.nodes_at(level) {
        let mut vs: Vec<VertexId> = tree
            .up_closure(t)
            .into_iter()
            .flat_map(|x| h.row(tree.key(x)).unwrap_or(&[]).to_vec())
            .collect();
        vs.sort_unstable();
        expected.insert(vs, tree.key(t).clone());
    }
    let mut out = Vec::with_capacity(comps.len());
    for c in comps {
        match expected.remove(&c) {
            Some(node) => out.push(LabelledComponent { node, vertices: c }),
            None => {
                return Err(Error::Certification {
                    reason: format!(
                        "component of {} vertices above level {:?} matches no node's up-closure",
                        c.len(),
                        level
                    ),
                    witness: c,
                })
            }
        }
    }
    if let Some((vs, node)) = expected.into_iter().next() {
        return Err(Error::Certification {
            reason: format!("node {node} has no matching component"),
            witness: vs,
        });
    }
    Ok(out)
}

/// Outcome of the neighbourhood-containment check at one node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContainmentEntry {
    pub node: NodeKey,
    pub attachment_size: usize,
    pub passed: bool,
    /// Offending pairs (vertex above `t`, neighbour below `t`).
    pub violations: Vec<(VertexId, VertexId)>,
}

/// For every `t` and every vertex `(t', n)` with `t' > t`, checks that its
/// neighbours in `⌈t⌉° x N` lie in `S_t x {0..|S_t|-1}`.
pub fn check_doublestar_property(
    g: &SparseTGraph,
    h: &TruncatedGraph,
    s: &AttachmentMap,
) -> Result<Vec<ContainmentEntry>> {
    if !h.has_provenance() {
        return Err(Error::invalid("graph carries no (t, n) provenance"));
    }
    let tree = g.tree();
    s.validate(tree)?;
    let cell = |v: VertexId| -> Option<(NodeId, usize)> {
        match h.label(v) {
            VertexLabel::Cell { node, n } => tree.node_id(node).map(|t| (t, *n)),
            _ => None,
        }
    };
    let mut report = Vec::new();
    for t in tree.finite_nodes() {
        let st = s.get(t);
        let below: BTreeSet<NodeId> = tree.strict_down_closure(t).into_iter().collect();
        let mut violations = Vec::new();
        for tp in tree.up_closure(t).into_iter().skip(1) {
            for &v in h.row(tree.key(tp)).unwrap_or(&[]) {
                for &w in h.neighbors(v) {
                    let Some((x, n)) = cell(w) else { continue };
                    if below.contains(&x) && !(st.contains(&x) && n < st.len()) {
                        violations.push((v, w));
                    }
                }
            }
        }
        report.push(ContainmentEntry {
            node: tree.key(t).clone(),
            attachment_size: st.len(),
            passed: violations.is_empty(),
            violations,
        });
    }
    Ok(report)
}

/// Provenance of one ray added by [`lift_with_stars`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftedRay {
    pub base: usize,
    pub copy: usize,
    pub vertices: Vec<VertexId>,
}

/// For each ray `X_i` and each `l < sizes[i]`, adds a fresh ray `X_(i,l)` of the
/// same length joined to `X_i` by the matching of equal positions.
pub fn lift_with_stars(g: &TruncatedGraph, rays: &[Ray], sizes: &[usize]) -> Result<(TruncatedGraph, Vec<LiftedRay>)> {
    if rays.len() != sizes.len() {
        return Err(Error::invalid(format!("{} rays but {} sizes", rays.len(), sizes.len())));
    }
    if let Some(i) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::invalid(format!("size {i} is zero")));
    }
    for r in rays {
        r.validate(g)?;
    }
    check_disjoint_rays(rays)?;
    let mut b = g.to_builder();
    let mut lifted = Vec::new();
    for (i, (r, &size)) in rays.iter().zip(sizes).enumerate() {
        for copy in 0..size {
            let mut vs = Vec::with_capacity(r.len());
            for (n, &x) in r.vertices.iter().enumerate() {
                let v = b.add_vertex(VertexLabel::Lift { base: i, copy, n }, g.depth(x));
                b.add_edge(v, x)?;
                if let Some(&prev) = vs.last() {
                    b.add_edge(prev, v)?;
                }
                vs.push(v);
            }
            lifted.push(LiftedRay {
                base: i,
                copy,
                vertices: vs,
            });
        }
    }
    let mut out = b.build();
    let regenerable = g.generator().cloned().and_then(|base| {
        let keys = rays
            .iter()
            .map(|r| {
                let owner = r.owner.clone()?;
                (g.row(&owner)? == r.vertices.as_slice()).then_some(owner)
            })
            .collect::<Option<Vec<NodeKey>>>()?;
        Some(crate::ends::surrogate::GeneratorSpec::Lift {
            base: Box::new(base),
            rows: keys,
            sizes: sizes.to_vec(),
        })
    });
    out.set_generator(regenerable);
    Ok((out, lifted))
}

/// The level-`i` sets used by the certifiers: nodes of finite height above `sigma`
/// together with the tops.
pub fn rows_above(g: &SparseTGraph, sigma: usize) -> Vec<NodeId> {
    let tree = g.tree();
    tree.node_ids()
        .filter(|&t| match tree.height(t) {
            Height::Finite(x) => x > sigma,
            Height::Top => true,
        })
        .collect()
}

/// Vertex mask of the rows of `nodes`.
pub fn row_mask(g: &SparseTGraph, h: &TruncatedGraph, nodes: impl IntoIterator<Item = NodeId>) -> Vec<bool> {
    let tree = g.tree();
    mask(
        h.vertex_count(),
        nodes
            .into_iter()
            .flat_map(|t| h.row(tree.key(t)).unwrap_or(&[]).to_vec()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ladder::{attachment_sets, select_ladders_by};
    use crate::tree::{build_regular_tree, leaf_keys, OrderTree};

    fn succ_only(profile: &[usize], h: usize) -> SparseTGraph {
        SparseTGraph::branch_following(build_regular_tree(profile, h).unwrap())
    }

    #[test]
    fn path_tree_counts() {
        let g = succ_only(&[1, 1], 2);
        let (h, c) = inflate_counted(&g, 2);
        assert_eq!(h.vertex_count(), 9);
        assert_eq!(c.horizontal, 6);
        assert_eq!(c.successor, 6);
        assert_eq!(h.edge_count(), 12);
    }

    #[test]
    fn top_edges_follow_ladder() {
        let t = build_regular_tree(&[1, 1], 2).unwrap();
        let t = t.attach_tops(&[vec![0, 0]]).unwrap();
        let g = SparseTGraph::branch_following(t);
        let x = g.tree().tops()[0];
        let (h, c) = inflate_counted(&g, 2);
        assert_eq!(c.top, 3);
        let ladder = g.ladder(x).to_vec();
        let want: BTreeSet<(VertexId, VertexId)> = (0..3)
            .map(|n| {
                let a = cell_id(x, n, 2);
                let b = cell_id(ladder[n], n, 2);
                (a.min(b), a.max(b))
            })
            .collect();
        let row: BTreeSet<VertexId> = h.row(g.tree().key(x)).unwrap().iter().copied().collect();
        let got: BTreeSet<(VertexId, VertexId)> = h
            .edges()
            .filter(|&(u, v)| row.contains(&u) != row.contains(&v))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn root_only_is_a_path() {
        let g = SparseTGraph::branch_following(OrderTree::root_only());
        let h = inflate(&g, 5);
        assert_eq!(h.vertex_count(), 6);
        assert_eq!(h.edge_count(), 5);
        let r = h.horizontal_ray(&NodeKey::root()).unwrap();
        assert_eq!(r.vertices, (0..6).collect::<Vec<_>>());
        let h0 = inflate(&g, 0);
        assert_eq!(h0.horizontal_ray(&NodeKey::root()).unwrap().len(), 1);
        assert!(h.horizontal_ray(&NodeKey::Finite(vec![9])).is_err());
    }

    #[test]
    fn level_components() {
        let g = succ_only(&[2, 2], 2);
        let h = inflate(&g, 3);
        let c = components_above(&g, &h, Level::Finite(1)).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(components_above(&g, &h, Level::Finite(0)).unwrap().len(), 1);
        assert!(components_above(&g, &h, Level::Finite(3)).is_err());

        let p = build_regular_tree(&[1, 1], 2).unwrap();
        let p = p
            .attach_keyed_tops(&[(vec![0, 0], vec![0]), (vec![0, 0], vec![1]), (vec![0, 0], vec![2])])
            .unwrap();
        let g = SparseTGraph::branch_following(p);
        let h = inflate(&g, 3);
        assert_eq!(components_above(&g, &h, Level::Top).unwrap().len(), 3);
    }

    #[test]
    fn containment_holds_and_fails() {
        let t = build_regular_tree(&[1, 1], 2).unwrap();
        let t = t.attach_tops(&[vec![0, 0]]).unwrap();
        let (r, a, b) = (0, 1, 2);
        let g = select_ladders_by(t, &[vec![b], vec![a], vec![r]]).unwrap();
        let s = attachment_sets(&g);
        let h = inflate(&g, 4);
        assert!(check_doublestar_property(&g, &h, &s).unwrap().iter().all(|e| e.passed));

        // Claim S_b = {a} although the top attaches to r below b.
        let mut sets: Vec<BTreeSet<NodeId>> = (0..g.tree().len()).map(|t| s.get(t).clone()).collect();
        sets[b] = BTreeSet::from([a]);
        let bad = AttachmentMap::from_sets(g.tree(), sets).unwrap();
        let rep = check_doublestar_property(&g, &h, &bad).unwrap();
        let eb = rep.iter().find(|e| e.node == NodeKey::Finite(vec![0, 0])).unwrap();
        assert!(!eb.passed);
        assert!(!eb.violations.is_empty());
    }

    #[test]
    fn lifting_counts() {
        let g = succ_only(&[1, 1, 1], 3);
        let h = inflate(&g, 3);
        let r = h.horizontal_ray(&NodeKey::root()).unwrap();
        let (l, new) = lift_with_stars(&h, std::slice::from_ref(&r), &[2]).unwrap();
        assert_eq!(new.len(), 2);
        assert_eq!(l.vertex_count() - h.vertex_count(), 8);
        assert_eq!(l.edge_count() - h.edge_count(), 8 + 6);
        assert!(l.generator().is_some());
        let r2 = h.horizontal_ray(&NodeKey::Finite(vec![0])).unwrap();
        let overlap = Ray::new(vec![r.vertices[0], r2.vertices[0]]);
        assert!(lift_with_stars(&h, &[r, overlap], &[1, 1]).is_err());
    }

    #[test]
    fn branch_tops_are_in_tree() {
        let t = build_regular_tree(&[2, 2], 2).unwrap();
        let sel = leaf_keys(&t);
        let g = SparseTGraph::branch_following(t.attach_tops(&sel).unwrap());
        let (h, c) = inflate_counted(&g, 6);
        let (nv, pc) = predicted_counts(&g, 6);
        assert_eq!(h.vertex_count(), nv);
        assert_eq!(c, pc);
        assert_eq!(h.edge_count(), pc.total());
        assert_eq!(h.notices().len(), 4);
    }
}
