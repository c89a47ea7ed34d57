//! The attachment bound: above a node `t`, once its own row is removed, the
//! inflation reaches the rows strictly below `t` through at most `|S_t|^2`
//! disjoint paths.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::certifier::{Certificate, CertificateKind, Parameters, Verdict, Witness};
use crate::ends::paths::{max_disjoint_paths, verify_packing, PathPacking};
use crate::error::{Error, Result};
use crate::graph::{TruncatedGraph, VertexId};
use crate::inflation::row_mask;
use crate::ladder::{attachment_sets, AttachmentMap, SparseTGraph};
use crate::tree::{NodeId, NodeKey};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentBound {
    pub vertices: Vec<VertexId>,
    pub flow: usize,
    pub packing: PathPacking,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeBound {
    pub node: NodeKey,
    pub attachment_size: usize,
    /// `|S_t|^2`.
    pub bound: usize,
    /// Disjoint paths from everything above `t` at once.
    pub aggregate_flow: usize,
    pub components: Vec<ComponentBound>,
}

impl NodeBound {
    pub fn within(&self) -> bool {
        self.aggregate_flow <= self.bound && self.components.iter().all(|c| c.flow <= self.bound)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttachmentWitness {
    /// The supplied map equals the attachment sets of the ladders.
    pub map_matches_ladders: bool,
    /// Sum of `|S_t|^2` over the level.
    pub budget: usize,
    /// Sum of the aggregate flows over the level.
    pub aggregate: usize,
    pub nodes: Vec<NodeBound>,
}

/// Source, target and blocked sets for the flow problems at `t`.
struct Region {
    above: Vec<VertexId>,
    below: Vec<VertexId>,
    own_row: BTreeSet<VertexId>,
}

fn region(g: &SparseTGraph, h: &TruncatedGraph, t: NodeId) -> Region {
    let tree = g.tree();
    let above_mask = row_mask(g, h, tree.up_closure(t).into_iter().skip(1));
    let below_mask = row_mask(g, h, tree.strict_down_closure(t));
    let pick = |m: &[bool]| h.vertices().filter(|&v| m[v]).collect::<Vec<_>>();
    Region {
        above: pick(&above_mask),
        below: pick(&below_mask),
        own_row: h.row(tree.key(t)).unwrap_or(&[]).iter().copied().collect(),
    }
}

fn packing(h: &TruncatedGraph, source: &[VertexId], r: &Region) -> Result<PathPacking> {
    if source.is_empty() || r.below.is_empty() {
        return Ok(PathPacking {
            paths: Vec::new(),
            cut: Some(Vec::new()),
        });
    }
    let p = max_disjoint_paths(h, source, &r.below, &r.own_row)?;
    verify_packing(h, source, &r.below, &r.own_row, &p)
        .map_err(|e| Error::Internal(format!("flow witness failed revalidation: {e}")))?;
    Ok(p)
}

/// For every node `t` of height `sigma` and every component `D` of the rows
/// strictly above `t`, the largest family of disjoint paths from `D` to the
/// rows strictly below `t` avoiding the row of `t`, compared with `|S_t|^2`.
pub fn certify_attachment_bound(
    g: &SparseTGraph,
    h: &TruncatedGraph,
    s: &AttachmentMap,
    sigma: usize,
) -> Result<Certificate> {
    let tree = g.tree();
    if !h.has_provenance() {
        return Err(Error::invalid("graph carries no (t, n) provenance"));
    }
    s.validate(tree)?;
    if sigma > tree.finite_height() {
        return Err(Error::invalid(format!(
            "level {sigma} exceeds the tree height {}",
            tree.finite_height()
        )));
    }
    let depth = h.max_depth();
    if depth < sigma {
        return Err(Error::invalid(format!(
            "truncation depth {depth} is below level {sigma}"
        )));
    }
    let mut nodes = Vec::new();
    for &t in tree.level(sigma) {
        let r = region(g, h, t);
        let mut allowed = vec![false; h.vertex_count()];
        for &v in &r.above {
            allowed[v] = true;
        }
        let components = h
            .components_within(&allowed)
            .into_iter()
            .map(|c| {
                let p = packing(h, &c, &r)?;
                Ok(ComponentBound {
                    flow: p.count(),
                    vertices: c,
                    packing: p,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let aggregate_flow = packing(h, &r.above, &r)?.count();
        let size = s.get(t).len();
        nodes.push(NodeBound {
            node: tree.key(t).clone(),
            attachment_size: size,
            bound: size * size,
            aggregate_flow,
            components,
        });
    }
    let budget = nodes.iter().map(|n| n.bound).sum();
    let aggregate = nodes.iter().map(|n| n.aggregate_flow).sum();
    let failed: Vec<String> = nodes
        .iter()
        .filter(|n| !n.within())
        .map(|n| n.node.to_string())
        .collect();
    let verdict = if failed.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let summary = if failed.is_empty() {
        format!(
            "all {} nodes at level {sigma} stay within |S_t|^2 (budget {budget}, aggregate flow {aggregate}) at depth {depth}",
            nodes.len()
        )
    } else {
        format!("bound exceeded above {}", failed.join(", "))
    };
    Ok(Certificate::new(
        CertificateKind::AttachmentBound,
        verdict,
        Parameters {
            depth: Some(depth),
            sigma: Some(sigma),
            ..Parameters::default()
        },
        Witness::Attachment(AttachmentWitness {
            map_matches_ladders: &attachment_sets(g) == s,
            budget,
            aggregate,
            nodes,
        }),
        summary,
    ))
}

/// Rechecks every packing and cut of an attachment certificate against `h`.
pub fn revalidate_attachment(g: &SparseTGraph, h: &TruncatedGraph, w: &AttachmentWitness) -> Result<()> {
    let tree = g.tree();
    for nb in &w.nodes {
        let t = tree
            .node_id(&nb.node)
            .ok_or_else(|| Error::Validation(format!("node {} is not in the tree", nb.node)))?;
        let r = region(g, h, t);
        for c in &nb.components {
            if c.flow != c.packing.count() {
                return Err(Error::Validation("recorded flow differs from the packing".into()));
            }
            if !r.below.is_empty() {
                verify_packing(h, &c.vertices, &r.below, &r.own_row, &c.packing)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inflation::inflate;
    use crate::ladder::select_ladders_by;
    use crate::tree::build_regular_tree;

    #[test]
    fn successor_only_tree_has_no_attachments() {
        let g = SparseTGraph::branch_following(build_regular_tree(&[2, 2], 2).unwrap());
        let h = inflate(&g, 3);
        let s = attachment_sets(&g);
        let c = certify_attachment_bound(&g, &h, &s, 1).unwrap();
        assert!(c.passed());
        let Witness::Attachment(w) = &c.witness else { panic!() };
        assert!(w.nodes.iter().all(|n| n.aggregate_flow == 0));
        revalidate_attachment(&g, &h, w).unwrap();
    }

    #[test]
    fn understated_map_fails() {
        // Path r < a < b with a top whose ladder is (r, b): S_a = {r}.
        let t = build_regular_tree(&[1, 1], 2)
            .unwrap()
            .attach_tops(&[vec![0, 0]])
            .unwrap();
        let ids: Vec<NodeId> = t.node_ids().collect();
        let (r, a, b) = (ids[0], ids[1], ids[2]);
        let g = select_ladders_by(t, &[vec![b], vec![a], vec![r]]).unwrap();
        let h = inflate(&g, 3);
        let s = attachment_sets(&g);
        assert!(certify_attachment_bound(&g, &h, &s, 1).unwrap().passed());
        let mut sets: Vec<BTreeSet<NodeId>> = (0..g.tree().len()).map(|x| s.get(x).clone()).collect();
        sets[a].clear();
        let lie = AttachmentMap::from_sets(g.tree(), sets).unwrap();
        let c = certify_attachment_bound(&g, &h, &lie, 1).unwrap();
        assert_eq!(c.verdict, Verdict::Fail);
        let Witness::Attachment(w) = &c.witness else { panic!() };
        assert!(!w.map_matches_ladders);
        assert!(w.nodes[0].components[0].flow > 0);
    }

    #[test]
    fn level_above_height_rejected() {
        let g = SparseTGraph::branch_following(build_regular_tree(&[2], 1).unwrap());
        let h = inflate(&g, 2);
        assert!(certify_attachment_bound(&g, &h, &attachment_sets(&g), 2).is_err());
    }
}
