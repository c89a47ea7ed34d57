//! Sparse T-graphs: an order tree together with the down-neighbour list
//! ("ladder") of every node, and the attachment sets derived from it.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{Height, NodeClass, NodeId, NodeKey, OrderTree};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "crate::io::TreeDocument", try_from = "crate::io::TreeDocument")]
pub struct SparseTGraph {
    tree: OrderTree,
    ladders: Vec<Vec<NodeId>>,
}

impl SparseTGraph {
    /// Successor nodes get their parent, the root gets nothing, and each top
    /// gets the ladder supplied for it (missing tops get an empty ladder).
    pub fn new(tree: OrderTree, top_ladders: BTreeMap<NodeId, Vec<NodeId>>) -> Result<Self> {
        let mut ladders = vec![Vec::new(); tree.len()];
        for t in tree.node_ids() {
            if let Some(p) = tree.parent(t) {
                if !tree.is_top(t) {
                    ladders[t] = vec![p];
                }
            }
        }
        for (t, l) in top_ladders {
            if !tree.contains(t) || !tree.is_top(t) {
                return Err(Error::invalid(format!("ladder supplied for non-top node {t}")));
            }
            ladders[t] = l;
        }
        let g = SparseTGraph { tree, ladders };
        g.validate()?;
        Ok(g)
    }

    /// Every top's ladder is its whole branch, root first.
    pub fn branch_following(tree: OrderTree) -> Self {
        let tops: BTreeMap<NodeId, Vec<NodeId>> =
            tree.tops().iter().map(|&x| (x, tree.strict_down_closure(x))).collect();
        SparseTGraph::new(tree, tops).expect("branch ladders are always valid")
    }

    pub fn tree(&self) -> &OrderTree {
        &self.tree
    }

    pub fn into_tree(self) -> OrderTree {
        self.tree
    }

    pub fn ladder(&self, t: NodeId) -> &[NodeId] {
        &self.ladders[t]
    }

    pub fn ladders(&self) -> &[Vec<NodeId>] {
        &self.ladders
    }

    pub fn successor_count(&self) -> usize {
        self.tree
            .node_ids()
            .filter(|&t| self.tree.classify(t) == NodeClass::Successor)
            .count()
    }

    pub fn validate(&self) -> Result<()> {
        self.tree.validate()?;
        if self.ladders.len() != self.tree.len() {
            return Err(Error::Validation("ladder table does not match tree".into()));
        }
        for t in self.tree.node_ids() {
            let l = &self.ladders[t];
            match self.tree.classify(t) {
                NodeClass::Root if !l.is_empty() => {
                    return Err(Error::Validation("root must have an empty ladder".into()));
                }
                NodeClass::Successor if l.as_slice() != [self.tree.parent(t).unwrap()] => {
                    return Err(Error::Validation(format!(
                        "successor {} must have its parent as ladder",
                        self.tree.key(t)
                    )));
                }
                NodeClass::Top => {
                    for (i, &x) in l.iter().enumerate() {
                        if !self.tree.contains(x) || !self.tree.is_below(x, t) {
                            return Err(Error::Validation(format!(
                                "ladder entry {i} of {} is not below it",
                                self.tree.key(t)
                            )));
                        }
                        if i > 0 && !self.tree.is_below(l[i - 1], x) {
                            return Err(Error::Validation(format!(
                                "ladder of {} is not strictly increasing at entry {i}",
                                self.tree.key(t)
                            )));
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Selects ladders with the antichain rule, using the tree's own partition.
pub fn select_ladders(tree: OrderTree) -> Result<SparseTGraph> {
    let ac = tree
        .antichains()
        .ok_or_else(|| Error::invalid("tree carries no antichain partition"))?
        .to_vec();
    select_ladders_by(tree, &ac)
}

/// Ladder rule: `t_0` is the root; `t_n` is the unique point of the
/// least-indexed antichain meeting the open interval `(t_{n-1}, t)`; stop
/// when the interval is empty.
pub fn select_ladders_by(tree: OrderTree, antichains: &[Vec<NodeId>]) -> Result<SparseTGraph> {
    let mut index: BTreeMap<NodeId, usize> = BTreeMap::new();
    for (i, u) in antichains.iter().enumerate() {
        for &x in u {
            index.entry(x).or_insert(i);
        }
    }
    let mut tops = BTreeMap::new();
    for &x in tree.tops() {
        let branch = tree.strict_down_closure(x);
        let mut ladder = vec![branch[0]];
        let mut pos = 0usize;
        while pos + 1 < branch.len() {
            let interval = &branch[pos + 1..];
            let best = interval.iter().filter_map(|y| index.get(y)).min().copied();
            let Some(i) = best else {
                return Err(Error::LadderStall {
                    top: tree.key(x).to_string(),
                    after: tree.key(branch[pos]).to_string(),
                });
            };
            let hits: Vec<usize> = (0..interval.len())
                .filter(|&j| index.get(&interval[j]) == Some(&i))
                .collect();
            if hits.len() != 1 {
                return Err(Error::AntichainViolation {
                    top: tree.key(x).to_string(),
                    antichain: i,
                    count: hits.len(),
                });
            }
            pos += 1 + hits[0];
            ladder.push(branch[pos]);
        }
        tops.insert(x, ladder);
    }
    SparseTGraph::new(tree, tops)
}

/// The sets `S_t`, one per node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttachmentMap {
    sets: Vec<BTreeSet<NodeId>>,
}

impl AttachmentMap {
    pub fn from_sets(tree: &OrderTree, sets: Vec<BTreeSet<NodeId>>) -> Result<Self> {
        let m = AttachmentMap { sets };
        m.validate(tree)?;
        Ok(m)
    }

    pub fn get(&self, t: NodeId) -> &BTreeSet<NodeId> {
        &self.sets[t]
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn max_size(&self) -> usize {
        self.sets.iter().map(BTreeSet::len).max().unwrap_or(0)
    }

    pub fn validate(&self, tree: &OrderTree) -> Result<()> {
        if self.sets.len() != tree.len() {
            return Err(Error::Validation(format!(
                "attachment map has {} entries for {} nodes",
                self.sets.len(),
                tree.len()
            )));
        }
        for (t, s) in self.sets.iter().enumerate() {
            if let Some(&x) = s.iter().find(|&&x| !tree.contains(x) || !tree.is_below(x, t)) {
                return Err(Error::Validation(format!(
                    "S of {} contains {x}, which is not below it",
                    tree.key(t)
                )));
            }
        }
        Ok(())
    }

    /// Keyed form for reports.
    pub fn keyed(&self, tree: &OrderTree) -> BTreeMap<String, Vec<String>> {
        self.sets
            .iter()
            .enumerate()
            .map(|(t, s)| {
                (
                    tree.key(t).to_string(),
                    s.iter().map(|&x| tree.key(x).to_string()).collect(),
                )
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityEntry {
    pub node: NodeKey,
    pub size: usize,
    pub shallower_size: usize,
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarPropertyReport {
    pub map: AttachmentMap,
    /// Present when a shallower truncation was supplied: one entry per node
    /// of finite height at most its depth minus one that exists in both.
    pub stability: Option<Vec<StabilityEntry>>,
}

impl StarPropertyReport {
    pub fn is_stable(&self) -> bool {
        self.stability.as_ref().is_none_or(|v| v.iter().all(|e| e.stable))
    }
}

/// `S_t` = union over `t' > t` of `ladder(t') ∩ ⌈t⌉°`.
pub fn attachment_sets(g: &SparseTGraph) -> AttachmentMap {
    let tree = g.tree();
    let mut sets = vec![BTreeSet::new(); tree.len()];
    for tp in tree.node_ids() {
        let ladder = g.ladder(tp);
        if ladder.is_empty() {
            continue;
        }
        // Every t < t' lies on the strict down-closure of t'; a ladder entry
        // x of t' is below t exactly when x precedes t on that chain.
        let chain = tree.strict_down_closure(tp);
        let pos: BTreeMap<NodeId, usize> = chain.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        for (i, &t) in chain.iter().enumerate() {
            for &x in ladder {
                if pos[&x] < i {
                    sets[t].insert(x);
                }
            }
        }
    }
    AttachmentMap { sets }
}

/// Computes the attachment map and, given a shallower truncation from the
/// same generator, compares `|S_t|` for every node of height below its depth.
pub fn check_star_property(g: &SparseTGraph, shallower: Option<&SparseTGraph>) -> StarPropertyReport {
    let map = attachment_sets(g);
    let stability = shallower.map(|h| {
        let small = attachment_sets(h);
        let limit = h.tree().finite_height();
        h.tree()
            .finite_nodes()
            .filter(|&t| matches!(h.tree().height(t), Height::Finite(x) if x < limit))
            .filter_map(|t| {
                let key = h.tree().key(t);
                let big = g.tree().node_id(key)?;
                let size = map.get(big).len();
                let shallower_size = small.get(t).len();
                Some(StabilityEntry {
                    node: key.clone(),
                    size,
                    shallower_size,
                    stable: size == shallower_size,
                })
            })
            .collect()
    });
    StarPropertyReport { map, stability }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::build_regular_tree;

    fn path_with_top() -> (OrderTree, [NodeId; 4]) {
        let t = build_regular_tree(&[1, 1], 2).unwrap();
        let t = t.attach_tops(&[vec![0, 0]]).unwrap();
        let r = t.root();
        let a = t.node_id(&NodeKey::Finite(vec![0])).unwrap();
        let b = t.node_id(&NodeKey::Finite(vec![0, 0])).unwrap();
        let x = t.tops()[0];
        (t, [r, a, b, x])
    }

    #[test]
    fn antichain_rule_hand_example() {
        let (t, [r, a, b, x]) = path_with_top();
        let g = select_ladders_by(t, &[vec![b], vec![a], vec![r]]).unwrap();
        assert_eq!(g.ladder(x), &[r, b]);
        let s = check_star_property(&g, None).map;
        assert_eq!(s.get(r), &BTreeSet::new());
        assert_eq!(s.get(a), &BTreeSet::from([r]));
        assert_eq!(s.get(b), &BTreeSet::from([r]));
        assert_eq!(s.get(x), &BTreeSet::new());
    }

    #[test]
    fn level_antichains_give_full_branches() {
        let t = build_regular_tree(&[2, 2, 2], 3).unwrap();
        let sel = crate::tree::leaf_keys(&t);
        let t = t.attach_tops(&sel).unwrap();
        let ac = t.level_antichains();
        let t = t.with_antichains(ac).unwrap();
        let g = select_ladders(t).unwrap();
        for &x in g.tree().tops() {
            assert_eq!(g.ladder(x), g.tree().strict_down_closure(x).as_slice());
        }
    }

    #[test]
    fn shallow_tops_ladder_is_root() {
        let t = build_regular_tree(&[3], 1).unwrap();
        let sel = crate::tree::leaf_keys(&t);
        let t = t.attach_tops(&sel).unwrap();
        let ac = t.level_antichains();
        let g = select_ladders_by(t, &ac).unwrap();
        for &x in g.tree().tops() {
            let p = g.tree().parent(x).unwrap();
            assert_eq!(g.ladder(x), &[0, p]);
        }
        let t = OrderTree::root_only().attach_tops(&[vec![]]).unwrap();
        let g = select_ladders_by(t, &[vec![0]]).unwrap();
        assert_eq!(g.ladder(g.tree().tops()[0]), &[0]);
    }

    #[test]
    fn violation_and_stall() {
        let (t, [r, a, b, _]) = path_with_top();
        let err = select_ladders_by(t.clone(), &[vec![r], vec![a, b]]).unwrap_err();
        assert!(matches!(err, Error::AntichainViolation { count: 2, .. }));
        let err = select_ladders_by(t, &[vec![r]]).unwrap_err();
        assert!(matches!(err, Error::LadderStall { .. }));
    }

    #[test]
    fn branch_ladders_attach_to_whole_down_closure() {
        let t = build_regular_tree(&[2, 2], 2).unwrap();
        let sel = crate::tree::leaf_keys(&t);
        let g = SparseTGraph::branch_following(t.attach_tops(&sel).unwrap());
        let s = attachment_sets(&g);
        for t in g.tree().finite_nodes() {
            let want: BTreeSet<_> = g.tree().strict_down_closure(t).into_iter().collect();
            assert_eq!(s.get(t), &want);
        }
    }

    #[test]
    fn no_tops_means_empty_sets() {
        let g = SparseTGraph::branch_following(build_regular_tree(&[2, 3], 2).unwrap());
        let s = attachment_sets(&g);
        assert!(g.tree().node_ids().all(|t| s.get(t).is_empty()));
    }

    #[test]
    fn invalid_ladders_rejected() {
        let (t, [r, a, b, x]) = path_with_top();
        assert!(SparseTGraph::new(t.clone(), BTreeMap::from([(x, vec![b, a])])).is_err());
        assert!(SparseTGraph::new(t.clone(), BTreeMap::from([(x, vec![r, x])])).is_err());
        assert!(SparseTGraph::new(t, BTreeMap::from([(a, vec![r])])).is_err());
    }
}
