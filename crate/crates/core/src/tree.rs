//! Order trees of height at most omega+1, truncated to finitely many levels.
//!
//! Finite nodes are identified by integer sequences (the root is the empty
//! sequence). Tops sit above a full branch of the finite part and carry the
//! key of the branch leaf they crown, or any other caller-chosen sequence.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Serialized as its rendering, e.g. `"r.0.1"` or `"T.0.1"`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum NodeKey {
    Finite(Vec<u32>),
    Top(Vec<u32>),
}

impl NodeKey {
    pub fn root() -> Self {
        NodeKey::Finite(Vec::new())
    }

    pub fn seq(&self) -> &[u32] {
        match self {
            NodeKey::Finite(s) | NodeKey::Top(s) => s,
        }
    }

    pub fn is_top(&self) -> bool {
        matches!(self, NodeKey::Top(_))
    }

    /// Parses the rendering produced by `Display`: `r`, `r.0.1`, `T.0.1`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut parts = s.trim().split('.');
        let head = parts.next().unwrap_or_default();
        let seq = parts
            .map(|p| {
                p.parse::<u32>()
                    .map_err(|_| Error::invalid(format!("bad node key component {p:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        match head {
            "r" => Ok(NodeKey::Finite(seq)),
            "T" => Ok(NodeKey::Top(seq)),
            _ => Err(Error::invalid(format!("node key {s:?} must start with 'r' or 'T'"))),
        }
    }
}

impl TryFrom<String> for NodeKey {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        NodeKey::parse(&s)
    }
}

impl From<NodeKey> for String {
    fn from(k: NodeKey) -> Self {
        k.to_string()
    }
}

impl fmt::Display for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (head, seq) = match self {
            NodeKey::Finite(s) => ("r", s),
            NodeKey::Top(s) => ("T", s),
        };
        f.write_str(head)?;
        for x in seq {
            write!(f, ".{x}")?;
        }
        Ok(())
    }
}

/// Height of a node: a finite level or the limit level of the tops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Height {
    Finite(usize),
    Top,
}

/// A level index as accepted by level queries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Finite(usize),
    Top,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeClass {
    Root,
    Successor,
    Top,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Node {
    key: NodeKey,
    parent: Option<NodeId>,
    height: Height,
    children: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderTree {
    nodes: Vec<Node>,
    index: BTreeMap<NodeKey, NodeId>,
    levels: Vec<Vec<NodeId>>,
    tops: Vec<NodeId>,
    branching_profile: Vec<usize>,
    antichains: Option<Vec<Vec<NodeId>>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeQuery {
    DownClosure(NodeId),
    Level(Level),
    Interval(NodeId, NodeId),
    Classify(NodeId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QueryAnswer {
    Nodes(Vec<NodeId>),
    Class(NodeClass),
}

impl OrderTree {
    pub fn root_only() -> Self {
        let mut t = OrderTree {
            nodes: Vec::new(),
            index: BTreeMap::new(),
            levels: Vec::new(),
            tops: Vec::new(),
            branching_profile: Vec::new(),
            antichains: None,
        };
        t.push(NodeKey::root(), None, Height::Finite(0));
        t
    }

    fn push(&mut self, key: NodeKey, parent: Option<NodeId>, height: Height) -> NodeId {
        let id = self.nodes.len();
        self.index.insert(key.clone(), id);
        self.nodes.push(Node {
            key,
            parent,
            height,
            children: Vec::new(),
        });
        if let Some(p) = parent {
            self.nodes[p].children.push(id);
        }
        match height {
            Height::Finite(h) => {
                if self.levels.len() <= h {
                    self.levels.resize(h + 1, Vec::new());
                }
                self.levels[h].push(id);
            }
            Height::Top => self.tops.push(id),
        }
        id
    }

    /// Builds the tree from a prefix-closed set of finite keys. Keys are
    /// inserted level by level in lexicographic order so node ids follow
    /// breadth-first order.
    pub fn from_finite_keys<I>(keys: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<u32>>,
    {
        let mut by_len: BTreeMap<usize, BTreeSet<Vec<u32>>> = BTreeMap::new();
        for k in keys {
            by_len.entry(k.len()).or_default().insert(k);
        }
        let mut t = OrderTree::root_only();
        for (len, keys) in by_len {
            if len == 0 {
                continue;
            }
            for k in keys {
                let parent_key = NodeKey::Finite(k[..len - 1].to_vec());
                let parent = t.index.get(&parent_key).copied().ok_or_else(|| {
                    Error::invalid(format!(
                        "key {} has no parent {} in the key set",
                        NodeKey::Finite(k.clone()),
                        parent_key
                    ))
                })?;
                t.push(NodeKey::Finite(k), Some(parent), Height::Finite(len));
            }
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node_ids(&self) -> std::ops::Range<NodeId> {
        0..self.nodes.len()
    }

    pub fn contains(&self, t: NodeId) -> bool {
        t < self.nodes.len()
    }

    fn check(&self, t: NodeId) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::invalid(format!("unknown node id {t}")))
        }
    }

    pub fn key(&self, t: NodeId) -> &NodeKey {
        &self.nodes[t].key
    }

    pub fn node_id(&self, key: &NodeKey) -> Option<NodeId> {
        self.index.get(key).copied()
    }

    pub fn parent(&self, t: NodeId) -> Option<NodeId> {
        self.nodes[t].parent
    }

    pub fn children(&self, t: NodeId) -> &[NodeId] {
        &self.nodes[t].children
    }

    pub fn height(&self, t: NodeId) -> Height {
        self.nodes[t].height
    }

    pub fn is_top(&self, t: NodeId) -> bool {
        self.nodes[t].height == Height::Top
    }

    pub fn classify(&self, t: NodeId) -> NodeClass {
        match (self.nodes[t].height, self.nodes[t].parent) {
            (Height::Top, _) => NodeClass::Top,
            (_, None) => NodeClass::Root,
            _ => NodeClass::Successor,
        }
    }

    /// Index of the deepest finite level.
    pub fn finite_height(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    pub fn level(&self, i: usize) -> &[NodeId] {
        self.levels.get(i).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    pub fn tops(&self) -> &[NodeId] {
        &self.tops
    }

    pub fn finite_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.levels.iter().flatten().copied()
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.finite_nodes()
            .filter(|&t| self.nodes[t].children.iter().all(|&c| self.is_top(c)))
    }

    pub fn branching_profile(&self) -> &[usize] {
        &self.branching_profile
    }

    pub fn antichains(&self) -> Option<&[Vec<NodeId>]> {
        self.antichains.as_deref()
    }

    /// Strict ancestors of `t`, nearest first.
    pub fn ancestors(&self, t: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.nodes[t].parent, move |&p| self.nodes[p].parent)
    }

    /// `a < b` in the tree order.
    pub fn is_below(&self, a: NodeId, b: NodeId) -> bool {
        self.ancestors(b).any(|x| x == a)
    }

    pub fn comparable(&self, a: NodeId, b: NodeId) -> bool {
        a == b || self.is_below(a, b) || self.is_below(b, a)
    }

    /// The down-closure of `t`, root first, including `t`.
    pub fn down_closure(&self, t: NodeId) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = self.ancestors(t).collect();
        v.reverse();
        v.push(t);
        v
    }

    /// The down-closure of `t` without `t`, root first.
    pub fn strict_down_closure(&self, t: NodeId) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = self.ancestors(t).collect();
        v.reverse();
        v
    }

    /// `t` together with every node above it, in preorder.
    pub fn up_closure(&self, t: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![t];
        while let Some(x) = stack.pop() {
            out.push(x);
            stack.extend(self.nodes[x].children.iter().rev());
        }
        out
    }

    /// Nodes strictly between `a` and `b`, lowest first. Requires `a < b`.
    pub fn interval(&self, a: NodeId, b: NodeId) -> Result<Vec<NodeId>> {
        self.check(a)?;
        self.check(b)?;
        let mut between = Vec::new();
        for x in self.ancestors(b) {
            if x == a {
                between.reverse();
                return Ok(between);
            }
            between.push(x);
        }
        Err(Error::invalid(format!(
            "interval needs {} < {}",
            self.key(a),
            self.key(b)
        )))
    }

    pub fn query(&self, q: &TreeQuery) -> Result<QueryAnswer> {
        match *q {
            TreeQuery::DownClosure(t) => {
                self.check(t)?;
                Ok(QueryAnswer::Nodes(self.down_closure(t)))
            }
            TreeQuery::Level(Level::Finite(i)) => Ok(QueryAnswer::Nodes(self.level(i).to_vec())),
            TreeQuery::Level(Level::Top) => Ok(QueryAnswer::Nodes(self.tops.clone())),
            TreeQuery::Interval(a, b) => Ok(QueryAnswer::Nodes(self.interval(a, b)?)),
            TreeQuery::Classify(t) => {
                self.check(t)?;
                Ok(QueryAnswer::Class(self.classify(t)))
            }
        }
    }

    /// Nodes at level `i` (or the tops) in id order.
    pub fn nodes_at(&self, level: Level) -> &[NodeId] {
        match level {
            Level::Finite(i) => self.level(i),
            Level::Top => &self.tops,
        }
    }

    /// Nodes strictly below `level`: all finite levels `< i`, or the whole
    /// finite part when `level` is the top level.
    pub fn nodes_below(&self, level: Level) -> Vec<NodeId> {
        match level {
            Level::Finite(i) => self.levels.iter().take(i).flatten().copied().collect(),
            Level::Top => self.finite_nodes().collect(),
        }
    }

    /// Appends a node below `parent`. Finite keys must extend the parent's key
    /// by one entry; tops must sit on a finite node.
    pub(crate) fn push_node(&mut self, key: NodeKey, parent: Option<NodeId>) -> Result<NodeId> {
        if self.index.contains_key(&key) {
            return Err(Error::Validation(format!("duplicate node {key}")));
        }
        let Some(p) = parent else {
            return Err(Error::Validation(format!("node {key} has no parent")));
        };
        self.check(p)?;
        let height = match (&key, self.nodes[p].height) {
            (NodeKey::Finite(seq), Height::Finite(h)) if seq.len() == h + 1 && seq[..h] == *self.nodes[p].key.seq() => {
                Height::Finite(h + 1)
            }
            (NodeKey::Top(_), Height::Finite(_)) => Height::Top,
            _ => {
                return Err(Error::Validation(format!(
                    "node {key} cannot be a child of {}",
                    self.nodes[p].key
                )))
            }
        };
        Ok(self.push(key, Some(p), height))
    }

    /// Adds one top above the branch ending in `leaf`, keyed by `seq`.
    fn push_top(&mut self, leaf: NodeId, seq: Vec<u32>) -> Result<NodeId> {
        let key = NodeKey::Top(seq);
        if self.index.contains_key(&key) {
            return Err(Error::invalid(format!("duplicate top {key}")));
        }
        Ok(self.push(key, Some(leaf), Height::Top))
    }

    /// Returns a copy with one top per selected branch. Selectors are keys of
    /// leaves of the finite part; each names the branch ending there.
    pub fn attach_tops(&self, selectors: &[Vec<u32>]) -> Result<OrderTree> {
        let mut out = self.clone();
        let mut seen = BTreeSet::new();
        for sel in selectors {
            if !seen.insert(sel.clone()) {
                return Err(Error::invalid(format!(
                    "duplicate branch selector {}",
                    NodeKey::Finite(sel.clone())
                )));
            }
            let leaf = self.maximal_branch_end(sel)?;
            out.push_top(leaf, sel.clone())?;
        }
        Ok(out)
    }

    /// Adds tops with caller-chosen keys above the given leaves.
    pub fn attach_keyed_tops(&self, tops: &[(Vec<u32>, Vec<u32>)]) -> Result<OrderTree> {
        let mut out = self.clone();
        for (branch, key) in tops {
            let leaf = self.maximal_branch_end(branch)?;
            out.push_top(leaf, key.clone())?;
        }
        Ok(out)
    }

    fn maximal_branch_end(&self, sel: &[u32]) -> Result<NodeId> {
        let key = NodeKey::Finite(sel.to_vec());
        let leaf = self
            .node_id(&key)
            .ok_or_else(|| Error::invalid(format!("selector {key} is not a node")))?;
        if self.nodes[leaf].children.iter().any(|&c| !self.is_top(c)) {
            return Err(Error::invalid(format!("selector {key} does not end a maximal branch")));
        }
        Ok(leaf)
    }

    /// Attaches a validated antichain partition of the finite nodes.
    pub fn with_antichains(mut self, antichains: Vec<Vec<NodeId>>) -> Result<OrderTree> {
        let mut owner = vec![None; self.nodes.len()];
        for (i, u) in antichains.iter().enumerate() {
            for &x in u {
                self.check(x)?;
                if self.is_top(x) {
                    return Err(Error::Validation(format!("antichain {i} contains top {}", self.key(x))));
                }
                if let Some(j) = owner[x] {
                    return Err(Error::Validation(format!(
                        "node {} lies in antichains {j} and {i}",
                        self.key(x)
                    )));
                }
                owner[x] = Some(i);
            }
            for (p, &x) in u.iter().enumerate() {
                for &y in &u[p + 1..] {
                    if self.comparable(x, y) {
                        return Err(Error::Validation(format!(
                            "antichain {i} contains comparable nodes {} and {}",
                            self.key(x),
                            self.key(y)
                        )));
                    }
                }
            }
        }
        if let Some(x) = self.finite_nodes().find(|&x| owner[x].is_none()) {
            return Err(Error::Validation(format!("node {} is in no antichain", self.key(x))));
        }
        self.antichains = Some(antichains);
        Ok(self)
    }

    /// The partition with `U_i` = level `i`.
    pub fn level_antichains(&self) -> Vec<Vec<NodeId>> {
        self.levels.clone()
    }

    pub(crate) fn set_branching_profile(&mut self, profile: Vec<usize>) {
        self.branching_profile = profile;
    }

    /// Checks the structural invariants.
    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() || self.nodes[0].parent.is_some() {
            return Err(Error::Validation("node 0 must be the root".into()));
        }
        for t in self.node_ids() {
            let n = &self.nodes[t];
            match (n.height, n.parent) {
                (Height::Finite(0), None) if t == 0 => {}
                (Height::Finite(h), Some(p)) => {
                    if self.nodes[p].height != Height::Finite(h.wrapping_sub(1)) {
                        return Err(Error::Validation(format!(
                            "node {} has height {h} but its parent does not",
                            n.key
                        )));
                    }
                }
                (Height::Top, Some(p)) => {
                    if !n.children.is_empty() {
                        return Err(Error::Validation(format!("top {} has children", n.key)));
                    }
                    if self.nodes[p].children.iter().any(|&c| !self.is_top(c)) {
                        return Err(Error::Validation(format!(
                            "top {} does not sit above a maximal branch",
                            n.key
                        )));
                    }
                }
                _ => {
                    return Err(Error::Validation(format!("node {} is detached", n.key)));
                }
            }
        }
        Ok(())
    }
}

/// The tree in which every node at level `n < height` has
/// `branching_profile[n]` children.
pub fn build_regular_tree(branching_profile: &[usize], height: usize) -> Result<OrderTree> {
    if branching_profile.len() < height {
        return Err(Error::invalid(format!(
            "branching profile has {} entries but height is {height}",
            branching_profile.len()
        )));
    }
    if let Some(i) = branching_profile[..height].iter().position(|&b| b == 0) {
        return Err(Error::invalid(format!("branching profile entry {i} is zero")));
    }
    let mut t = OrderTree::root_only();
    let mut frontier = vec![0usize];
    for &b in &branching_profile[..height] {
        let mut next = Vec::with_capacity(frontier.len() * b);
        for &p in &frontier {
            for c in 0..b {
                let mut seq = t.key(p).seq().to_vec();
                seq.push(c as u32);
                let h = seq.len();
                next.push(t.push(NodeKey::Finite(seq), Some(p), Height::Finite(h)));
            }
        }
        frontier = next;
    }
    t.set_branching_profile(branching_profile[..height].to_vec());
    Ok(t)
}

/// Keys of all leaves of the finite part, in id order.
pub fn leaf_keys(tree: &OrderTree) -> Vec<Vec<u32>> {
    tree.leaves().map(|t| tree.key(t).seq().to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> OrderTree {
        build_regular_tree(&[1, 1], 2).unwrap()
    }

    #[test]
    fn regular_tree_level_sizes() {
        assert_eq!(
            build_regular_tree(&[2, 2, 2], 3).unwrap().level_sizes(),
            vec![1, 2, 4, 8]
        );
        let p = build_regular_tree(&[1; 5], 5).unwrap();
        assert_eq!(p.len(), 6);
        assert_eq!(
            build_regular_tree(&[1, 2, 3], 3).unwrap().level_sizes(),
            vec![1, 1, 2, 6]
        );
        assert!(build_regular_tree(&[], 1).is_err());
        assert_eq!(build_regular_tree(&[], 0).unwrap().len(), 1);
    }

    #[test]
    fn tops_attach_above_branches() {
        let t = build_regular_tree(&[2, 2, 2], 3).unwrap();
        let with = t.attach_tops(&[vec![0, 0, 0], vec![0, 1, 1], vec![1, 1, 0]]).unwrap();
        assert_eq!(with.len(), 18);
        assert_eq!(with.tops().len(), 3);
        with.validate().unwrap();
        assert_eq!(t.attach_tops(&[]).unwrap(), t);
        assert!(t.attach_tops(&[vec![0, 0]]).is_err());
        assert!(t.attach_tops(&[vec![0, 0, 0], vec![0, 0, 0]]).is_err());

        let p = build_regular_tree(&[1, 1, 1], 3).unwrap();
        let p = p.attach_tops(&[vec![0, 0, 0]]).unwrap();
        let top = p.tops()[0];
        assert_eq!(p.strict_down_closure(top).len(), 4);
        assert_eq!(p.classify(top), NodeClass::Top);
    }

    #[test]
    fn queries() {
        let p = path3();
        let r = p.root();
        let b = p.node_id(&NodeKey::Finite(vec![0, 0])).unwrap();
        let a = p.node_id(&NodeKey::Finite(vec![0])).unwrap();
        assert_eq!(
            p.query(&TreeQuery::DownClosure(r)).unwrap(),
            QueryAnswer::Nodes(vec![r])
        );
        assert_eq!(p.interval(r, b).unwrap(), vec![a]);
        assert!(p.interval(b, r).is_err());
        assert_eq!(p.classify(a), NodeClass::Successor);
        assert_eq!(p.classify(r), NodeClass::Root);
        assert_eq!(p.up_closure(a), vec![a, b]);
    }

    #[test]
    fn antichain_validation() {
        let t = build_regular_tree(&[2], 1).unwrap();
        let ac = t.level_antichains();
        assert!(t.clone().with_antichains(ac).is_ok());
        assert!(t.clone().with_antichains(vec![vec![0, 1], vec![2]]).is_err());
        assert!(t.clone().with_antichains(vec![vec![0], vec![1]]).is_err());
    }

    #[test]
    fn key_rendering_round_trips() {
        for k in [NodeKey::root(), NodeKey::Finite(vec![0, 3]), NodeKey::Top(vec![1, 2])] {
            assert_eq!(NodeKey::parse(&k.to_string()).unwrap(), k);
        }
        assert!(NodeKey::parse("x.1").is_err());
    }

    #[test]
    fn prefix_closed_keys() {
        let t = OrderTree::from_finite_keys(vec![vec![0], vec![1], vec![0, 0]]).unwrap();
        assert_eq!(t.level_sizes(), vec![1, 2, 1]);
        assert!(OrderTree::from_finite_keys(vec![vec![0, 0]]).is_err());
    }
}
