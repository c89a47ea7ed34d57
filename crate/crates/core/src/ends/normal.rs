//! Depth-first (hence normal) spanning trees of components.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{TruncatedGraph, VertexId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalTree {
    pub root: VertexId,
    /// Vertices in discovery order.
    pub preorder: Vec<VertexId>,
    pub parent: BTreeMap<VertexId, VertexId>,
}

impl NormalTree {
    pub fn contains(&self, v: VertexId) -> bool {
        v == self.root || self.parent.contains_key(&v)
    }

    /// Path from the root to `v`.
    pub fn branch(&self, v: VertexId) -> Vec<VertexId> {
        let mut p = vec![v];
        let mut x = v;
        while let Some(&y) = self.parent.get(&x) {
            p.push(y);
            x = y;
        }
        p.reverse();
        p
    }

    /// Entry and exit times for ancestor tests.
    fn intervals(&self) -> BTreeMap<VertexId, (usize, usize)> {
        let mut children: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        for &v in &self.preorder {
            if let Some(&p) = self.parent.get(&v) {
                children.entry(p).or_default().push(v);
            }
        }
        let mut out: BTreeMap<VertexId, (usize, usize)> = BTreeMap::new();
        let mut clock = 0;
        let mut stack = vec![(self.root, false)];
        while let Some((v, closing)) = stack.pop() {
            if closing {
                if let Some(e) = out.get_mut(&v) {
                    e.1 = clock;
                }
                clock += 1;
                continue;
            }
            out.insert(v, (clock, 0));
            clock += 1;
            stack.push((v, true));
            for &c in children.get(&v).into_iter().flatten().rev() {
                stack.push((c, false));
            }
        }
        out
    }

    /// Every edge of `g` between tree vertices joins comparable vertices.
    pub fn is_normal_in(&self, g: &TruncatedGraph) -> bool {
        let iv = self.intervals();
        let comparable = |a: VertexId, b: VertexId| {
            let (x, y) = (iv[&a], iv[&b]);
            (x.0 <= y.0 && y.1 <= x.1) || (y.0 <= x.0 && x.1 <= y.1)
        };
        g.edges()
            .filter(|&(a, b)| self.contains(a) && self.contains(b))
            .all(|(a, b)| comparable(a, b))
    }
}

/// A depth-first spanning tree of the component of `u`, rooted at the least
/// vertex of `u`, always descending to the lowest-numbered new neighbour.
pub fn normal_tree(g: &TruncatedGraph, u: &[VertexId]) -> Result<NormalTree> {
    let root = *u
        .iter()
        .min()
        .ok_or_else(|| Error::invalid("the vertex set must be non-empty"))?;
    if root >= g.vertex_count() {
        return Err(Error::invalid(format!("vertex {root} does not exist")));
    }
    let mut seen = vec![false; g.vertex_count()];
    let mut parent = BTreeMap::new();
    let mut preorder = vec![root];
    seen[root] = true;
    let mut stack: Vec<(VertexId, usize)> = vec![(root, 0)];
    while let Some(top) = stack.last_mut() {
        let (v, i) = *top;
        let nb = g.neighbors(v);
        if let Some(off) = nb[i..].iter().position(|&w| !seen[w]) {
            let w = nb[i + off];
            top.1 = i + off + 1;
            seen[w] = true;
            parent.insert(w, v);
            preorder.push(w);
            stack.push((w, 0));
        } else {
            stack.pop();
        }
    }
    if let Some(&x) = u.iter().find(|&&x| x >= g.vertex_count() || !seen[x]) {
        return Err(Error::invalid(format!("vertex {x} is not in the component of {root}")));
    }
    Ok(NormalTree { root, preorder, parent })
}
