//! Star / frayed star / frayed comb extraction from a finite rooted tree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rooted tree on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootedTree {
    pub root: usize,
    pub children: Vec<Vec<usize>>,
}

impl RootedTree {
    /// From a parent array; the root is the unique vertex without a parent.
    pub fn from_parents(parent: &[Option<usize>]) -> Result<Self> {
        let n = parent.len();
        let mut children = vec![Vec::new(); n];
        let mut root = None;
        for (v, p) in parent.iter().enumerate() {
            match *p {
                None if root.is_none() => root = Some(v),
                None => return Err(Error::invalid("more than one root")),
                Some(p) if p < n && p != v => children[p].push(v),
                Some(p) => return Err(Error::invalid(format!("bad parent {p} of {v}"))),
            }
        }
        let root = root.ok_or_else(|| Error::invalid("no root"))?;
        let t = RootedTree { root, children };
        if t.preorder().len() != n {
            return Err(Error::invalid("parent array is not a tree"));
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }

    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            out.push(v);
            if out.len() > self.len() {
                break;
            }
            stack.extend(self.children[v].iter().rev());
        }
        out
    }

    fn subtree_sizes(&self) -> Vec<usize> {
        let mut size = vec![1; self.len()];
        for v in self.preorder().into_iter().rev() {
            for &c in &self.children[v] {
                size[v] += size[c];
            }
        }
        size
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.children[a].contains(&b) || self.children[b].contains(&a)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Distributor {
    pub vertex: usize,
    pub leaves: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpineStar {
    /// Spine vertex the star hangs from.
    pub anchor: usize,
    /// Star centre: the anchor itself or one of its children.
    pub centre: usize,
    pub teeth: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum FrayedDecomposition {
    Star {
        centre: usize,
        leaves: Vec<usize>,
    },
    FrayedStar {
        centre: usize,
        distributors: Vec<Distributor>,
    },
    FrayedComb {
        spine: Vec<usize>,
        stars: Vec<SpineStar>,
    },
}

impl FrayedDecomposition {
    /// Leaves of a (frayed) star or teeth of a frayed comb.
    pub fn count(&self) -> usize {
        match self {
            FrayedDecomposition::Star { leaves, .. } => leaves.len(),
            FrayedDecomposition::FrayedStar { distributors, .. } => distributors.iter().map(|d| d.leaves.len()).sum(),
            FrayedDecomposition::FrayedComb { stars, .. } => stars.iter().map(|s| s.teeth.len()).sum(),
        }
    }

    /// Every edge of the witness is an edge of `t` and no vertex repeats.
    pub fn is_subgraph_of(&self, t: &RootedTree) -> bool {
        let mut edges: Vec<(usize, usize)> = Vec::new();
        let mut vertices = Vec::new();
        match self {
            FrayedDecomposition::Star { centre, leaves } => {
                vertices.push(*centre);
                for &l in leaves {
                    edges.push((*centre, l));
                    vertices.push(l);
                }
            }
            FrayedDecomposition::FrayedStar { centre, distributors } => {
                vertices.push(*centre);
                for d in distributors {
                    edges.push((*centre, d.vertex));
                    vertices.push(d.vertex);
                    for &l in &d.leaves {
                        edges.push((d.vertex, l));
                        vertices.push(l);
                    }
                }
            }
            FrayedDecomposition::FrayedComb { spine, stars } => {
                vertices.extend(spine);
                edges.extend(spine.windows(2).map(|w| (w[0], w[1])));
                for s in stars {
                    if !spine.contains(&s.anchor) {
                        return false;
                    }
                    if s.centre != s.anchor {
                        edges.push((s.anchor, s.centre));
                        vertices.push(s.centre);
                    }
                    for &x in &s.teeth {
                        edges.push((s.centre, x));
                        vertices.push(x);
                    }
                }
            }
        }
        let n = vertices.len();
        vertices.sort_unstable();
        vertices.dedup();
        vertices.len() == n && vertices.iter().all(|&v| v < t.len()) && edges.iter().all(|&(a, b)| t.has_edge(a, b))
    }
}

/// Follows heavy children from the root, then reads off a frayed comb along
/// the path, or a frayed star or star at one of its vertices.
///
/// A child is heavy when its subtree has at least `threshold` vertices or
/// outweighs all its siblings together.
pub fn frayed_decompose(t: &RootedTree, threshold: usize) -> Result<FrayedDecomposition> {
    if threshold == 0 {
        return Err(Error::invalid("threshold must be positive"));
    }
    if t.len() < threshold {
        return Err(Error::invalid(format!(
            "tree has {} vertices, below the threshold {threshold}",
            t.len()
        )));
    }
    let size = t.subtree_sizes();
    let mut spine = vec![t.root];
    loop {
        let v = *spine.last().unwrap();
        let kids = &t.children[v];
        let Some(&heavy) = kids.iter().max_by_key(|&&c| (size[c], std::cmp::Reverse(c))) else {
            break;
        };
        let rest: usize = kids.iter().filter(|&&c| c != heavy).map(|&c| size[c]).sum();
        if size[heavy] >= threshold || size[heavy] > rest {
            spine.push(heavy);
        } else {
            break;
        }
    }

    if spine.len() >= 2 {
        let stars: Vec<SpineStar> = spine
            .iter()
            .enumerate()
            .filter_map(|(i, &v)| {
                let next = spine.get(i + 1).copied();
                let light: Vec<usize> = t.children[v].iter().copied().filter(|&c| Some(c) != next).collect();
                let best_child = light
                    .iter()
                    .copied()
                    .max_by_key(|&c| (t.children[c].len(), std::cmp::Reverse(c)));
                match best_child {
                    Some(c) if t.children[c].len() > light.len() => Some(SpineStar {
                        anchor: v,
                        centre: c,
                        teeth: t.children[c].clone(),
                    }),
                    _ if !light.is_empty() => Some(SpineStar {
                        anchor: v,
                        centre: v,
                        teeth: light,
                    }),
                    _ => None,
                }
            })
            .collect();
        let comb = FrayedDecomposition::FrayedComb {
            spine: spine.clone(),
            stars,
        };
        if comb.count() >= threshold {
            return Ok(comb);
        }
    }

    for &c in &spine {
        let distributors: Vec<Distributor> = t.children[c]
            .iter()
            .filter(|&&d| !t.children[d].is_empty())
            .map(|&d| Distributor {
                vertex: d,
                leaves: t.children[d].clone(),
            })
            .collect();
        let fs = FrayedDecomposition::FrayedStar {
            centre: c,
            distributors,
        };
        if fs.count() >= threshold {
            return Ok(fs);
        }
        if t.children[c].len() >= threshold {
            return Ok(FrayedDecomposition::Star {
                centre: c,
                leaves: t.children[c].clone(),
            });
        }
    }
    Err(Error::NotFound(format!(
        "no star, frayed star or frayed comb with {threshold} leaves along the heavy path of length {}",
        spine.len()
    )))
}
