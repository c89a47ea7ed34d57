//! Stars of rays: the independent checker, assembly from a comb family via a
//! normal tree, and k-domination of a ray.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ends::combs::Comb;
use crate::ends::normal::normal_tree;
use crate::ends::paths::disjoint_paths_avoiding;
use crate::error::{Error, Result};
use crate::graph::{check_path, Ray, TruncatedGraph, VertexId};

/// A centre ray, leaf rays, and for each leaf a family of leaf-to-centre paths.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarOfRays {
    pub centre: Ray,
    pub leaves: Vec<Ray>,
    pub families: Vec<Vec<Vec<VertexId>>>,
}

impl StarOfRays {
    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }
}

/// Checks the star invariants without reference to how the star was built:
/// rays are valid and pairwise disjoint; each path runs from its leaf to the
/// centre meeting rays only at its ends; paths within a family are disjoint;
/// paths of different families meet only on the centre; each family has at
/// least `m` paths.
pub fn validate_star(g: &TruncatedGraph, star: &StarOfRays, m: usize) -> Result<()> {
    star.centre.validate(g)?;
    if star.leaves.len() != star.families.len() {
        return Err(Error::Validation("one path family per leaf is required".into()));
    }
    let mut ray_of: BTreeMap<VertexId, usize> = BTreeMap::new();
    for (i, r) in std::iter::once(&star.centre).chain(&star.leaves).enumerate() {
        r.validate(g)?;
        for &v in &r.vertices {
            if ray_of.insert(v, i).is_some() {
                return Err(Error::Validation(format!("rays share vertex {v}")));
            }
        }
    }
    let centre = star.centre.vertex_set();
    let mut owner: BTreeMap<VertexId, usize> = BTreeMap::new();
    for (j, fam) in star.families.iter().enumerate() {
        if fam.len() < m {
            return Err(Error::Validation(format!("leaf {j} has {} < {m} paths", fam.len())));
        }
        let mut within = BTreeSet::new();
        for p in fam {
            check_path(g, p)?;
            let last = p.len() - 1;
            if last == 0 {
                return Err(Error::Validation("a leaf path needs two ends".into()));
            }
            if ray_of.get(&p[0]) != Some(&(j + 1)) || !centre.contains(&p[last]) {
                return Err(Error::Validation(format!(
                    "path {p:?} does not join leaf {j} to the centre"
                )));
            }
            if let Some(v) = p[1..last].iter().find(|v| ray_of.contains_key(v)) {
                return Err(Error::Validation(format!("path {p:?} meets a ray at inner vertex {v}")));
            }
            for &v in p {
                if !within.insert(v) {
                    return Err(Error::Validation(format!("paths of leaf {j} share vertex {v}")));
                }
                if centre.contains(&v) {
                    continue;
                }
                if let Some(k) = owner.insert(v, j) {
                    if k != j {
                        return Err(Error::Validation(format!(
                            "families {k} and {j} meet off the centre at {v}"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Result of [`assemble_star`], with the bookkeeping of discarded combs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assembly {
    pub star: StarOfRays,
    /// Indices of combs whose interior met the centre.
    pub discarded: Vec<usize>,
    /// Indices of combs with too few teeth on the centre.
    pub short: Vec<usize>,
    /// Comb index behind each leaf.
    pub leaf_combs: Vec<usize>,
}

/// Builds a depth-first tree through `u`, takes the frontier-reaching branch
/// carrying the most teeth as centre, and keeps every comb whose interior
/// avoids the centre and which has at least `paths_min` teeth on it.
pub fn assemble_star(
    g: &TruncatedGraph,
    u: &BTreeSet<VertexId>,
    combs: &[Comb],
    k: usize,
    paths_min: usize,
) -> Result<Assembly> {
    let uv: Vec<VertexId> = u.iter().copied().collect();
    let tree = normal_tree(g, &uv)?;
    let frontier: Vec<VertexId> = tree.preorder.iter().copied().filter(|&v| g.is_frontier(v)).collect();
    if frontier.is_empty() {
        return Err(Error::NotFound("no frontier-reaching branch through the core".into()));
    }
    let mut teeth_count: BTreeMap<VertexId, usize> = BTreeMap::new();
    for c in combs {
        for t in c.teeth() {
            *teeth_count.entry(t).or_default() += 1;
        }
    }
    let mut best: Option<(usize, Vec<VertexId>)> = None;
    for &f in &frontier {
        let b = tree.branch(f);
        let score = b.iter().map(|v| teeth_count.get(v).copied().unwrap_or(0)).sum();
        let better = match &best {
            None => true,
            Some((s, bb)) => score > *s || (score == *s && b < *bb),
        };
        if better {
            best = Some((score, b));
        }
    }
    let (_, branch) = best.expect("frontier is non-empty");
    let on_centre: BTreeSet<VertexId> = branch.iter().copied().collect();

    let mut leaves = Vec::new();
    let mut families = Vec::new();
    let mut leaf_combs = Vec::new();
    let mut discarded = Vec::new();
    let mut short = Vec::new();
    for (i, c) in combs.iter().enumerate() {
        if c.interior().iter().any(|v| on_centre.contains(v)) {
            discarded.push(i);
            continue;
        }
        let fam: Vec<Vec<VertexId>> = c
            .paths
            .iter()
            .filter(|p| on_centre.contains(&p[p.len() - 1]))
            .cloned()
            .collect();
        if fam.len() < paths_min.max(1) {
            short.push(i);
            continue;
        }
        leaves.push(c.spine.clone());
        families.push(fam);
        leaf_combs.push(i);
    }
    if leaves.len() < k {
        return Err(Error::NotFound(format!(
            "{} combs survive against the centre but {k} leaves are needed ({} discarded, {} short)",
            leaves.len(),
            discarded.len(),
            short.len()
        )));
    }
    Ok(Assembly {
        star: StarOfRays {
            centre: Ray::new(branch),
            leaves,
            families,
        },
        discarded,
        short,
        leaf_combs,
    })
}

/// Vertices off `r` with `k` paths to `r` that share only their first vertex.
pub fn dominators(g: &TruncatedGraph, r: &Ray, k: usize) -> Result<Vec<VertexId>> {
    if r.is_empty() {
        return Err(Error::invalid("ray must be non-empty"));
    }
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    let on_ray = r.vertex_set();
    let mut out = Vec::new();
    for v in g.vertices() {
        if on_ray.contains(&v) || g.degree(v) < k {
            continue;
        }
        let blocked = BTreeSet::from([v]);
        let p = disjoint_paths_avoiding(g, g.neighbors(v), &r.vertices, k, &blocked)?;
        if p.count() >= k {
            out.push(v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fan_apex_dominates() {
        let mut e: Vec<(usize, usize)> = (0..4).map(|i| (i, i + 1)).collect();
        e.extend((0..5).map(|i| (5, i)));
        e.push((6, 7));
        let g = TruncatedGraph::from_edges(8, &e).unwrap();
        let r = Ray::new(vec![0, 1, 2, 3, 4]);
        assert_eq!(dominators(&g, &r, 3).unwrap(), vec![5]);
        assert_eq!(dominators(&g, &r, 1).unwrap(), vec![5]);
    }

    #[test]
    fn checker_rejects_crossing_families() {
        // Centre 0-1, leaves 2 and 3, both attached through vertex 4.
        let g = TruncatedGraph::from_edges(5, &[(0, 1), (2, 4), (3, 4), (4, 0)]).unwrap();
        let star = StarOfRays {
            centre: Ray::new(vec![0, 1]),
            leaves: vec![Ray::new(vec![2]), Ray::new(vec![3])],
            families: vec![vec![vec![2, 4, 0]], vec![vec![3, 4, 0]]],
        };
        assert!(validate_star(&g, &star, 1).is_err());
        let one = StarOfRays {
            centre: star.centre.clone(),
            leaves: vec![Ray::new(vec![2])],
            families: vec![vec![vec![2, 4, 0]]],
        };
        validate_star(&g, &one, 1).unwrap();
        assert!(validate_star(&g, &one, 2).is_err());
    }
}
