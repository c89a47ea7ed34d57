//! Combs onto a target set, greedy packing of internally disjoint combs, and
//! the iterated core construction built on it.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::ends::paths::disjoint_paths_avoiding;
use crate::error::{Error, Result};
use crate::graph::{check_disjoint_rays, check_path, Ray, TruncatedGraph, VertexId};

/// A spine with pairwise disjoint paths to a target set. Each path starts on
/// the spine and ends at its tooth in the target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comb {
    pub spine: Ray,
    pub paths: Vec<Vec<VertexId>>,
}

impl Comb {
    pub fn teeth(&self) -> Vec<VertexId> {
        self.paths.iter().map(|p| p[p.len() - 1]).collect()
    }

    /// Spine and paths, minus the teeth.
    pub fn interior(&self) -> BTreeSet<VertexId> {
        let mut s = self.spine.vertex_set();
        for p in &self.paths {
            s.extend(&p[..p.len() - 1]);
        }
        s
    }

    pub fn validate(&self, g: &TruncatedGraph, u: &BTreeSet<VertexId>) -> Result<()> {
        self.spine.validate(g)?;
        if let Some(v) = self.spine.vertices.iter().find(|v| u.contains(v)) {
            return Err(Error::Validation(format!("spine meets the target at {v}")));
        }
        let spine = self.spine.vertex_set();
        let mut used = BTreeSet::new();
        for p in &self.paths {
            check_path(g, p)?;
            let last = p.len() - 1;
            if !spine.contains(&p[0]) || p[1..].iter().any(|v| spine.contains(v)) {
                return Err(Error::Validation(format!(
                    "path {p:?} must meet the spine exactly in its first vertex"
                )));
            }
            if !u.contains(&p[last]) || p[..last].iter().any(|v| u.contains(v)) {
                return Err(Error::Validation(format!(
                    "path {p:?} must meet the target exactly in its last vertex"
                )));
            }
            for &v in p {
                if !used.insert(v) {
                    return Err(Error::Validation(format!("comb paths share vertex {v}")));
                }
            }
        }
        Ok(())
    }
}

/// Each comb is valid with at least `m` paths and interiors are pairwise disjoint.
pub fn validate_comb_family(g: &TruncatedGraph, u: &BTreeSet<VertexId>, combs: &[Comb], m: usize) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (i, c) in combs.iter().enumerate() {
        c.validate(g, u)?;
        if c.paths.len() < m {
            return Err(Error::Validation(format!("comb {i} has {} < {m} paths", c.paths.len())));
        }
        for v in c.interior() {
            if !seen.insert(v) {
                return Err(Error::Validation(format!("interiors meet at {v}")));
            }
        }
    }
    Ok(())
}

/// A comb packed by [`find_combs`], with the index of its spine in the
/// candidate list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackedComb {
    pub candidate: usize,
    pub comb: Comb,
}

/// Greedily packs combs with at least `m` teeth in `u`, one per candidate
/// spine, with pairwise disjoint interiors that also avoid `reserved`.
///
/// A first pass over all candidates blocks every other unpacked spine; a
/// second pass over the rest blocks only the packed interiors.
pub fn find_combs(
    g: &TruncatedGraph,
    u: &BTreeSet<VertexId>,
    spines: &[Ray],
    m: usize,
    reserved: &BTreeSet<VertexId>,
) -> Result<Vec<PackedComb>> {
    if m == 0 {
        return Err(Error::invalid("m must be positive"));
    }
    for (i, s) in spines.iter().enumerate() {
        s.validate(g)?;
        if s.vertices.iter().any(|v| u.contains(v)) {
            return Err(Error::invalid(format!("candidate spine {i} meets the target set")));
        }
    }
    let target: Vec<VertexId> = u.iter().copied().collect();
    let mut used: BTreeSet<VertexId> = reserved.clone();
    let mut packed: Vec<PackedComb> = Vec::new();
    let mut done = vec![false; spines.len()];
    if target.is_empty() {
        return Ok(packed);
    }
    for strict in [true, false] {
        for (i, spine) in spines.iter().enumerate() {
            if done[i] || spine.vertices.iter().any(|v| used.contains(v)) {
                continue;
            }
            let mut blocked = used.clone();
            if strict {
                blocked.extend(
                    spines
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i && !done[j])
                        .flat_map(|(_, s)| s.vertices.iter().copied())
                        .filter(|v| !spine.contains(*v)),
                );
            }
            let p = disjoint_paths_avoiding(g, &spine.vertices, &target, m, &blocked)?;
            if p.count() >= m {
                let comb = Comb {
                    spine: spine.clone(),
                    paths: p.paths,
                };
                used.extend(comb.interior());
                done[i] = true;
                packed.push(PackedComb { candidate: i, comb });
            }
        }
    }
    packed.sort_by_key(|p| p.candidate);
    Ok(packed)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub round: usize,
    pub core_size: usize,
    pub combs: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyCore {
    /// Core vertices in insertion order.
    pub core: Vec<VertexId>,
    pub combs: Vec<PackedComb>,
    pub rounds: Vec<RoundTrace>,
    /// False when the round cap stopped the iteration while combs were still found.
    pub stabilized: bool,
}

impl GreedyCore {
    pub fn core_set(&self) -> BTreeSet<VertexId> {
        self.core.iter().copied().collect()
    }
}

/// `U_0` is the first ray; each round packs combs from unused rays onto the
/// current core and adds their vertices to it.
pub fn greedy_core(g: &TruncatedGraph, rays: &[Ray], m: usize, rounds_cap: usize) -> Result<GreedyCore> {
    if rays.is_empty() {
        return Err(Error::invalid("at least one ray is required"));
    }
    if rounds_cap == 0 {
        return Err(Error::invalid("rounds cap must be positive"));
    }
    check_disjoint_rays(rays)?;
    let mut core: Vec<VertexId> = rays[0].vertices.clone();
    let mut core_set: BTreeSet<VertexId> = core.iter().copied().collect();
    let mut unused: Vec<usize> = (1..rays.len()).collect();
    let mut combs = Vec::new();
    let mut rounds = Vec::new();
    let mut stabilized = true;
    for round in 0.. {
        if round == rounds_cap {
            stabilized = false;
            break;
        }
        // Rays swallowed by earlier comb paths can no longer serve as spines.
        unused.retain(|&i| rays[i].vertices.iter().all(|v| !core_set.contains(v)));
        let spines: Vec<Ray> = unused.iter().map(|&i| rays[i].clone()).collect();
        let packed = find_combs(g, &core_set, &spines, m, &BTreeSet::new())?;
        rounds.push(RoundTrace {
            round,
            core_size: core.len(),
            combs: packed.len(),
        });
        if packed.is_empty() {
            break;
        }
        let mut taken = BTreeSet::new();
        for p in packed {
            let idx = unused[p.candidate];
            taken.insert(idx);
            for v in p.comb.interior() {
                if core_set.insert(v) {
                    core.push(v);
                }
            }
            combs.push(PackedComb {
                candidate: idx,
                comb: p.comb,
            });
        }
        unused.retain(|i| !taken.contains(i));
        if unused.is_empty() {
            break;
        }
    }
    Ok(GreedyCore {
        core,
        combs,
        rounds,
        stabilized,
    })
}
