//! Bipartite graphs whose large side attaches to the small side through
//! ordered neighbour lists, and the search for small cores.

pub mod certify;
pub mod scale;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest small side handled by bitmask enumeration.
pub const EXACT_LIMIT: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteLK {
    side_a: Vec<String>,
    side_b: Vec<String>,
    /// For each member of side B, indices into side A.
    nbrs: Vec<Vec<usize>>,
    d: usize,
}

impl BipartiteLK {
    pub fn new(side_a: Vec<String>, side_b: Vec<String>, nbrs: Vec<Vec<usize>>, d: usize) -> Result<Self> {
        let g = BipartiteLK {
            side_a,
            side_b,
            nbrs,
            d,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nbrs.len() != self.side_b.len() {
            return Err(Error::Validation(
                "one neighbour list per member of side B is required".into(),
            ));
        }
        let a: BTreeSet<&String> = self.side_a.iter().collect();
        if a.len() != self.side_a.len() {
            return Err(Error::Validation("side A has repeated labels".into()));
        }
        if let Some(b) = self.side_b.iter().find(|b| a.contains(b)) {
            return Err(Error::Validation(format!("{b} lies on both sides")));
        }
        for (b, l) in self.nbrs.iter().enumerate() {
            if l.len() < self.d {
                return Err(Error::Validation(format!(
                    "{} has {} listed neighbours, fewer than d = {}",
                    self.side_b[b],
                    l.len(),
                    self.d
                )));
            }
            let distinct: BTreeSet<&usize> = l.iter().collect();
            if distinct.len() != l.len() || l.iter().any(|&x| x >= self.side_a.len()) {
                return Err(Error::Validation(format!(
                    "neighbour list of {} is not a list of distinct side-A members",
                    self.side_b[b]
                )));
            }
        }
        Ok(())
    }

    pub fn side_a(&self) -> &[String] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[String] {
        &self.side_b
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn nbrs(&self, b: usize) -> &[usize] {
        &self.nbrs[b]
    }

    /// The `d` neighbours that must lie inside a core.
    pub fn required(&self, b: usize) -> &[usize] {
        &self.nbrs[b][..self.d]
    }

    fn required_mask(&self, b: usize) -> u32 {
        self.required(b).iter().fold(0, |m, &x| m | (1 << x))
    }

    /// Members of side B whose required neighbours all lie in `a_set`.
    pub fn supported(&self, a_set: &BTreeSet<usize>) -> Vec<usize> {
        (0..self.side_b.len())
            .filter(|&b| self.required(b).iter().all(|x| a_set.contains(x)))
            .collect()
    }

    /// Keeps the B members whose required neighbours avoid `a_excl` and which
    /// are not in `b_excl`; returns the sub-instance and index maps.
    fn without(&self, a_excl: &BTreeSet<usize>, b_excl: &BTreeSet<usize>) -> (BipartiteLK, Vec<usize>, Vec<usize>) {
        let a_keep: Vec<usize> = (0..self.side_a.len()).filter(|x| !a_excl.contains(x)).collect();
        let mut a_new = vec![usize::MAX; self.side_a.len()];
        for (i, &x) in a_keep.iter().enumerate() {
            a_new[x] = i;
        }
        let b_keep: Vec<usize> = (0..self.side_b.len())
            .filter(|b| !b_excl.contains(b) && self.required(*b).iter().all(|x| !a_excl.contains(x)))
            .collect();
        let sub = BipartiteLK {
            side_a: a_keep.iter().map(|&x| self.side_a[x].clone()).collect(),
            side_b: b_keep.iter().map(|&b| self.side_b[b].clone()).collect(),
            nbrs: b_keep
                .iter()
                .map(|&b| self.required(b).iter().map(|&x| a_new[x]).collect())
                .collect(),
            d: self.d,
        };
        (sub, a_keep, b_keep)
    }
}

/// A pair `(A', B')` of index sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Core {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreMode {
    /// Exact when side A is small enough, otherwise greedy.
    Auto,
    Exact,
    Greedy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Exact,
    Greedy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreSearch {
    pub core: Option<Core>,
    pub strategy: Strategy,
}

/// Checks `|A'| <= a`, `|B'| >= b_min` and that every member of `B'` has its
/// required neighbours inside `A'`.
pub fn validate_core(g: &BipartiteLK, a: usize, b_min: usize, core: &Core) -> Result<()> {
    let a_set: BTreeSet<usize> = core.a.iter().copied().collect();
    let b_set: BTreeSet<usize> = core.b.iter().copied().collect();
    if a_set.len() != core.a.len() || b_set.len() != core.b.len() {
        return Err(Error::Validation("core lists repeat members".into()));
    }
    if a_set.len() > a || b_set.len() < b_min {
        return Err(Error::Validation(format!(
            "core sizes ({}, {}) violate budget {a} / target {b_min}",
            a_set.len(),
            b_set.len()
        )));
    }
    if a_set.iter().any(|&x| x >= g.side_a.len()) || b_set.iter().any(|&b| b >= g.side_b.len()) {
        return Err(Error::Validation("core refers to missing vertices".into()));
    }
    if let Some(&b) = b_set
        .iter()
        .find(|&&b| g.required(b).iter().any(|x| !a_set.contains(x)))
    {
        return Err(Error::Validation(format!(
            "{} has a required neighbour outside A'",
            g.side_b[b]
        )));
    }
    Ok(())
}

fn bits(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask >> i & 1 == 1).collect()
}

/// Next integer with the same number of set bits.
fn next_combination(x: u32) -> Option<u32> {
    let c = x & x.wrapping_neg();
    let r = x.checked_add(c)?;
    Some((((r ^ x) >> 2) / c) | r)
}

/// Searches for `(A', B')` with `|A'| <= a`, `|B'| >= b_min`.
pub fn small_core(g: &BipartiteLK, a: usize, b_min: usize, mode: CoreMode) -> Result<CoreSearch> {
    if a < g.d {
        return Err(Error::invalid(format!("core budget {a} is below d = {}", g.d)));
    }
    let na = g.side_a.len();
    let exact = match mode {
        CoreMode::Exact if na > EXACT_LIMIT => {
            return Err(Error::invalid(format!(
                "exact mode handles at most {EXACT_LIMIT} side-A vertices, got {na}"
            )))
        }
        CoreMode::Exact => true,
        CoreMode::Auto => na <= EXACT_LIMIT,
        CoreMode::Greedy => false,
    };
    let core = if exact {
        exact_core(g, a, b_min)
    } else {
        greedy_core(g, a, b_min)
    };
    Ok(CoreSearch {
        core,
        strategy: if exact { Strategy::Exact } else { Strategy::Greedy },
    })
}

/// Scans all `min(a, |A|)`-subsets of side A in increasing bitmask order;
/// supersets only help, so smaller subsets need no separate pass. The
/// witness is shrunk to the union of the supported neighbourhoods.
fn exact_core(g: &BipartiteLK, a: usize, b_min: usize) -> Option<Core> {
    if b_min == 0 {
        return Some(Core { a: vec![], b: vec![] });
    }
    let na = g.side_a.len();
    if g.side_b.len() < b_min {
        return None;
    }
    let k = a.min(na);
    let masks: Vec<u32> = (0..g.side_b.len()).map(|b| g.required_mask(b)).collect();
    let full: u32 = if na == 32 { u32::MAX } else { (1u32 << na) - 1 };
    let mut s: u32 = if k == 0 { 0 } else { (1u32 << k) - 1 };
    loop {
        let supported: Vec<usize> = (0..masks.len()).filter(|&b| masks[b] & !s == 0).collect();
        if supported.len() >= b_min {
            let union = supported.iter().fold(0, |m, &b| m | masks[b]);
            return Some(Core {
                a: bits(union),
                b: supported,
            });
        }
        match next_combination(s) {
            Some(n) if k > 0 && n & !full == 0 => s = n,
            _ => return None,
        }
    }
}

/// Sweeps prefixes of side A in insertion order and keeps the best.
fn greedy_core(g: &BipartiteLK, a: usize, b_min: usize) -> Option<Core> {
    let na = g.side_a.len();
    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut prefix = BTreeSet::new();
    for i in 0..=a.min(na) {
        if i > 0 {
            prefix.insert(i - 1);
        }
        let b = g.supported(&prefix);
        if best.as_ref().is_none_or(|(_, bb)| b.len() > bb.len()) {
            best = Some((i, b));
        }
    }
    let (i, b) = best?;
    (b.len() >= b_min).then(|| Core { a: (0..i).collect(), b })
}

/// Brute force over every subset of side A of size at most `a`.
pub fn small_core_oracle(g: &BipartiteLK, a: usize, b_min: usize) -> Result<Option<Core>> {
    let (na, nb) = (g.side_a.len(), g.side_b.len());
    if na > EXACT_LIMIT || nb > EXACT_LIMIT {
        return Err(Error::invalid(format!(
            "oracle handles at most {EXACT_LIMIT} vertices per side, got ({na}, {nb})"
        )));
    }
    for mask in 0u32..(1u32 << na) {
        if mask.count_ones() as usize > a {
            continue;
        }
        let a_set: BTreeSet<usize> = bits(mask).into_iter().collect();
        let b: Vec<usize> = (0..nb)
            .filter(|&b| g.nbrs[b][..g.d].iter().all(|x| a_set.contains(x)))
            .collect();
        if b.len() >= b_min {
            return Ok(Some(Core {
                a: a_set.into_iter().collect(),
                b,
            }));
        }
    }
    Ok(None)
}

/// Repeated [`small_core`] runs, each avoiding the vertices of earlier cores.
pub fn disjoint_cores(g: &BipartiteLK, a: usize, b_min: usize, rounds: usize) -> Result<Vec<Core>> {
    let mut a_used = BTreeSet::new();
    let mut b_used = BTreeSet::new();
    let mut out = Vec::new();
    for _ in 0..rounds {
        let (sub, a_map, b_map) = g.without(&a_used, &b_used);
        let Some(c) = small_core(&sub, a, b_min, CoreMode::Auto)?.core else {
            break;
        };
        if c.b.is_empty() {
            break;
        }
        let core = Core {
            a: c.a.iter().map(|&x| a_map[x]).collect(),
            b: c.b.iter().map(|&x| b_map[x]).collect(),
        };
        a_used.extend(&core.a);
        b_used.extend(&core.b);
        out.push(core);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(p: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{p}{i}")).collect()
    }

    #[test]
    fn common_neighbourhood() {
        let g = BipartiteLK::new(labels("a", 4), labels("b", 5), vec![vec![1, 2]; 5], 2).unwrap();
        let c = small_core(&g, 2, 5, CoreMode::Exact).unwrap().core.unwrap();
        assert_eq!(c.a, vec![1, 2]);
        assert_eq!(c.b.len(), 5);
        validate_core(&g, 2, 5, &c).unwrap();
    }

    #[test]
    fn disjoint_neighbourhoods_have_no_core() {
        let g = BipartiteLK::new(
            labels("a", 6),
            labels("b", 3),
            vec![vec![0, 1], vec![2, 3], vec![4, 5]],
            2,
        )
        .unwrap();
        assert!(small_core(&g, 2, 2, CoreMode::Exact).unwrap().core.is_none());
        assert!(small_core_oracle(&g, 2, 2).unwrap().is_none());
    }

    #[test]
    fn every_pair_supports_one() {
        let mut nbrs = Vec::new();
        for x in 0..4 {
            for y in x + 1..4 {
                nbrs.push(vec![x, y]);
            }
        }
        let g = BipartiteLK::new(labels("a", 4), labels("b", nbrs.len()), nbrs, 2).unwrap();
        assert!(small_core_oracle(&g, 2, 2).unwrap().is_none());
        assert!(small_core(&g, 2, 2, CoreMode::Exact).unwrap().core.is_none());
        assert!(small_core(&g, 3, 3, CoreMode::Exact).unwrap().core.is_some());
    }

    #[test]
    fn empty_side_b() {
        let g = BipartiteLK::new(labels("a", 2), vec![], vec![], 2).unwrap();
        assert_eq!(
            small_core_oracle(&g, 2, 0).unwrap(),
            Some(Core { a: vec![], b: vec![] })
        );
        assert!(small_core(&g, 1, 0, CoreMode::Exact).is_err());
    }

    #[test]
    fn greedy_follows_insertion_order() {
        let g = BipartiteLK::new(labels("a", 4), labels("b", 2), vec![vec![0, 1], vec![2, 3]], 2).unwrap();
        let r = small_core(&g, 2, 1, CoreMode::Greedy).unwrap();
        assert_eq!(r.strategy, Strategy::Greedy);
        assert_eq!(
            r.core.unwrap(),
            Core {
                a: vec![0, 1],
                b: vec![0]
            }
        );
    }

    #[test]
    fn cores_are_disjoint() {
        let g = BipartiteLK::new(
            labels("a", 4),
            labels("b", 4),
            vec![vec![0, 1], vec![0, 1], vec![2, 3], vec![2, 3]],
            2,
        )
        .unwrap();
        let cs = disjoint_cores(&g, 2, 2, 5).unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[1].a, vec![2, 3]);
    }

    #[test]
    fn short_lists_rejected() {
        assert!(BipartiteLK::new(labels("a", 2), labels("b", 1), vec![vec![0]], 2).is_err());
    }
}
