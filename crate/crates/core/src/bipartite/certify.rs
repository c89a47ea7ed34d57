//! No-small-core certificates for trees built from scale families.
//!
//! For a down-closed set `S` of finite nodes, `g(n)` is the largest value a
//! member of `S` takes at coordinate `n` (or `-1`). A function `f` whose
//! exceptional set against `g` lies in the ideal, and which beats `g` at some
//! coordinate below `d - 1`, cannot have its first `d` ladder entries in `S`.

use std::collections::BTreeSet;

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bipartite::scale::{build_scale_tree, to_bipartite, verify_scale, ScaleFamily};
use crate::bipartite::{small_core_oracle, EXACT_LIMIT};
use crate::error::{Error, Result};
use crate::ladder::SparseTGraph;
use crate::tree::{NodeId, OrderTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SubtreeMode {
    Exact,
    Sampled { seed: u64, samples: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtreeRow {
    /// Node keys of `S`.
    pub nodes: Vec<String>,
    pub bound: Vec<i64>,
    /// Functions the dominance argument rules out.
    pub excluded: Vec<usize>,
    /// Functions whose first `d` ladder entries lie in `S`.
    pub captured: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCheck {
    /// The oracle finds a core capturing `max_captured` tops.
    pub attains: bool,
    /// The oracle finds no core capturing one more.
    pub sharp: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoCoreReport {
    pub subtree_budget: usize,
    pub d: usize,
    pub b_min: usize,
    pub mode: SubtreeMode,
    pub subtrees: usize,
    pub exhaustive: bool,
    pub max_captured: usize,
    /// Largest number of functions the argument leaves open for one `S`.
    pub max_unexcluded: usize,
    /// Functions captured by some `S`.
    pub exceptions: Vec<usize>,
    /// True when no examined `S` captures `b_min` tops.
    pub holds: bool,
    /// At most one function, so the obstruction is vacuous.
    pub degenerate: bool,
    pub oracle: Option<OracleCheck>,
    pub rows: Vec<SubtreeRow>,
}

/// Every down-closed set of at most `budget` finite nodes containing the
/// root, each produced once.
pub fn down_closed_subtrees(tree: &OrderTree, budget: usize) -> Vec<Vec<NodeId>> {
    fn grow(
        tree: &OrderTree,
        budget: usize,
        current: &mut Vec<NodeId>,
        candidates: &[NodeId],
        out: &mut Vec<Vec<NodeId>>,
    ) {
        let mut s = current.clone();
        s.sort_unstable();
        out.push(s);
        if current.len() == budget {
            return;
        }
        for (i, &c) in candidates.iter().enumerate() {
            let mut next: Vec<NodeId> = candidates[i + 1..].to_vec();
            next.extend(tree.children(c).iter().filter(|&&x| !tree.is_top(x)));
            current.push(c);
            grow(tree, budget, current, &next, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    if budget == 0 {
        return out;
    }
    let root = tree.root();
    let start: Vec<NodeId> = tree
        .children(root)
        .iter()
        .copied()
        .filter(|&x| !tree.is_top(x))
        .collect();
    grow(tree, budget, &mut vec![root], &start, &mut out);
    out
}

/// Random root-containing down-closed sets, deduplicated, in sorted order.
pub fn sampled_subtrees(tree: &OrderTree, budget: usize, seed: u64, samples: usize) -> Vec<Vec<NodeId>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    if budget == 0 {
        return Vec::new();
    }
    for _ in 0..samples {
        let size = rng.gen_range(1..=budget);
        let mut s = vec![tree.root()];
        let mut frontier: Vec<NodeId> = tree
            .children(tree.root())
            .iter()
            .copied()
            .filter(|&x| !tree.is_top(x))
            .collect();
        while s.len() < size && !frontier.is_empty() {
            let i = rng.gen_range(0..frontier.len());
            let c = frontier.swap_remove(i);
            s.push(c);
            frontier.extend(tree.children(c).iter().filter(|&&x| !tree.is_top(x)));
        }
        s.sort_unstable();
        seen.insert(s);
    }
    seen.into_iter().collect()
}

fn pointwise_bound(tree: &OrderTree, s: &[NodeId], k: usize) -> Vec<i64> {
    let mut g = vec![-1i64; k];
    for &t in s {
        for (n, &x) in tree.key(t).seq().iter().enumerate() {
            g[n] = g[n].max(i64::from(x));
        }
    }
    g
}

fn row(sf: &ScaleFamily, g: &SparseTGraph, s: &[NodeId], d: usize) -> SubtreeRow {
    let tree = g.tree();
    let bound = pointwise_bound(tree, s, sf.index_length());
    let in_s: BTreeSet<NodeId> = s.iter().copied().collect();
    let mut excluded = Vec::new();
    let mut captured = Vec::new();
    for (beta, &x) in tree.tops().iter().enumerate() {
        let f = &sf.functions()[beta];
        let e: Vec<usize> = (0..f.len()).filter(|&n| bound[n] >= f[n] as i64).collect();
        let witness = (0..f.len()).find(|&n| bound[n] < f[n] as i64);
        if sf.ideal().contains(&e) && witness.is_some_and(|n| n + 2 <= d) {
            excluded.push(beta);
        }
        if g.ladder(x)[..d].iter().all(|t| in_s.contains(t)) {
            captured.push(beta);
        }
    }
    SubtreeRow {
        nodes: s.iter().map(|&t| tree.key(t).to_string()).collect(),
        bound,
        excluded,
        captured,
    }
}

/// Checks the no-core argument for every (or a sample of) down-closed
/// subtree of at most `a` nodes in the scale tree of full depth.
pub fn certify_no_core(sf: &ScaleFamily, a: usize, d: usize, b_min: usize, mode: SubtreeMode) -> Result<NoCoreReport> {
    let axioms = verify_scale(sf, &[])?;
    if !axioms.increasing {
        let f = &axioms.order_failures[0];
        return Err(Error::invalid(format!(
            "the family is not increasing: f_{} vs f_{} has exceptional set {:?}",
            f.lower, f.upper, f.exceptional
        )));
    }
    let k = sf.index_length();
    if d == 0 || d > k + 1 {
        return Err(Error::invalid(format!("d must lie in 1..={}, got {d}", k + 1)));
    }
    if a < d {
        return Err(Error::invalid(format!("subtree budget {a} is below d = {d}")));
    }
    let g = build_scale_tree(sf, k)?;
    let (subtrees, exhaustive) = match mode {
        SubtreeMode::Exact => (down_closed_subtrees(g.tree(), a), true),
        SubtreeMode::Sampled { seed, samples } => (sampled_subtrees(g.tree(), a, seed, samples), false),
    };
    let rows: Vec<SubtreeRow> = subtrees.iter().map(|s| row(sf, &g, s, d)).collect();
    for r in &rows {
        if let Some(beta) = r.captured.iter().find(|b| r.excluded.contains(b)) {
            return Err(Error::Internal(format!(
                "f_{beta} is both excluded and captured by {:?}",
                r.nodes
            )));
        }
    }
    let n_tops = sf.functions().len();
    let max_captured = rows.iter().map(|r| r.captured.len()).max().unwrap_or(0);
    let max_unexcluded = rows.iter().map(|r| n_tops - r.excluded.len()).max().unwrap_or(0);
    let exceptions: BTreeSet<usize> = rows.iter().flat_map(|r| r.captured.iter().copied()).collect();
    let oracle = if n_tops > 0 && g.tree().finite_nodes().count() <= EXACT_LIMIT && n_tops <= EXACT_LIMIT {
        let bg = to_bipartite(&g, d)?;
        let attains = small_core_oracle(&bg, a, max_captured)?.is_some();
        let sharp = small_core_oracle(&bg, a, max_captured + 1)?.is_none();
        debug!("oracle check: attains={attains} sharp={sharp}");
        if !attains || (exhaustive && !sharp) {
            return Err(Error::Internal(format!(
                "oracle disagrees with the subtree scan (max captured {max_captured}, attains {attains}, sharp {sharp})"
            )));
        }
        Some(OracleCheck { attains, sharp })
    } else {
        None
    };
    Ok(NoCoreReport {
        subtree_budget: a,
        d,
        b_min,
        mode,
        subtrees: rows.len(),
        exhaustive,
        max_captured,
        max_unexcluded,
        exceptions: exceptions.into_iter().collect(),
        holds: max_captured < b_min,
        degenerate: n_tops <= 1,
        oracle,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipartite::scale::Ideal;
    use crate::bipartite::{small_core, CoreMode};

    fn chain() -> ScaleFamily {
        ScaleFamily::new(vec![3, 5], vec![vec![0, 0], vec![1, 1], vec![2, 2]], Ideal::trivial(2)).unwrap()
    }

    #[test]
    fn subtree_enumeration_counts() {
        // Each level-one child is absent or present with any subset of its
        // two leaves: 5 * 5 = 25.
        let t = crate::tree::build_regular_tree(&[2, 2], 2).unwrap();
        let all = down_closed_subtrees(&t, 7);
        assert_eq!(all.len(), 25);
        let distinct: BTreeSet<_> = all.iter().collect();
        assert_eq!(distinct.len(), 25);
        assert_eq!(down_closed_subtrees(&t, 2).len(), 3);
    }

    #[test]
    fn chain_has_no_two_top_core() {
        let r = certify_no_core(&chain(), 2, 2, 2, SubtreeMode::Exact).unwrap();
        assert!(r.holds);
        assert_eq!(r.max_captured, 1);
        assert_eq!(
            r.oracle,
            Some(OracleCheck {
                attains: true,
                sharp: true
            })
        );
    }

    #[test]
    fn three_function_family_small_core_none() {
        let g = build_scale_tree(&chain(), 2).unwrap();
        let b = to_bipartite(&g, 2).unwrap();
        assert!(small_core(&b, 2, 3, CoreMode::Exact).unwrap().core.is_none());
    }

    #[test]
    fn identical_functions_rejected() {
        let s = ScaleFamily::new(vec![3], vec![vec![1], vec![1]], Ideal::trivial(1)).unwrap();
        assert!(matches!(
            certify_no_core(&s, 2, 1, 2, SubtreeMode::Exact),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn single_function_is_an_exception() {
        let s = ScaleFamily::new(vec![3, 5], vec![vec![1, 2]], Ideal::trivial(2)).unwrap();
        let r = certify_no_core(&s, 3, 1, 1, SubtreeMode::Exact).unwrap();
        assert!(r.degenerate);
        assert!(!r.holds);
        assert_eq!(r.exceptions, vec![0]);
    }

    #[test]
    fn sampling_is_seeded() {
        let a = certify_no_core(&chain(), 3, 2, 2, SubtreeMode::Sampled { seed: 7, samples: 20 }).unwrap();
        let b = certify_no_core(&chain(), 3, 2, 2, SubtreeMode::Sampled { seed: 7, samples: 20 }).unwrap();
        assert_eq!(a, b);
        assert!(!a.exhaustive);
    }
}
