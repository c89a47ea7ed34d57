//! Seeded instance generators for tests, benchmarks and the CLI.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bipartite::scale::{dominance, verify_scale, Ideal, ScaleFamily};
use crate::error::Result;
use crate::graph::{TruncatedGraph, VertexId};
use crate::ladder::{attachment_sets, select_ladders_by, SparseTGraph};
use crate::tree::{NodeId, OrderTree};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A tree of the given height in which every node below the top level has
/// between one and `max_branching` children.
pub fn random_tree(rng: &mut impl Rng, height: usize, max_branching: usize) -> Result<OrderTree> {
    let mut keys = Vec::new();
    let mut level: Vec<Vec<u32>> = vec![Vec::new()];
    for _ in 0..height {
        let mut next = Vec::new();
        for k in &level {
            for c in 0..rng.gen_range(1..=max_branching.max(1)) {
                let mut child = k.clone();
                child.push(c as u32);
                next.push(child);
            }
        }
        keys.extend(next.iter().cloned());
        level = next;
    }
    OrderTree::from_finite_keys(keys)
}

/// Tops above up to `max_tops` distinct random leaves.
pub fn random_tops(rng: &mut impl Rng, tree: &OrderTree, max_tops: usize) -> Result<OrderTree> {
    let mut leaves: Vec<Vec<u32>> = tree.leaves().map(|t| tree.key(t).seq().to_vec()).collect();
    leaves.shuffle(rng);
    let n = rng.gen_range(0..=max_tops.min(leaves.len()));
    let mut chosen = leaves[..n].to_vec();
    chosen.sort();
    tree.attach_tops(&chosen)
}

/// A partition of the finite nodes into antichains: nodes are visited in
/// random order and join a random antichain they are incomparable with, or
/// start a new one.
pub fn random_antichains(rng: &mut impl Rng, tree: &OrderTree) -> Vec<Vec<NodeId>> {
    let mut nodes: Vec<NodeId> = tree.finite_nodes().collect();
    nodes.shuffle(rng);
    let mut parts: Vec<Vec<NodeId>> = Vec::new();
    for t in nodes {
        let fits: Vec<usize> = (0..parts.len())
            .filter(|&i| parts[i].iter().all(|&x| !tree.comparable(x, t)))
            .collect();
        match fits.choose(rng) {
            Some(&i) if rng.gen_bool(0.7) => parts[i].push(t),
            _ => parts.push(vec![t]),
        }
    }
    for p in &mut parts {
        p.sort_unstable();
    }
    parts
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderKind {
    Branch,
    Antichain,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusInstance {
    pub index: usize,
    pub height: usize,
    pub ladders: LadderKind,
    pub graph: SparseTGraph,
}

/// `count` sparse T-graphs with heights `0..=4`, branching at most 3 and at
/// most 10 tops; heights and ladder kinds cycle, the rest is random.
pub fn corpus(seed: u64, count: usize) -> Result<Vec<CorpusInstance>> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let height = index % 5;
        let tree = random_tree(&mut r, height, 3)?;
        let tree = random_tops(&mut r, &tree, 10)?;
        let ladders = if index % 2 == 0 {
            LadderKind::Branch
        } else {
            LadderKind::Antichain
        };
        let graph = match ladders {
            LadderKind::Branch => SparseTGraph::branch_following(tree),
            LadderKind::Antichain => {
                let parts = random_antichains(&mut r, &tree);
                select_ladders_by(tree, &parts)?
            }
        };
        out.push(CorpusInstance {
            index,
            height,
            ladders,
            graph,
        });
    }
    Ok(out)
}

/// Erdős–Rényi graph on `n` vertices.
pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64) -> TruncatedGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    TruncatedGraph::from_edges(n, &edges).expect("generated edges are simple")
}

/// Two disjoint non-empty random vertex sets of a graph with at least two vertices.
pub fn random_terminals(rng: &mut impl Rng, n: usize) -> (Vec<VertexId>, Vec<VertexId>) {
    let mut vs: Vec<VertexId> = (0..n).collect();
    vs.shuffle(rng);
    let a = rng.gen_range(1..=(n / 3).max(1));
    let b = rng.gen_range(1..=(n / 3).max(1)).min(n - a);
    let mut s = vs[..a].to_vec();
    let mut t = vs[a..a + b].to_vec();
    s.sort_unstable();
    t.sort_unstable();
    (s, t)
}

/// Antichain-laddered trees whose attachment sets have at most `max_s`
/// members, at least one reaching it, and whose inflation at `depth` has at
/// most `max_vertices` vertices. Heights are `min_height` or one more.
pub fn antichain_surrogates(
    seed: u64,
    count: usize,
    min_height: usize,
    depth: usize,
    max_vertices: usize,
    max_s: usize,
) -> Result<Vec<SparseTGraph>> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        assert!(attempts < 100_000, "no surrogate found within the attempt cap");
        let height = r.gen_range(min_height..=min_height + 1);
        let tree = random_tree(&mut r, height, 2)?;
        let tree = random_tops(&mut r, &tree, 3)?;
        if tree.tops().is_empty() || tree.len() * (depth + 1) > max_vertices {
            continue;
        }
        let parts = random_antichains(&mut r, &tree);
        let g = select_ladders_by(tree, &parts)?;
        let s = attachment_sets(&g).max_size();
        if s == max_s {
            out.push(g);
        }
    }
    Ok(out)
}

/// Small increasing families modulo random ideals, sized for the oracle.
pub fn scale_families(seed: u64, count: usize) -> Result<Vec<ScaleFamily>> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let k = r.gen_range(1..=3usize);
        let mut bounds = Vec::new();
        let mut b = 0u64;
        for _ in 0..k {
            b += r.gen_range(1..=3);
            bounds.push(b + 1);
        }
        let ideal = if k > 1 && r.gen_bool(0.5) {
            Ideal::new(k, &[vec![], vec![0]])?
        } else {
            Ideal::trivial(k)
        };
        let mut candidates: Vec<Vec<u64>> = Vec::new();
        for _ in 0..40 {
            candidates.push(bounds.iter().map(|&x| r.gen_range(0..x)).collect());
        }
        candidates.sort_by_key(|f| (f.iter().sum::<u64>(), f.clone()));
        candidates.dedup();
        let target = r.gen_range(2..=5);
        let mut chain: Vec<Vec<u64>> = Vec::new();
        for f in candidates {
            if chain.len() == target {
                break;
            }
            let above_all = chain
                .iter()
                .map(|g| dominance(g, &f, &ideal))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .all(|x| x);
            if above_all {
                chain.push(f);
            }
        }
        if chain.len() < 2 {
            continue;
        }
        let s = ScaleFamily::new(bounds, chain, ideal)?;
        if verify_scale(&s, &[])?.increasing {
            out.push(s);
        }
    }
    Ok(out)
}
