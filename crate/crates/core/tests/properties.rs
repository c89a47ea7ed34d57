use std::collections::BTreeSet;

use endgrid_core::bipartite::scale::{dominance, exceptional_set, Ideal};
use endgrid_core::bipartite::{small_core, small_core_oracle, validate_core, BipartiteLK, CoreMode};
use endgrid_core::ends::combs::greedy_core;
use endgrid_core::ends::paths::{disjoint_paths, verify_packing};
use endgrid_core::ends::surrogate::all_rows;
use endgrid_core::generate::{corpus, random_graph, random_terminals, rng, scale_families};
use endgrid_core::inflation::{cell_id, inflate, predicted_counts};
use endgrid_core::io::{emit_graph, emit_sparse, parse_graph, parse_sparse};
use proptest::prelude::*;

fn function(k: usize) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0u64..6, k)
}

fn bipartite() -> impl Strategy<Value = BipartiteLK> {
    (2usize..=6).prop_flat_map(|na| {
        let set = prop::collection::btree_set(0..na, 2..=na.min(4));
        prop::collection::vec(set, 0..=6).prop_map(move |sets| {
            let nbrs: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
            BipartiteLK::new(
                (0..na).map(|i| format!("a{i}")).collect(),
                (0..nbrs.len()).map(|i| format!("b{i}")).collect(),
                nbrs,
                2,
            )
            .unwrap()
        })
    })
}

proptest! {
    #[test]
    fn dominance_is_irreflexive(
        (f, g) in (2usize..6).prop_flat_map(|k| (function(k), function(k))),
        s in 0usize..4,
    ) {
        let k = f.len();
        let ideal = Ideal::bounded(k, s.min(k - 1)).unwrap();
        prop_assert!(!dominance(&f, &f, &ideal).unwrap());
        // Exceptional sets in both directions cover every coordinate, so a
        // union-closed proper ideal cannot hold both.
        for ideal in [Ideal::trivial(k), Ideal::new(k, &[vec![], vec![0]]).unwrap()] {
            prop_assert!(!(dominance(&f, &g, &ideal).unwrap() && dominance(&g, &f, &ideal).unwrap()));
        }
    }

    #[test]
    fn exceptional_sets_cover_every_coordinate((f, g) in (1usize..6).prop_flat_map(|k| (function(k), function(k)))) {
        let mut both: BTreeSet<usize> = exceptional_set(&f, &g).unwrap().into_iter().collect();
        both.extend(exceptional_set(&g, &f).unwrap());
        prop_assert_eq!(both.len(), f.len());
    }

    #[test]
    fn exact_small_core_matches_oracle(g in bipartite(), a in 2usize..=6, b_min in 0usize..=7) {
        let exact = small_core(&g, a, b_min, CoreMode::Exact).unwrap().core;
        let oracle = small_core_oracle(&g, a, b_min).unwrap();
        prop_assert_eq!(exact.is_some(), oracle.is_some());
        if let Some(c) = exact {
            prop_assert!(validate_core(&g, a, b_min, &c).is_ok());
        }
    }

    #[test]
    fn greedy_core_never_claims_more_than_exact(g in bipartite(), a in 2usize..=6, b_min in 0usize..=7) {
        let greedy = small_core(&g, a, b_min, CoreMode::Greedy).unwrap().core;
        if let Some(c) = greedy {
            prop_assert!(validate_core(&g, a, b_min, &c).is_ok());
            prop_assert!(small_core_oracle(&g, a, b_min).unwrap().is_some());
        }
    }

    #[test]
    fn packings_carry_a_matching_cut(seed in any::<u64>(), n in 2usize..40, p in 0.02f64..0.3) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, p);
        let (s, t) = random_terminals(&mut r, n);
        let pk = disjoint_paths(&g, &s, &t, n).unwrap();
        prop_assert!(verify_packing(&g, &s, &t, &BTreeSet::new(), &pk).is_ok());
        prop_assert_eq!(pk.cut.as_ref().map(Vec::len), Some(pk.count()));
    }

    #[test]
    fn graphs_round_trip(seed in any::<u64>(), n in 0usize..30) {
        let g = random_graph(&mut rng(seed), n, 0.2);
        let text = emit_graph(&g).unwrap();
        let back = parse_graph(&text).unwrap();
        prop_assert_eq!(emit_graph(&back).unwrap(), text);
        prop_assert_eq!(back.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
    }
}

#[test]
fn generated_families_are_ordered_by_index() {
    for s in scale_families(11, 20).unwrap() {
        let fs = s.functions();
        for (i, f) in fs.iter().enumerate() {
            for (j, g) in fs.iter().enumerate() {
                assert_eq!(dominance(f, g, s.ideal()).unwrap(), i < j);
            }
        }
    }
}

fn instances() -> Vec<endgrid_core::generate::CorpusInstance> {
    corpus(7, 15).unwrap()
}

#[test]
fn sparse_graphs_and_inflations_round_trip() {
    for c in instances() {
        let text = emit_sparse(&c.graph).unwrap();
        let back = parse_sparse(&text).unwrap();
        assert_eq!(back, c.graph);
        let h = inflate(&c.graph, 3);
        let h2 = parse_graph(&emit_graph(&h).unwrap()).unwrap();
        assert_eq!(emit_graph(&h2).unwrap(), emit_graph(&h).unwrap());
    }
}

/// Each truncation sits inside the next one as the cells of depth at most `d`.
#[test]
fn truncations_are_nested() {
    for c in instances() {
        let tree = c.graph.tree();
        for d in 0..5 {
            let small = inflate(&c.graph, d);
            let big = inflate(&c.graph, d + 1);
            let embed = |v: usize| cell_id(v / (d + 1), v % (d + 1), d + 1);
            for (u, v) in small.edges() {
                assert!(big.has_edge(embed(u), embed(v)), "instance {} depth {d}", c.index);
            }
            let extra = big
                .edges()
                .filter(|&(u, v)| big.depth(u) <= d && big.depth(v) <= d)
                .count();
            assert_eq!(extra, small.edge_count());
            assert!(predicted_counts(&c.graph, d).0 < predicted_counts(&c.graph, d + 1).0 || tree.is_empty());
        }
    }
}

#[test]
fn greedy_rounds_grow_the_core() {
    for c in instances() {
        let h = inflate(&c.graph, 4);
        let rays = all_rows(&c.graph, &h).unwrap();
        let gc = greedy_core(&h, &rays, 1, 12).unwrap();
        assert!(gc.stabilized);
        assert!(gc.rounds.windows(2).all(|w| w[0].core_size < w[1].core_size));
        assert_eq!(gc.core.len(), gc.core_set().len());
        let last = gc.rounds.last().unwrap();
        assert!(last.combs == 0 || gc.combs.len() == rays.len() - 1);
    }
}
