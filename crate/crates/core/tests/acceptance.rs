//! Acceptance run: one line per criterion, non-zero exit on any failure.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use endgrid_core::bipartite::certify::{certify_no_core, SubtreeMode};
use endgrid_core::bipartite::scale::{build_scale_tree, exceptional_set, to_bipartite, Ideal, ScaleFamily};
use endgrid_core::bipartite::{small_core, small_core_oracle, validate_core, BipartiteLK, CoreMode};
use endgrid_core::certifier::attachment::revalidate_attachment;
use endgrid_core::certifier::{
    affirmative_pipeline, certify_attachment_bound, search_star, verify_refutation, CertificateKind, PathDiscipline,
    StarSearchConfig, Witness,
};
use endgrid_core::ends::combs::greedy_core;
use endgrid_core::ends::paths::{disjoint_paths, verify_packing};
use endgrid_core::ends::star::validate_star;
use endgrid_core::ends::surrogate::{
    all_rows, star_ray_product, DepthSchedule, EndSurrogate, GeneratorSpec, Linkage, RayKey,
};
use endgrid_core::generate::{
    antichain_surrogates, corpus, random_graph, random_terminals, rng, scale_families, CorpusInstance,
};
use endgrid_core::graph::{Ray, VertexId};
use endgrid_core::inflation::{
    check_doublestar_property, components_above, inflate, inflate_counted, lift_with_stars, predicted_counts,
};
use endgrid_core::ladder::{attachment_sets, SparseTGraph};
use endgrid_core::tree::{Height, Level};
use rand::Rng;

const SEED: u64 = 20_240_917;

struct Outcome {
    ok: bool,
    detail: String,
    /// Serialized results; must be identical across runs.
    artifact: String,
}

fn outcome(ok: bool, detail: String, artifact: String) -> Outcome {
    Outcome { ok, detail, artifact }
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

fn instances() -> Vec<CorpusInstance> {
    corpus(SEED, 25).expect("corpus")
}

fn inflation_counting() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    let mut counts = Vec::new();
    for c in instances() {
        for depth in 0..=6 {
            let (h, counted) = inflate_counted(&c.graph, depth);
            let (vertices, rules) = predicted_counts(&c.graph, depth);
            checked += 1;
            if h.vertex_count() != vertices || h.edge_count() != rules.total() || counted != rules {
                bad.push((c.index, depth));
            }
            counts.push((h.vertex_count(), h.edge_count()));
        }
    }
    outcome(
        bad.is_empty(),
        format!("{checked} (instance, depth) pairs, mismatches {bad:?}"),
        json(&counts),
    )
}

fn component_bijection() -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut sizes = Vec::new();
    for c in instances() {
        let tree = c.graph.tree();
        for depth in 0..=6 {
            let h = inflate(&c.graph, depth);
            for i in 0..=tree.finite_height().min(depth) {
                checked += 1;
                match components_above(&c.graph, &h, Level::Finite(i)) {
                    Ok(comps) if comps.len() == tree.level(i).len() => sizes.push(comps.len()),
                    Ok(comps) => failures.push(format!("{}@{depth}/{i}: {} components", c.index, comps.len())),
                    Err(e) => failures.push(format!("{}@{depth}/{i}: {e}", c.index)),
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{checked} (instance, depth, level) triples, failures {failures:?}"),
        json(&sizes),
    )
}

/// Rows of tops whose ladders have fewer than `k` entries are joined to the
/// rest by fewer than `k` edges at every depth, so they are checked for the
/// matching separation instead of linkage.
fn one_endedness() -> Outcome {
    let k = 3;
    let mut linked = 0;
    let mut separated = 0;
    let mut failures = Vec::new();
    let mut depths = Vec::new();
    for c in instances() {
        let g = &c.graph;
        let tree = g.tree();
        let e = EndSurrogate::new(
            GeneratorSpec::Inflation {
                tree: Box::new(g.clone()),
            },
            DepthSchedule::up_to(8),
        );
        let nodes: Vec<usize> = tree.node_ids().collect();
        let short = |t: usize| tree.is_top(t) && g.ladder(t).len() < k;
        for (i, &a) in nodes.iter().enumerate() {
            for &b in &nodes[i + 1..] {
                let r1 = RayKey::row(tree.key(a).clone());
                let r2 = RayKey::row(tree.key(b).clone());
                let res = e.equivalence_check(&r1, &r2, k).expect("rows exist");
                let limit = [a, b].iter().filter(|&&t| short(t)).map(|&t| g.ladder(t).len()).min();
                match (res, limit) {
                    (Linkage::Linked { depth, .. }, None) => {
                        linked += 1;
                        depths.push(depth);
                    }
                    (Linkage::NotFound { best, .. }, Some(l)) if best <= l => separated += 1,
                    (other, _) => failures.push(format!("{}: {} ~ {}: {other:?}", c.index, tree.key(a), tree.key(b))),
                }
            }
        }
    }
    let max_depth = depths.iter().max().copied().unwrap_or(0);
    outcome(
        failures.is_empty(),
        format!(
            "{linked} row pairs linked by {k} paths by depth {max_depth}; {separated} pairs with a top ladder shorter than {k} cut accordingly; failures {failures:?}"
        ),
        json(&depths),
    )
}

fn doublestar() -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for c in instances() {
        let s = attachment_sets(&c.graph);
        for depth in 0..=6 {
            let h = inflate(&c.graph, depth);
            let report = check_doublestar_property(&c.graph, &h, &s).expect("provenance");
            checked += 1;
            if let Some(e) = report.iter().find(|e| !e.passed) {
                failures.push(format!("{}@{depth}: {}", c.index, e.node));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{checked} (instance, depth) pairs, failures {failures:?}"),
        String::new(),
    )
}

/// Rows of nodes below `sigma` as centres, rows above it as leaves, level
/// `sigma` removed.
fn restricted_search(g: &SparseTGraph, depth: usize, sigma: usize, k: usize) -> (Vec<Ray>, StarSearchConfig) {
    let h = inflate(g, depth);
    let tree = g.tree();
    let mut rays = Vec::new();
    let mut centres = Vec::new();
    let mut leaves = Vec::new();
    let mut blocked = BTreeSet::new();
    for t in tree.node_ids() {
        let row = h.row(tree.key(t)).unwrap().to_vec();
        match tree.height(t) {
            Height::Finite(x) if x == sigma => blocked.extend(row),
            Height::Finite(x) if x < sigma => {
                centres.push(rays.len());
                rays.push(Ray::new(row));
            }
            _ => {
                leaves.push(rays.len());
                rays.push(Ray::new(row));
            }
        }
    }
    let mut cfg = StarSearchConfig::new(k, 1);
    cfg.discipline = PathDiscipline::Disjoint;
    cfg.centres = Some(centres);
    cfg.leaves = Some(leaves);
    cfg.blocked = blocked;
    (rays, cfg)
}

fn attachment_obstruction() -> Outcome {
    let depth = 3;
    let graphs = antichain_surrogates(SEED, 20, 3, depth, 40, 2).expect("surrogates");
    let mut agree = 0;
    let mut failures = Vec::new();
    let mut certs = Vec::new();
    for (i, g) in graphs.iter().enumerate() {
        let h = inflate(g, depth);
        let sigma = g.tree().finite_height() / 2;
        let s = attachment_sets(g);
        let cert = certify_attachment_bound(g, &h, &s, sigma).expect("attachment certificate");
        let Witness::Attachment(w) = &cert.witness else {
            unreachable!()
        };
        revalidate_attachment(g, &h, w).expect("flows revalidate");
        let bounded = w.nodes.iter().all(|n| n.components.iter().all(|c| c.flow <= 4));
        let k = w.budget + 1;
        let (rays, cfg) = restricted_search(g, depth, sigma, k);
        let search = search_star(&h, &rays, &cfg).expect("search");
        let refuted = match &search.witness {
            Witness::Exhaustion { centres } => centres.iter().all(|r| verify_refutation(&h, &rays, r, &cfg).is_ok()),
            _ => false,
        };
        if cert.passed() && bounded && search.kind == CertificateKind::StarNotFound && refuted && h.vertex_count() <= 40
        {
            agree += 1;
        } else {
            failures.push(format!("{i}: {} / {}", cert.summary, search.summary));
        }
        certs.push(json(&cert));
        certs.push(json(&search));
    }
    outcome(
        graphs.len() >= 20 && agree == graphs.len(),
        format!("{agree}/{} instances agree, failures {failures:?}", graphs.len()),
        certs.join("\n"),
    )
}

fn core_assembly() -> Outcome {
    let mut failures = Vec::new();
    let mut slowest = Duration::ZERO;
    let mut certs = Vec::new();
    for s in 3..=8 {
        let start = Instant::now();
        let g = star_ray_product(s).expect("product");
        let keys: Vec<RayKey> = g
            .tree()
            .node_ids()
            .map(|t| RayKey::row(g.tree().key(t).clone()))
            .collect();
        let e = EndSurrogate::new(
            GeneratorSpec::Inflation { tree: Box::new(g) },
            DepthSchedule::new(vec![10]).unwrap(),
        );
        let cert = affirmative_pipeline(&e, &keys, 3, 11, s).expect("pipeline");
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        let h = e.generator.truncate(10).unwrap();
        let good = match &cert.witness {
            Witness::Pipeline(t) => t
                .star
                .as_ref()
                .is_some_and(|st| st.leaf_count() == s && validate_star(&h, st, 3).is_ok()),
            _ => false,
        };
        if !good || elapsed >= Duration::from_secs(5) {
            failures.push(format!("s={s}: {}", cert.summary));
        }
        certs.push(json(&cert));
    }
    outcome(
        failures.is_empty(),
        format!(
            "s = 3..8, slowest {:.3} s, failures {failures:?}",
            slowest.as_secs_f64()
        ),
        certs.join("\n"),
    )
}

fn greedy_core_growth() -> Outcome {
    let mut failures = Vec::new();
    let mut traces = Vec::new();
    for c in instances() {
        let h = inflate(&c.graph, 4);
        let rays = all_rows(&c.graph, &h).expect("rows");
        for m in [1, 2] {
            let gc = greedy_core(&h, &rays, m, 10).expect("greedy core");
            let growing = gc.rounds.windows(2).all(|w| w[0].core_size < w[1].core_size);
            if !growing || !gc.stabilized {
                failures.push(format!("{} m={m}: rounds {:?}", c.index, gc.rounds));
            }
            if m == 1 && c.height <= 2 {
                let packed: BTreeSet<usize> = gc.combs.iter().map(|p| p.candidate).collect();
                let all: BTreeSet<usize> = (1..rays.len()).collect();
                let used_rounds = gc.rounds.iter().filter(|r| r.combs > 0).count();
                if packed != all || used_rounds > 3 {
                    failures.push(format!(
                        "{}: packed {}/{} in {used_rounds} rounds",
                        c.index,
                        packed.len(),
                        all.len()
                    ));
                }
            }
            traces.push(json(&gc.rounds));
        }
    }
    outcome(
        failures.is_empty(),
        format!("25 instances, m in {{1, 2}}, failures {failures:?}"),
        traces.join("\n"),
    )
}

fn menger() -> Outcome {
    let mut r = rng(SEED);
    let mut failures = Vec::new();
    let mut counts = Vec::new();
    for i in 0..100 {
        let n = r.gen_range(2..=60);
        let p = r.gen_range(0.02..0.25);
        let g = random_graph(&mut r, n, p);
        let (s, t) = random_terminals(&mut r, n);
        let pk = disjoint_paths(&g, &s, &t, n + 1).expect("packing");
        let cut_ok = pk.cut.as_ref().is_some_and(|c| c.len() == pk.count());
        if !cut_ok || verify_packing(&g, &s, &t, &BTreeSet::new(), &pk).is_err() {
            failures.push(i);
        }
        counts.push(pk.count());
    }
    outcome(
        failures.is_empty(),
        format!("100 graphs, path count = cut size and cut separates; failures {failures:?}"),
        json(&counts),
    )
}

/// Every subset of side A with at least two members while A is small, pairs
/// beyond that.
fn neighbour_sets(na: usize) -> Vec<Vec<usize>> {
    if na <= 4 {
        (1u32..1 << na)
            .filter(|mask| mask.count_ones() >= 2)
            .map(|mask| (0..na).filter(|&i| mask >> i & 1 == 1).collect())
            .collect()
    } else {
        (0..na).flat_map(|x| (x + 1..na).map(move |y| vec![x, y])).collect()
    }
}

/// Multisets of `size` indices below `n`, as non-decreasing lists.
fn multisets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(n: usize, size: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in from..n {
            cur.push(i);
            rec(n, size, i, cur, out);
            cur.pop();
        }
    }
    rec(n, size, 0, &mut cur, &mut out);
    out
}

fn small_core_equivalence() -> Outcome {
    let mut instances = 0u64;
    let mut queries = 0u64;
    let mut disagreements = Vec::new();
    for na in 2..=6usize {
        let pairs = neighbour_sets(na);
        let side_a: Vec<String> = (0..na).map(|i| format!("a{i}")).collect();
        for nb in 0..=6 {
            for ms in multisets(pairs.len(), nb) {
                instances += 1;
                let nbrs: Vec<Vec<usize>> = ms.iter().map(|&i| pairs[i].clone()).collect();
                let side_b = (0..nb).map(|i| format!("b{i}")).collect();
                let g = BipartiteLK::new(side_a.clone(), side_b, nbrs, 2).expect("valid instance");
                for a in 2..=na {
                    for b_min in 0..=nb + 1 {
                        queries += 1;
                        let exact = small_core(&g, a, b_min, CoreMode::Exact).expect("exact").core;
                        let oracle = small_core_oracle(&g, a, b_min).expect("oracle");
                        let valid = exact.as_ref().is_none_or(|c| validate_core(&g, a, b_min, c).is_ok())
                            && oracle.as_ref().is_none_or(|c| validate_core(&g, a, b_min, c).is_ok());
                        if exact.is_some() != oracle.is_some() || !valid {
                            disagreements.push((na, ms.clone(), a, b_min));
                        }
                    }
                }
            }
        }
    }
    outcome(
        disagreements.is_empty(),
        format!(
            "{instances} instances, {queries} queries, disagreements {}",
            disagreements.len()
        ),
        format!("{instances} {queries}"),
    )
}

fn scale_mechanics() -> Outcome {
    let mut failures = Vec::new();
    let fams = scale_families(SEED, 12).expect("families");
    let mut checks = 0;
    let mut reports = Vec::new();
    for (i, s) in fams.iter().enumerate() {
        for d in 1..=2.min(s.index_length() + 1) {
            for a in d..=d + 2 {
                let rep = certify_no_core(s, a, d, 2, SubtreeMode::Exact).expect("certificate");
                let g = build_scale_tree(s, s.index_length()).unwrap();
                let bg = to_bipartite(&g, d).unwrap();
                let oracle_core = small_core_oracle(&bg, a, 2).expect("oracle-sized");
                checks += 1;
                if rep.holds != oracle_core.is_none() || rep.oracle.is_none() {
                    failures.push(format!("family {i}, d={d}, a={a}"));
                }
                reports.push(json(&rep));
            }
        }
    }
    let worked = ScaleFamily::new(
        vec![3, 5],
        vec![vec![0, 0], vec![2, 1], vec![1, 2]],
        Ideal::new(2, &[vec![], vec![0]]).unwrap(),
    );
    let e1 = exceptional_set(&[2, 1], &[1, 2]).unwrap();
    let e2 = exceptional_set(&[2, 1], &[0, 0]).unwrap();
    let e3 = exceptional_set(&[0, 0], &[2, 1]).unwrap();
    let worked_ok = worked.is_ok() && e1 == vec![0] && e2 == vec![0, 1] && e3.is_empty();
    if !worked_ok {
        failures.push(format!("worked example gave {e1:?}, {e2:?}, {e3:?}"));
    }
    outcome(
        fams.len() >= 10 && failures.is_empty(),
        format!(
            "{} families, {checks} verdicts checked against the oracle; exceptional sets {e1:?}, {e2:?}, {e3:?}; failures {failures:?}",
            fams.len()
        ),
        reports.join("\n"),
    )
}

fn lifting() -> Outcome {
    let mut r = rng(SEED ^ 0x5eed);
    let mut failures = Vec::new();
    let mut counts = Vec::new();
    let bases = instances();
    for c in bases.iter().take(10) {
        let h = inflate(&c.graph, 4);
        let rays = all_rows(&c.graph, &h).expect("rows");
        let sizes: Vec<usize> = rays.iter().map(|_| r.gen_range(1..=3)).collect();
        let (lifted, _) = lift_with_stars(&h, &rays, &sizes).expect("lift");
        let expected = rays.len() + sizes.iter().sum::<usize>();
        let starts: Vec<VertexId> = lifted.vertices().filter(|&v| lifted.depth(v) == 0).collect();
        let ends = lifted.frontier();
        let pk = disjoint_paths(&lifted, &starts, &ends, expected + 1).expect("packing");
        let ok = pk.count() == expected && verify_packing(&lifted, &starts, &ends, &BTreeSet::new(), &pk).is_ok();
        if !ok {
            failures.push(format!("{}: {} vs {expected}", c.index, pk.count()));
        }
        counts.push((pk.count(), expected));
    }
    outcome(
        failures.is_empty(),
        format!("10 bases, failures {failures:?}"),
        json(&counts),
    )
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("inflation counting", inflation_counting, Duration::from_secs(5)),
        ("component bijection", component_bijection, Duration::from_secs(10)),
        ("one-endedness", one_endedness, Duration::from_secs(60)),
        ("attachment containment", doublestar, Duration::MAX),
        ("attachment obstruction", attachment_obstruction, Duration::MAX),
        ("countable-core assembly", core_assembly, Duration::MAX),
        ("greedy core", greedy_core_growth, Duration::MAX),
        ("menger certification", menger, Duration::MAX),
        (
            "small-core oracle equivalence",
            small_core_equivalence,
            Duration::from_secs(120),
        ),
        ("scale mechanics", scale_mechanics, Duration::MAX),
        ("lifting accounting", lifting, Duration::MAX),
    ];
    let mut all_ok = true;
    let mut artifacts = Vec::new();
    for (name, run, limit) in &criteria {
        let start = Instant::now();
        let o = run();
        let t = start.elapsed();
        let ok = o.ok && t < *limit;
        all_ok &= ok;
        println!(
            "{} {name}: {} ({:.2} s)",
            if ok { "PASS" } else { "FAIL" },
            o.detail,
            t.as_secs_f64()
        );
        artifacts.push(o.artifact);
    }
    let start = Instant::now();
    let differing: Vec<&str> = criteria
        .iter()
        .zip(&artifacts)
        .filter(|((_, run, _), first)| run().artifact != **first)
        .map(|((name, _, _), _)| *name)
        .collect();
    let ok = differing.is_empty();
    all_ok &= ok;
    println!(
        "{} determinism: all {} criteria re-run with the same seed, differing artifacts {differing:?} ({:.2} s)",
        if ok { "PASS" } else { "FAIL" },
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if !all_ok {
        std::process::exit(1);
    }
}
