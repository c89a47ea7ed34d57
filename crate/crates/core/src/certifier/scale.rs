//! The scale obstruction on the inflation of a scale tree: for every small
//! down-closed set `R` of finite nodes, only boundedly many tops send `d`
//! edges into the rows of `R`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bipartite::certify::{certify_no_core, NoCoreReport, SubtreeMode};
use crate::bipartite::scale::{build_scale_tree, ScaleFamily};
use crate::certifier::search::{search_star, StarSearchConfig};
use crate::certifier::{Certificate, CertificateKind, Parameters, Verdict, Witness};
use crate::error::{Error, Result};
use crate::graph::{Ray, TruncatedGraph};
use crate::inflation::inflate;
use crate::ladder::SparseTGraph;
use crate::tree::NodeKey;

/// Largest inflation on which every subtree is cross-checked by a star search.
pub const SEARCH_VERTEX_LIMIT: usize = 160;
pub const SEARCH_SUBTREE_LIMIT: usize = 128;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeAudit {
    /// For each top, the number of its row's edges into the rows of `R`.
    pub edges_into: Vec<usize>,
    /// Outcome of the star search restricted to `R` and the top rows, when run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<CertificateKind>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleWitness {
    pub tops: usize,
    pub report: NoCoreReport,
    /// One entry per row of the report.
    pub audits: Vec<EdgeAudit>,
}

fn edges_into(h: &TruncatedGraph, top_row: &[usize], inside: &[bool]) -> usize {
    top_row
        .iter()
        .map(|&v| h.neighbors(v).iter().filter(|&&w| inside[w]).count())
        .sum()
}

fn rows_of(g: &SparseTGraph, h: &TruncatedGraph, keys: &[String]) -> Result<Vec<Vec<usize>>> {
    keys.iter()
        .map(|k| {
            let key = NodeKey::parse(k)?;
            let t = g
                .tree()
                .node_id(&key)
                .ok_or_else(|| Error::Internal(format!("subtree node {k} is missing")))?;
            Ok(h.row(g.tree().key(t)).unwrap_or(&[]).to_vec())
        })
        .collect()
}

/// Runs the no-core argument on the scale tree, then audits every subtree
/// against the inflation at `depth`: a top counts as captured exactly when
/// its row has at least `d` edges into the subtree's rows. On small
/// instances a star search with centres in the subtree and `captured + 1`
/// leaves must come back not-found.
pub fn certify_scale_obstruction(
    sf: &ScaleFamily,
    depth: usize,
    a: usize,
    d: usize,
    k: usize,
    mode: SubtreeMode,
) -> Result<Certificate> {
    if d == 0 || depth + 1 < d {
        return Err(Error::invalid(format!("depth {depth} cannot carry {d} ladder edges")));
    }
    let report = certify_no_core(sf, a, d, k, mode)?;
    let g = build_scale_tree(sf, sf.index_length())?;
    let h = inflate(&g, depth);
    let tree = g.tree();
    let top_rows: Vec<Vec<usize>> = tree
        .tops()
        .iter()
        .map(|&x| h.row(tree.key(x)).unwrap_or(&[]).to_vec())
        .collect();
    let run_search = h.vertex_count() <= SEARCH_VERTEX_LIMIT && report.rows.len() <= SEARCH_SUBTREE_LIMIT;
    let mut audits = Vec::new();
    for row in &report.rows {
        let rows = rows_of(&g, &h, &row.nodes)?;
        let mut inside = vec![false; h.vertex_count()];
        for v in rows.iter().flatten() {
            inside[*v] = true;
        }
        let counts: Vec<usize> = top_rows.iter().map(|r| edges_into(&h, r, &inside)).collect();
        let by_edges: Vec<usize> = (0..counts.len()).filter(|&b| counts[b] >= d).collect();
        if by_edges != row.captured {
            return Err(Error::Internal(format!(
                "edge audit of {:?} finds {by_edges:?} but the ladders give {:?}",
                row.nodes, row.captured
            )));
        }
        let search = if run_search && !top_rows.is_empty() {
            let mut rays: Vec<Ray> = rows.iter().map(|r| Ray::new(r.clone())).collect();
            let n_centres = rays.len();
            rays.extend(top_rows.iter().map(|r| Ray::new(r.clone())));
            let on_rays: BTreeSet<usize> = rays.iter().flat_map(|r| r.vertices.iter().copied()).collect();
            let mut cfg = StarSearchConfig::new(row.captured.len() + 1, d);
            cfg.centres = Some((0..n_centres).collect());
            cfg.leaves = Some((n_centres..rays.len()).collect());
            cfg.blocked = h.vertices().filter(|v| !on_rays.contains(v)).collect();
            let c = search_star(&h, &rays, &cfg)?;
            if c.kind == CertificateKind::StarFound {
                return Err(Error::Internal(format!(
                    "a star with {} leaves is centred in {:?}",
                    row.captured.len() + 1,
                    row.nodes
                )));
            }
            Some(c.kind)
        } else {
            None
        };
        audits.push(EdgeAudit {
            edges_into: counts,
            search,
        });
    }
    let verdict = if report.holds { Verdict::Pass } else { Verdict::Fail };
    let mut summary = format!(
        "{} subtrees of at most {a} nodes: at most {} tops have {d} ladder entries inside one (target {k})",
        report.rows.len(),
        report.max_captured
    );
    if report.degenerate {
        summary.push_str("; degenerate family with at most one top");
    }
    if !report.exhaustive {
        summary.push_str("; subtrees sampled, not exhausted");
    }
    Ok(Certificate::new(
        CertificateKind::ScaleObstruction,
        verdict,
        Parameters {
            depth: Some(depth),
            d: Some(d),
            k: Some(k),
            core_budget: Some(a),
            mode: Some(match mode {
                SubtreeMode::Exact => "exact".into(),
                SubtreeMode::Sampled { .. } => "sampled".into(),
            }),
            ..Parameters::default()
        },
        Witness::Scale(Box::new(ScaleWitness {
            tops: tree.tops().len(),
            report,
            audits,
        })),
        summary,
    ))
}
