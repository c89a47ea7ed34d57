//! Bounded search for a star of rays among given candidate rays.
//!
//! Each centre is first tested against a flow relaxation: a leaf needs `m`
//! disjoint paths to the centre on its own, and `k` leaves need `k * m`
//! paths through the network in which every leaf is a capacity-`m` source.
//! A centre failing either test is refuted with a cut. Centres that survive
//! go to a backtracking construction over the leaves.

use std::collections::BTreeSet;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::certifier::{Certificate, CertificateKind, Parameters, Verdict, Witness};
use crate::ends::normal::normal_tree;
use crate::ends::paths::disjoint_paths_avoiding;
use crate::ends::star::{validate_star, StarOfRays};
use crate::error::{Error, Result};
use crate::flow::{FlowNetwork, INF};
use crate::graph::{check_disjoint_rays, mask, Ray, TruncatedGraph, VertexId};

/// How the paths of different leaves may meet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathDiscipline {
    /// Families meet only on the centre.
    Independent,
    /// All paths are pairwise disjoint, endpoints on the centre included.
    Disjoint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarSearchConfig {
    pub k: usize,
    pub m: usize,
    pub discipline: PathDiscipline,
    /// Path-family computations allowed in the construction phase.
    pub budget: usize,
    /// Indices of rays allowed as centre; all when absent.
    pub centres: Option<Vec<usize>>,
    /// Indices of rays allowed as leaves; all when absent.
    pub leaves: Option<Vec<usize>>,
    /// Vertices no path may use.
    pub blocked: BTreeSet<VertexId>,
    /// Extra centres taken from frontier branches of a depth-first tree
    /// rooted at the first ray.
    pub branch_centres: usize,
}

impl StarSearchConfig {
    pub fn new(k: usize, m: usize) -> Self {
        StarSearchConfig {
            k,
            m,
            discipline: PathDiscipline::Independent,
            budget: 10_000,
            centres: None,
            leaves: None,
            blocked: BTreeSet::new(),
            branch_centres: 0,
        }
    }
}

/// A vertex cut, possibly together with whole leaves whose source capacity
/// is saturated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowCut {
    pub flow: usize,
    pub vertices: Vec<VertexId>,
    pub leaves: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafRefutation {
    pub leaf: usize,
    pub cut: FlowCut,
}

/// Why no star with this centre exists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CentreRefutation {
    pub centre: Ray,
    /// Candidates meeting the centre or the blocked set.
    pub incompatible: Vec<usize>,
    /// Candidates with fewer than `m` paths to the centre on their own.
    pub weak: Vec<LeafRefutation>,
    pub viable: Vec<usize>,
    /// Present when the viable leaves were tested jointly.
    pub joint: Option<FlowCut>,
}

struct Relaxed {
    net: FlowNetwork,
    s: usize,
    t: usize,
    hubs: Vec<usize>,
}

fn relaxed_network(
    h: &TruncatedGraph,
    centre: &BTreeSet<VertexId>,
    leaves: &[&Ray],
    m: usize,
    disc: PathDiscipline,
    blocked: &[bool],
) -> Relaxed {
    let n = h.vertex_count();
    let (s, t) = (2 * n, 2 * n + 1);
    let mut net = FlowNetwork::new(2 * n + 2 + leaves.len());
    for v in h.vertices() {
        if blocked[v] {
            continue;
        }
        if centre.contains(&v) {
            match disc {
                PathDiscipline::Independent => {
                    net.add_arc(2 * v, t, INF);
                }
                PathDiscipline::Disjoint => {
                    net.add_arc(2 * v, 2 * v + 1, 1);
                    net.add_arc(2 * v + 1, t, INF);
                }
            }
            continue;
        }
        net.add_arc(2 * v, 2 * v + 1, 1);
        for &w in h.neighbors(v) {
            if !blocked[w] {
                net.add_arc(2 * v + 1, 2 * w, INF);
            }
        }
    }
    let mut hubs = Vec::new();
    for (j, leaf) in leaves.iter().enumerate() {
        let hub = 2 * n + 2 + j;
        net.add_arc(s, hub, m as i64);
        for &v in &leaf.vertices {
            if !blocked[v] {
                net.add_arc(hub, 2 * v, INF);
            }
        }
        hubs.push(hub);
    }
    Relaxed { net, s, t, hubs }
}

fn relaxed_cut(
    h: &TruncatedGraph,
    centre: &BTreeSet<VertexId>,
    leaves: &[(usize, &Ray)],
    cfg: &StarSearchConfig,
    blocked: &[bool],
    limit: usize,
) -> FlowCut {
    let rays: Vec<&Ray> = leaves.iter().map(|&(_, r)| r).collect();
    let mut r = relaxed_network(h, centre, &rays, cfg.m, cfg.discipline, blocked);
    let flow = r.net.max_flow(r.s, r.t, limit as i64) as usize;
    if flow >= limit {
        return FlowCut {
            flow,
            vertices: Vec::new(),
            leaves: Vec::new(),
        };
    }
    let reach = r.net.residual_reachable(r.s);
    let vertices = h
        .vertices()
        .filter(|&v| !blocked[v] && reach[2 * v] && !reach[2 * v + 1])
        .filter(|v| !centre.contains(v) || cfg.discipline == PathDiscipline::Disjoint)
        .collect();
    let cut_leaves = leaves
        .iter()
        .zip(&r.hubs)
        .filter(|&(_, &hub)| !reach[hub])
        .map(|(&(i, _), _)| i)
        .collect();
    FlowCut {
        flow,
        vertices,
        leaves: cut_leaves,
    }
}

/// Checks a cut from scratch: its size matches the flow, the flow is below
/// `need`, and once the cut is removed no remaining leaf reaches the centre.
fn verify_cut(
    h: &TruncatedGraph,
    rays: &[Ray],
    cfg: &StarSearchConfig,
    centre: &Ray,
    candidates: &[usize],
    cut: &FlowCut,
    need: usize,
) -> Result<()> {
    let m = cfg.m;
    if cut.flow >= need {
        return Err(Error::Validation(format!("flow {} is not below {need}", cut.flow)));
    }
    if cut.vertices.len() + m * cut.leaves.len() != cut.flow {
        return Err(Error::Validation(format!(
            "cut of {} vertices and {} leaves does not account for flow {}",
            cut.vertices.len(),
            cut.leaves.len(),
            cut.flow
        )));
    }
    let removed = mask(h.vertex_count(), cfg.blocked.iter().chain(&cut.vertices).copied());
    let sources: Vec<VertexId> = candidates
        .iter()
        .filter(|i| !cut.leaves.contains(i))
        .flat_map(|&i| rays[i].vertices.iter().copied())
        .filter(|&v| !removed[v])
        .collect();
    let reach = h.reachable(&sources, &removed);
    if let Some(&v) = centre.vertices.iter().find(|&&v| !removed[v] && reach[v]) {
        return Err(Error::Validation(format!(
            "centre vertex {v} is reachable past the cut"
        )));
    }
    Ok(())
}

/// Rechecks every cut of a refutation against `h` and `rays`.
pub fn verify_refutation(h: &TruncatedGraph, rays: &[Ray], r: &CentreRefutation, cfg: &StarSearchConfig) -> Result<()> {
    for w in &r.weak {
        verify_cut(h, rays, cfg, &r.centre, &[w.leaf], &w.cut, cfg.m)?;
    }
    match &r.joint {
        Some(cut) => verify_cut(h, rays, cfg, &r.centre, &r.viable, cut, cfg.k * cfg.m),
        None if r.viable.len() < cfg.k => Ok(()),
        None => Err(Error::Validation("enough viable leaves but no joint cut".into())),
    }
}

struct Builder<'a> {
    h: &'a TruncatedGraph,
    rays: &'a [Ray],
    cfg: &'a StarSearchConfig,
    centre: &'a Ray,
    calls: usize,
}

struct Partial {
    leaves: Vec<usize>,
    families: Vec<Vec<Vec<VertexId>>>,
    used: BTreeSet<VertexId>,
}

impl Builder<'_> {
    fn family(&mut self, j: usize, p: &Partial, undecided: &[usize]) -> Result<Option<Vec<Vec<VertexId>>>> {
        let centre = self.centre.vertex_set();
        let targets: Vec<VertexId> = self
            .centre
            .vertices
            .iter()
            .copied()
            .filter(|v| !p.used.contains(v))
            .collect();
        if targets.is_empty() {
            return Ok(None);
        }
        let mut base: BTreeSet<VertexId> = self.cfg.blocked.union(&p.used).copied().collect();
        for &i in &p.leaves {
            base.extend(&self.rays[i].vertices);
        }
        let mut strict = base.clone();
        for &i in undecided {
            if i != j {
                strict.extend(self.rays[i].vertices.iter().filter(|v| !centre.contains(v)));
            }
        }
        for blocked in [&strict, &base] {
            if self.calls >= self.cfg.budget {
                return Ok(None);
            }
            self.calls += 1;
            let pk = disjoint_paths_avoiding(self.h, &self.rays[j].vertices, &targets, self.cfg.m, blocked)?;
            if pk.count() >= self.cfg.m {
                return Ok(Some(pk.paths));
            }
        }
        Ok(None)
    }

    fn extend(&mut self, viable: &[usize], from: usize, p: &mut Partial) -> Result<bool> {
        if p.leaves.len() >= self.cfg.k {
            return Ok(true);
        }
        if p.leaves.len() + viable.len() - from < self.cfg.k || self.calls >= self.cfg.budget {
            return Ok(false);
        }
        let j = viable[from];
        if !self.rays[j].vertices.iter().any(|v| p.used.contains(v)) {
            if let Some(fam) = self.family(j, p, &viable[from + 1..])? {
                let centre = self.centre.vertex_set();
                let added: Vec<VertexId> = fam
                    .iter()
                    .flatten()
                    .copied()
                    .filter(|v| self.cfg.discipline == PathDiscipline::Disjoint || !centre.contains(v))
                    .filter(|v| p.used.insert(*v))
                    .collect();
                p.leaves.push(j);
                p.families.push(fam);
                if self.extend(viable, from + 1, p)? {
                    return Ok(true);
                }
                p.leaves.pop();
                p.families.pop();
                for v in added {
                    p.used.remove(&v);
                }
            }
        }
        self.extend(viable, from + 1, p)
    }
}

fn branch_centres(h: &TruncatedGraph, rays: &[Ray], cap: usize) -> Result<Vec<Ray>> {
    if cap == 0 || rays.is_empty() {
        return Ok(Vec::new());
    }
    let tree = normal_tree(h, &rays[0].vertices)?;
    let mut out: Vec<Ray> = Vec::new();
    for &v in &tree.preorder {
        if out.len() == cap {
            break;
        }
        if h.is_frontier(v) {
            let b = Ray::new(tree.branch(v));
            if !rays.iter().any(|r| r.vertices == b.vertices) {
                out.push(b);
            }
        }
    }
    Ok(out)
}

fn check_disjoint_families(star: &StarOfRays) -> Result<()> {
    let mut seen = BTreeSet::new();
    for v in star.families.iter().flatten().flatten() {
        if !seen.insert(*v) {
            return Err(Error::Internal(format!(
                "families share vertex {v} under the disjoint discipline"
            )));
        }
    }
    Ok(())
}

/// Looks for a star with `k` leaves, each joined to the centre by `m` paths.
///
/// Not-found means every centre candidate was refuted by a cut; a centre that
/// passes the relaxation but resists construction within the budget makes the
/// answer inconclusive. Centre indices at or past `rays.len()` refer to
/// branch centres, in the order they appear in the witness.
pub fn search_star(h: &TruncatedGraph, rays: &[Ray], cfg: &StarSearchConfig) -> Result<Certificate> {
    if cfg.k == 0 || cfg.m == 0 {
        return Err(Error::invalid("k and m must be positive"));
    }
    for r in rays {
        r.validate(h)?;
    }
    check_disjoint_rays(rays)?;
    let all: Vec<usize> = (0..rays.len()).collect();
    let centre_ids = cfg.centres.clone().unwrap_or_else(|| all.clone());
    let leaf_ids = cfg.leaves.clone().unwrap_or(all);
    if let Some(&i) = centre_ids.iter().chain(&leaf_ids).find(|&&i| i >= rays.len()) {
        return Err(Error::invalid(format!("ray index {i} is out of range")));
    }
    let mut centres: Vec<Ray> = centre_ids.iter().map(|&i| rays[i].clone()).collect();
    centres.extend(branch_centres(h, rays, cfg.branch_centres)?);
    let blocked = mask(h.vertex_count(), cfg.blocked.iter().copied());
    let params = Parameters {
        depth: Some(h.max_depth()),
        m: Some(cfg.m),
        k: Some(cfg.k),
        discipline: Some(cfg.discipline),
        ..Parameters::default()
    };
    let mut refuted = Vec::new();
    let mut open = Vec::new();
    let mut calls = 0;
    for (ci, centre) in centres.iter().enumerate() {
        let cset = centre.vertex_set();
        let centre_blocked = centre.vertices.iter().any(|&v| blocked[v]);
        let mut incompatible = Vec::new();
        let mut weak = Vec::new();
        let mut viable = Vec::new();
        for &j in &leaf_ids {
            let r = &rays[j];
            if centre_blocked || r.vertices.iter().any(|&v| cset.contains(&v) || blocked[v]) {
                incompatible.push(j);
                continue;
            }
            let cut = relaxed_cut(h, &cset, &[(j, r)], cfg, &blocked, cfg.m);
            if cut.flow < cfg.m {
                weak.push(LeafRefutation { leaf: j, cut });
            } else {
                viable.push(j);
            }
        }
        let joint = (viable.len() >= cfg.k).then(|| {
            let pairs: Vec<(usize, &Ray)> = viable.iter().map(|&j| (j, &rays[j])).collect();
            relaxed_cut(h, &cset, &pairs, cfg, &blocked, cfg.k * cfg.m)
        });
        let refutation = CentreRefutation {
            centre: centre.clone(),
            incompatible,
            weak,
            viable: viable.clone(),
            joint: joint.clone(),
        };
        if joint.as_ref().is_none_or(|c| c.flow < cfg.k * cfg.m) {
            debug!("centre {ci} refuted");
            refuted.push(refutation);
            continue;
        }
        let mut b = Builder {
            h,
            rays,
            cfg,
            centre,
            calls,
        };
        let mut p = Partial {
            leaves: Vec::new(),
            families: Vec::new(),
            used: BTreeSet::new(),
        };
        let found = b.extend(&viable, 0, &mut p)?;
        calls = b.calls;
        if found {
            let star = StarOfRays {
                centre: centre.clone(),
                leaves: p.leaves.iter().map(|&j| rays[j].clone()).collect(),
                families: p.families,
            };
            validate_star(h, &star, cfg.m).map_err(|e| Error::Internal(format!("constructed star is invalid: {e}")))?;
            if cfg.discipline == PathDiscipline::Disjoint {
                check_disjoint_families(&star)?;
            }
            let summary = format!("star with {} leaves around centre candidate {ci}", star.leaf_count());
            return Ok(Certificate::new(
                CertificateKind::StarFound,
                Verdict::Pass,
                params,
                Witness::Star { centre: ci, star },
                summary,
            ));
        }
        open.push(ci);
    }
    if open.is_empty() {
        let summary = format!(
            "no star with {} leaves and {} paths each: all {} centre candidates refuted by cuts",
            cfg.k,
            cfg.m,
            refuted.len()
        );
        return Ok(Certificate::new(
            CertificateKind::StarNotFound,
            Verdict::Fail,
            params,
            Witness::Exhaustion { centres: refuted },
            summary,
        ));
    }
    let reason = if calls >= cfg.budget {
        format!("construction budget of {} path computations exhausted", cfg.budget)
    } else {
        "relaxation admits a star but construction failed".to_string()
    };
    Ok(Certificate::new(
        CertificateKind::StarInconclusive,
        Verdict::Inconclusive,
        params,
        Witness::Inconclusive {
            reason: reason.clone(),
            refuted,
            open,
        },
        format!("inconclusive: {reason}"),
    ))
}
