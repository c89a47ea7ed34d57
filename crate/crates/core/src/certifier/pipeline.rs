//! Greedy core, comb contraction to a bipartite graph, small core, and star
//! assembly, run on the deepest truncation of a surrogate.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bipartite::{small_core, BipartiteLK, Core, CoreMode, Strategy};
use crate::certifier::{Certificate, CertificateKind, Parameters, Verdict, Witness};
use crate::ends::combs::{greedy_core, Comb, RoundTrace};
use crate::ends::star::{assemble_star, validate_star, StarOfRays};
use crate::ends::surrogate::{EndSurrogate, RayKey};
use crate::error::{Error, Result};
use crate::graph::{Ray, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineStage {
    GreedyCore,
    Contraction,
    SmallCore,
    AssembleStar,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub depth: usize,
    pub core: Vec<VertexId>,
    pub rounds: Vec<RoundTrace>,
    /// Ray index behind each comb.
    pub comb_rays: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub small_core: Option<Core>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    /// Set when fewer than `k` combs were found and the reduction was skipped.
    pub reduction_skipped: bool,
    pub discarded: Vec<usize>,
    pub short: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star: Option<StarOfRays>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<PipelineStage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

fn finish(trace: PipelineTrace, params: Parameters) -> Certificate {
    let (verdict, summary) = match (&trace.star, trace.failed_stage) {
        (Some(s), _) => (
            Verdict::Pass,
            format!("star with {} leaves at depth {}", s.leaf_count(), trace.depth),
        ),
        (None, stage) => (
            Verdict::Fail,
            format!(
                "pipeline stopped at {:?}: {}",
                stage.unwrap_or(PipelineStage::AssembleStar),
                trace.failure.as_deref().unwrap_or("no star")
            ),
        ),
    };
    Certificate::new(
        CertificateKind::PipelineStar,
        verdict,
        params,
        Witness::Pipeline(Box::new(trace)),
        summary,
    )
}

fn fail(mut trace: PipelineTrace, params: Parameters, stage: PipelineStage, e: Error) -> Certificate {
    trace.failed_stage = Some(stage);
    trace.failure = Some(e.to_string());
    finish(trace, params)
}

/// The contraction: side A is the core, side B the combs, each listing its
/// teeth in path order.
fn contract(core: &[VertexId], combs: &[Comb], d: usize) -> Result<BipartiteLK> {
    let pos: BTreeMap<VertexId, usize> = core.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let nbrs = combs
        .iter()
        .map(|c| {
            c.teeth()
                .iter()
                .map(|t| {
                    pos.get(t)
                        .copied()
                        .ok_or_else(|| Error::Internal(format!("tooth {t} is outside the core")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    BipartiteLK::new(
        core.iter().map(|v| format!("v{v}")).collect(),
        (0..combs.len()).map(|i| format!("comb{i}")).collect(),
        nbrs,
        d,
    )
}

/// Runs the four stages on the truncation at the last scheduled depth.
/// Errors inside a stage become a failing certificate naming it.
pub fn affirmative_pipeline(e: &EndSurrogate, rays: &[RayKey], m: usize, a: usize, k: usize) -> Result<Certificate> {
    if m == 0 || k == 0 {
        return Err(Error::invalid("m and k must be positive"));
    }
    if rays.len() < k {
        return Err(Error::invalid(format!("{} rays cannot give {k} leaves", rays.len())));
    }
    let depth = *e.schedule.depths().last().expect("schedules are non-empty");
    let h = e.generator.truncate(depth)?;
    let rays: Vec<Ray> = rays.iter().map(|r| r.resolve(&h)).collect::<Result<_>>()?;
    let params = Parameters {
        depth: Some(depth),
        m: Some(m),
        k: Some(k),
        core_budget: Some(a),
        ..Parameters::default()
    };
    let mut trace = PipelineTrace {
        depth,
        ..PipelineTrace::default()
    };

    let gc = match greedy_core(&h, &rays, m, rays.len() + 1) {
        Ok(gc) => gc,
        Err(err) => return Ok(fail(trace, params, PipelineStage::GreedyCore, err)),
    };
    trace.core = gc.core.clone();
    trace.rounds = gc.rounds.clone();
    trace.comb_rays = gc.combs.iter().map(|p| p.candidate).collect();
    let combs: Vec<Comb> = gc.combs.iter().map(|p| p.comb.clone()).collect();

    let (u, chosen): (BTreeSet<VertexId>, Vec<Comb>) = if combs.len() < k {
        trace.reduction_skipped = true;
        (gc.core_set(), combs)
    } else {
        let bg = match contract(&gc.core, &combs, m) {
            Ok(bg) => bg,
            Err(err) => return Ok(fail(trace, params, PipelineStage::Contraction, err)),
        };
        let found = match small_core(&bg, a, k, CoreMode::Auto) {
            Ok(found) => found,
            Err(err) => return Ok(fail(trace, params, PipelineStage::SmallCore, err)),
        };
        trace.strategy = Some(found.strategy);
        let Some(core) = found.core else {
            let err = Error::NotFound(format!("no {a} core vertices carry the required teeth of {k} combs"));
            return Ok(fail(trace, params, PipelineStage::SmallCore, err));
        };
        let u: BTreeSet<VertexId> = core.a.iter().map(|&i| gc.core[i]).collect();
        let chosen = core
            .b
            .iter()
            .map(|&b| {
                let c = &combs[b];
                Comb {
                    spine: c.spine.clone(),
                    paths: c
                        .paths
                        .iter()
                        .filter(|p| u.contains(&p[p.len() - 1]))
                        .cloned()
                        .collect(),
                }
            })
            .collect();
        trace.small_core = Some(core);
        (u, chosen)
    };

    match assemble_star(&h, &u, &chosen, k, m) {
        Ok(asm) => {
            validate_star(&h, &asm.star, m).map_err(|e| Error::Internal(format!("assembled star is invalid: {e}")))?;
            trace.discarded = asm.discarded;
            trace.short = asm.short;
            trace.star = Some(asm.star);
            Ok(finish(trace, params))
        }
        Err(err) => Ok(fail(trace, params, PipelineStage::AssembleStar, err)),
    }
}
