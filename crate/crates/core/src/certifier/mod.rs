//! Certificates for the obstructions and constructions, with independent
//! revalidation of every witness they carry.

pub mod attachment;
pub mod pipeline;
pub mod scale;
pub mod search;

use serde::{Deserialize, Serialize};

use crate::io::SCHEMA_VERSION;

pub use attachment::{certify_attachment_bound, AttachmentWitness, ComponentBound, NodeBound};
pub use pipeline::{affirmative_pipeline, PipelineStage, PipelineTrace};
pub use scale::{certify_scale_obstruction, ScaleWitness};
pub use search::{search_star, verify_refutation, CentreRefutation, PathDiscipline, StarSearchConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    AttachmentBound,
    ScaleObstruction,
    StarFound,
    StarNotFound,
    StarInconclusive,
    PipelineStar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// The knobs a certificate is relative to. Unused ones are omitted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core_budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discipline: Option<PathDiscipline>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Attachment(AttachmentWitness),
    Scale(Box<ScaleWitness>),
    Star {
        centre: usize,
        star: crate::ends::star::StarOfRays,
    },
    Exhaustion {
        centres: Vec<CentreRefutation>,
    },
    Inconclusive {
        reason: String,
        refuted: Vec<CentreRefutation>,
        open: Vec<usize>,
    },
    Pipeline(Box<PipelineTrace>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: u32,
    pub kind: CertificateKind,
    pub verdict: Verdict,
    pub parameters: Parameters,
    pub witness: Witness,
    /// One-line human-readable account of the verdict.
    pub summary: String,
}

impl Certificate {
    pub(crate) fn new(
        kind: CertificateKind,
        verdict: Verdict,
        parameters: Parameters,
        witness: Witness,
        summary: String,
    ) -> Self {
        Certificate {
            schema_version: SCHEMA_VERSION,
            kind,
            verdict,
            parameters,
            witness,
            summary,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}
