//! Lazily generated graph families observed through increasing truncations.

use serde::{Deserialize, Serialize};

use crate::ends::paths::disjoint_paths;
use crate::error::{Error, Result};
use crate::graph::{Ray, TruncatedGraph};
use crate::inflation::{inflate, lift_with_stars};
use crate::ladder::SparseTGraph;
use crate::tree::{build_regular_tree, NodeKey};

/// A recipe that produces the truncation of a graph family at any depth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Inflation {
        tree: Box<SparseTGraph>,
    },
    /// Star lifting of the horizontal rays `rows` of the base family.
    Lift {
        base: Box<GeneratorSpec>,
        rows: Vec<NodeKey>,
        sizes: Vec<usize>,
    },
}

impl GeneratorSpec {
    pub fn truncate(&self, depth: usize) -> Result<TruncatedGraph> {
        match self {
            GeneratorSpec::Inflation { tree } => Ok(inflate(tree, depth)),
            GeneratorSpec::Lift { base, rows, sizes } => {
                let g = base.truncate(depth)?;
                let rays = rows.iter().map(|k| g.horizontal_ray(k)).collect::<Result<Vec<_>>>()?;
                Ok(lift_with_stars(&g, &rays, sizes)?.0)
            }
        }
    }
}

/// Strictly increasing truncation depths.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct DepthSchedule(Vec<usize>);

impl DepthSchedule {
    pub fn new(depths: Vec<usize>) -> Result<Self> {
        if depths.is_empty() {
            return Err(Error::invalid("depth schedule is empty"));
        }
        if depths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("depth schedule must be strictly increasing"));
        }
        Ok(DepthSchedule(depths))
    }

    /// `0, 1, ..., max`.
    pub fn up_to(max: usize) -> Self {
        DepthSchedule((0..=max).collect())
    }

    pub fn depths(&self) -> &[usize] {
        &self.0
    }
}

impl TryFrom<Vec<usize>> for DepthSchedule {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        DepthSchedule::new(v)
    }
}

impl From<DepthSchedule> for Vec<usize> {
    fn from(s: DepthSchedule) -> Self {
        s.0
    }
}

/// Names a ray independently of the truncation depth.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RayKey {
    Row { node: NodeKey },
    Lift { base: usize, copy: usize },
}

impl RayKey {
    pub fn row(node: NodeKey) -> Self {
        RayKey::Row { node }
    }

    pub fn resolve(&self, g: &TruncatedGraph) -> Result<Ray> {
        match self {
            RayKey::Row { node } => g.horizontal_ray(node),
            RayKey::Lift { base, copy } => g
                .lifted_ray(*base, *copy)
                .ok_or_else(|| Error::invalid(format!("no lifted ray ({base}, {copy})"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndSurrogate {
    pub generator: GeneratorSpec,
    pub schedule: DepthSchedule,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Linkage {
    Linked { depth: usize, paths: Vec<Vec<usize>> },
    NotFound { depths: Vec<usize>, best: usize },
}

impl EndSurrogate {
    pub fn new(generator: GeneratorSpec, schedule: DepthSchedule) -> Self {
        EndSurrogate { generator, schedule }
    }

    pub fn truncations(&self) -> impl Iterator<Item = Result<(usize, TruncatedGraph)>> + '_ {
        self.schedule
            .depths()
            .iter()
            .map(|&d| self.generator.truncate(d).map(|g| (d, g)))
    }

    /// The first scheduled depth at which the two rays are joined by `k`
    /// disjoint paths.
    pub fn equivalence_check(&self, r1: &RayKey, r2: &RayKey, k: usize) -> Result<Linkage> {
        let mut best = 0;
        for item in self.truncations() {
            let (d, g) = item?;
            let (a, b) = (r1.resolve(&g)?, r2.resolve(&g)?);
            let p = disjoint_paths(&g, &a.vertices, &b.vertices, k)?;
            if p.count() >= k {
                return Ok(Linkage::Linked {
                    depth: d,
                    paths: p.paths,
                });
            }
            best = best.max(p.count());
        }
        Ok(Linkage::NotFound {
            depths: self.schedule.depths().to_vec(),
            best,
        })
    }
}

/// The Cartesian product of a star with `leaves` leaves and a ray, as the
/// inflation of a one-level tree. The centre row belongs to the root.
pub fn star_ray_product(leaves: usize) -> Result<SparseTGraph> {
    Ok(SparseTGraph::branch_following(build_regular_tree(&[leaves], 1)?))
}

/// `rays` parallel rays with rungs between consecutive ones at every position.
pub fn grid_ladder(rays: usize) -> Result<SparseTGraph> {
    if rays == 0 {
        return Err(Error::invalid("at least one ray is required"));
    }
    let h = rays - 1;
    Ok(SparseTGraph::branch_following(build_regular_tree(&vec![1; h], h)?))
}

/// Horizontal rays of a truncated inflation, in node order.
pub fn all_rows(g: &SparseTGraph, h: &TruncatedGraph) -> Result<Vec<Ray>> {
    g.tree().node_ids().map(|t| h.horizontal_ray(g.tree().key(t))).collect()
}
