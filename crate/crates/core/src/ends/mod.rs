//! End analysis on truncations: disjoint paths, combs, normal trees, stars
//! of rays, frayed decompositions and ray graphs.

pub mod combs;
pub mod frayed;
pub mod normal;
pub mod paths;
pub mod raygraph;
pub mod star;
pub mod surrogate;
