//! Order trees, ray inflations and end analysis on finite truncations.

pub mod bipartite;
pub mod certifier;
pub mod ends;
pub mod error;
pub(crate) mod flow;
pub mod generate;
pub mod graph;
pub mod inflation;
pub mod io;
pub mod ladder;
pub mod tree;

pub use error::{Error, Result};
