//! Purification of faulty, ballistically generated Raussendorf lattices.
//!
//! A large cluster state whose bonds fail with some probability is cut into
//! boxes. One structure is picked per box, neighboring structures are joined
//! by A* paths through the faulty graph, and a `Y`/`Z` measurement plan turns
//! the paths into the bonds of a smaller Raussendorf lattice with fewer
//! missing bonds.

pub mod analysis;
pub mod cli;
pub mod driver;
pub mod dump;
pub mod error;
pub mod graph;
pub mod lattice;
pub mod renormalize;

pub use error::{Error, Result};
