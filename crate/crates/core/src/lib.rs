//! Distinguishing 2-colorings of finite truncations of layered graphs.
//!
//! Graphs are balls around a base vertex, stratified into spheres. The crate
//! enumerates their automorphism groups, checks the structural properties the
//! constructions rely on, and builds partial colorings that break every
//! nontrivial automorphism within a margin of the boundary.

pub mod ends;
pub mod error;
pub mod lab;
pub mod layered;
pub mod motion;
pub mod perm;
pub mod scheme;
pub mod seed;

pub use error::{Error, ErrorKind, Result};
pub use layered::{generate, FamilySpec, LayeredGraph, VertexId};
pub use motion::PartialColoring;
pub use perm::{PermSet, Permutation};
