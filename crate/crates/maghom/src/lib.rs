//! Magnitude homology of graphs.
//!
//! Trails are enumerated from hop distances, assembled into sparse integer
//! differentials for the full, eulerian and discriminant complexes, and reduced
//! exactly. The [`structure`] module implements the combinatorics of local
//! collections of diagonal trails, [`random`] samples Erdős–Rényi and torus
//! geometric graphs, and [`experiment`] runs seeded Monte Carlo sweeps.

pub mod chain;
pub mod experiment;
pub mod graph;
pub mod homology;
pub mod linalg;
pub mod random;
pub mod structure;
pub mod trail;

pub use chain::{boundary_matrix, connecting_map, face_map, BoundaryMatrix};
pub use graph::{all_pairs_distances, DistanceMatrix, Graph, UNREACHABLE};
pub use homology::{compute_homology, HomologyResult};
pub use trail::{enumerate_trails, ChainBasis, Theory, Trail};
