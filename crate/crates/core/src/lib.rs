//! Z/2 homology of simplicial complexes, computed in parallel through Mayer-Vietoris
//! blowup complexes over partition-based covers.

pub mod bench;
pub mod blowup;
pub mod cli;
pub mod complex;
pub mod cover;
pub mod error;
pub mod generators;
pub mod homology;
pub mod io;
pub mod parallel;
pub mod verify;

pub use complex::{closure, Filtration, Simplex, SimplicialComplex, Vertex};
pub use error::{Error, Result};
pub use homology::{BettiNumbers, BoundaryMatrix, PersistencePairing};
pub use parallel::{
    heuristic_mh, multicore_homology, serial_homology, Algorithm, PipelineOptions, RunReport,
};
