//! Combinatorial machinery for special cube complexes: hyperplanes and
//! specialness classification, finite covers and elevations, developed balls
//! of universal covers with gates/bridges/orthogonal complements, the
//! walker–imitator transducer, routes, and exactly verified cover
//! certificates for separability of products of convex-cocompact subgroups.
//!
//! Everything here is exact, finite combinatorics: complexes are given by
//! explicit cells with facet attachments, covers by permutation voltages, and
//! every certificate produced by the synthesis pipeline can be re-checked by
//! an independent verifier (`routes::verify_no_closed_elevations`).
//!
//! See the `book/` directory for a guided tour; its code snippets compile as
//! doctests of the [`guide`] module.

pub mod complex;
pub mod contact;
pub mod control;
pub mod covers;
pub mod deck;
pub mod devball;
pub mod geometry;
pub mod guide;
pub mod generators;
pub mod hyperplane;
pub mod io;
pub mod maps;
pub mod pathology;
pub mod routes;
pub mod separability;
pub mod synth;
pub mod words;
pub mod walker;

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error in cell {dim}:{idx}: {msg}")]
    Structure { dim: usize, idx: usize, msg: String },
    #[error("complex failed the non-positive-curvature check: {0}")]
    NotNpc(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("radius {radius} exhausted; retry with radius >= {needed}")]
    RadiusExhausted { radius: usize, needed: usize },
    #[error("square relation violated by voltage at square {square}")]
    SquareRelation { square: usize },
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("content hash mismatch: {0}")]
    HashMismatch(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use complex::{Cell, CellId, CubeComplex, EdgeEnd, FacetRef, NpcComplex, SubcomplexRef};
pub use hyperplane::Hyperplane;
