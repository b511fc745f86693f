//! Rotated loop-only 4D toric codes.
//!
//! The crate builds CSS codes from 4D integer lattices, generates their
//! syndrome-extraction circuits, samples circuit-level depolarizing noise and
//! decodes with a combinatorial power decoder or BP+OSD.

pub mod bench;
pub mod circuit;
pub mod complex;
pub mod decoders;
pub mod f2;
pub mod homology;
pub mod lattice;
pub mod pauli;
pub mod sim;
pub mod symmetry;

pub use complex::CssCode;
pub use lattice::{Cell, HnfMatrix};

/// Errors surfaced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("degenerate lattice: basis is singular")]
    DegenerateLattice,
    #[error("dimension {dim} out of range for this operation")]
    DimensionOutOfRange { dim: usize },
    #[error("cup product requires cocycles")]
    NotCocycle,
    #[error("degenerate cup classes for pair ({0}, {1})")]
    DegenerateCup(usize, usize),
    #[error("effective check mismatch on {kind} ancilla {cell}: {detail}")]
    CheckMismatch { kind: &'static str, cell: String, detail: String },
    #[error("unmatchable syndrome")]
    UnmatchableSyndrome,
    #[error("crossing not bracketed")]
    NotBracketed,
    #[error("insufficient points: need {need}, have {have}")]
    InsufficientPoints { need: usize, have: usize },
    #[error("phase-type fold gate requires an involutive duality")]
    NotInvolution,
    #[error("gate does not preserve the stabilizer group")]
    NotPreserving,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
