//! Few-mode bosonic Fock-space engine.
//!
//! Sectors are enumerated from linear conserved charges, Hamiltonians are
//! written as sums of ladder monomials, represented sparsely on a sector and
//! diagonalized densely. All types are immutable after construction; sectors
//! are shared behind [`std::sync::Arc`]. Units: `hbar = 1` unless a caller
//! passes another value to [`evolve`].

mod matrix;
mod operator;
mod sector;
mod spectral;
mod state;

pub use matrix::{build_matrix, compile_observable, SparseMatrix};
pub use operator::{Ladder, LadderKind, OperatorExpression, Term};
pub use sector::{ChargeRule, FockSector, ModeSet, Occupation};
pub use spectral::{diagonalize, evolve, max_abs, Propagator, SpectralDecomposition, Tolerances};
pub use state::{expectation, StateVector};
