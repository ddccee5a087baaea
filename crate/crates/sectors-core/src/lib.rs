//! Superselection-sector analysis for finite symmetry groups acting on
//! finite-dimensional matrix *-algebras, together with a finite-dimensional
//! quantum measurement toolkit (instruments, channels, preparation).
//!
//! The crate is organised around five layers:
//!
//! * [`group`] — finite groups, subgroups, coset spaces, and a catalog of
//!   built-in groups with exact unitary irreps.
//! * [`rep`] — character tables, explicit irreps, restriction, induction,
//!   branching and Frobenius reciprocity.
//! * [`algebra`] — matrix *-algebras: commutants, centres, fixed-point
//!   subalgebras, conditional expectations, state decompositions.
//! * [`ssb`] — the field-system toy model: equivariant (crossed-product)
//!   algebras, induced representations, symmetry-breakdown detection,
//!   sector spectra and the classical↔quantum channel over them.
//! * [`measurement`] — observables, pointer couplings, instruments,
//!   measurement-scheme and realisability checks, state preparation.
//!
//! All randomised routines take explicit seeds and are deterministic.
//! Hot loops go through [`parallel`], which uses rayon when the `parallel`
//! feature (default) is enabled and falls back to sequential iteration
//! otherwise.

pub mod algebra;
pub mod error;
pub mod group;
pub mod linalg;
pub mod measurement;
pub mod parallel;
pub mod rep;
pub mod report;
pub mod ssb;
pub mod tol;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, Complex};
