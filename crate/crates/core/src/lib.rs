//! Finite discrete quantum semigroups.
//!
//! A discrete quantum semigroup over a finite index system `I` is the
//! multimatrix algebra `F(I) = ⊕_γ M_{n(γ)}` together with a comultiplication
//! `Δ: F(I) → F(I×I)` assembled from *-homomorphism blocks
//! `Δ^α_{β,γ}: M_α → M_β ⊗ M_γ`. Classical finite semigroups (all dimensions
//! one) and duals of finite groups are the two shipped families.
//!
//! The crate provides
//! - [`multimatrix`]: index systems, elements, sup-norm, Kronecker tensors;
//! - [`blockmap`]: linear maps by blocks and the `⊗̃` extension calculus;
//! - [`coalgebra`]: comultiplications, axiom validation, constructors;
//! - [`mean`]: states, invariance residuals, a PSD feasibility solver;
//! - [`stabilize`]: the additive defect, the invariant-mean correction onto
//!   an exact solution of `Δ(F) = 1⊗F + F⊗1`, and group-like exponentials.

pub mod blockmap;
pub mod builtin;
pub mod coalgebra;
pub mod error;
pub mod io;
pub mod laws;
pub mod mean;
pub mod multimatrix;
pub mod random;
pub mod stabilize;

pub use blockmap::{BlockMap, HomFlag, NotStarHom, DEFAULT_TOL};
pub use coalgebra::{Comultiplication, Provenance, QuantumSemigroup, Side, ValidationReport};
pub use error::{Error, Result};
pub use mean::{SolveOutcome, SolverOptions, SolverReport, State};
pub use multimatrix::{ComplexMatrix, IndexSystem, MMElement, C64};
pub use stabilize::StabilizationReport;
