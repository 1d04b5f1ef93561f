//! # gzl
//!
//! Exact arithmetic for sign-normalized rank-1 Drinfeld modules over the
//! coordinate ring of an elliptic curve: the Hilbert-class-field data they
//! generate, tensor-power periods and logarithms, rigid-analytic motive
//! identities, and special zeta values with certified tails.
//!
//! The crate is organized as a stack:
//!
//! * [`field`] / [`poly`] — Zech-table finite fields and dense polynomials;
//! * [`series`] — truncated Puiseux series at ∞ with exact precision
//!   tracking through products, inverses and Frobenius twists;
//! * [`curve`] — the elliptic coordinate curve: group law over any
//!   coefficient field, local expansions, residues, Riemann–Roch spaces;
//! * [`ideals`] — the ideal lattice of the affine coordinate ring: normal
//!   forms, enumeration, class group, principal generators, Goss brackets;
//! * [`drinfeld`] — the shtuka solve, the sign-normalized module, skew
//!   arithmetic, ideal action and the Galois/Artin tables;
//! * [`tensor`] — tensor powers: exponential/logarithm coefficient
//!   pipelines, Anderson generating functions, periods and δ-calculus;
//! * [`motive`] — rigid-analytic trivializations and their identities;
//! * [`zeta`] — partial sums with certified tails for every zeta object,
//!   Euler products, determinant identities, recognition oracles;
//! * [`report`] — batch verification suites and machine-readable reports.
//!
//! The fastest tour is the `examples/` directory — one runnable example per
//! capability; `cargo run --example` any of them.

pub mod coeffs;
pub mod curve;
pub mod drinfeld;
pub mod hfield;
pub mod error;
pub mod field;
pub mod ideals;
pub mod kexact;
pub mod poly;
pub mod series;
pub mod tensor;

pub use error::{Error, Result};
