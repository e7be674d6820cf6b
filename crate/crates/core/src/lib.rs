//! Distributed matrix multiplication with algebraic-geometry codes.
//!
//! Layers, bottom up:
//!
//! - [`field`]: GF(p^e) arithmetic and dense linear algebra.
//! - [`series`]: truncated Laurent series with tracked precision.
//! - [`curve`]: rational, elliptic and Hermitian function fields, their
//!   rational places, local expansions and function representations.
//! - [`rr`]: Riemann-Roch bases, gapped bases, non-special divisors and
//!   Weierstrass semigroups.
//! - [`schemes`]: Reed-Solomon and AG encoders, decoders, condition checks
//!   and cost ledgers.
//! - [`sim`]: straggler simulation, threshold sweeps and threshold tables.
//! - [`acceptance`]: the end-to-end checks shared by the test suite and the CLI.

pub mod acceptance;
pub mod curve;
pub mod field;
pub mod rr;
pub mod schemes;
pub mod series;
pub mod sim;

pub use curve::{CurveKind, CurveModel, Divisor, FunctionRep, Place, Shift};
pub use field::{Elem, Field, FieldElement, Matrix};
pub use rr::{RRBasis, SemigroupView};
pub use schemes::{PartitionSpec, SchemeInstance, SchemeKind, SchemeSpec};
pub use series::LaurentSeries;
