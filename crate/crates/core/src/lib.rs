//! Exact persistence computations from boundary-matrix decompositions.
//!
//! The pipeline: parse or build a [`filtration::Filtration`], assemble its
//! [`filtration::BoundaryMatrix`] over a prime field, factor it as R = DV with
//! one of five interchangeable reduction algorithms in [`reductions`], and read
//! persistence diagrams and cycle representatives off the factors in
//! [`persistence`]. All arithmetic is exact; every algorithm produces either
//! the lazy or the exhaustive normal form, so outputs can be cross-checked
//! bit for bit.
//!
//! * [`reductions::reduce_lazy`] — left-to-right column reduction, resolving
//!   pivot collisions only when they block progress.
//! * [`reductions::reduce_exhaustive`] — clears each pivot row entirely to the
//!   right as soon as the pivot is found.
//! * [`reductions::reduce_row_incremental`] — bottom-up row processing; same
//!   output as lazy.
//! * [`reductions::reduce_fast_column`] — blocked Schur-complement elimination
//!   over a column bisection; same output as exhaustive, sub-cubic.
//! * [`reductions::reduce_fast_row`] — blocked row elimination with deferred
//!   column operations; same output as lazy, sub-cubic.

pub mod field;
pub mod filtration;
pub mod matrix;
pub mod persistence;
pub mod random;
pub mod reductions;

pub use field::{FieldContext, FieldElement};
pub use filtration::{BoundaryMatrix, Filtration, Simplex};
pub use matrix::{DenseMatrix, IndexSet, OpCounter, Permutation};
pub use persistence::{Chain, PersistencePair, RepresentativeSet};
pub use reductions::{Algorithm, Decomposition, ReductionMode};
