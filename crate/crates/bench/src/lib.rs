//! Benchmark support: seeded inputs shared by the criterion benches.

use rdv_core::filtration::{boundary_matrix, BoundaryMatrix};
use rdv_core::random::random_filtration;
use rdv_core::FieldContext;

/// Boundary matrix of a seeded random filtration over F_p.
pub fn seeded_boundary_matrix(n: usize, seed: u64, p: u32) -> BoundaryMatrix {
    let ctx = FieldContext::new(p).expect("benchmark modulus is prime");
    boundary_matrix(&random_filtration(n, seed), &ctx)
}
