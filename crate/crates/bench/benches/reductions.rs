//! Wall-clock benchmarks: the five reduction algorithms on seeded random
//! filtrations, and the recursive triangular inverse that backs them.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdv_bench::seeded_boundary_matrix;
use rdv_core::matrix::{tri_inverse, Triangle};
use rdv_core::reductions::reduce;
use rdv_core::{Algorithm, DenseMatrix, FieldContext, OpCounter};

fn bench_reduce(c: &mut Criterion) {
    let mut group = c.benchmark_group("reduce");
    group.sample_size(10);
    for &n in &[64usize, 128, 256] {
        let dm = seeded_boundary_matrix(n, 42, 2);
        for &algorithm in Algorithm::ALL.iter() {
            group.bench_with_input(
                BenchmarkId::new(algorithm.name(), n),
                &dm,
                |b, dm| b.iter(|| reduce(dm, algorithm, 32, 64).expect("reduction succeeds")),
            );
        }
    }
    group.finish();
}

fn bench_tri_inverse(c: &mut Criterion) {
    let ctx = FieldContext::new(7).expect("7 is prime");
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut group = c.benchmark_group("tri-inverse");
    group.sample_size(10);
    for &n in &[128usize, 256, 512] {
        let mut a = DenseMatrix::identity(&ctx, n);
        for i in 0..n {
            for j in i + 1..n {
                a.set_raw(i, j, rng.gen_range(0..7));
            }
        }
        for &cutoff in &[16usize, 64] {
            group.bench_with_input(
                BenchmarkId::new(format!("cutoff-{cutoff}"), n),
                &a,
                |b, a| {
                    b.iter(|| {
                        tri_inverse(a, Triangle::Upper, cutoff, &mut OpCounter::new())
                            .expect("unit triangular matrices are invertible")
                    })
                },
            );
        }
    }
    group.finish();
}

criterion_group!(benches, bench_reduce, bench_tri_inverse);
criterion_main!(benches);
