//! Benchmarks for the hot paths behind region assembly: exact Smith
//! reduction, matroid enumeration, lattice minima, entropy pushforwards, and
//! a full two-user region build.

use cfregion_bench::{dense_test_matrix, wide_test_matrix};
use cfregion_core::{
    conditional_entropy_term, enumerate_matroids, lmac_region, noiseless_adder_spec,
    smith_normal_form, successive_minima, IntMatrix, Norm,
};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn bench_smith_normal_form(c: &mut Criterion) {
    let square = dense_test_matrix(6, 6);
    let wide = wide_test_matrix(3, 7);
    c.bench_function("smith_normal_form/6x6", |b| {
        b.iter(|| smith_normal_form(black_box(&square)))
    });
    c.bench_function("smith_normal_form/3x7", |b| {
        b.iter(|| smith_normal_form(black_box(&wide)))
    });
}

fn bench_enumerate_matroids(c: &mut Criterion) {
    c.bench_function("enumerate_matroids/n=4", |b| {
        b.iter(|| enumerate_matroids(black_box(4), false).unwrap())
    });
}

fn bench_successive_minima(c: &mut Criterion) {
    let lattice = IntMatrix::from_rows_i64(&[vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 4]])
        .expect("rectangular");
    c.bench_function("successive_minima/3d_sup", |b| {
        b.iter(|| successive_minima(black_box(&lattice), Norm::Infinity, 8).unwrap())
    });
}

fn bench_entropy_pushforward(c: &mut Criterion) {
    let spec = noiseless_adder_spec();
    let q = IntMatrix::from_rows_i64(&[vec![1, 1], vec![1, -1]]).expect("rectangular");
    c.bench_function("conditional_entropy_term/adder_2x2", |b| {
        b.iter(|| conditional_entropy_term(black_box(&spec), black_box(&q)).unwrap())
    });
}

fn bench_region_assembly(c: &mut Criterion) {
    let spec = noiseless_adder_spec();
    c.bench_function("lmac_region/adder", |b| {
        b.iter(|| lmac_region(black_box(&spec)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_smith_normal_form,
    bench_enumerate_matroids,
    bench_successive_minima,
    bench_entropy_pushforward,
    bench_region_assembly
);
criterion_main!(benches);
