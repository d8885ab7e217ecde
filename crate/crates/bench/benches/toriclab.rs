use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use toriclab::corpus;
use toriclab::divisorial::k_divisoriality;
use toriclab::gale::{shephard_test, support_function_test};
use toriclab::linalg::{hermite_normal_form, smith_normal_form, IntMatrix};
use toriclab::random::random_fan_3d_batch;
use toriclab::Cone;

fn lattice(c: &mut Criterion) {
    let fan = corpus::fan("nontwodiv");
    let m = IntMatrix::from_rows(fan.ray_count(), &fan.cartier_lattice().basis);
    let r = fan.ray_matrix();
    c.bench_function("hnf cartier basis", |b| b.iter(|| hermite_normal_form(black_box(&m))));
    c.bench_function("snf ray matrix", |b| b.iter(|| smith_normal_form(black_box(&r))));
    c.bench_function("cartier lattice", |b| b.iter(|| black_box(&fan).cartier_lattice()));
}

fn cones(c: &mut Criterion) {
    let fan = corpus::fan("cstar-sigma");
    let gens = fan.rays().to_vec();
    c.bench_function("facet description", |b| b.iter(|| Cone::new(5, black_box(gens.clone())).facets().len()));
}

fn projectivity(c: &mut Criterion) {
    let oda = corpus::fan("oda");
    c.bench_function("shephard oda", |b| b.iter(|| shephard_test(black_box(&oda)).unwrap()));
    c.bench_function("support function oda", |b| b.iter(|| support_function_test(black_box(&oda))));
    let fans = random_fan_3d_batch(8, 10, 1).unwrap();
    c.bench_function("shephard 10 random fans", |b| {
        b.iter(|| fans.iter().filter(|f| shephard_test(f).unwrap().is_strongly_polytopal).count())
    });
}

fn divisoriality(c: &mut Criterion) {
    let fan = corpus::fan("nontwodiv");
    c.bench_function("kdiv k=2", |b| b.iter(|| k_divisoriality(black_box(&fan), 2).unwrap().verdict));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = lattice, cones, projectivity, divisoriality
}
criterion_main!(benches);
