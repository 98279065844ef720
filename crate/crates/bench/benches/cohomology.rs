use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use obslab_core::cochain::{cohomology, Cochain};
use obslab_core::fixtures::fx1;
use obslab_core::group::FiniteGroup;
use obslab_core::heisenberg::{build_heisenberg_demo, splitting_test};
use obslab_core::hjr::verify_exactness;
use obslab_core::module::{FlowData, FlowModule};
use obslab_core::resolution::resolve_three_cocycle;
use obslab_core::Budget;

fn trivial(g: FiniteGroup, n: u64) -> Arc<FlowModule> {
    Arc::new(FlowModule::trivial_action(FlowData::trivial_cyclic(n), &Arc::new(g)).unwrap())
}

fn bench(c: &mut Criterion) {
    let budget = Budget::default();

    let z6 = trivial(FiniteGroup::product(&[FiniteGroup::cyclic(2), FiniteGroup::cyclic(3)]), 2);
    c.bench_function("h3 z6 coeff z2", |b| b.iter(|| cohomology(black_box(&z6), 3, &budget).unwrap()));

    let (_, ob) = build_heisenberg_demo(2, FlowData::trivial_cyclic(2), 1).unwrap();
    c.bench_function("splitting heisenberg k=2", |b| b.iter(|| splitting_test(black_box(&ob), &budget).unwrap()));

    let f = trivial(FiniteGroup::cyclic(4), 4);
    let mut gen = Cochain::zero(&f, 3);
    gen.set(&[1, 1, 1], 1);
    c.bench_function("resolve z4 generator", |b| b.iter(|| resolve_three_cocycle(black_box(&gen), &budget).unwrap()));

    let fx = fx1();
    c.bench_function("exactness fx1", |b| {
        b.iter(|| verify_exactness(black_box(&fx.flow), &fx.l, &fx.m, &budget).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench
}
criterion_main!(benches);
