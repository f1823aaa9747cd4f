use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ere_bench::{config, CELLS};
use ere_core::collision::{heteroclinic_index_lplus, l0_numerical_table, Truncation};
use ere_core::models::Family;
use ere_core::stability::{analyze, brake_half_indices, AnalysisOptions};
use ere_core::LagrangianFrame;

fn cells(c: &mut Criterion) {
    let opts = AnalysisOptions::default();
    let mut g = c.benchmark_group("cell");
    g.sample_size(10);
    for (fam, e) in CELLS {
        let cfg = config(fam);
        g.bench_function(format!("{}({})/e={e}", fam.name(), fam.param().unwrap()), |b| {
            b.iter(|| analyze(black_box(&cfg), black_box(e), &opts).unwrap().cell.i1)
        });
    }
    g.finish();
}

fn brake_halves(c: &mut Criterion) {
    let opts = AnalysisOptions::default();
    let cfg = config(Family::Euler(0.8));
    c.bench_function("brake_half/euler(0.8)/e=0.7", |b| {
        b.iter(|| brake_half_indices(black_box(&cfg), 0.7, &opts).unwrap().i1())
    });
}

fn collision(c: &mut Criterion) {
    let mut g = c.benchmark_group("collision");
    g.sample_size(10);
    let cfg = config(Family::Euler(0.1));
    g.bench_function("l_plus_dirichlet/euler(0.1)", |b| {
        b.iter(|| heteroclinic_index_lplus(&cfg, &LagrangianFrame::dirichlet(2)).unwrap().index)
    });
    g.bench_function("l0_table/euler(0.1)", |b| {
        b.iter(|| l0_numerical_table(&cfg, Truncation::default()).unwrap().0)
    });
    g.finish();
}

criterion_group!(benches, cells, brake_halves, collision);
criterion_main!(benches);
