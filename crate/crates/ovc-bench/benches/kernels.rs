use criterion::{black_box, criterion_group, criterion_main, Criterion};
use ovc_bench::{c, dense_poly_d2, two_set_fit};
use ovc_core::*;

fn bench_enumeration(cr: &mut Criterion) {
    let mut group = cr.benchmark_group("enumeration");
    for (name, scheme) in [
        ("rectangular", Scheme::Rectangular),
        ("spherical", Scheme::Spherical),
        ("graded", Scheme::Graded),
    ] {
        group.bench_function(format!("forward_10k_{name}"), |b| {
            b.iter(|| {
                let e = Enumeration::new(2, scheme).unwrap();
                let mut acc = 0u64;
                for j in 0..10_000 {
                    acc += e.multi_of_index(j).total_degree();
                }
                black_box(acc)
            })
        });
    }
    let e = Enumeration::new(2, Scheme::Graded).unwrap();
    let indices: Vec<MultiIndex> = (0..10_000).map(|j| e.multi_of_index(j)).collect();
    group.bench_function("inverse_10k_graded", |b| {
        b.iter(|| {
            let mut acc = 0usize;
            for a in &indices {
                acc += e.index_of_multi(a);
            }
            black_box(acc)
        })
    });
    group.finish();
}

fn bench_taylor(cr: &mut Criterion) {
    let mut group = cr.benchmark_group("taylor");
    let poly = dense_poly_d2(24);
    let zeta = vec![c(0.3, -0.1), c(-0.2, 0.4)];
    group.bench_function("shift_d2_deg24", |b| {
        b.iter(|| black_box(poly.taylor_shift(black_box(&zeta))))
    });
    let z = vec![c(0.7, 0.1), c(-0.5, 0.6)];
    group.bench_function("evaluate_d2_deg24", |b| {
        b.iter(|| black_box(poly.evaluate(black_box(&z))))
    });
    group.finish();
}

fn bench_fit(cr: &mut Criterion) {
    let mut group = cr.benchmark_group("fit");
    group.sample_size(20);
    group.bench_function("two_set_escalation_d1", |b| b.iter(|| black_box(two_set_fit())));
    group.finish();
}

fn bench_rearrange(cr: &mut Criterion) {
    let mut group = cr.benchmark_group("rearrange");
    let terms = TermSequence::preset(Preset::AlternatingHarmonic, 100_000).unwrap();
    group.bench_function("steer_alt_harmonic_100k", |b| {
        b.iter(|| black_box(steer_rearrangement(black_box(&terms))))
    });
    group.finish();
}

criterion_group!(benches, bench_enumeration, bench_taylor, bench_fit, bench_rearrange);
criterion_main!(benches);
