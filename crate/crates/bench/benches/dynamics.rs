use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mutloop_core::conjecture::random_loop;
use mutloop_core::entropy::norm_growth_trace;
use mutloop_core::spectra::char_poly;
use mutloop_core::stability::{check_cone_stabilization, detect_sign_stability, Budget, Region};
use mutloop_core::surfaces::builtin_mapping_class;
use mutloop_core::tropical::{loop_matrix, transport_point};
use mutloop_core::{MutationLoop, SignSequence, TropicalPoint};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn catalog_loop(name: &str) -> MutationLoop {
    let (t, spec) = builtin_mapping_class(name).unwrap();
    spec.to_loop(&t).unwrap()
}

fn transport(c: &mut Criterion) {
    let lp = catalog_loop("torus-LR");
    let w = TropicalPoint::from_integers(&[3, -5, 7]);
    c.bench_function("transport/torus-LR", |b| {
        b.iter(|| transport_point(&lp, black_box(&w)).unwrap())
    });

    let mut group = c.benchmark_group("transport/orbit");
    for steps in [10usize, 40] {
        group.bench_with_input(BenchmarkId::from_parameter(steps), &steps, |b, &steps| {
            b.iter(|| {
                let mut x = w.clone();
                for _ in 0..steps {
                    x = transport_point(&lp, &x).unwrap().0.normalized().unwrap();
                }
                x
            })
        });
    }
    group.finish();
}

fn detection(c: &mut Criterion) {
    let mut group = c.benchmark_group("detect_sign_stability");
    group.sample_size(10);
    for name in ["torus-LR", "sphere4-twist"] {
        let lp = catalog_loop(name);
        group.bench_function(name, |b| {
            b.iter(|| detect_sign_stability(&lp, Region::ConePlus, Budget::default()).unwrap())
        });
    }
    let lp = catalog_loop("torus-LR");
    group.bench_function("torus-LR/integer-rays", |b| {
        b.iter(|| detect_sign_stability(&lp, Region::IntegerRays, Budget::default()).unwrap())
    });
    group.finish();
}

fn spectra(c: &mut Criterion) {
    let lp = catalog_loop("torus-LR");
    let e = loop_matrix(&lp, &SignSequence::parse("+-").unwrap()).unwrap();
    let mut group = c.benchmark_group("char_poly");
    for n in [1u64, 8, 32] {
        let m = e.pow(n);
        group.bench_with_input(BenchmarkId::new("torus-LR-power", n), &m, |b, m| {
            b.iter(|| char_poly(m))
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let random = random_loop(&mut rng, 5).unwrap();
    let signs = SignSequence::parse(&"+".repeat(random.len())).unwrap();
    let m = loop_matrix(&random, &signs).unwrap();
    group.bench_function("random-rank-5", |b| b.iter(|| char_poly(black_box(&m))));
    group.finish();

    c.bench_function("norm_growth_trace/40", |b| {
        b.iter(|| norm_growth_trace(black_box(&e), 40).unwrap())
    });
}

fn cones(c: &mut Criterion) {
    let lp = catalog_loop("torus-LR");
    let sign = SignSequence::parse("+-").unwrap();
    c.bench_function("check_cone_stabilization/torus-LR", |b| {
        b.iter(|| check_cone_stabilization(&lp, &sign, 40).unwrap())
    });
}

criterion_group!(benches, transport, detection, spectra, cones);
criterion_main!(benches);
