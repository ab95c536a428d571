//! Benchmarks for the data-parallel hot paths: pairwise model containment
//! (build_model) and the neighborhood search.  Run `cargo bench` for the
//! parallel build and `cargo bench --no-default-features` for the sequential
//! fallback; the bench ids carry the mode so reports line up side by side.

use criterion::{criterion_group, criterion_main, Criterion};

use gradedval::fixtures;
use gradedval::galois::AutGroup;
use gradedval::gradedvaluation::ring_containment;
use gradedval::zrspace::{build_model, stable_affine_neighborhood};

fn mode() -> &'static str {
    if cfg!(feature = "parallel") {
        "parallel"
    } else {
        "sequential"
    }
}

fn bench_build_model(c: &mut Criterion) {
    let base = fixtures::six_point_model().unwrap();
    let points = base.points.clone();
    let group = base.group.clone();
    c.bench_function(&format!("build_model/six_point/{}", mode()), |b| {
        b.iter(|| build_model(points.clone(), &group).unwrap())
    });

    // a larger synthetic model: every fixture point plus conj translates
    let k = fixtures::qi_z();
    let group = AutGroup::generate(&k, &[fixtures::conj(&k)]).unwrap();
    let mut big_points = base.points.clone();
    for sweep in 0..2 {
        let extra: Vec<_> = base
            .points
            .iter()
            .map(|p| {
                let mut q = p.clone();
                q.label = format!("{}#{}", p.label, sweep);
                q
            })
            .collect();
        big_points.extend(extra);
    }
    c.bench_function(&format!("build_model/eighteen_point/{}", mode()), |b| {
        b.iter(|| build_model(big_points.clone(), &group).unwrap())
    });
}

fn bench_containment(c: &mut Criterion) {
    let (ap, am) = fixtures::a_plus_minus();
    let (dp, _) = fixtures::d_plus_minus();
    c.bench_function(&format!("ring_containment/refinement/{}", mode()), |b| {
        b.iter(|| ring_containment(&dp, &ap).unwrap())
    });
    c.bench_function(&format!("ring_containment/witness_search/{}", mode()), |b| {
        b.iter(|| ring_containment(&ap, &am).unwrap())
    });
}

fn bench_neighborhood(c: &mut Criterion) {
    let m = fixtures::six_point_model().unwrap();
    let idx = |n: &str| m.points.iter().position(|p| p.label == n).unwrap();
    let s = vec![idx("A+"), idx("A-")];
    let u: Vec<usize> = (0..m.points.len())
        .filter(|&i| m.points[i].label != "E")
        .collect();
    c.bench_function(&format!("stable_affine_neighborhood/six_point/{}", mode()), |b| {
        b.iter(|| stable_affine_neighborhood(&m, &s, &u, 3).unwrap())
    });
}

criterion_group!(benches, bench_build_model, bench_containment, bench_neighborhood);
criterion_main!(benches);
