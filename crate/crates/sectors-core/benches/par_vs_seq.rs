//! Compares the rayon-backed parallel helpers against the always-sequential
//! variants on the two hottest inner loops: conditional-expectation
//! averaging of a full matrix-unit basis and the covariance sweep of the
//! induced covariant pair.

use criterion::{criterion_group, criterion_main, Criterion};

use sectors_core::algebra::{conditional_expectation, GroupAction, MatrixStarAlgebra};
use sectors_core::group::catalog;
use sectors_core::linalg;
use sectors_core::parallel;
use sectors_core::rep::UnitaryRep;
use sectors_core::ssb;

fn bench_fixed_point_averaging(c: &mut Criterion) {
    let cat = catalog::s4();
    let action = GroupAction::new(UnitaryRep::regular(cat.group.clone()));
    let members: Vec<usize> = (0..24).collect();
    let field = MatrixStarAlgebra::full(24);
    let basis: Vec<_> = field.basis().to_vec();

    let mut group = c.benchmark_group("fixed_point_averaging");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| parallel::par_map(&basis, |m| conditional_expectation(&action, &members, m)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| parallel::seq_map(&basis, |m| conditional_expectation(&action, &members, m)))
    });
    group.finish();
}

fn bench_covariance_sweep(c: &mut Criterion) {
    let cat = catalog::s4();
    let fs = ssb::build_field_system(cat.subgroup("A4"), None).unwrap();
    let hat = ssb::build_hat_algebra(&fs).unwrap();
    let ind = ssb::induced_rep(&fs, &hat).unwrap();
    let seeds: Vec<u64> = (0..32).collect();
    let sweep = |&s: &u64| -> f64 {
        let mut rng = linalg::seeded_rng(s);
        let f = linalg::random_matrix(&mut rng, fs.ambient_dim(), fs.ambient_dim());
        let pi_f = ind.pi_bar(&fs, &f);
        let mut worst = 0.0f64;
        for g in fs.group.elements() {
            let lhs = ind.pi_bar(&fs, &fs.action.apply(g, &f));
            let u = &ind.u_hat.matrices[g];
            let rhs = u * &pi_f * u.adjoint();
            worst = worst.max(linalg::max_abs(&(lhs - rhs)));
        }
        worst
    };

    let mut group = c.benchmark_group("covariance_sweep");
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(|| parallel::par_max(&seeds, sweep)));
    group.bench_function("sequential", |b| b.iter(|| parallel::seq_max(&seeds, sweep)));
    group.finish();
}

criterion_group!(benches, bench_fixed_point_averaging, bench_covariance_sweep);
criterion_main!(benches);
