use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use splitfix::problems::{sign_enum, ProblemData, ProblemKind};
use splitfix::{Algorithm, Vector};
use splitfix_bench::{fixed_steps, instance};

fn iterations(c: &mut Criterion) {
    let mut g = c.benchmark_group("1000_steps");
    let l1 = instance(ProblemKind::L1L1, 13, 20, 10);
    let lasso = instance(ProblemKind::Lasso, 11, 200, 50);
    let theta = lasso.cocoercivity(Algorithm::Fbs).unwrap().unwrap();
    let cases = [
        ("drs_l1l1", &l1, Algorithm::Drs, 1.0),
        ("dys_l1l1", &l1, Algorithm::Dys, 1.0),
        ("fbs_lasso", &lasso, Algorithm::Fbs, theta),
        ("drs_lasso", &lasso, Algorithm::Drs, 1.0),
        ("dys_lasso", &lasso, Algorithm::Dys, theta),
    ];
    for (name, inst, alg, gamma) in cases {
        let cfg = fixed_steps(gamma, 1.0, 1000);
        let x0 = Vector::zeros(inst.dim());
        g.bench_function(name, |b| {
            b.iter(|| inst.run(alg, &cfg, black_box(&x0)).unwrap())
        });
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("sign_enum");
    g.sample_size(10);
    for n in [4, 7, 10] {
        let inst = instance(ProblemKind::Lasso, 3, 2 * n, n);
        let ProblemData::Lasso { a, b, reg, .. } = &inst.data else {
            unreachable!()
        };
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |bch, _| {
            bch.iter(|| sign_enum(black_box(a), b, *reg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, iterations, oracle);
criterion_main!(benches);
