use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use nclp_core::copies::{clt_moment_finite_s, clt_moment_simulated, sign_symmetry_check, CopySystem};
use nclp_core::interp::{strip_measure, DEFAULT_GRID};
use nclp_core::matcore::{random_matrix_rng, random_state_rng};
use nclp_core::normlib::{conditional_norm, factorization_norm, schatten_norm, state_lp_norm};
use nclp_core::rng::stream;
use nclp_core::spaces::{graph_tensor_check, k_quotient_norm};
use nclp_core::{ComplexMatrix, Exponent, SolverOptions};

fn closed_forms(c: &mut Criterion) {
    let mut g = c.benchmark_group("closed_forms");
    for n in [4, 16, 64] {
        let mut r = stream(1, "bench");
        let x = random_matrix_rng(&mut r, n, n);
        let d = random_state_rng(&mut r, n);
        g.bench_with_input(BenchmarkId::new("schatten_p1.5", n), &x, |b, x| b.iter(|| schatten_norm(black_box(x), Exponent::Finite(1.5))));
        g.bench_with_input(BenchmarkId::new("state_lp_p3", n), &x, |b, x| b.iter(|| state_lp_norm(black_box(x), &d, Exponent::Finite(3.0))));
    }
    g.bench_function("strip_measure_4096", |b| b.iter(|| strip_measure(black_box(0.3), DEFAULT_GRID)));
    g.finish();
}

fn optimizers(c: &mut Criterion) {
    let mut g = c.benchmark_group("optimizers");
    g.sample_size(10);
    let o = SolverOptions { restarts: 2, ..SolverOptions::default() };
    let mut r = stream(2, "bench");
    let x = random_matrix_rng(&mut r, 3, 3);
    g.bench_function("factorization_4_4_dim3", |b| b.iter(|| factorization_norm(black_box(&x), Exponent::Finite(4.0), Exponent::Finite(4.0), &o)));
    let d = random_state_rng(&mut r, 2);
    let y = random_matrix_rng(&mut r, 4, 4);
    g.bench_function("conditional_4_4_4_m2", |b| {
        b.iter(|| conditional_norm(black_box(&y), &d, 2, Exponent::Finite(4.0), Exponent::Finite(4.0), Exponent::INF, &o))
    });
    let dd = random_state_rng(&mut r, 2);
    let tuple: [ComplexMatrix; 4] = std::array::from_fn(|_| random_matrix_rng(&mut r, 2, 2));
    g.bench_function("k_quotient_p1.5_n2", |b| b.iter(|| k_quotient_norm(black_box(&tuple), &dd, Exponent::Finite(1.5), &o)));
    g.bench_function("graph_tensor_n3_m2", |b| b.iter(|| graph_tensor_check(black_box(&[0.7, 1.2, 1.9]), 2, 1, 3, &o)));
    g.finish();
}

fn copies(c: &mut Criterion) {
    let mut g = c.benchmark_group("copies");
    g.sample_size(10);
    let mut r = stream(3, "bench");
    let d = random_state_rng(&mut r, 2);
    let x = random_matrix_rng(&mut r, 2, 2);
    for k in [2, 3, 4] {
        let sys = CopySystem::new(&d, k, true).unwrap();
        g.bench_with_input(BenchmarkId::new("sign_symmetry_p1.5", k), &sys, |b, sys| b.iter(|| sign_symmetry_check(black_box(&x), sys, Exponent::Finite(1.5))));
    }
    let xs: Vec<ComplexMatrix> = (0..4).map(|_| random_matrix_rng(&mut r, 2, 2)).collect();
    g.bench_function("clt_finite_s_m4_s5", |b| b.iter(|| clt_moment_finite_s(black_box(&xs), &d, 5)));
    g.bench_function("clt_simulated_m4_s5", |b| b.iter(|| clt_moment_simulated(black_box(&xs), &d, 5)));
    g.finish();
}

criterion_group!(benches, closed_forms, optimizers, copies);
criterion_main!(benches);
