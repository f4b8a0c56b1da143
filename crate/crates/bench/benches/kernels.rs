use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use nomanet_bench::femto_scenario;
use nomanet_core::analytic::{build_quadrature, ordered_gain_cdf, outage_fu_noma, outage_mu};
use nomanet_core::geometry::{csma_thinning, sample_marked_ppp};
use nomanet_core::montecarlo::simulate_outage_fu_all;
use nomanet_core::specfun::{exp_integral_e, gamma_upper, gauss_2f1};
use nomanet_core::{PointModel, RngStream, SimSpec, TierKind};
use std::hint::black_box;

fn special_functions(c: &mut Criterion) {
    c.bench_function("gamma_upper(0.75, 2)", |b| {
        b.iter(|| gamma_upper(black_box(0.75), black_box(2.0)))
    });
    c.bench_function("gauss_2f1(1, 0.75, 1.75, -100)", |b| {
        b.iter(|| gauss_2f1(1.0, 0.75, 1.75, black_box(-100.0)))
    });
    c.bench_function("exp_integral_e(0.25, 3)", |b| {
        b.iter(|| exp_integral_e(0.25, black_box(3.0)))
    });
}

fn analytic(c: &mut Criterion) {
    let cfg = femto_scenario(1e-3, PointModel::Rpp);
    c.bench_function("build_quadrature femto N=40", |b| {
        b.iter(|| build_quadrature(40, &cfg.femto, TierKind::Femto))
    });
    let femto = build_quadrature(cfg.quadrature.femto_order, &cfg.femto, TierKind::Femto).unwrap();
    let macro_q =
        build_quadrature(cfg.quadrature.macro_order, &cfg.macro_tier, TierKind::Macro).unwrap();
    for (m, k) in [(2, 1), (3, 2)] {
        c.bench_function(&format!("ordered_gain_cdf M={m} k={k}"), |b| {
            b.iter(|| ordered_gain_cdf(black_box(0.05), k, m, &femto))
        });
    }
    c.bench_function("outage_fu_noma k=2", |b| {
        b.iter(|| outage_fu_noma(&cfg, &femto, 2))
    });
    c.bench_function("outage_mu", |b| b.iter(|| outage_mu(&cfg, &macro_q, 0.5)));
}

fn thinning(c: &mut Criterion) {
    let cfg = femto_scenario(0.1, PointModel::Rpp);
    let mut i = 0;
    c.bench_function("csma_thinning lambda=0.1 W=40", |b| {
        b.iter_batched(
            || {
                i += 1;
                sample_marked_ppp(cfg.femto.density, 40.0, &RngStream::new(7, i))
            },
            |p| csma_thinning(&p, &cfg, &RngStream::new(8, 0)),
            BatchSize::SmallInput,
        )
    });
}

fn simulation(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate_outage_fu_all 1000 trials");
    g.sample_size(10);
    for model in [PointModel::Ppp, PointModel::Rpp] {
        let cfg = femto_scenario(0.1, model);
        g.bench_function(format!("{model:?}"), |b| {
            b.iter(|| simulate_outage_fu_all(&cfg, &SimSpec::with_trials(1000, 1)))
        });
    }
    g.finish();
}

criterion_group!(benches, special_functions, analytic, thinning, simulation);
criterion_main!(benches);
