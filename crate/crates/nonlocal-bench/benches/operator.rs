use criterion::{black_box, criterion_group, criterion_main, Criterion};

use nonlocal_bench::{ball_mask, cone_sample, grid_1d, params_1d, quad};
use nonlocal_core::operator::{eval_profile_1d, PairWeights, PvContext};
use nonlocal_core::Profile;

fn bench_weights_build(c: &mut Criterion) {
    let params = params_1d();
    let q = quad();
    c.bench_function("pair_weights_build_1d_m257", |b| {
        b.iter(|| PairWeights::build(grid_1d(257), black_box(&params), &q))
    });
}

fn bench_eval_pv(c: &mut Criterion) {
    let params = params_1d();
    let q = quad();
    let grid = grid_1d(257);
    let u = cone_sample(257);
    let ctx = PvContext::new(grid, &params, &q).expect("context");
    let node = grid.node_at(&[0.5]).expect("node");
    c.bench_function("eval_pv_point_1d_m257", |b| {
        b.iter(|| ctx.eval(black_box(&u), node).expect("eval"))
    });
}

fn bench_profile_eval(c: &mut Criterion) {
    let params = params_1d();
    let q = quad();
    let profile = Profile::HalfSpacePower {
        beta: 0.25,
        normal: [1.0, 0.0, 0.0],
    };
    c.bench_function("eval_profile_1d_power", |b| {
        b.iter(|| eval_profile_1d(black_box(&profile), 1.0, &params, &q).expect("eval"))
    });
}

fn bench_mask(c: &mut Criterion) {
    c.bench_function("exhaustion_m257", |b| {
        let mask = ball_mask(257);
        b.iter(|| black_box(&mask).exhaustion())
    });
}

criterion_group!(
    benches,
    bench_weights_build,
    bench_eval_pv,
    bench_profile_eval,
    bench_mask
);
criterion_main!(benches);
