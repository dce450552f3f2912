use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use tractdyn::dynamics::{render_with, Palette, RenderSpec};
use tractdyn::exec::Exec;
use tractdyn::functions::FunctionModel;
use tractdyn::growth::{build_profile_with, DEFAULT_COARSE};
use tractdyn::tract::{locate_tract_with, Window};
use tractdyn::Complex64;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn bench_render(c: &mut Criterion) {
    let mut g = c.benchmark_group("render_fig1_mid_120x160");
    g.sample_size(10);
    let window = Window::new(-10.0, 8.0, -12.0, 12.0, 120, 160).unwrap();
    let spec = RenderSpec::new(FunctionModel::example1(1.0), window, Palette::fig1());
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(render_with(&spec, exec).unwrap().histogram))
        });
    }
    g.finish();
}

fn bench_profile(c: &mut Criterion) {
    let mut g = c.benchmark_group("growth_profile_gamma");
    g.sample_size(10);
    let model = FunctionModel::parse("gamma").unwrap();
    let d = model.tract_defaults();
    let window = Window::from_bounds(d.window, 256, 256).unwrap();
    let tract = locate_tract_with(&model, d.threshold, d.seed, window, Exec::Parallel).unwrap();
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(build_profile_with(&tract, 10.0, 200.0, DEFAULT_COARSE, exec).unwrap().samples.len()))
        });
    }
    g.finish();
}

fn bench_tract(c: &mut Criterion) {
    let mut g = c.benchmark_group("locate_tract_exp_512");
    let model = FunctionModel::parse("exp").unwrap();
    let window = Window::new(-5.0, 5.0, -5.0, 5.0, 512, 512).unwrap();
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(locate_tract_with(&model, 1.0, Complex64::new(3.0, 0.0), window, exec).unwrap().pixels))
        });
    }
    g.finish();
}

criterion_group!(benches, bench_render, bench_profile, bench_tract);
criterion_main!(benches);
