use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use mdmvfif::scaling::scaling_cube;
use mdmvfif::{
    extract_spatial_imf, extract_temporal_imf, kernel_spectrum, make_kernel_nd, min_support_over_time,
    rotation_angles, StopConfig, SupportSpec,
};

fn stop() -> StopConfig {
    StopConfig::new(0.0316, 200, 1).unwrap()
}

fn spatial_stage(c: &mut Criterion) {
    let mut group = c.benchmark_group("spatial_imf");
    group.sample_size(10);
    for size in [32usize, 64, 128, 256] {
        let cube = scaling_cube(size, 64).unwrap();
        let support = min_support_over_time(&cube, 1.6).unwrap();
        group.throughput(Throughput::Elements(cube.len() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(size), &cube, |b, cube| {
            b.iter(|| extract_spatial_imf(black_box(cube), &support, &stop()).unwrap())
        });
    }
    group.finish();
}

fn temporal_stage(c: &mut Criterion) {
    let mut group = c.benchmark_group("temporal_imf");
    group.sample_size(10);
    for t_len in [128usize, 512] {
        let cube = scaling_cube(64, t_len).unwrap();
        group.throughput(Throughput::Elements(cube.len() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(t_len), &cube, |b, cube| {
            b.iter(|| extract_temporal_imf(black_box(cube), t_len / 8, &stop()).unwrap())
        });
    }
    group.finish();
}

fn helpers(c: &mut Criterion) {
    let cube = scaling_cube(128, 64).unwrap();
    c.bench_function("rotation_angles_128x128x64", |b| {
        b.iter(|| rotation_angles(black_box(&cube)).unwrap())
    });
    c.bench_function("min_support_128x128x64", |b| {
        b.iter(|| min_support_over_time(black_box(&cube), 1.6).unwrap())
    });
    let kernel = make_kernel_nd(&SupportSpec::new(vec![12, 12]).unwrap()).unwrap();
    c.bench_function("kernel_spectrum_256x256", |b| {
        b.iter(|| kernel_spectrum(black_box(&kernel), &[256, 256]).unwrap())
    });
}

criterion_group!(benches, spatial_stage, temporal_stage, helpers);
criterion_main!(benches);
