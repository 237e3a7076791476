use std::hint::black_box;

use bpflow_bench::{test_params, test_state};
use bpflow_core::diagnostics::discrete_energy;
use bpflow_core::etd::{apply_phi, PhiTable};
use bpflow_core::spectral::Fft3;
use bpflow_core::{FrameTable, Scheme, SpectralField, Stepper};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const SIZES: [usize; 2] = [16, 32];
const TAU: f64 = 1.0 / 32.0;

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft");
    for n in SIZES {
        let (grid, q) = test_state(n);
        let fft = Fft3::new(grid);
        let mut s = SpectralField::zeros(grid);
        let mut back = q.clone();
        group.bench_with_input(BenchmarkId::new("forward", n), &n, |b, _| {
            b.iter(|| fft.forward_into(black_box(&q), &mut s).unwrap())
        });
        fft.forward_into(&q, &mut s).unwrap();
        group.bench_with_input(BenchmarkId::new("inverse", n), &n, |b, _| {
            b.iter(|| fft.inverse_into(black_box(&s), &mut back).unwrap())
        });
    }
    group.finish();
}

fn operators(c: &mut Criterion) {
    let mut group = c.benchmark_group("operator");
    let p = test_params();
    for n in SIZES {
        let (grid, q) = test_state(n);
        let frames = FrameTable::new(grid, &p).unwrap();
        let table = PhiTable::new(&frames, TAU).unwrap();
        let fft = Fft3::new(grid);
        let s = fft.forward(&q).unwrap();
        group.bench_with_input(BenchmarkId::new("frame_table", n), &n, |b, _| {
            b.iter(|| FrameTable::new(grid, black_box(&p)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("apply_phi1", n), &n, |b, _| {
            b.iter(|| apply_phi(1, TAU, black_box(&s), &frames, &table).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("energy", n), &n, |b, _| {
            b.iter(|| discrete_energy(black_box(&q), &p.model, &fft).unwrap())
        });
    }
    group.finish();
}

fn steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    group.sample_size(20);
    let p = test_params();
    for n in SIZES {
        for scheme in [Scheme::Etd1, Scheme::Etdrk2] {
            let (grid, q0) = test_state(n);
            let mut stepper = Stepper::new(grid, &p, scheme, TAU, false).unwrap();
            let mut q = q0.clone();
            group.bench_with_input(BenchmarkId::new(scheme.to_string(), n), &n, |b, _| {
                b.iter(|| stepper.step(black_box(&mut q)).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, transforms, operators, steps);
criterion_main!(benches);
