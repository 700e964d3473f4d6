//! Sequential stride loop against each rayon decomposition.
//!
//! Built without the `parallel` feature every mode runs the sequential loop,
//! which gives the baseline for the same bench ids.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use svpart::kernel::{apply_controlled_slice, apply_single_slice, ExecMode, ExecStrategy};
use svpart::{make_state, StandardGate};

const N: usize = 20;

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn single_qubit(c: &mut Criterion) {
    let g = StandardGate::H.matrix();
    let mut group = c.benchmark_group("single_qubit");
    group.throughput(Throughput::Elements(1 << N));
    for mode in ExecMode::ALL {
        let strat = ExecStrategy::new(mode, workers()).unwrap();
        for q in [0, N / 2, N - 1] {
            let mut state = make_state(N).unwrap();
            group.bench_with_input(BenchmarkId::new(format!("{mode:?}"), q), &q, |b, &q| {
                b.iter(|| apply_single_slice(black_box(state.amplitudes_mut()), &g, q, strat).unwrap())
            });
        }
    }
    group.finish();
}

fn controlled(c: &mut Criterion) {
    let g = StandardGate::X.matrix();
    let mut group = c.benchmark_group("controlled");
    group.throughput(Throughput::Elements(1 << N));
    for mode in ExecMode::ALL {
        let strat = ExecStrategy::new(mode, workers()).unwrap();
        let mut state = make_state(N).unwrap();
        group.bench_function(BenchmarkId::new(format!("{mode:?}"), "c0_t19"), |b| {
            b.iter(|| apply_controlled_slice(black_box(state.amplitudes_mut()), &g, 0, N - 1, strat).unwrap())
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = single_qubit, controlled
}
criterion_main!(benches);
