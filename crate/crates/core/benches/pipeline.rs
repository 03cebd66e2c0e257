//! Benchmarks comparing the data-parallel pipeline against the sequential
//! fallback. With the default `parallel` feature the first group exercises
//! rayon; build with `--no-default-features` to measure the fallback under
//! the same entry point.

use bmc_core::classification::{svm_train, SvmParams};
use bmc_core::features::CellClass;
use bmc_core::imgcore::RgbImage;
use bmc_core::pipeline::{detect_cells, detect_cells_seq, PipelineParams};
use bmc_core::synthgen::{generate_scene, CellSpec, SceneSpec, SplitMix64};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn multi_cell_scene() -> RgbImage {
    let mut spec = SceneSpec::new(0xBE7C, 1024, 640);
    let mut rng = SplitMix64::new(0xBE7C);
    let centers = [
        (170, 170),
        (512, 170),
        (854, 170),
        (170, 470),
        (512, 470),
        (854, 470),
    ];
    for (i, &(cx, cy)) in centers.iter().enumerate() {
        let class = CellClass::ALL[i % CellClass::ALL.len()];
        spec.cells.push(CellSpec::sample(class, (cx, cy), &mut rng));
    }
    spec.rbc_count = 10;
    spec.impurity_count = 6;
    let (img, _) = generate_scene(&spec).expect("bench scene");
    img
}

fn bench_detect(c: &mut Criterion) {
    let img = multi_cell_scene();
    let params = PipelineParams::default();
    let mut group = c.benchmark_group("detect_six_cells");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(detect_cells(black_box(&img), &params).unwrap().cells.len()))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            black_box(
                detect_cells_seq(black_box(&img), &params)
                    .unwrap()
                    .cells
                    .len(),
            )
        })
    });
    group.finish();
}

fn bench_training(c: &mut Criterion) {
    // Pairwise machines train in parallel inside svm_train.
    let mut rng = SplitMix64::new(0x7EA1);
    let mut rows = Vec::new();
    for class in CellClass::ALL {
        for _ in 0..40 {
            let mut f = [0.0; bmc_core::features::FEATURE_COUNT];
            for v in f.iter_mut() {
                *v = class.index() as f64 * 3.0 + rng.range_i64(-100, 100) as f64 / 100.0;
            }
            rows.push((f, class));
        }
    }
    c.bench_function("svm_train_200_rows", |b| {
        b.iter(|| black_box(svm_train(black_box(&rows), &SvmParams::default(), "bench").unwrap()))
    });
}

criterion_group!(benches, bench_detect, bench_training);
criterion_main!(benches);
