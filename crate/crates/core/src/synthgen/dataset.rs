//! Labeled dataset generation: run the full pipeline over generated scenes
//! and split the rows 80/20 with disjoint scene seeds.

use super::{generate_scene, CellSpec, SceneSpec, SplitMix64};
use crate::features::{CellClass, FEATURE_COUNT};
use crate::parallel;
use crate::pipeline::{detect_cells, PipelineParams};

#[derive(Debug, Clone)]
pub struct DatasetOptions {
    pub n_per_class: usize,
    pub seed: u64,
    pub noise_sigma: u8,
    pub scene_width: usize,
    pub scene_height: usize,
    pub rbc_count: usize,
    pub impurity_count: usize,
}

impl DatasetOptions {
    pub fn new(n_per_class: usize, seed: u64) -> Self {
        DatasetOptions {
            n_per_class,
            seed,
            noise_sigma: 2,
            scene_width: 384,
            scene_height: 384,
            rbc_count: 4,
            impurity_count: 3,
        }
    }
}

#[derive(Debug)]
pub struct DatasetResult {
    pub train: Vec<([f64; FEATURE_COUNT], CellClass)>,
    pub test: Vec<([f64; FEATURE_COUNT], CellClass)>,
    /// Scenes whose pipeline run produced no matching cell.
    pub skipped: Vec<u64>,
    pub scenes: usize,
}

/// Scene spec for one dataset sample: a single cell of the given class with
/// scenery, derived deterministically from the dataset seed.
pub fn sample_scene_spec(opts: &DatasetOptions, class: CellClass, index: usize) -> SceneSpec {
    let stream = ((class.index() as u64) << 32) | index as u64;
    let mut rng = SplitMix64::new(opts.seed).fork(stream);
    let scene_seed = rng.next_u64();
    let mut spec = SceneSpec::new(scene_seed, opts.scene_width, opts.scene_height);
    spec.noise_sigma = opts.noise_sigma;
    spec.rbc_count = opts.rbc_count;
    spec.impurity_count = opts.impurity_count;
    let cx = opts.scene_width as i64 / 2 + rng.range_i64(-25, 25);
    let cy = opts.scene_height as i64 / 2 + rng.range_i64(-25, 25);
    spec.cells.push(CellSpec::sample(class, (cx, cy), &mut rng));
    spec
}

/// Run the pipeline on every generated scene and collect labeled feature
/// rows. Scenes where detection fails or no detected cell covers the truth
/// are skipped and reported. Scene processing is data-parallel.
pub fn generate_dataset(opts: &DatasetOptions, params: &PipelineParams) -> DatasetResult {
    let classes = CellClass::ALL;
    let total = classes.len() * opts.n_per_class;
    let rows: Vec<(usize, usize, Option<[f64; FEATURE_COUNT]>, u64)> =
        parallel::map_indexed(total, |k| {
            let class = classes[k / opts.n_per_class];
            let index = k % opts.n_per_class;
            let spec = sample_scene_spec(opts, class, index);
            let seed = spec.seed;
            let features = run_one(&spec, params);
            (class.index(), index, features, seed)
        });

    let n_train = (opts.n_per_class * 4 + 2) / 5; // 80%, rounded
    let mut result = DatasetResult {
        train: Vec::new(),
        test: Vec::new(),
        skipped: Vec::new(),
        scenes: total,
    };
    for (class_index, index, features, seed) in rows {
        match features {
            Some(f) => {
                let label = classes[class_index];
                if index < n_train {
                    result.train.push((f, label));
                } else {
                    result.test.push((f, label));
                }
            }
            None => result.skipped.push(seed),
        }
    }
    result
}

fn run_one(spec: &SceneSpec, params: &PipelineParams) -> Option<[f64; FEATURE_COUNT]> {
    let (img, truth) = generate_scene(spec).ok()?;
    let detection = detect_cells(&img, params).ok()?;
    let gt = truth.cells.first()?;
    let cx = (gt.bbox.x0 + gt.bbox.x1) / 2;
    let cy = (gt.bbox.y0 + gt.bbox.y1) / 2;
    detection
        .cells
        .iter()
        .find(|c| c.instance.combined_roi.contains(cx, cy))
        .map(|c| c.instance.features.values)
}
