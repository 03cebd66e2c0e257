//! End-to-end orchestration: localization, per-candidate segmentation and
//! feature extraction over a whole field of view.

use crate::colortransforms::{hsg_transform, HsgParams};
use crate::features::{extract_features, CellInstance};
use crate::imgcore::{GrayImage, Mask, RgbImage, Roi};
use crate::localization::{localize_cells, Candidate, LocalizationError, NucleusShape, RadiusRule};
use crate::parallel;
use crate::segmentation::{
    segment_cell, SegmentationContext, SegmentationError, SegmentationParams,
};
use crate::thresholding::{sam_levels, sam_mask, SamTrace, ThresholdError};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PipelineError {
    #[error("rough segmentation failed: {0}")]
    Threshold(#[from] ThresholdError),
    #[error("localization failed: {0}")]
    Localization(#[from] LocalizationError),
}

/// Every tunable of the detection pipeline in one place.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineParams {
    pub hsg: HsgParams,
    pub radius_rule: RadiusRule,
    /// Nucleus regions below this area are dropped as stain specks.
    pub min_nucleus_area: usize,
    pub segmentation: SegmentationParams,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            hsg: HsgParams::default(),
            radius_rule: RadiusRule::default(),
            min_nucleus_area: 30,
            segmentation: SegmentationParams::default(),
        }
    }
}

/// Rough-stage products shared by the stagewise commands.
pub struct RoughStage {
    pub hsg: GrayImage,
    pub trace: SamTrace,
    pub mask: Mask,
}

pub fn rough_stage(image: &RgbImage, params: &PipelineParams) -> Result<RoughStage, PipelineError> {
    let hsg = hsg_transform(image, &params.hsg);
    let trace = sam_levels(&hsg, false)?;
    let mask = sam_mask(&hsg, &trace.final_levels);
    Ok(RoughStage { hsg, trace, mask })
}

/// Localize candidate cells on the rough mask.
pub fn localize(
    image: &RgbImage,
    params: &PipelineParams,
) -> Result<Vec<Candidate>, PipelineError> {
    let rough = rough_stage(image, params)?;
    Ok(localize_cells(
        &rough.mask,
        params.min_nucleus_area,
        &params.radius_rule,
    )?)
}

/// One fully processed cell.
#[derive(Debug, Clone)]
pub struct DetectedCell {
    pub instance: CellInstance,
    pub context: SegmentationContext,
    pub shape: NucleusShape,
}

/// Pipeline outcome: processed cells in canonical order plus the candidates
/// that failed segmentation.
#[derive(Debug, Default)]
pub struct Detection {
    pub cells: Vec<DetectedCell>,
    pub skipped: Vec<(Roi, SegmentationError)>,
}

/// Run localization, segmentation and feature extraction. Candidates are
/// processed in parallel; output order is canonical (sorted by combined
/// rectangle position) regardless of scheduling.
pub fn detect_cells(image: &RgbImage, params: &PipelineParams) -> Result<Detection, PipelineError> {
    let candidates = localize(image, params)?;
    let results = parallel::map_indexed(candidates.len(), |i| {
        segment_cell(image, &candidates[i], &params.segmentation)
    });
    Ok(assemble(candidates, results))
}

/// Sequential variant of [`detect_cells`], for benchmarking against the
/// data-parallel path.
pub fn detect_cells_seq(
    image: &RgbImage,
    params: &PipelineParams,
) -> Result<Detection, PipelineError> {
    let candidates = localize(image, params)?;
    let results = parallel::map_indexed_seq(candidates.len(), |i| {
        segment_cell(image, &candidates[i], &params.segmentation)
    });
    Ok(assemble(candidates, results))
}

fn assemble(
    candidates: Vec<Candidate>,
    results: Vec<Result<SegmentationContext, SegmentationError>>,
) -> Detection {
    let mut detection = Detection::default();
    for (candidate, result) in candidates.into_iter().zip(results) {
        match result {
            Ok(context) => {
                let features = extract_features(
                    &context.patch_rgb,
                    &context.nucleus_mask,
                    &context.cell_mask,
                );
                let id = detection.cells.len();
                detection.cells.push(DetectedCell {
                    instance: CellInstance {
                        id,
                        combined_roi: candidate.combined_roi,
                        nucleus_mask: context.nucleus_mask.clone(),
                        cell_mask: context.cell_mask.clone(),
                        features,
                        label: None,
                    },
                    context,
                    shape: candidate.shape,
                });
            }
            Err(e) => detection.skipped.push((candidate.combined_roi, e)),
        }
    }
    detection
}

/// FNV-1a digest rendered as 16 hex digits; used for input digests in run
/// manifests.
pub fn digest_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xCBF29CE484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001B3);
    }
    format!("{hash:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::CellClass;
    use crate::synthgen::{generate_scene, CellSpec, SceneSpec, SplitMix64};

    fn scene(seed: u64, class: CellClass) -> (RgbImage, crate::synthgen::GroundTruth) {
        let mut rng = SplitMix64::new(seed);
        let mut spec = SceneSpec::new(seed, 384, 384);
        spec.cells
            .push(CellSpec::sample(class, (192, 192), &mut rng));
        spec.rbc_count = 4;
        spec.impurity_count = 3;
        generate_scene(&spec).unwrap()
    }

    #[test]
    fn single_cell_scene_detects_one_cell() {
        let (img, truth) = scene(11, CellClass::Mbe);
        let detection = detect_cells(&img, &PipelineParams::default()).unwrap();
        assert_eq!(detection.cells.len(), 1, "skipped: {:?}", detection.skipped);
        // The truth center falls inside exactly one combined rectangle.
        let bbox = truth.cells[0].bbox;
        let cx = (bbox.x0 + bbox.x1) / 2;
        let cy = (bbox.y0 + bbox.y1) / 2;
        let containing = detection
            .cells
            .iter()
            .filter(|c| c.instance.combined_roi.contains(cx, cy))
            .count();
        assert_eq!(containing, 1);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let (img, _) = scene(23, CellClass::Mls);
        let params = PipelineParams::default();
        let a = detect_cells(&img, &params).unwrap();
        let b = detect_cells_seq(&img, &params).unwrap();
        assert_eq!(a.cells.len(), b.cells.len());
        for (x, y) in a.cells.iter().zip(&b.cells) {
            assert_eq!(x.instance.features.values, y.instance.features.values);
            assert_eq!(x.instance.cell_mask, y.instance.cell_mask);
        }
    }

    #[test]
    fn blank_scene_detects_nothing() {
        let mut spec = SceneSpec::new(5, 256, 256);
        spec.rbc_count = 5;
        spec.impurity_count = 2;
        let (img, _) = generate_scene(&spec).unwrap();
        match detect_cells(&img, &PipelineParams::default()) {
            Ok(detection) => assert!(detection.cells.is_empty()),
            // A cell-free field can also fail the rough stage outright
            // (too few strata); both are acceptable "nothing found" outcomes.
            Err(PipelineError::Threshold(_)) => {}
            Err(e) => panic!("unexpected error {e:?}"),
        }
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(digest_hex(b""), "cbf29ce484222325");
        assert_eq!(digest_hex(b"bmc"), digest_hex(b"bmc"));
        assert_ne!(digest_hex(b"bmc"), digest_hex(b"bmd"));
    }
}
