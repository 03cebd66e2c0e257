//! Precise segmentation of one candidate cell: refined nucleus threshold,
//! non-cell masking, K-Means body extraction, pole-based adhesion splitting
//! and marker-controlled watershed.

mod kmeans;
mod poles;
mod region_grow;
mod watershed;

pub use kmeans::{initial_bmc_mask, kmeans3};
pub use poles::{contour_start_point, detect_poles, split_plan, Pole};
pub use region_grow::region_grow;
pub use watershed::{build_markers_and_watershed, MarkerImage};

use crate::colortransforms::{
    bsg_transform, hsg_transform, nwig_from_texture, particle_report, texture_image, BsgParams,
    HsgParams, ParticleReport,
};
use crate::imgcore::{connected_components, fill_holes, Connectivity, GrayImage, Mask, RgbImage};
use crate::localization::Candidate;
use crate::thresholding::{otsu_threshold_masked, sam_levels, weighted_threshold};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SegmentationError {
    #[error("fewer than three distinct gray values available for clustering")]
    DegenerateClusters,
    #[error("no cell body remains after clustering")]
    EmptyCell,
    #[error("nucleus center lies outside every remaining component")]
    CenterOutside,
}

/// Tunables of the segmentation stage. Defaults follow the pipeline's
/// standing parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationParams {
    pub hsg: HsgParams,
    /// Weight of the two threshold combinations.
    pub gamma: f64,
    /// Components smaller than this are dropped from the refined nucleus.
    pub min_nucleus_area: usize,
    /// Minimum area of a uniform-texture region.
    pub nwig_min_area: usize,
    /// Minimum area of a cytoplasmic white particle.
    pub particle_min_area: usize,
    /// Particle count at which nucleus/cytoplasm colors count as inconsistent.
    pub consistency_count: usize,
    /// Gray tolerance of the seeded region growing.
    pub grow_tolerance: f64,
    /// Seed points sampled on the nucleus circumcircle.
    pub circumcircle_seeds: usize,
    /// Fixed blend weight for the weakening transform; None selects it from
    /// the particle-consistency test.
    pub lambda_override: Option<f64>,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        SegmentationParams {
            hsg: HsgParams::default(),
            gamma: 0.5,
            min_nucleus_area: 30,
            nwig_min_area: 200,
            particle_min_area: 4,
            consistency_count: 5,
            grow_tolerance: 12.0,
            circumcircle_seeds: 64,
            lambda_override: None,
        }
    }
}

/// All per-stage planes of one segmented cell, kept for the debug dump.
#[derive(Debug, Clone)]
pub struct SegmentationContext {
    pub patch_rgb: RgbImage,
    pub hsg: GrayImage,
    pub hsg_m: GrayImage,
    pub bsg: GrayImage,
    pub teig: GrayImage,
    pub nwig: Mask,
    pub cwpig: Mask,
    pub kmimg: GrayImage,
    pub nucleus_mask: Mask,
    pub non_bmc_mask: Mask,
    pub pdg_mask: Mask,
    pub markers: MarkerImage,
    pub cell_mask: Mask,
    /// Set when the refined nucleus threshold degenerated and the rough mask
    /// was used unchanged.
    pub nucleus_fallback: bool,
    pub lambda: f64,
}

/// Refined nucleus segmentation. The rough mask is zeroed out of the HSG
/// patch, stepwise averaging and Otsu levels of the remainder are combined
/// into a first threshold, the levels are re-estimated on the pixels above it
/// and combined into the final threshold. Pixels above the final threshold
/// join the rough mask; holes are filled, specks dropped, and only components
/// touching the rough mask are kept.
///
/// Returns the refined mask and a flag that is true when the level estimate
/// degenerated and the rough mask was returned unchanged.
pub fn segment_nucleus(
    patch: &RgbImage,
    coarse: &Mask,
    params: &SegmentationParams,
) -> (Mask, bool) {
    let hsg = hsg_transform(patch, &params.hsg);
    let (refined, fallback) = refine_nucleus(&hsg, coarse, params);
    (refined, fallback)
}

fn refine_nucleus(hsg: &GrayImage, coarse: &Mask, params: &SegmentationParams) -> (Mask, bool) {
    let hsg_m = hsg.zero_where(coarse);
    let nonzero = Mask::from_vec(
        hsg_m.width(),
        hsg_m.height(),
        hsg_m
            .data()
            .iter()
            .map(|&v| if v > 0 { 255 } else { 0 })
            .collect(),
    );

    let trace = match sam_levels(&hsg_m, true) {
        Ok(t) => t,
        Err(_) => return (coarse.clone(), true),
    };
    let otsu = match otsu_threshold_masked(&hsg_m, &nonzero) {
        Ok(t) => t,
        Err(_) => return (coarse.clone(), true),
    };
    let first = weighted_threshold(trace.final_levels.cytoplasm, otsu as f64, params.gamma);

    let initial = Mask::from_vec(
        hsg_m.width(),
        hsg_m.height(),
        hsg_m
            .data()
            .iter()
            .map(|&v| if (v as f64) >= first { 255 } else { 0 })
            .collect(),
    );
    let trace2 = match sam_levels(&hsg_m.keep_only(&initial), true) {
        Ok(t) => t,
        Err(_) => return (coarse.clone(), true),
    };
    let final_thr = weighted_threshold(
        trace2.final_levels.nucleus,
        trace2.final_levels.cytoplasm,
        params.gamma,
    );

    let grown = Mask::from_vec(
        hsg_m.width(),
        hsg_m.height(),
        hsg_m
            .data()
            .iter()
            .map(|&v| if (v as f64) >= final_thr { 255 } else { 0 })
            .collect(),
    );
    let unioned = fill_holes(&grown.union(coarse));

    // Impurity removal: drop specks, then keep only components that belong to
    // this candidate's rough nucleus.
    let cc = connected_components(&unioned, Connectivity::Eight);
    let mut out = Mask::new(unioned.width(), unioned.height());
    for region in &cc.regions {
        if region.pixel_count < params.min_nucleus_area {
            continue;
        }
        let bb = region.bounding_box;
        let mut touches = false;
        'scan: for y in bb.y0..=bb.y1 {
            for x in bb.x0..=bb.x1 {
                if cc.label(x, y) == region.id && coarse.is_set(x, y) {
                    touches = true;
                    break 'scan;
                }
            }
        }
        if !touches {
            continue;
        }
        for y in bb.y0..=bb.y1 {
            for x in bb.x0..=bb.x1 {
                if cc.label(x, y) == region.id {
                    out.set(x, y, true);
                }
            }
        }
    }
    if out.is_empty() {
        return (coarse.clone(), true);
    }
    (out, false)
}

/// Union of the four non-cell sources: dark pixels under the Otsu threshold
/// of the nucleus-free weakening image, uniform-texture regions, zero pixels
/// when colors are consistent, and regions grown from circumcircle seeds that
/// already lie in that union. The nucleus itself is excluded throughout.
pub fn non_bmc_mask(
    bsg: &GrayImage,
    nucleus: &Mask,
    nwig: &Mask,
    particle: &ParticleReport,
    center: (f64, f64),
    radius: f64,
    params: &SegmentationParams,
) -> Mask {
    let (w, h) = (bsg.width(), bsg.height());
    let mut acc = Mask::new(w, h);
    let non_nucleus = Mask::from_vec(
        w,
        h,
        nucleus
            .data()
            .iter()
            .map(|&v| if v == 0 { 255 } else { 0 })
            .collect(),
    );

    if let Ok(tb) = otsu_threshold_masked(bsg, &non_nucleus) {
        for y in 0..h {
            for x in 0..w {
                if !nucleus.is_set(x, y) && bsg.get(x, y) < tb {
                    acc.set(x, y, true);
                }
            }
        }
    }

    acc = acc.union(&nwig.subtract(nucleus));

    if particle.colors_consistent {
        for y in 0..h {
            for x in 0..w {
                if !nucleus.is_set(x, y) && bsg.get(x, y) == 0 {
                    acc.set(x, y, true);
                }
            }
        }
    }

    let mut seeds = Vec::new();
    for k in 0..params.circumcircle_seeds {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / params.circumcircle_seeds as f64;
        let x = center.0 + radius * theta.cos();
        let y = center.1 + radius * theta.sin();
        if x < 0.0 || y < 0.0 {
            continue;
        }
        let (xi, yi) = (x.round() as usize, y.round() as usize);
        if xi < w && yi < h && acc.is_set(xi, yi) && !nucleus.is_set(xi, yi) {
            seeds.push((xi, yi));
        }
    }
    if !seeds.is_empty() {
        let grown = region_grow(bsg, &seeds, params.grow_tolerance);
        acc = acc.union(&grown.subtract(nucleus));
    }
    acc
}

/// Nearest foreground pixel to a real-valued point, ties broken by scan
/// order.
pub(crate) fn snap_to_foreground(mask: &Mask, center: (f64, f64)) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), f64)> = None;
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if !mask.is_set(x, y) {
                continue;
            }
            let d = (x as f64 - center.0).powi(2) + (y as f64 - center.1).powi(2);
            let better = match best {
                None => true,
                Some((_, bd)) => d < bd,
            };
            if better {
                best = Some(((x, y), d));
            }
        }
    }
    best.map(|(p, _)| p)
}

fn centroid_of(mask: &Mask) -> (f64, f64) {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.is_set(x, y) {
                sx += x as f64;
                sy += y as f64;
                n += 1.0;
            }
        }
    }
    (sx / n, sy / n)
}

/// Run the whole segmentation stage for one localized candidate.
pub fn segment_cell(
    image: &RgbImage,
    candidate: &Candidate,
    params: &SegmentationParams,
) -> Result<SegmentationContext, SegmentationError> {
    let roi = candidate.combined_roi;
    let patch = image.crop(roi);
    let coarse = candidate.region_mask.crop(roi);

    let hsg = hsg_transform(&patch, &params.hsg);
    let hsg_m = hsg.zero_where(&coarse);
    let (nucleus_mask, nucleus_fallback) = refine_nucleus(&hsg, &coarse, params);
    if nucleus_mask.is_empty() {
        return Err(SegmentationError::EmptyCell);
    }
    let nucleus_center = centroid_of(&nucleus_mask);

    // Color-consistency probe on the plain weakening image.
    let bsg_probe = bsg_transform(&patch, &BsgParams { lambda: 1.0 });
    let background = match otsu_threshold_masked(
        &bsg_probe,
        &Mask::from_vec(
            patch.width(),
            patch.height(),
            nucleus_mask
                .data()
                .iter()
                .map(|&v| if v == 0 { 255 } else { 0 })
                .collect(),
        ),
    ) {
        Ok(tb) => Mask::from_vec(
            patch.width(),
            patch.height(),
            bsg_probe
                .data()
                .iter()
                .map(|&v| if v < tb { 255 } else { 0 })
                .collect(),
        ),
        Err(_) => Mask::new(patch.width(), patch.height()),
    };
    let teig = texture_image(&bsg_probe.zero_where(&background));
    let nwig = nwig_from_texture(&teig, params.nwig_min_area);
    let particle = particle_report(
        &bsg_probe,
        &nwig,
        params.particle_min_area,
        params.consistency_count,
    );

    let lambda = params
        .lambda_override
        .unwrap_or(if particle.colors_consistent { 1.0 } else { 0.5 });
    let bsg = if lambda == 1.0 {
        bsg_probe.clone()
    } else {
        bsg_transform(&patch, &BsgParams { lambda })
    };

    let non_bmc = non_bmc_mask(
        &bsg,
        &nucleus_mask,
        &nwig,
        &particle,
        nucleus_center,
        candidate.shape.equivalent_radius,
        params,
    );

    // Cluster the whole zeroed image: the blanked non-cell region forms the
    // darkest category, which the body-mask step then eliminates.
    let clustered = bsg.zero_where(&non_bmc);
    let (kmimg, _means) = kmeans3(&clustered, &Mask::new(patch.width(), patch.height()))?;
    let mut pdg = initial_bmc_mask(&kmimg)?;

    // The largest component is not necessarily this candidate's: fall back to
    // the component under the nucleus center when they disagree.
    let snapped =
        snap_to_foreground(&nucleus_mask, nucleus_center).ok_or(SegmentationError::EmptyCell)?;
    if !pdg.is_set(snapped.0, snapped.1) {
        let body = Mask::from_vec(
            kmimg.width(),
            kmimg.height(),
            kmimg
                .data()
                .iter()
                .map(|&v| if v >= 1 { 255 } else { 0 })
                .collect(),
        );
        let cc = connected_components(&body, Connectivity::Eight);
        let id = cc.label(snapped.0, snapped.1);
        if id == 0 {
            return Err(SegmentationError::CenterOutside);
        }
        pdg = fill_holes(&cc.region_mask(id));
    }

    let plan = {
        let cc = connected_components(&pdg, Connectivity::Eight);
        let region = cc
            .regions
            .iter()
            .find(|r| cc.label(snapped.0, snapped.1) == r.id)
            .cloned()
            .ok_or(SegmentationError::CenterOutside)?;
        let contour = crate::imgcore::trace_outer_contour(&pdg, &region);
        let start = contour_start_point(&contour, nucleus_center);
        let poles = detect_poles(&contour, nucleus_center, start);
        if poles.len() > 2 {
            split_plan(&pdg, &poles, nucleus_center)
        } else {
            Vec::new()
        }
    };

    let (cell_mask, markers) = build_markers_and_watershed(&pdg, &plan, nucleus_center, &bsg)?;
    let cell_mask = cell_mask.union(&nucleus_mask);

    Ok(SegmentationContext {
        patch_rgb: patch,
        hsg,
        hsg_m,
        bsg,
        teig,
        nwig,
        cwpig: particle.particle_mask.clone(),
        kmimg,
        nucleus_mask,
        non_bmc_mask: non_bmc,
        pdg_mask: pdg,
        markers,
        cell_mask,
        nucleus_fallback,
        lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk_patch() -> (RgbImage, Mask) {
        // 60x60 patch: dark purple nucleus disk r=10 at center, pink
        // cytoplasm ring r=20, pale background, with a deterministic dither
        // so the gray strata have realistic spread.
        let mut patch = RgbImage::new(60, 60);
        let mut coarse = Mask::new(60, 60);
        for y in 0..60i64 {
            for x in 0..60i64 {
                let d2 = (x - 30) * (x - 30) + (y - 30) * (y - 30);
                let (r, g, b) = if d2 <= 100 {
                    (90, 40, 130)
                } else if d2 <= 400 {
                    (225, 160, 185)
                } else {
                    (245, 240, 245)
                };
                let h = (x as u64).wrapping_mul(0x9E3779B1) ^ (y as u64).wrapping_mul(0x85EBCA77);
                let n = ((h >> 7) % 5) as i64 - 2;
                let jitter = |v: i64| (v + n).clamp(0, 255) as u8;
                patch.set(x as usize, y as usize, (jitter(r), jitter(g), jitter(b)));
                if d2 <= 100 {
                    coarse.set(x as usize, y as usize, true);
                }
            }
        }
        (patch, coarse)
    }

    #[test]
    fn refined_nucleus_stays_close_to_truth() {
        let (patch, coarse) = disk_patch();
        let (refined, fallback) = segment_nucleus(&patch, &coarse, &SegmentationParams::default());
        assert!(!fallback);
        assert!(
            refined.dice(&coarse) >= 0.90,
            "dice {}",
            refined.dice(&coarse)
        );
    }

    #[test]
    fn full_coverage_coarse_mask_falls_back() {
        let (patch, _) = disk_patch();
        let mut coarse = Mask::new(60, 60);
        for y in 0..60 {
            for x in 0..60 {
                coarse.set(x, y, true);
            }
        }
        let (refined, fallback) = segment_nucleus(&patch, &coarse, &SegmentationParams::default());
        assert!(fallback);
        assert_eq!(refined, coarse);
    }

    #[test]
    fn weighted_threshold_shape_matches_contract() {
        // gamma=0.5 with cytoplasm level 100 and auxiliary threshold 140.
        assert_eq!(weighted_threshold(100.0, 140.0, 0.5), 120.0);
    }

    #[test]
    fn non_bmc_mask_covers_background_not_nucleus() {
        let (patch, coarse) = disk_patch();
        let params = SegmentationParams::default();
        let bsg = bsg_transform(&patch, &BsgParams { lambda: 1.0 });
        let teig = texture_image(&bsg);
        let nwig = nwig_from_texture(&teig, params.nwig_min_area);
        let particle = particle_report(
            &bsg,
            &nwig,
            params.particle_min_area,
            params.consistency_count,
        );
        let mask = non_bmc_mask(&bsg, &coarse, &nwig, &particle, (30.0, 30.0), 32.0, &params);
        // Background corner is non-cell, nucleus center is not.
        assert!(mask.is_set(1, 1));
        assert!(!mask.is_set(30, 30));
    }

    #[test]
    fn snap_prefers_nearest() {
        let mut m = Mask::new(10, 10);
        m.set(2, 2, true);
        m.set(8, 8, true);
        assert_eq!(snap_to_foreground(&m, (3.0, 3.0)), Some((2, 2)));
        assert_eq!(snap_to_foreground(&m, (7.0, 7.0)), Some((8, 8)));
        assert_eq!(snap_to_foreground(&Mask::new(4, 4), (1.0, 1.0)), None);
    }
}
