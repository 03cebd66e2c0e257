//! Two-stage localization: nucleus rectangles from the rough mask, a
//! cytoplasm rectangle from nucleus shape, and their bounding union.

use crate::imgcore::{
    connected_components, contour_metrics, trace_outer_contour, Connectivity, Mask, Roi,
};

pub use crate::imgcore::Roi as NucleusRoi;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LocalizationError {
    #[error("degenerate nucleus shape: zero perimeter")]
    DegenerateShape,
}

/// Geometry of one (possibly merged) nucleus region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NucleusShape {
    pub area: f64,
    pub perimeter: f64,
    pub circularity: f64,
    pub reference_radius: f64,
    pub equivalent_radius: f64,
    pub center: (f64, f64),
}

/// Circularity thresholds selecting the cytoplasm search radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusRule {
    pub t1: f64,
    pub t2: f64,
}

impl Default for RadiusRule {
    fn default() -> Self {
        RadiusRule { t1: 0.46, t2: 0.85 }
    }
}

impl RadiusRule {
    /// Piecewise factor of the equivalent radius. Boundary values go to the
    /// middle band at `t1` and the top band at `t2`.
    pub fn factor(&self, circularity: f64) -> f64 {
        if circularity < self.t1 {
            2.6
        } else if circularity < self.t2 {
            2.3
        } else {
            1.6
        }
    }
}

impl NucleusShape {
    /// Builds shape metrics from summed area/perimeter and a pixel centroid,
    /// applying the piecewise equivalent-radius rule.
    pub fn from_metrics(
        area: f64,
        perimeter: f64,
        center: (f64, f64),
        rule: &RadiusRule,
    ) -> Result<NucleusShape, LocalizationError> {
        if perimeter <= 0.0 || area <= 0.0 {
            return Err(LocalizationError::DegenerateShape);
        }
        let circularity = 4.0 * std::f64::consts::PI * area / (perimeter * perimeter);
        let reference_radius = perimeter / (2.0 * std::f64::consts::PI);
        Ok(NucleusShape {
            area,
            perimeter,
            circularity,
            reference_radius,
            equivalent_radius: rule.factor(circularity) * reference_radius,
            center,
        })
    }
}

/// One localized candidate cell.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub nucleus_roi: Roi,
    pub cytoplasm_roi: Roi,
    pub combined_roi: Roi,
    pub shape: NucleusShape,
    /// Coarse nucleus pixels of this candidate in image coordinates.
    pub region_mask: Mask,
}

fn centers2(r: &Roi) -> (usize, usize) {
    (r.x0 + r.x1, r.y0 + r.y1)
}

fn center_in_overlap(r: &Roi, overlap: &Roi) -> bool {
    let (cx2, cy2) = centers2(r);
    cx2 >= 2 * overlap.x0 && cx2 <= 2 * overlap.x1 && cy2 >= 2 * overlap.y0 && cy2 <= 2 * overlap.y1
}

fn mergeable(a: &Roi, b: &Roi) -> bool {
    match a.overlap(b) {
        Some(ov) => center_in_overlap(a, &ov) && center_in_overlap(b, &ov),
        None => false,
    }
}

/// Merge rectangles to a fixpoint: two rectangles fuse into their bounding
/// union when they overlap and both centers fall inside the overlap. The
/// second element of each result lists the indices of the inputs it absorbed.
pub fn merge_rois(rois: &[Roi]) -> Vec<(Roi, Vec<usize>)> {
    let mut items: Vec<(Roi, Vec<usize>)> = rois
        .iter()
        .enumerate()
        .map(|(i, &r)| (r, vec![i]))
        .collect();
    items.sort_by_key(|(r, _)| (r.y0, r.x0, r.y1, r.x1));
    'outer: loop {
        for i in 0..items.len() {
            for j in i + 1..items.len() {
                if mergeable(&items[i].0, &items[j].0) {
                    let (roi_j, mut members_j) = items.remove(j);
                    items[i].0 = items[i].0.combine(&roi_j);
                    items[i].1.append(&mut members_j);
                    continue 'outer;
                }
            }
        }
        break;
    }
    for (_, members) in &mut items {
        members.sort_unstable();
    }
    items.sort_by_key(|(r, _)| (r.y0, r.x0, r.y1, r.x1));
    items
}

/// Circumscribed rectangles of the mask's nucleus contours, merged to a
/// fixpoint. Regions smaller than `min_area` pixels are dropped as specks.
pub fn nucleus_rois(mask: &Mask, min_area: usize) -> Vec<Roi> {
    let cc = connected_components(mask, Connectivity::Eight);
    let boxes: Vec<Roi> = cc
        .regions
        .iter()
        .filter(|r| r.pixel_count >= min_area)
        .map(|r| r.bounding_box)
        .collect();
    merge_rois(&boxes).into_iter().map(|(r, _)| r).collect()
}

/// Square circumscribing the circle of the equivalent radius at the nucleus
/// center, clipped to the image.
pub fn cytoplasm_roi(
    shape: &NucleusShape,
    width: usize,
    height: usize,
) -> Result<Roi, LocalizationError> {
    if shape.perimeter <= 0.0 {
        return Err(LocalizationError::DegenerateShape);
    }
    let re = shape.equivalent_radius;
    let x0 = (shape.center.0 - re).floor().max(0.0) as usize;
    let y0 = (shape.center.1 - re).floor().max(0.0) as usize;
    let x1 = (shape.center.0 + re).ceil().min(width as f64 - 1.0) as usize;
    let y1 = (shape.center.1 + re).ceil().min(height as f64 - 1.0) as usize;
    Ok(Roi::new(x0.min(x1), y0.min(y1), x1.max(x0), y1.max(y0)))
}

/// Bounding union of the nucleus and cytoplasm rectangles.
pub fn combine_rois(nucleus: &Roi, cytoplasm: &Roi) -> Roi {
    nucleus.combine(cytoplasm)
}

/// Full localization: rough mask in, candidates out, sorted by the combined
/// rectangle's top-left corner. Shape metrics of merged groups are recomputed
/// over the union of their member regions.
pub fn localize_cells(
    mask: &Mask,
    min_area: usize,
    rule: &RadiusRule,
) -> Result<Vec<Candidate>, LocalizationError> {
    let (w, h) = (mask.width(), mask.height());
    let cc = connected_components(mask, Connectivity::Eight);
    let kept: Vec<usize> = (0..cc.regions.len())
        .filter(|&i| cc.regions[i].pixel_count >= min_area)
        .collect();
    let boxes: Vec<Roi> = kept.iter().map(|&i| cc.regions[i].bounding_box).collect();

    let mut out = Vec::new();
    for (nucleus_roi, members) in merge_rois(&boxes) {
        let mut region_mask = Mask::new(w, h);
        let mut area = 0.0;
        let mut perimeter = 0.0;
        let (mut sx, mut sy, mut count) = (0.0f64, 0.0f64, 0.0f64);
        for &m in &members {
            let region = &cc.regions[kept[m]];
            let metrics = contour_metrics(&trace_outer_contour(mask, region));
            area += metrics.area;
            perimeter += metrics.perimeter;
            let bb = region.bounding_box;
            for y in bb.y0..=bb.y1 {
                for x in bb.x0..=bb.x1 {
                    if cc.label(x, y) == region.id {
                        region_mask.set(x, y, true);
                        sx += x as f64;
                        sy += y as f64;
                        count += 1.0;
                    }
                }
            }
        }
        let shape = NucleusShape::from_metrics(area, perimeter, (sx / count, sy / count), rule)?;
        let cyto = cytoplasm_roi(&shape, w, h)?;
        let combined = combine_rois(&nucleus_roi, &cyto);
        out.push(Candidate {
            nucleus_roi,
            cytoplasm_roi: cyto,
            combined_roi: combined,
            shape,
            region_mask,
        });
    }
    out.sort_by_key(|c| (c.combined_roi.y0, c.combined_roi.x0));
    Ok(out)
}
