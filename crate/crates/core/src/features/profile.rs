//! Erosion-profile, skeleton, optical-density and box-counting features.

use crate::imgcore::{connected_components, erode, skeletonize, Connectivity, GrayImage, Mask};
use crate::thresholding::otsu_threshold_masked;

/// Result of repeatedly eroding the nucleus with the 3x3 element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErosionProfile {
    /// First erosion count at which two or more components appear; 0 when the
    /// mask empties without ever splitting.
    pub first_split_step: usize,
    /// Erosion count at which the mask becomes empty.
    pub empty_step: usize,
    /// Maximum component count observed over all steps (lobe-count proxy).
    pub max_components: usize,
    /// Split step over empty step; 0 when no split occurred.
    pub adhesion_degree: f64,
}

/// Erode step by step until the mask empties, tracking component counts.
pub fn erosion_profile(mask: &Mask) -> ErosionProfile {
    let mut current = mask.clone();
    let mut step = 0usize;
    let mut first_split = 0usize;
    let mut max_components = 0usize;
    loop {
        let count = connected_components(&current, Connectivity::Eight)
            .regions
            .len();
        max_components = max_components.max(count);
        if count >= 2 && first_split == 0 {
            first_split = step;
        }
        if count == 0 {
            break;
        }
        current = erode(&current, 1);
        step += 1;
    }
    ErosionProfile {
        first_split_step: first_split,
        empty_step: step,
        max_components,
        adhesion_degree: if first_split == 0 || step == 0 {
            0.0
        } else {
            first_split as f64 / step as f64
        },
    }
}

/// Skeleton length and thinning ratio: (lk, lk / area).
pub fn skeleton_features(mask: &Mask) -> (f64, f64) {
    let lk = skeletonize(mask).count() as f64;
    let area = mask.count().max(1) as f64;
    (lk, lk / area)
}

/// Integrated/mean/variance optical density over the masked region, with
/// OD(p) = log10(255 / max(value, 1)).
pub fn optical_density(channel: &GrayImage, mask: &Mask) -> (f64, f64, f64) {
    let (mut sum, mut sum2, mut n) = (0.0f64, 0.0f64, 0.0f64);
    for y in 0..channel.height() {
        for x in 0..channel.width() {
            if mask.is_set(x, y) {
                let v = channel.get(x, y).max(1) as f64;
                let od = (255.0 / v).log10();
                sum += od;
                sum2 += od * od;
                n += 1.0;
            }
        }
    }
    if n == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let mean = sum / n;
    (sum, mean, (sum2 / n - mean * mean).max(0.0))
}

/// Box-counting fractal dimension of the Otsu-binarized channel within the
/// cell, over box sizes {2, 4, 8, 16} anchored at the cell's bounding box.
/// Returns (slope, valid); degenerate inputs give the 0 sentinel.
pub fn fractal_dimension(channel: &GrayImage, cell: &Mask) -> (f64, bool) {
    let threshold = match otsu_threshold_masked(channel, cell) {
        Ok(t) => t,
        Err(_) => return (0.0, false),
    };
    let mut fg = Vec::new();
    let (mut x0, mut y0) = (usize::MAX, usize::MAX);
    for y in 0..channel.height() {
        for x in 0..channel.width() {
            if cell.is_set(x, y) && channel.get(x, y) > threshold {
                fg.push((x, y));
                x0 = x0.min(x);
                y0 = y0.min(y);
            }
        }
    }
    if fg.is_empty() {
        return (0.0, false);
    }

    let sizes = [2usize, 4, 8, 16];
    let mut xs = Vec::with_capacity(4);
    let mut ys = Vec::with_capacity(4);
    for &s in &sizes {
        let mut boxes = std::collections::BTreeSet::new();
        for &(x, y) in &fg {
            boxes.insert(((x - x0) / s, (y - y0) / s));
        }
        xs.push((1.0 / s as f64).ln());
        ys.push((boxes.len() as f64).ln());
    }
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    let ym = ys.iter().sum::<f64>() / ys.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..xs.len() {
        num += (xs[k] - xm) * (ys[k] - ym);
        den += (xs[k] - xm) * (xs[k] - xm);
    }
    if den == 0.0 {
        return (0.0, false);
    }
    (num / den, true)
}
