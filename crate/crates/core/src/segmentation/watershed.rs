//! Marker-controlled watershed over the gradient magnitude of the weakening
//! image.

use super::poles::erase_split_ellipse;
use super::SegmentationError;
use crate::imgcore::{connected_components, Connectivity, GrayImage, Mask};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Initial marker set: 0 = unknown, 1 = non-cell seed, 2 = cell seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkerImage {
    width: usize,
    height: usize,
    labels: Vec<u8>,
}

impl MarkerImage {
    #[inline]
    pub fn label(&self, x: usize, y: usize) -> u8 {
        self.labels[y * self.width + x]
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Gray rendering for the debug dump: unknown 0, non-cell 127, cell 254.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage::from_vec(
            self.width,
            self.height,
            self.labels.iter().map(|&l| l * 127).collect(),
        )
    }
}

fn gradient_magnitude(img: &GrayImage) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let mut out = vec![0.0f64; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let gx = (img.get_clamped(x + 1, y) as f64 - img.get_clamped(x - 1, y) as f64) / 2.0;
            let gy = (img.get_clamped(x, y + 1) as f64 - img.get_clamped(x, y - 1) as f64) / 2.0;
            out[y as usize * w + x as usize] = (gx * gx + gy * gy).sqrt();
        }
    }
    out
}

/// Apply the split plan's ellipse cuts, mark the component containing the
/// nucleus center as the cell seed and every other remaining component as a
/// non-cell seed, then flood the gradient magnitude of `terrain_src` from the
/// seeds across the original body mask. The cell mask is the catchment of the
/// cell seed; with an empty plan it is the center's component unchanged.
pub fn build_markers_and_watershed(
    pdg: &Mask,
    plan: &[((i64, i64), (i64, i64))],
    nucleus_center: (f64, f64),
    terrain_src: &GrayImage,
) -> Result<(Mask, MarkerImage), SegmentationError> {
    let (w, h) = (pdg.width(), pdg.height());
    let mut work = pdg.clone();
    for (a, b) in plan {
        erase_split_ellipse(&mut work, *a, *b);
    }

    let anchor =
        super::snap_to_foreground(&work, nucleus_center).ok_or(SegmentationError::CenterOutside)?;
    let cc = connected_components(&work, Connectivity::Eight);
    let cell_id = cc.label(anchor.0, anchor.1);

    let mut labels = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let id = cc.label(x, y);
            if id != 0 {
                labels[y * w + x] = if id == cell_id { 2 } else { 1 };
            }
        }
    }
    let markers = MarkerImage {
        width: w,
        height: h,
        labels: labels.clone(),
    };

    // Meyer flooding ordered by (gradient, insertion sequence) for
    // deterministic catchments. The flood domain is the uncut body mask, so
    // pixels removed by the ellipse cuts are re-distributed along the
    // gradient ridge.
    let terrain = gradient_magnitude(terrain_src);
    let mut flooded = labels;
    let mut heap: BinaryHeap<Reverse<(u64, u64, usize, usize, u8)>> = BinaryHeap::new();
    let mut seq = 0u64;
    let push_neighbors = |x: usize,
                          y: usize,
                          label: u8,
                          heap: &mut BinaryHeap<Reverse<(u64, u64, usize, usize, u8)>>,
                          flooded: &Vec<u8>,
                          seq: &mut u64| {
        for (dx, dy) in [
            (-1i64, -1i64),
            (0, -1),
            (1, -1),
            (-1, 0),
            (1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ] {
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            if !pdg.is_set(nx, ny) || flooded[ny * w + nx] != 0 {
                continue;
            }
            // Non-negative f64 bits order like the values themselves.
            heap.push(Reverse((
                terrain[ny * w + nx].to_bits(),
                *seq,
                nx,
                ny,
                label,
            )));
            *seq += 1;
        }
    };

    for y in 0..h {
        for x in 0..w {
            let l = flooded[y * w + x];
            if l != 0 {
                push_neighbors(x, y, l, &mut heap, &flooded, &mut seq);
            }
        }
    }
    while let Some(Reverse((_, _, x, y, label))) = heap.pop() {
        if flooded[y * w + x] != 0 {
            continue;
        }
        flooded[y * w + x] = label;
        push_neighbors(x, y, label, &mut heap, &flooded, &mut seq);
    }

    let mut cell = Mask::new(w, h);
    for y in 0..h {
        for x in 0..w {
            if flooded[y * w + x] == 2 {
                cell.set(x, y, true);
            }
        }
    }
    Ok((cell, markers))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(w: usize, h: usize, cx: i64, cy: i64, r: i64) -> Mask {
        let mut m = Mask::new(w, h);
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                if (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r {
                    m.set(x as usize, y as usize, true);
                }
            }
        }
        m
    }

    #[test]
    fn empty_plan_is_identity_on_center_component() {
        let pdg = disk(40, 40, 20, 20, 12);
        let flat = GrayImage::new(40, 40);
        let (cell, markers) = build_markers_and_watershed(&pdg, &[], (20.0, 20.0), &flat).unwrap();
        assert_eq!(cell, pdg);
        assert_eq!(markers.label(20, 20), 2);
        assert_eq!(markers.label(0, 0), 0);
    }

    #[test]
    fn detached_component_becomes_non_cell() {
        let pdg = disk(60, 30, 15, 15, 8).union(&disk(60, 30, 45, 15, 8));
        let flat = GrayImage::new(60, 30);
        let (cell, markers) = build_markers_and_watershed(&pdg, &[], (15.0, 15.0), &flat).unwrap();
        assert!(cell.is_set(15, 15));
        assert!(!cell.is_set(45, 15));
        assert_eq!(markers.label(45, 15), 1);
    }

    #[test]
    fn center_outside_everything_is_an_error() {
        let pdg = Mask::new(10, 10);
        let flat = GrayImage::new(10, 10);
        let err = build_markers_and_watershed(&pdg, &[], (5.0, 5.0), &flat).unwrap_err();
        assert_eq!(err, SegmentationError::CenterOutside);
    }

    #[test]
    fn flood_tiles_the_domain() {
        // Fused disks, cut by a plan: every body pixel ends in exactly one
        // catchment.
        let pdg = disk(70, 40, 22, 20, 14).union(&disk(70, 40, 48, 20, 14));
        let mut terrain = GrayImage::new(70, 40);
        for y in 0..40 {
            for x in 0..70 {
                // Ridge along the fusion plane.
                let d = (x as i64 - 35).abs();
                terrain.set(x, y, (200 - d.min(60) * 3) as u8);
            }
        }
        let plan = vec![((35i64, 4i64), (35i64, 36i64))];
        let (cell, markers) =
            build_markers_and_watershed(&pdg, &plan, (22.0, 20.0), &terrain).unwrap();
        assert!(cell.is_set(22, 20));
        assert!(!cell.is_set(48, 20));
        assert_eq!(markers.label(48, 20), 1);
        // Domain pixels are all assigned.
        assert!(cell.count() > 0);
    }
}
