//! Connected-component labeling over binary masks.

use super::{Mask, Roi};

/// Neighborhood used when deciding whether two foreground pixels touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    pub(crate) fn offsets(self) -> &'static [(i64, i64)] {
        match self {
            Connectivity::Four => &[(0, -1), (-1, 0), (1, 0), (0, 1)],
            Connectivity::Eight => &[
                (-1, -1),
                (0, -1),
                (1, -1),
                (-1, 0),
                (1, 0),
                (-1, 1),
                (0, 1),
                (1, 1),
            ],
        }
    }
}

/// One labeled region. The seed pixel is the first pixel of the region in
/// row-major scan order (its topmost-leftmost pixel).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub id: u32,
    pub pixel_count: usize,
    pub bounding_box: Roi,
    pub seed_pixel: (usize, usize),
}

/// Label image plus per-region bookkeeping. Labels start at 1; background is 0.
#[derive(Debug, Clone)]
pub struct ConnectedComponents {
    pub regions: Vec<Region>,
    pub labels: Vec<u32>,
    pub width: usize,
    pub height: usize,
}

impl ConnectedComponents {
    #[inline]
    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    /// Mask of a single region.
    pub fn region_mask(&self, id: u32) -> Mask {
        let mut m = Mask::new(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.label(x, y) == id {
                    m.set(x, y, true);
                }
            }
        }
        m
    }
}

/// BFS labeling in row-major scan order, so region ids and seed pixels are
/// deterministic for a given mask.
pub fn connected_components(mask: &Mask, connectivity: Connectivity) -> ConnectedComponents {
    let (w, h) = (mask.width(), mask.height());
    let mut labels = vec![0u32; w * h];
    let mut regions = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    let offsets = connectivity.offsets();

    for sy in 0..h {
        for sx in 0..w {
            if !mask.is_set(sx, sy) || labels[sy * w + sx] != 0 {
                continue;
            }
            let id = regions.len() as u32 + 1;
            let (mut x0, mut y0, mut x1, mut y1) = (sx, sy, sx, sy);
            let mut count = 0usize;
            labels[sy * w + sx] = id;
            queue.push_back((sx, sy));
            while let Some((x, y)) = queue.pop_front() {
                count += 1;
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
                for &(dx, dy) in offsets {
                    let nx = x as i64 + dx;
                    let ny = y as i64 + dy;
                    if mask.is_set_i(nx, ny) {
                        let (nx, ny) = (nx as usize, ny as usize);
                        if labels[ny * w + nx] == 0 {
                            labels[ny * w + nx] = id;
                            queue.push_back((nx, ny));
                        }
                    }
                }
            }
            regions.push(Region {
                id,
                pixel_count: count,
                bounding_box: Roi::new(x0, y0, x1, y1),
                seed_pixel: (sx, sy),
            });
        }
    }

    ConnectedComponents {
        regions,
        labels,
        width: w,
        height: h,
    }
}
