//! Outer-boundary tracing (Moore neighborhood) and discrete contour metrics.

use super::{Mask, Region};

/// Closed outer boundary of one region, traced counterclockwise. Consecutive
/// points are 8-adjacent and the last point is 8-adjacent to the first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    pub points: Vec<(i64, i64)>,
}

impl Contour {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Twice the signed shoelace area; nonnegative for the traced orientation.
    pub fn signed_area2(&self) -> i64 {
        let n = self.points.len();
        let mut acc = 0i64;
        for i in 0..n {
            let (x0, y0) = self.points[i];
            let (x1, y1) = self.points[(i + 1) % n];
            acc += x0 * y1 - x1 * y0;
        }
        acc
    }

    pub fn centroid(&self) -> (f64, f64) {
        let n = self.points.len() as f64;
        let (mut sx, mut sy) = (0.0, 0.0);
        for &(x, y) in &self.points {
            sx += x as f64;
            sy += y as f64;
        }
        (sx / n, sy / n)
    }
}

// Clockwise-on-screen sweep order (y axis points down); tracing with this
// sweep yields the counterclockwise orientation used everywhere else.
const SWEEP: [(i64, i64); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

fn sweep_index(d: (i64, i64)) -> usize {
    SWEEP
        .iter()
        .position(|&s| s == d)
        .expect("offset must be an 8-neighbor")
}

/// Moore-neighbor tracing of the outer boundary of the 8-connected component
/// containing `region.seed_pixel`. Interior holes are ignored.
pub fn trace_outer_contour(mask: &Mask, region: &Region) -> Contour {
    let member = component_membership(mask, region.seed_pixel);
    let in_comp = |x: i64, y: i64| -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < mask.width()
            && (y as usize) < mask.height()
            && member[y as usize * mask.width() + x as usize]
    };

    let start = (region.seed_pixel.0 as i64, region.seed_pixel.1 as i64);
    if SWEEP
        .iter()
        .all(|&(dx, dy)| !in_comp(start.0 + dx, start.1 + dy))
    {
        return Contour {
            points: vec![start],
        };
    }

    // Walk (pixel, backtrack-direction) states until one repeats, then emit
    // the closed cycle. This terminates on every shape, unlike the textbook
    // start-state stopping rule which can miss the start pixel's original
    // entry direction on necked regions.
    let (w, h) = (mask.width(), mask.height());
    let mut seen = vec![false; w * h * 8];
    let mut path: Vec<((i64, i64), usize)> = Vec::new();
    // The seed is the first pixel in scan order, so its west neighbor is
    // guaranteed background.
    let mut p = start;
    let mut b = (start.0 - 1, start.1);

    let points = loop {
        let d0 = sweep_index((b.0 - p.0, b.1 - p.1));
        let key = (p.1 as usize * w + p.0 as usize) * 8 + d0;
        if seen[key] {
            let from = path
                .iter()
                .position(|&(pp, dd)| pp == p && dd == d0)
                .expect("repeated state must be on the path");
            break path[from..].iter().map(|&(pp, _)| pp).collect::<Vec<_>>();
        }
        seen[key] = true;
        path.push((p, d0));

        let mut next = None;
        let mut last_bg = b;
        for k in 1..=8 {
            let (dx, dy) = SWEEP[(d0 + k) % 8];
            let q = (p.0 + dx, p.1 + dy);
            if in_comp(q.0, q.1) {
                next = Some(q);
                break;
            }
            last_bg = q;
        }
        p = next.expect("pixel with a foreground neighbor");
        b = last_bg;
    };

    Contour { points }
}

fn component_membership(mask: &Mask, seed: (usize, usize)) -> Vec<bool> {
    let (w, h) = (mask.width(), mask.height());
    let mut member = vec![false; w * h];
    if !mask.is_set(seed.0, seed.1) {
        return member;
    }
    let mut queue = std::collections::VecDeque::new();
    member[seed.1 * w + seed.0] = true;
    queue.push_back(seed);
    while let Some((x, y)) = queue.pop_front() {
        for &(dx, dy) in SWEEP.iter() {
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            if mask.is_set_i(nx, ny) && !member[ny as usize * w + nx as usize] {
                member[ny as usize * w + nx as usize] = true;
                queue.push_back((nx as usize, ny as usize));
            }
        }
    }
    member
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourMetrics {
    /// Enclosed pixels (holes filled), in px^2.
    pub area: f64,
    /// Chain-code length: 1 per axis step, sqrt(2) per diagonal step.
    pub perimeter: f64,
}

/// Area and perimeter of a closed contour. A single-point contour has area 1
/// and perimeter 0 by convention.
pub fn contour_metrics(contour: &Contour) -> ContourMetrics {
    let n = contour.points.len();
    if n == 1 {
        return ContourMetrics {
            area: 1.0,
            perimeter: 0.0,
        };
    }

    let mut perimeter = 0.0;
    for i in 0..n {
        let (x0, y0) = contour.points[i];
        let (x1, y1) = contour.points[(i + 1) % n];
        let step = (x1 - x0).abs().max((y1 - y0).abs());
        debug_assert!(step <= 1, "consecutive contour points must be 8-adjacent");
        if (x1 - x0).abs() + (y1 - y0).abs() == 2 {
            perimeter += std::f64::consts::SQRT_2;
        } else {
            perimeter += 1.0;
        }
    }

    ContourMetrics {
        area: enclosed_area(contour) as f64,
        perimeter,
    }
}

// Pixels enclosed by the contour, boundary included. The exterior is flooded
// 4-connectedly from a 1-pixel pad ring; a 4-connected path cannot cross an
// 8-connected closed boundary, so everything unreached is inside.
fn enclosed_area(contour: &Contour) -> usize {
    let xs: Vec<i64> = contour.points.iter().map(|p| p.0).collect();
    let ys: Vec<i64> = contour.points.iter().map(|p| p.1).collect();
    let (x0, x1) = (*xs.iter().min().unwrap(), *xs.iter().max().unwrap());
    let (y0, y1) = (*ys.iter().min().unwrap(), *ys.iter().max().unwrap());
    let w = (x1 - x0 + 3) as usize;
    let h = (y1 - y0 + 3) as usize;

    let mut boundary = vec![false; w * h];
    for &(x, y) in &contour.points {
        boundary[(y - y0 + 1) as usize * w + (x - x0 + 1) as usize] = true;
    }

    let mut outside = vec![false; w * h];
    let mut queue = std::collections::VecDeque::new();
    outside[0] = true;
    queue.push_back((0usize, 0usize));
    while let Some((x, y)) = queue.pop_front() {
        for (dx, dy) in [(0i64, -1i64), (-1, 0), (1, 0), (0, 1)] {
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                continue;
            }
            let idx = ny as usize * w + nx as usize;
            if !outside[idx] && !boundary[idx] {
                outside[idx] = true;
                queue.push_back((nx as usize, ny as usize));
            }
        }
    }

    (0..w * h).filter(|&i| !outside[i]).count()
}
