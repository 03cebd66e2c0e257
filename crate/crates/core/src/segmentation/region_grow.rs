//! Seeded region growing with a running-mean admission rule.

use crate::imgcore::{GrayImage, Mask};

/// Breadth-first growth from each seed over 4-neighbors. A pixel is admitted
/// when its value lies within `tolerance` of the running mean of the pixels
/// admitted so far for that seed; each pixel is considered once per seed.
/// The result is the union over all seeds.
pub fn region_grow(img: &GrayImage, seeds: &[(usize, usize)], tolerance: f64) -> Mask {
    let (w, h) = (img.width(), img.height());
    let mut out = Mask::new(w, h);
    for &(sx, sy) in seeds {
        assert!(sx < w && sy < h, "seed outside image");
        let mut considered = vec![false; w * h];
        let mut queue = std::collections::VecDeque::new();
        let mut sum = img.get(sx, sy) as f64;
        let mut count = 1.0f64;
        considered[sy * w + sx] = true;
        out.set(sx, sy, true);
        queue.push_back((sx, sy));
        while let Some((x, y)) = queue.pop_front() {
            for (dx, dy) in [(0i64, -1i64), (-1, 0), (1, 0), (0, 1)] {
                let nx = x as i64 + dx;
                let ny = y as i64 + dy;
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let (nx, ny) = (nx as usize, ny as usize);
                if considered[ny * w + nx] {
                    continue;
                }
                considered[ny * w + nx] = true;
                let v = img.get(nx, ny) as f64;
                if (v - sum / count).abs() <= tolerance {
                    sum += v;
                    count += 1.0;
                    out.set(nx, ny, true);
                    queue.push_back((nx, ny));
                }
            }
        }
    }
    out
}
