//! Binary morphology: erosion/dilation with the 3x3 square element,
//! hole filling, and Zhang-Suen thinning.

use super::Mask;

/// Erode with the full 3x3 square, applied `radius` times. Pixels outside the
/// frame count as background.
pub fn erode(mask: &Mask, radius: usize) -> Mask {
    let mut current = mask.clone();
    for _ in 0..radius {
        current = erode_once(&current);
    }
    current
}

/// Dilate with the full 3x3 square, applied `radius` times.
pub fn dilate(mask: &Mask, radius: usize) -> Mask {
    let mut current = mask.clone();
    for _ in 0..radius {
        current = dilate_once(&current);
    }
    current
}

fn erode_once(mask: &Mask) -> Mask {
    let (w, h) = (mask.width(), mask.height());
    let mut out = Mask::new(w, h);
    for y in 0..h {
        for x in 0..w {
            if !mask.is_set(x, y) {
                continue;
            }
            let mut keep = true;
            'probe: for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if !mask.is_set_i(x as i64 + dx, y as i64 + dy) {
                        keep = false;
                        break 'probe;
                    }
                }
            }
            out.set(x, y, keep);
        }
    }
    out
}

fn dilate_once(mask: &Mask) -> Mask {
    let (w, h) = (mask.width(), mask.height());
    let mut out = Mask::new(w, h);
    for y in 0..h {
        for x in 0..w {
            if mask.is_set(x, y) {
                out.set(x, y, true);
                continue;
            }
            'probe: for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if mask.is_set_i(x as i64 + dx, y as i64 + dy) {
                        out.set(x, y, true);
                        break 'probe;
                    }
                }
            }
        }
    }
    out
}

/// Fill interior holes: background 4-connected to the frame border stays
/// background, everything else becomes foreground.
pub fn fill_holes(mask: &Mask) -> Mask {
    let (w, h) = (mask.width(), mask.height());
    let mut outside = vec![false; w * h];
    let mut queue = std::collections::VecDeque::new();
    let push = |x: usize,
                y: usize,
                outside: &mut Vec<bool>,
                queue: &mut std::collections::VecDeque<(usize, usize)>| {
        if !mask.is_set(x, y) && !outside[y * w + x] {
            outside[y * w + x] = true;
            queue.push_back((x, y));
        }
    };
    for x in 0..w {
        push(x, 0, &mut outside, &mut queue);
        push(x, h - 1, &mut outside, &mut queue);
    }
    for y in 0..h {
        push(0, y, &mut outside, &mut queue);
        push(w - 1, y, &mut outside, &mut queue);
    }
    while let Some((x, y)) = queue.pop_front() {
        for (dx, dy) in [(0i64, -1i64), (-1, 0), (1, 0), (0, 1)] {
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            if !mask.is_set(nx, ny) && !outside[ny * w + nx] {
                outside[ny * w + nx] = true;
                queue.push_back((nx, ny));
            }
        }
    }
    let mut out = Mask::new(w, h);
    for y in 0..h {
        for x in 0..w {
            out.set(x, y, mask.is_set(x, y) || !outside[y * w + x]);
        }
    }
    out
}

// Zhang-Suen neighbor order P2..P9: N, NE, E, SE, S, SW, W, NW.
const ZS_NEIGHBORS: [(i64, i64); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

/// Zhang-Suen thinning to a 1-pixel-wide skeleton.
pub fn skeletonize(mask: &Mask) -> Mask {
    let mut current = mask.clone();
    loop {
        let removed_a = thin_pass(&mut current, true);
        let removed_b = thin_pass(&mut current, false);
        if !removed_a && !removed_b {
            return current;
        }
    }
}

fn thin_pass(mask: &mut Mask, first: bool) -> bool {
    let (w, h) = (mask.width(), mask.height());
    let mut to_delete = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !mask.is_set(x, y) {
                continue;
            }
            let p: Vec<bool> = ZS_NEIGHBORS
                .iter()
                .map(|&(dx, dy)| mask.is_set_i(x as i64 + dx, y as i64 + dy))
                .collect();
            let b: usize = p.iter().filter(|&&v| v).count();
            if !(2..=6).contains(&b) {
                continue;
            }
            let a = (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count();
            if a != 1 {
                continue;
            }
            // Indices: 0=P2(N), 2=P4(E), 4=P6(S), 6=P8(W).
            let (c1, c2) = if first {
                (p[0] && p[2] && p[4], p[2] && p[4] && p[6])
            } else {
                (p[0] && p[2] && p[6], p[0] && p[4] && p[6])
            };
            if !c1 && !c2 {
                to_delete.push((x, y));
            }
        }
    }
    for &(x, y) in &to_delete {
        mask.set(x, y, false);
    }
    !to_delete.is_empty()
}

#[cfg(test)]
mod tests {
    use super::super::{connected_components, Connectivity};
    use super::*;

    fn filled_square(side: usize, pad: usize) -> Mask {
        let dim = side + 2 * pad;
        let mut m = Mask::new(dim, dim);
        for y in pad..pad + side {
            for x in pad..pad + side {
                m.set(x, y, true);
            }
        }
        m
    }

    #[test]
    fn erode_square_once() {
        let eroded = erode(&filled_square(5, 2), 1);
        assert_eq!(eroded, filled_square(3, 3));
    }

    #[test]
    fn erode_empty_and_total() {
        assert!(erode(&Mask::new(4, 4), 1).is_empty());
        assert!(erode(&filled_square(5, 2), 3).is_empty());
    }

    #[test]
    fn opening_is_anti_extensive() {
        // dilate(erode(m)) is a subset of m.
        let mut m = Mask::new(16, 16);
        for (x, y) in [
            (3, 3),
            (3, 4),
            (4, 3),
            (4, 4),
            (10, 10),
            (5, 9),
            (5, 10),
            (6, 10),
        ] {
            m.set(x, y, true);
        }
        let opened = dilate(&erode(&m, 1), 1);
        for y in 0..16 {
            for x in 0..16 {
                assert!(!opened.is_set(x, y) || m.is_set(x, y));
            }
        }
    }

    #[test]
    fn fill_holes_plugs_ring() {
        let mut ring = Mask::new(7, 7);
        for i in 1..6 {
            ring.set(i, 1, true);
            ring.set(i, 5, true);
            ring.set(1, i, true);
            ring.set(5, i, true);
        }
        let filled = fill_holes(&ring);
        assert_eq!(filled.count(), 25);
        assert!(filled.is_set(3, 3));
        assert!(!filled.is_set(0, 0));
    }

    #[test]
    fn thin_line_unchanged() {
        let mut m = Mask::new(24, 5);
        for x in 2..22 {
            m.set(x, 2, true);
        }
        assert_eq!(skeletonize(&m), m);
    }

    #[test]
    fn bar_thins_to_centerline() {
        let mut m = Mask::new(26, 10);
        for y in 3..7 {
            for x in 3..23 {
                m.set(x, y, true);
            }
        }
        let skel = skeletonize(&m);
        // Thinning shortens the end caps of a 20x4 bar to a 16-px centerline.
        let n = skel.count();
        assert!((14..=20).contains(&n), "centerline length {n}");
        // Nothing outside the original bar.
        for y in 0..10 {
            for x in 0..26 {
                assert!(!skel.is_set(x, y) || m.is_set(x, y));
            }
        }
    }

    #[test]
    fn disk_thins_to_near_point() {
        let mut m = Mask::new(17, 17);
        for y in 0..17i64 {
            for x in 0..17i64 {
                if (x - 8) * (x - 8) + (y - 8) * (y - 8) <= 36 {
                    m.set(x as usize, y as usize, true);
                }
            }
        }
        let skel = skeletonize(&m);
        assert!(skel.count() <= 5, "skeleton size {}", skel.count());
        assert_eq!(
            connected_components(&skel, Connectivity::Eight)
                .regions
                .len(),
            1
        );
    }
}
