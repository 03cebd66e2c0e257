//! Shape rasterization for the scene generator. All predicates are integer
//! quadratic forms so identical specs render identical pixels on every
//! platform.

use crate::imgcore::{Mask, RgbImage};

/// Axis-aligned filled ellipse test: ((x-cx)/a)^2 + ((y-cy)/b)^2 <= 1,
/// evaluated as b^2 dx^2 + a^2 dy^2 <= a^2 b^2 in integers.
pub fn in_ellipse(x: i64, y: i64, cx: i64, cy: i64, a: i64, b: i64) -> bool {
    let dx = x - cx;
    let dy = y - cy;
    b * b * dx * dx + a * a * dy * dy <= a * a * b * b
}

pub fn in_disk(x: i64, y: i64, cx: i64, cy: i64, r: i64) -> bool {
    let dx = x - cx;
    let dy = y - cy;
    dx * dx + dy * dy <= r * r
}

/// Annulus with a rectangular opening on one side (0=right, 1=down, 2=left,
/// 3=up): the stab-granulocyte "C"/"U" nucleus.
pub fn in_band(x: i64, y: i64, cx: i64, cy: i64, mid: i64, half_width: i64, opening: u8) -> bool {
    let dx = x - cx;
    let dy = y - cy;
    let d2 = dx * dx + dy * dy;
    let outer = mid + half_width;
    let inner = mid - half_width;
    if d2 > outer * outer || d2 < inner * inner {
        return false;
    }
    let gap = (mid * 3) / 4;
    match opening {
        0 => !(dx > 0 && dy.abs() < gap),
        1 => !(dy > 0 && dx.abs() < gap),
        2 => !(dx < 0 && dy.abs() < gap),
        _ => !(dy < 0 && dx.abs() < gap),
    }
}

/// Thick line segment: distance from the segment at most `radius`.
pub fn near_segment(x: i64, y: i64, x0: i64, y0: i64, x1: i64, y1: i64, radius: i64) -> bool {
    let (vx, vy) = (x1 - x0, y1 - y0);
    let (wx, wy) = (x - x0, y - y0);
    let len2 = vx * vx + vy * vy;
    let (px, py) = if len2 == 0 {
        (wx, wy)
    } else {
        // Clamp the projection parameter t = w.v/len2 to [0, 1] without
        // leaving integer arithmetic: compare cross-multiplied.
        let dot = wx * vx + wy * vy;
        if dot <= 0 {
            (wx, wy)
        } else if dot >= len2 {
            (x - x1, y - y1)
        } else {
            // Perpendicular^2 = |w|^2 - dot^2/len2; scale by len2.
            let perp2_scaled = (wx * wx + wy * wy) * len2 - dot * dot;
            return perp2_scaled <= radius * radius * len2;
        }
    };
    px * px + py * py <= radius * radius
}

/// Paint every pixel satisfying `pred` and set the same pixels in `mask`.
pub fn paint<F: Fn(i64, i64) -> bool>(
    img: &mut RgbImage,
    mask: Option<&mut Mask>,
    color: (u8, u8, u8),
    pred: F,
) {
    let (w, h) = (img.width(), img.height());
    match mask {
        Some(m) => {
            for y in 0..h {
                for x in 0..w {
                    if pred(x as i64, y as i64) {
                        img.set(x, y, color);
                        m.set(x, y, true);
                    }
                }
            }
        }
        None => {
            for y in 0..h {
                for x in 0..w {
                    if pred(x as i64, y as i64) {
                        img.set(x, y, color);
                    }
                }
            }
        }
    }
}
