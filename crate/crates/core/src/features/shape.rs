//! Moment-based shape descriptors and convex-hull concavity counting.

use crate::imgcore::{connected_components, trace_outer_contour, Connectivity, Mask};

fn central_moments(mask: &Mask) -> ([f64; 4], [f64; 4], f64) {
    // Returns mu_pq for p+q <= 3 packed as mu[pq]: (mu20, mu02, mu11, mu00)
    // and (mu30, mu03, mu21, mu12).
    let (mut m00, mut m10, mut m01) = (0.0f64, 0.0f64, 0.0f64);
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.is_set(x, y) {
                m00 += 1.0;
                m10 += x as f64;
                m01 += y as f64;
            }
        }
    }
    if m00 == 0.0 {
        return ([0.0; 4], [0.0; 4], 0.0);
    }
    let cx = m10 / m00;
    let cy = m01 / m00;
    let (mut mu20, mut mu02, mut mu11) = (0.0f64, 0.0f64, 0.0f64);
    let (mut mu30, mut mu03, mut mu21, mut mu12) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.is_set(x, y) {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                mu20 += dx * dx;
                mu02 += dy * dy;
                mu11 += dx * dy;
                mu30 += dx * dx * dx;
                mu03 += dy * dy * dy;
                mu21 += dx * dx * dy;
                mu12 += dx * dy * dy;
            }
        }
    }
    ([mu20, mu02, mu11, m00], [mu30, mu03, mu21, mu12], m00)
}

/// First three Hu invariant moments of a binary mask, each compressed as
/// sign(h) * log10(|h| + 1e-30) to tame their dynamic range.
pub fn hu_moments_compressed(mask: &Mask) -> [f64; 3] {
    let ([mu20, mu02, mu11, mu00], [mu30, mu03, mu21, mu12], _) = central_moments(mask);
    if mu00 == 0.0 {
        return [0.0; 3];
    }
    let norm = |mu: f64, order: f64| mu / mu00.powf(1.0 + order / 2.0);
    let n20 = norm(mu20, 2.0);
    let n02 = norm(mu02, 2.0);
    let n11 = norm(mu11, 2.0);
    let n30 = norm(mu30, 3.0);
    let n03 = norm(mu03, 3.0);
    let n21 = norm(mu21, 3.0);
    let n12 = norm(mu12, 3.0);
    let h1 = n20 + n02;
    let h2 = (n20 - n02).powi(2) + 4.0 * n11 * n11;
    let h3 = (n30 - 3.0 * n12).powi(2) + (3.0 * n21 - n03).powi(2);
    let compress = |h: f64| h.signum() * (h.abs() + 1e-30).log10();
    [compress(h1), compress(h2), compress(h3)]
}

/// Eccentricity of the mask from its second central moments, in [0, 1).
pub fn eccentricity_of(mask: &Mask) -> f64 {
    let ([mu20, mu02, mu11, mu00], _, _) = central_moments(mask);
    if mu00 == 0.0 {
        return 0.0;
    }
    let trace = mu20 + mu02;
    let det = ((mu20 - mu02).powi(2) + 4.0 * mu11 * mu11).sqrt();
    let big = (trace + det) / 2.0;
    let small = (trace - det) / 2.0;
    if big <= 0.0 {
        return 0.0;
    }
    (1.0 - (small / big).max(0.0)).sqrt()
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn convex_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut pts: Vec<(i64, i64)> = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    let n = pts.len();
    if n <= 2 {
        return pts;
    }
    let mut hull = Vec::with_capacity(2 * n);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Number of convex-hull defects of the largest component's outer contour
/// with depth >= 2 px; each defect is one reflex (concave) region.
pub fn concavity_count(mask: &Mask) -> usize {
    let cc = connected_components(mask, Connectivity::Eight);
    let Some(region) = cc.regions.iter().max_by_key(|r| {
        (
            r.pixel_count,
            std::cmp::Reverse((r.seed_pixel.1, r.seed_pixel.0)),
        )
    }) else {
        return 0;
    };
    let contour = trace_outer_contour(mask, region);
    if contour.len() < 4 {
        return 0;
    }
    let hull = convex_hull(&contour.points);
    if hull.len() < 3 {
        return 0;
    }

    // Hull vertices in contour order.
    let mut hull_indices: Vec<usize> = hull
        .iter()
        .filter_map(|hp| contour.points.iter().position(|p| p == hp))
        .collect();
    hull_indices.sort_unstable();
    hull_indices.dedup();
    if hull_indices.len() < 2 {
        return 0;
    }

    let n = contour.len();
    let mut defects = 0usize;
    for w in 0..hull_indices.len() {
        let i = hull_indices[w];
        let j = hull_indices[(w + 1) % hull_indices.len()];
        let a = contour.points[i];
        let b = contour.points[j];
        let seg_len = (((b.0 - a.0).pow(2) + (b.1 - a.1).pow(2)) as f64).sqrt();
        if seg_len == 0.0 {
            continue;
        }
        let mut depth = 0.0f64;
        let mut k = (i + 1) % n;
        while k != j {
            let p = contour.points[k];
            let d = (cross(a, b, p)).abs() as f64 / seg_len;
            depth = depth.max(d);
            k = (k + 1) % n;
        }
        if depth >= 2.0 {
            defects += 1;
        }
    }
    defects
}
