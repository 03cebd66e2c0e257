//! Pole detection on the cell-body contour and the pole-pair split plan used
//! to break adhesions.

use crate::imgcore::{
    connected_components, contour_metrics, trace_outer_contour, Connectivity, Contour, Mask,
};

/// A radial-distance maximum on the cell-body contour.
#[derive(Debug, Clone, PartialEq)]
pub struct Pole {
    pub contour_index: usize,
    pub point: (i64, i64),
    pub radial_distance: f64,
}

fn pow2_mod(exp: u32, modulus: usize) -> usize {
    let mut acc = 1usize % modulus;
    for _ in 0..exp {
        acc = (acc * 2) % modulus;
    }
    acc
}

/// Number of times the infinite line through `a` and `b` is crossed by the
/// closed polygon `contour`, counting proper sign changes only (collinear
/// points are skipped).
fn line_crossings(contour: &Contour, a: (f64, f64), b: (f64, f64)) -> usize {
    let dir = (b.0 - a.0, b.1 - a.1);
    if dir.0 == 0.0 && dir.1 == 0.0 {
        return 0;
    }
    let mut signs = Vec::with_capacity(contour.len());
    for &(x, y) in &contour.points {
        let cross = dir.0 * (y as f64 - a.1) - dir.1 * (x as f64 - a.0);
        if cross > 1e-9 {
            signs.push(1i8);
        } else if cross < -1e-9 {
            signs.push(-1i8);
        }
    }
    if signs.is_empty() {
        return 0;
    }
    let mut changes = 0usize;
    for i in 0..signs.len() {
        if signs[i] != signs[(i + 1) % signs.len()] {
            changes += 1;
        }
    }
    changes
}

/// Starting point for the radial profile: the contour point nearest the
/// nucleus center, accepted when the line through it and the center crosses
/// the contour exactly twice. Rejections re-seed the index at 2^step mod L;
/// when every re-seed fails the nearest point is returned unconditionally.
pub fn contour_start_point(contour: &Contour, center: (f64, f64)) -> usize {
    let n = contour.len();
    if n <= 1 {
        return 0;
    }
    let nearest = (0..n)
        .min_by(|&i, &j| {
            let di = dist2(contour.points[i], center);
            let dj = dist2(contour.points[j], center);
            di.total_cmp(&dj)
        })
        .unwrap();

    let accept = |idx: usize| {
        let p = contour.points[idx];
        line_crossings(contour, (p.0 as f64, p.1 as f64), center) == 2
    };
    if accept(nearest) {
        return nearest;
    }
    let max_step = (usize::BITS - (n - 1).leading_zeros()) + 4;
    for step in 1..=max_step {
        let idx = pow2_mod(step, n);
        if accept(idx) {
            return idx;
        }
    }
    nearest
}

fn dist2(p: (i64, i64), c: (f64, f64)) -> f64 {
    (p.0 as f64 - c.0).powi(2) + (p.1 as f64 - c.1).powi(2)
}

/// Local extrema of the smoothed radial-distance profile, starting from
/// `start`: maxima (lobe apices) and minima (adhesion notches), each with a
/// prominence of at least 10% of the maximum radial distance. More than two
/// poles signals adhesion with neighboring cells.
///
/// Maxima alone cannot drive the splitting step: the severing ellipse is
/// centered on the accepted pole pair, and for two fused convex lobes the
/// neck always lies farther from every apex chord than a sixth of its
/// length. The junction notches are exactly the radial minima, so both kinds
/// of extremum count as poles.
pub fn detect_poles(contour: &Contour, center: (f64, f64), start: usize) -> Vec<Pole> {
    let n = contour.len();
    if n < 3 {
        return Vec::new();
    }
    let raw: Vec<f64> = (0..n)
        .map(|i| dist2(contour.points[(start + i) % n], center).sqrt())
        .collect();

    // 7-sample circular moving average.
    let window = 7usize.min(n);
    let half = window / 2;
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let mut sum = 0.0;
            for k in 0..window {
                sum += raw[(i + n + k - half) % n];
            }
            sum / window as f64
        })
        .collect();

    let max_value = smooth.iter().cloned().fold(f64::MIN, f64::max);
    let min_value = smooth.iter().cloned().fold(f64::MAX, f64::min);
    if max_value - min_value < 1e-12 {
        return Vec::new(); // flat profile, e.g. a centered disk
    }
    // The floor is relative to the mean radial distance: on an elongated
    // composite the maximum is dominated by the far lobe and would drown the
    // nearby junction notches.
    let mean_value = smooth.iter().sum::<f64>() / n as f64;
    let min_prominence = 0.10 * mean_value;

    let negated: Vec<f64> = smooth.iter().map(|v| -v).collect();
    let mut picks = extrema_of(&smooth, min_prominence);
    picks.extend(extrema_of(&negated, min_prominence));
    picks.sort_unstable();
    picks.dedup();

    picks
        .into_iter()
        .map(|mid| {
            let idx = (start + mid) % n;
            Pole {
                contour_index: idx,
                point: contour.points[idx],
                radial_distance: raw[mid],
            }
        })
        .collect()
}

// Plateau-aware local maxima of a circular profile with a prominence floor.
fn extrema_of(profile: &[f64], min_prominence: f64) -> Vec<usize> {
    let n = profile.len();
    let mut out = Vec::new();
    let mut i = 0usize;
    while i < n {
        let v = profile[i];
        let mut j = i;
        while j + 1 < n && profile[j + 1] == v {
            j += 1;
        }
        let before = profile[(i + n - 1) % n];
        let after = profile[(j + 1) % n];
        if before < v && after < v {
            let mid = (i + j) / 2;
            if prominence(profile, mid) >= min_prominence {
                out.push(mid);
            }
        }
        i = j + 1;
    }
    out
}

fn prominence(profile: &[f64], peak: usize) -> f64 {
    let n = profile.len();
    let peak_value = profile[peak];
    let walk = |step: i64| -> Option<f64> {
        let mut lowest = f64::MAX;
        let mut i = peak as i64;
        for _ in 1..n {
            i = (i + step).rem_euclid(n as i64);
            let v = profile[i as usize];
            if v > peak_value {
                return Some(lowest);
            }
            lowest = lowest.min(v);
        }
        None
    };
    match (walk(-1), walk(1)) {
        (Some(l), Some(r)) => peak_value - l.max(r),
        // No higher point anywhere: global maximum, prominence over the
        // global minimum.
        _ => peak_value - profile.iter().cloned().fold(f64::MAX, f64::min),
    }
}

/// Erase a filled ellipse whose major axis spans the two points and whose
/// minor axis is one third of it.
pub fn erase_split_ellipse(mask: &mut Mask, a: (i64, i64), b: (i64, i64)) {
    let (ax, ay) = (a.0 as f64, a.1 as f64);
    let (bx, by) = (b.0 as f64, b.1 as f64);
    let cx = (ax + bx) / 2.0;
    let cy = (ay + by) / 2.0;
    let dist = ((bx - ax).powi(2) + (by - ay).powi(2)).sqrt();
    if dist < 1.0 {
        return;
    }
    let semi_major = dist / 2.0;
    let semi_minor = dist / 6.0;
    let (ux, uy) = ((bx - ax) / dist, (by - ay) / dist);
    let reach = semi_major.ceil() as i64 + 1;
    for y in (cy as i64 - reach)..=(cy as i64 + reach) {
        for x in (cx as i64 - reach)..=(cx as i64 + reach) {
            if x < 0 || y < 0 || x >= mask.width() as i64 || y >= mask.height() as i64 {
                continue;
            }
            let px = x as f64 - cx;
            let py = y as f64 - cy;
            let u = px * ux + py * uy;
            let v = -px * uy + py * ux;
            if (u / semi_major).powi(2) + (v / semi_minor).powi(2) <= 1.0 {
                mask.set(x as usize, y as usize, false);
            }
        }
    }
}

fn circularity_of_component(mask: &Mask, anchor: (usize, usize)) -> Option<f64> {
    if !mask.is_set(anchor.0, anchor.1) {
        return None;
    }
    let cc = connected_components(mask, Connectivity::Eight);
    let id = cc.label(anchor.0, anchor.1);
    let region = cc.regions.iter().find(|r| r.id == id)?;
    let metrics = contour_metrics(&trace_outer_contour(mask, region));
    if metrics.perimeter <= 0.0 {
        return None;
    }
    Some(4.0 * std::f64::consts::PI * metrics.area / (metrics.perimeter * metrics.perimeter))
}

/// Choose the pole pairs whose ellipse cut strictly increases the circularity
/// of the component holding the nucleus center. Pairs are tried in ascending
/// distance order (adhesion notches straddle a neck, so the severing pairs
/// are the short ones; once the blob is clean, a long cut only carves the
/// cell and fails the circularity test) and accepted cuts apply cumulatively;
/// a cut that erases the anchor pixel itself is rejected.
pub fn split_plan(
    pdg: &Mask,
    poles: &[Pole],
    nucleus_center: (f64, f64),
) -> Vec<((i64, i64), (i64, i64))> {
    if poles.len() <= 2 {
        return Vec::new();
    }
    let anchor = match super::snap_to_foreground(pdg, nucleus_center) {
        Some(p) => p,
        None => return Vec::new(),
    };
    let mut pairs = Vec::new();
    for i in 0..poles.len() {
        for j in i + 1..poles.len() {
            let a = poles[i].point;
            let b = poles[j].point;
            let d2 = (a.0 - b.0).pow(2) + (a.1 - b.1).pow(2);
            pairs.push((d2, i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut working = pdg.clone();
    let mut plan = Vec::new();
    for (_, i, j) in pairs {
        let before = match circularity_of_component(&working, anchor) {
            Some(c) => c,
            None => break,
        };
        let mut trial = working.clone();
        erase_split_ellipse(&mut trial, poles[i].point, poles[j].point);
        if let Some(after) = circularity_of_component(&trial, anchor) {
            if after > before {
                working = trial;
                plan.push((poles[i].point, poles[j].point));
            }
        }
    }
    plan
}
