//! One-dimensional K-Means over gray values (k = 3) and the initial cell-body
//! mask derived from it.

use super::SegmentationError;
use crate::imgcore::{connected_components, fill_holes, Connectivity, GrayImage, Mask};

/// Three-cluster K-Means over the gray values of pixels outside `exclude`.
/// The darkest cluster is seeded at the minimum value present (the zeroed
/// non-cell region when the caller blanked one), the other two at the median
/// and 90th percentile of the remaining values; iteration stops when
/// assignments stop changing (at most 100 rounds). Clusters are numbered by
/// ascending mean; excluded pixels receive label 0.
pub fn kmeans3(
    img: &GrayImage,
    exclude: &Mask,
) -> Result<(GrayImage, [f64; 3]), SegmentationError> {
    let mut hist = [0u64; 256];
    for y in 0..img.height() {
        for x in 0..img.width() {
            if !exclude.is_set(x, y) {
                hist[img.get(x, y) as usize] += 1;
            }
        }
    }
    let distinct = hist.iter().filter(|&&c| c > 0).count();
    if distinct < 3 {
        return Err(SegmentationError::DegenerateClusters);
    }

    let min_v = (0..256usize)
        .find(|&v| hist[v] > 0)
        .expect("nonempty histogram");
    let upper_n: u64 = hist[min_v + 1..].iter().sum();
    let percentile_above = |q: f64| -> f64 {
        let target = (q * (upper_n - 1) as f64).floor() as u64;
        let mut seen = 0u64;
        for v in min_v + 1..256usize {
            seen += hist[v];
            if seen > target {
                return v as f64;
            }
        }
        255.0
    };
    let mut means = [min_v as f64, percentile_above(0.50), percentile_above(0.90)];
    // Seeds of a skewed histogram can coincide; nudge duplicates apart so all
    // three clusters can claim values.
    for i in 1..3 {
        if means[i] <= means[i - 1] {
            means[i] = means[i - 1] + 1.0;
        }
    }

    let mut assignment = [0usize; 256];
    for _ in 0..100 {
        let mut changed = false;
        for v in 0..256usize {
            if hist[v] == 0 {
                continue;
            }
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (k, &m) in means.iter().enumerate() {
                let d = (v as f64 - m).abs();
                if d < best_d {
                    best_d = d;
                    best = k;
                }
            }
            if assignment[v] != best {
                assignment[v] = best;
                changed = true;
            }
        }
        for k in 0..3 {
            let (mut sum, mut cnt) = (0.0f64, 0.0f64);
            for v in 0..256usize {
                if hist[v] > 0 && assignment[v] == k {
                    sum += v as f64 * hist[v] as f64;
                    cnt += hist[v] as f64;
                }
            }
            if cnt > 0.0 {
                means[k] = sum / cnt;
            }
        }
        if !changed {
            break;
        }
    }

    // Renumber clusters by ascending mean.
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| means[a].total_cmp(&means[b]));
    let mut rank = [0usize; 3];
    for (r, &k) in order.iter().enumerate() {
        rank[k] = r;
    }
    let sorted_means = [means[order[0]], means[order[1]], means[order[2]]];

    let mut labels = GrayImage::new(img.width(), img.height());
    for y in 0..img.height() {
        for x in 0..img.width() {
            if exclude.is_set(x, y) {
                continue; // label 0
            }
            labels.set(x, y, rank[assignment[img.get(x, y) as usize]] as u8);
        }
    }
    Ok((labels, sorted_means))
}

/// Initial cell-body mask: drop the darkest cluster, keep the largest
/// connected component of what remains (ties broken by earliest scan
/// position), and fill its holes.
pub fn initial_bmc_mask(kmimg: &GrayImage) -> Result<Mask, SegmentationError> {
    let body = Mask::from_vec(
        kmimg.width(),
        kmimg.height(),
        kmimg
            .data()
            .iter()
            .map(|&v| if v >= 1 { 255 } else { 0 })
            .collect(),
    );
    let cc = connected_components(&body, Connectivity::Eight);
    let largest = cc
        .regions
        .iter()
        .max_by(|a, b| {
            a.pixel_count.cmp(&b.pixel_count).then_with(|| {
                (b.seed_pixel.1, b.seed_pixel.0).cmp(&(a.seed_pixel.1, a.seed_pixel.0))
            })
        })
        .ok_or(SegmentationError::EmptyCell)?;
    Ok(fill_holes(&cc.region_mask(largest.id)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_separated_blocks_cluster_exactly() {
        let mut img = GrayImage::new(9, 3);
        for y in 0..3 {
            for x in 0..9 {
                img.set(
                    x,
                    y,
                    if x < 3 {
                        10
                    } else if x < 6 {
                        100
                    } else {
                        240
                    },
                );
            }
        }
        let (labels, means) = kmeans3(&img, &Mask::new(9, 3)).unwrap();
        assert_eq!(means, [10.0, 100.0, 240.0]);
        for y in 0..3 {
            for x in 0..9 {
                let expect = if x < 3 {
                    0
                } else if x < 6 {
                    1
                } else {
                    2
                };
                assert_eq!(labels.get(x, y), expect);
            }
        }
    }

    #[test]
    fn two_distinct_values_error() {
        let mut img = GrayImage::new(4, 2);
        for x in 0..4 {
            img.set(x, 0, 10);
            img.set(x, 1, 200);
        }
        assert_eq!(
            kmeans3(&img, &Mask::new(4, 2)).unwrap_err(),
            SegmentationError::DegenerateClusters
        );
    }

    #[test]
    fn pixel_order_does_not_matter() {
        let mut a = GrayImage::new(8, 2);
        let values = [
            5u8, 5, 90, 90, 91, 170, 200, 250, 4, 6, 89, 92, 90, 169, 201, 249,
        ];
        for (i, &v) in values.iter().enumerate() {
            a.set(i % 8, i / 8, v);
        }
        let mut rev = values;
        rev.reverse();
        let mut b = GrayImage::new(8, 2);
        for (i, &v) in rev.iter().enumerate() {
            b.set(i % 8, i / 8, v);
        }
        let (_, means_a) = kmeans3(&a, &Mask::new(8, 2)).unwrap();
        let (_, means_b) = kmeans3(&b, &Mask::new(8, 2)).unwrap();
        assert_eq!(means_a, means_b);
    }

    #[test]
    fn wcss_non_increasing() {
        // The K-Means objective must not increase between rounds; check the
        // final partition is a fixpoint by re-running from the result.
        let mut img = GrayImage::new(16, 4);
        for y in 0..4 {
            for x in 0..16 {
                img.set(x, y, ((x * 16 + y * 3) % 256) as u8);
            }
        }
        let (labels1, means1) = kmeans3(&img, &Mask::new(16, 4)).unwrap();
        // Assign each pixel to its nearest returned mean: must reproduce labels.
        for y in 0..4 {
            for x in 0..16 {
                let v = img.get(x, y) as f64;
                let mut best = 0usize;
                let mut bd = f64::INFINITY;
                for (k, &m) in means1.iter().enumerate() {
                    let d = (v - m).abs();
                    if d < bd {
                        bd = d;
                        best = k;
                    }
                }
                assert_eq!(labels1.get(x, y) as usize, best);
            }
        }
    }

    #[test]
    fn body_mask_keeps_largest_and_fills() {
        let mut km = GrayImage::new(12, 6);
        // Small blob of cluster 1 at left, large ring of cluster 2 at right.
        km.set(1, 1, 1);
        km.set(2, 1, 1);
        for y in 1..5 {
            for x in 5..11 {
                if y == 1 || y == 4 || x == 5 || x == 10 {
                    km.set(x, y, 2);
                }
            }
        }
        let m = initial_bmc_mask(&km).unwrap();
        assert!(!m.is_set(1, 1));
        assert!(m.is_set(7, 2), "hole must be filled");
        assert_eq!(m.count(), 24);
    }

    #[test]
    fn equal_components_tie_breaks_by_scan_order() {
        let mut km = GrayImage::new(9, 3);
        // Two 2-pixel components; the (4,0) one appears first in scan order.
        km.set(4, 0, 1);
        km.set(5, 0, 1);
        km.set(0, 2, 1);
        km.set(1, 2, 1);
        let m = initial_bmc_mask(&km).unwrap();
        assert!(m.is_set(4, 0) && m.is_set(5, 0));
        assert!(!m.is_set(0, 2));
    }

    #[test]
    fn empty_remainder_errors() {
        let km = GrayImage::new(5, 5);
        assert_eq!(
            initial_bmc_mask(&km).unwrap_err(),
            SegmentationError::EmptyCell
        );
    }
}
