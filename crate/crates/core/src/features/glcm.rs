//! Gray-level co-occurrence features over a masked region.

use crate::imgcore::{GrayImage, Mask};

const LEVELS: usize = 32;

/// Symmetric normalized co-occurrence at offset (1, 0) over pixels quantized
/// to 32 levels, counting only pairs with both pixels inside the mask.
/// Returns (contrast, energy, homogeneity, valid); without a single valid
/// pair all three are the 0 sentinel and `valid` is false.
pub fn glcm_features(channel: &GrayImage, mask: &Mask) -> (f64, f64, f64, bool) {
    let mut counts = vec![0u64; LEVELS * LEVELS];
    let mut total = 0u64;
    for y in 0..channel.height() {
        for x in 0..channel.width().saturating_sub(1) {
            if mask.is_set(x, y) && mask.is_set(x + 1, y) {
                let a = (channel.get(x, y) / 8) as usize;
                let b = (channel.get(x + 1, y) / 8) as usize;
                counts[a * LEVELS + b] += 1;
                counts[b * LEVELS + a] += 1;
                total += 2;
            }
        }
    }
    if total == 0 {
        return (0.0, 0.0, 0.0, false);
    }
    let (mut contrast, mut energy, mut homogeneity) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..LEVELS {
        for j in 0..LEVELS {
            let p = counts[i * LEVELS + j] as f64 / total as f64;
            if p == 0.0 {
                continue;
            }
            let d = i as f64 - j as f64;
            contrast += p * d * d;
            energy += p * p;
            homogeneity += p / (1.0 + d.abs());
        }
    }
    (contrast, energy, homogeneity, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_mask(w: usize, h: usize) -> Mask {
        Mask::from_vec(w, h, vec![255; w * h])
    }

    #[test]
    fn constant_region_is_perfectly_ordered() {
        let img = GrayImage::from_vec(6, 4, vec![100; 24]);
        let (contrast, energy, homogeneity, ok) = glcm_features(&img, &full_mask(6, 4));
        assert!(ok);
        assert_eq!(contrast, 0.0);
        assert_eq!(energy, 1.0);
        assert_eq!(homogeneity, 1.0);
    }

    #[test]
    fn checkerboard_closed_form() {
        // Levels 0 and 16 alternate (values 0 and 128): all horizontal pairs
        // are (0,16) or (16,0), so p = 0.5 each.
        let mut img = GrayImage::new(8, 8);
        for y in 0..8 {
            for x in 0..8 {
                img.set(x, y, if (x + y) % 2 == 0 { 0 } else { 128 });
            }
        }
        let (contrast, energy, homogeneity, ok) = glcm_features(&img, &full_mask(8, 8));
        assert!(ok);
        let d = 16.0f64;
        assert!((contrast - d * d).abs() < 1e-12);
        assert!((energy - 0.5).abs() < 1e-12);
        assert!((homogeneity - 1.0 / (1.0 + d)).abs() < 1e-12);
    }

    #[test]
    fn noise_has_lower_energy_than_constant() {
        let mut img = GrayImage::new(16, 16);
        let mut state = 0x9e3779b97f4a7c15u64;
        for y in 0..16 {
            for x in 0..16 {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                img.set(x, y, (state >> 56) as u8);
            }
        }
        let (_, energy, _, ok) = glcm_features(&img, &full_mask(16, 16));
        assert!(ok);
        assert!(energy < 1.0);
    }

    #[test]
    fn no_pairs_is_flagged_sentinel() {
        let img = GrayImage::from_vec(3, 3, vec![10; 9]);
        let mut mask = Mask::new(3, 3);
        mask.set(1, 1, true); // single pixel: no horizontal pair
        let (c, e, h, ok) = glcm_features(&img, &mask);
        assert!(!ok);
        assert_eq!((c, e, h), (0.0, 0.0, 0.0));
    }

    #[test]
    fn energy_at_most_one() {
        let mut img = GrayImage::new(10, 3);
        for y in 0..3 {
            for x in 0..10 {
                img.set(x, y, (x * 25) as u8);
            }
        }
        let (_, energy, _, _) = glcm_features(&img, &full_mask(10, 3));
        assert!(energy > 0.0 && energy <= 1.0);
    }
}
