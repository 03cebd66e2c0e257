//! Histogram thresholding: the stepwise averaging method (SAM) that estimates
//! the four gray strata of a bone-marrow field (background, mature red blood
//! cells, cytoplasm, nucleus), Otsu's method, and weighted threshold
//! combinations.

use crate::imgcore::{round_half_up, GrayImage, Mask};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ThresholdError {
    #[error("degenerate histogram in stepwise averaging round {round}")]
    Degenerate { round: usize },
    #[error("histogram has a single occupied bin")]
    SingleValued,
}

/// The four stratum means, ascending. On the HSG image the nucleus is the
/// brightest stratum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrayLevels {
    pub background: f64,
    pub rbc: f64,
    pub cytoplasm: f64,
    pub nucleus: f64,
}

/// Per-round upper/stratum means recorded by the stepwise averaging method.
#[derive(Debug, Clone, PartialEq)]
pub struct SamTrace {
    /// Exactly three (upper mean, stratum mean) pairs.
    pub iterations: Vec<(f64, f64)>,
    pub final_levels: GrayLevels,
}

struct HistogramStats {
    hist: [u64; 256],
}

impl HistogramStats {
    fn of(img: &GrayImage) -> Self {
        HistogramStats {
            hist: img.histogram(),
        }
    }

    /// Mean of pixels with value strictly greater than `lo` (and strictly
    /// below `hi` when given). Returns None for an empty selection.
    fn mean_between(&self, lo: f64, hi: Option<f64>) -> Option<f64> {
        let mut count = 0u64;
        let mut sum = 0u64;
        for v in 0..256usize {
            let vf = v as f64;
            if vf > lo && hi.map_or(true, |h| vf < h) {
                count += self.hist[v];
                sum += v as u64 * self.hist[v];
            }
        }
        if count == 0 {
            None
        } else {
            Some(sum as f64 / count as f64)
        }
    }
}

/// Stepwise averaging: each round takes the mean of everything above the
/// current cut as the upper mean, the mean of values strictly between the cut
/// and the upper mean as the stratum mean, then moves the cut to the upper
/// mean. Three rounds peel off background, red-blood-cell and cytoplasm
/// strata; the mean above the last upper mean is the nucleus level.
///
/// An empty selection in round one is an error (fewer than two strata);
/// later empty selections saturate to the current upper mean so images with
/// fewer than four strata still produce monotone levels.
///
/// With `ignore_zero`, pixels of value 0 (typically zeroed by a mask) never
/// participate; the strict inequality against the initial cut of 0 makes this
/// the default behavior as well, so the flag only enforces the precondition
/// that some nonzero pixel exists.
pub fn sam_levels(img: &GrayImage, ignore_zero: bool) -> Result<SamTrace, ThresholdError> {
    let stats = HistogramStats::of(img);
    if ignore_zero && (1..256).all(|v| stats.hist[v] == 0) {
        return Err(ThresholdError::Degenerate { round: 1 });
    }

    let mut cut = 0.0f64;
    let mut iterations = Vec::with_capacity(3);
    let mut strata = [0.0f64; 3];
    for round in 1..=3usize {
        let upper = match stats.mean_between(cut, None) {
            Some(m) => m,
            None if round == 1 => return Err(ThresholdError::Degenerate { round }),
            None => cut,
        };
        let stratum = match stats.mean_between(cut, Some(upper)) {
            Some(m) => m,
            None if round == 1 => return Err(ThresholdError::Degenerate { round }),
            None => upper,
        };
        iterations.push((upper, stratum));
        strata[round - 1] = stratum;
        cut = upper;
    }
    let nucleus = stats.mean_between(cut, None).unwrap_or(cut);

    Ok(SamTrace {
        iterations,
        final_levels: GrayLevels {
            background: strata[0],
            rbc: strata[1],
            cytoplasm: strata[2],
            nucleus,
        },
    })
}

/// Threshold used for the rough nucleus mask: midpoint of the cytoplasm and
/// nucleus levels.
pub fn sam_threshold(levels: &GrayLevels) -> f64 {
    (levels.cytoplasm + levels.nucleus) / 2.0
}

/// Rough initial segmentation: pixels below the cytoplasm/nucleus midpoint
/// become 0, everything else 255.
pub fn sam_mask(img: &GrayImage, levels: &GrayLevels) -> Mask {
    let thr = sam_threshold(levels);
    let data = img
        .data()
        .iter()
        .map(|&v| if (v as f64) < thr { 0 } else { 255 })
        .collect();
    Mask::from_vec(img.width(), img.height(), data)
}

/// Otsu threshold over a 256-bin histogram: the cut t in 0..=254 maximizing
/// the between-class variance of {v <= t} against {v > t}, ties broken by
/// the smallest t. The argmax is decided in exact integer arithmetic.
pub fn otsu_from_histogram(hist: &[u64; 256]) -> Result<u8, ThresholdError> {
    if hist.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(ThresholdError::SingleValued);
    }
    let n: i128 = hist.iter().map(|&c| c as i128).sum();
    let total: i128 = hist
        .iter()
        .enumerate()
        .map(|(v, &c)| v as i128 * c as i128)
        .sum();

    let mut best: Option<(u8, u128, u128)> = None; // (t, numerator, denominator)
    let mut w0: i128 = 0;
    let mut s0: i128 = 0;
    for t in 0..255usize {
        w0 += hist[t] as i128;
        s0 += t as i128 * hist[t] as i128;
        let w1 = n - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        // Between-class variance is proportional to (s0*n - total*w0)^2 / (w0*w1).
        let a = s0 * n - total * w0;
        let num = (a * a) as u128;
        let den = (w0 * w1) as u128;
        let better = match &best {
            None => true,
            Some((_, bn, bd)) => num * bd > bn * den,
        };
        if better {
            best = Some((t as u8, num, den));
        }
    }
    Ok(best.expect("at least one valid cut exists").0)
}

/// Otsu threshold over a whole image.
pub fn otsu_threshold(img: &GrayImage) -> Result<u8, ThresholdError> {
    otsu_from_histogram(&img.histogram())
}

/// Otsu threshold over the pixels selected by `mask`.
pub fn otsu_threshold_masked(img: &GrayImage, mask: &Mask) -> Result<u8, ThresholdError> {
    let mut hist = [0u64; 256];
    for y in 0..img.height() {
        for x in 0..img.width() {
            if mask.is_set(x, y) {
                hist[img.get(x, y) as usize] += 1;
            }
        }
    }
    otsu_from_histogram(&hist)
}

/// Convex combination `gamma*a + (1-gamma)*b`, rounded half-up.
pub fn weighted_threshold(a: f64, b: f64, gamma: f64) -> f64 {
    round_half_up(gamma * a + (1.0 - gamma) * b)
}
