//! Color-space channel extractions and the two custom transforms: the HSG
//! enhancement that brightens nuclei and the BSG weakening that highlights
//! cell bodies, plus the texture and particle images derived from BSG.

use crate::imgcore::{
    connected_components, round_clamp_u8, round_half_up, Connectivity, GrayImage, Mask, RgbImage,
};

/// Weights of the HSG enhancement. `output = clamp(round(scale * (w1*H + w2*S) / (w3*G)))`
/// for G > 0, and 255 where G = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsgParams {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub scale: f64,
}

impl Default for HsgParams {
    fn default() -> Self {
        HsgParams {
            w1: 0.4,
            w2: 0.6,
            w3: 1.0,
            scale: 100.0,
        }
    }
}

/// Blend weight of the BSG weakening: `V = lambda*(B-G) + (1-lambda)*(255-G)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsgParams {
    pub lambda: f64,
}

impl Default for BsgParams {
    fn default() -> Self {
        BsgParams { lambda: 1.0 }
    }
}

/// Cytoplasmic white-particle analysis used to decide whether nucleus and
/// cytoplasm colors are consistent.
#[derive(Debug, Clone)]
pub struct ParticleReport {
    pub particle_mask: Mask,
    pub particle_count: usize,
    pub colors_consistent: bool,
}

/// Split an RGB image into its R, G, B planes.
pub fn channels(img: &RgbImage) -> (GrayImage, GrayImage, GrayImage) {
    let (w, h) = (img.width(), img.height());
    let mut r = GrayImage::new(w, h);
    let mut g = GrayImage::new(w, h);
    let mut b = GrayImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let (pr, pg, pb) = img.get(x, y);
            r.set(x, y, pr);
            g.set(x, y, pg);
            b.set(x, y, pb);
        }
    }
    (r, g, b)
}

/// Hue/saturation/intensity of one pixel, each scaled to [0, 255].
/// Achromatic pixels (S = 0) take H = 0.
pub fn hsi_pixel(r: u8, g: u8, b: u8) -> (u8, u8, u8) {
    let (rf, gf, bf) = (r as f64, g as f64, b as f64);
    let sum = rf + gf + bf;
    let intensity = round_clamp_u8(sum / 3.0);
    if sum == 0.0 {
        return (0, 0, 0);
    }
    let min = rf.min(gf).min(bf);
    let s = 1.0 - 3.0 * min / sum;
    let s8 = round_clamp_u8(255.0 * s);
    if s8 == 0 {
        return (0, 0, intensity);
    }
    let num = 0.5 * ((rf - gf) + (rf - bf));
    let den = ((rf - gf) * (rf - gf) + (rf - bf) * (gf - bf)).sqrt();
    let h_deg = if den == 0.0 {
        0.0
    } else {
        let theta = (num / den).clamp(-1.0, 1.0).acos().to_degrees();
        if bf <= gf {
            theta
        } else {
            360.0 - theta
        }
    };
    let h8 = round_clamp_u8(h_deg / 360.0 * 255.0);
    (h8, s8, intensity)
}

/// HSI planes of an RGB image.
pub fn hsi_channels(img: &RgbImage) -> (GrayImage, GrayImage, GrayImage) {
    let (w, hgt) = (img.width(), img.height());
    let mut h = GrayImage::new(w, hgt);
    let mut s = GrayImage::new(w, hgt);
    let mut i = GrayImage::new(w, hgt);
    for y in 0..hgt {
        for x in 0..w {
            let (r, g, b) = img.get(x, y);
            let (ph, ps, pi) = hsi_pixel(r, g, b);
            h.set(x, y, ph);
            s.set(x, y, ps);
            i.set(x, y, pi);
        }
    }
    (h, s, i)
}

/// Hue/Saturation-over-Green enhancement. Nuclei come out bright because
/// their hue and saturation are high while their green response is low.
pub fn hsg_transform(img: &RgbImage, p: &HsgParams) -> GrayImage {
    let (w, h) = (img.width(), img.height());
    let mut out = GrayImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let (r, g, b) = img.get(x, y);
            out.set(x, y, hsg_pixel(r, g, b, p));
        }
    }
    out
}

pub fn hsg_pixel(r: u8, g: u8, b: u8, p: &HsgParams) -> u8 {
    if g == 0 {
        return 255;
    }
    let (ph, ps, _) = hsi_pixel(r, g, b);
    let raw = (p.w1 * ph as f64 + p.w2 * ps as f64) / (p.w3 * g as f64);
    round_clamp_u8(p.scale * raw)
}

/// Blue/Green weakening. With lambda = 1 this is max(B - G, 0) exactly.
pub fn bsg_transform(img: &RgbImage, p: &BsgParams) -> GrayImage {
    let (w, h) = (img.width(), img.height());
    let mut out = GrayImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let (_, g, b) = img.get(x, y);
            out.set(x, y, bsg_pixel(g, b, p));
        }
    }
    out
}

pub fn bsg_pixel(g: u8, b: u8, p: &BsgParams) -> u8 {
    let v = p.lambda * (b as f64 - g as f64) + (1.0 - p.lambda) * (255.0 - g as f64);
    if v > 0.0 {
        round_clamp_u8(v)
    } else {
        0
    }
}

/// Neighborhood-variance texture image. Each output pixel is the population
/// variance of the full 3x3 window (clamped-edge replication at the borders),
/// rounded and clamped to [0, 255]. The input is expected to have background
/// pixels already zeroed.
pub fn texture_image(bsg: &GrayImage) -> GrayImage {
    let (w, h) = (bsg.width(), bsg.height());
    let mut out = GrayImage::new(w, h);
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let mut sum = 0.0f64;
            let mut sum2 = 0.0f64;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let v = bsg.get_clamped(x + dx, y + dy) as f64;
                    sum += v;
                    sum2 += v * v;
                }
            }
            let mean = sum / 9.0;
            let var = sum2 / 9.0 - mean * mean;
            out.set(x as usize, y as usize, round_clamp_u8(var));
        }
    }
    out
}

/// Uniform regions (zero texture variance) larger than `min_area`: the
/// background and mature red blood cells.
pub fn nwig_from_texture(teig: &GrayImage, min_area: usize) -> Mask {
    let zero = Mask::from_vec(
        teig.width(),
        teig.height(),
        teig.data()
            .iter()
            .map(|&v| if v == 0 { 255 } else { 0 })
            .collect(),
    );
    let cc = connected_components(&zero, Connectivity::Eight);
    let mut out = Mask::new(teig.width(), teig.height());
    for region in &cc.regions {
        if region.pixel_count > min_area {
            for y in region.bounding_box.y0..=region.bounding_box.y1 {
                for x in region.bounding_box.x0..=region.bounding_box.x1 {
                    if cc.label(x, y) == region.id {
                        out.set(x, y, true);
                    }
                }
            }
        }
    }
    out
}

/// Count cytoplasmic white particles: connected zero regions of BSG that do
/// not touch the uniform-region mask and are larger than `min_particle_area`.
/// Colors are consistent when fewer than `consistency_count` particles exist.
pub fn particle_report(
    bsg: &GrayImage,
    nwig: &Mask,
    min_particle_area: usize,
    consistency_count: usize,
) -> ParticleReport {
    let zero = Mask::from_vec(
        bsg.width(),
        bsg.height(),
        bsg.data()
            .iter()
            .map(|&v| if v == 0 { 255 } else { 0 })
            .collect(),
    );
    let cc = connected_components(&zero, Connectivity::Eight);
    let mut particle_mask = Mask::new(bsg.width(), bsg.height());
    let mut particle_count = 0usize;
    for region in &cc.regions {
        if region.pixel_count <= min_particle_area {
            continue;
        }
        let bb = region.bounding_box;
        let mut touches_nwig = false;
        'scan: for y in bb.y0..=bb.y1 {
            for x in bb.x0..=bb.x1 {
                if cc.label(x, y) == region.id && nwig.is_set(x, y) {
                    touches_nwig = true;
                    break 'scan;
                }
            }
        }
        if touches_nwig {
            continue;
        }
        particle_count += 1;
        for y in bb.y0..=bb.y1 {
            for x in bb.x0..=bb.x1 {
                if cc.label(x, y) == region.id {
                    particle_mask.set(x, y, true);
                }
            }
        }
    }
    ParticleReport {
        particle_mask,
        particle_count,
        colors_consistent: particle_count < consistency_count,
    }
}

/// Y plane of the CMYK decomposition, scaled to [0, 255]. Pure black maps
/// to 0.
pub fn y_component(img: &RgbImage) -> GrayImage {
    let (w, h) = (img.width(), img.height());
    let mut out = GrayImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let (r, g, b) = img.get(x, y);
            out.set(x, y, cmyk_y_pixel(r, g, b));
        }
    }
    out
}

pub fn cmyk_y_pixel(r: u8, g: u8, b: u8) -> u8 {
    let max = r.max(g).max(b) as f64 / 255.0;
    if max == 0.0 {
        return 0;
    }
    let k = 1.0 - max;
    let y = (1.0 - b as f64 / 255.0 - k) / (1.0 - k);
    round_clamp_u8(255.0 * y)
}

/// S plane of the HSV decomposition, scaled to [0, 255].
pub fn hsv_s_component(img: &RgbImage) -> GrayImage {
    let (w, h) = (img.width(), img.height());
    let mut out = GrayImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let (r, g, b) = img.get(x, y);
            out.set(x, y, hsv_s_pixel(r, g, b));
        }
    }
    out
}

pub fn hsv_s_pixel(r: u8, g: u8, b: u8) -> u8 {
    let max = r.max(g).max(b) as f64;
    if max == 0.0 {
        return 0;
    }
    let min = r.min(g).min(b) as f64;
    round_clamp_u8(255.0 * (1.0 - min / max))
}

/// Round-half-up of a nonnegative value, for use by the tests' direct
/// formula oracles.
pub fn round_level(v: f64) -> f64 {
    round_half_up(v)
}
