//! Pixel containers, binary image I/O and the morphology/contour primitives
//! shared by every later stage.

mod components;
mod contour;
mod io;
mod morphology;

pub use components::{connected_components, ConnectedComponents, Connectivity, Region};
pub use contour::{contour_metrics, trace_outer_contour, Contour, ContourMetrics};
pub use io::{read_pgm, read_ppm, write_pgm, write_ppm, FormatError};
pub use morphology::{dilate, erode, fill_holes, skeletonize};

/// Round-half-up to the nearest integer. Stated once, used everywhere a real
/// value is mapped back to a gray level.
#[inline]
pub fn round_half_up(v: f64) -> f64 {
    (v + 0.5).floor()
}

/// Round-half-up and clamp into the 8-bit range.
#[inline]
pub fn round_clamp_u8(v: f64) -> u8 {
    round_half_up(v).clamp(0.0, 255.0) as u8
}

/// Single-channel 8-bit raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        GrayImage {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<u8>) -> Self {
        assert_eq!(
            data.len(),
            width * height,
            "data length must be width*height"
        );
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        GrayImage {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    /// Value at (x, y) with clamped-edge replication for out-of-range coords.
    #[inline]
    pub fn get_clamped(&self, x: i64, y: i64) -> u8 {
        let cx = x.clamp(0, self.width as i64 - 1) as usize;
        let cy = y.clamp(0, self.height as i64 - 1) as usize;
        self.get(cx, cy)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn crop(&self, roi: Roi) -> GrayImage {
        let mut out = GrayImage::new(roi.width(), roi.height());
        for y in 0..roi.height() {
            for x in 0..roi.width() {
                out.set(x, y, self.get(roi.x0 + x, roi.y0 + y));
            }
        }
        out
    }

    /// 256-bin histogram of the whole image.
    pub fn histogram(&self) -> [u64; 256] {
        let mut hist = [0u64; 256];
        for &v in &self.data {
            hist[v as usize] += 1;
        }
        hist
    }

    /// Copy with pixels under the mask zeroed.
    pub fn zero_where(&self, mask: &Mask) -> GrayImage {
        assert_eq!((self.width, self.height), (mask.width, mask.height));
        let data = self
            .data
            .iter()
            .zip(&mask.data)
            .map(|(&v, &m)| if m != 0 { 0 } else { v })
            .collect();
        GrayImage {
            width: self.width,
            height: self.height,
            data,
        }
    }

    /// Copy with pixels outside the mask zeroed.
    pub fn keep_only(&self, mask: &Mask) -> GrayImage {
        assert_eq!((self.width, self.height), (mask.width, mask.height));
        let data = self
            .data
            .iter()
            .zip(&mask.data)
            .map(|(&v, &m)| if m != 0 { v } else { 0 })
            .collect();
        GrayImage {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

/// Interleaved 8-bit RGB raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        RgbImage {
            width,
            height,
            data: vec![0; 3 * width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<u8>) -> Self {
        assert_eq!(
            data.len(),
            3 * width * height,
            "data length must be 3*width*height"
        );
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        RgbImage {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> (u8, u8, u8) {
        let i = 3 * (y * self.width + x);
        (self.data[i], self.data[i + 1], self.data[i + 2])
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, rgb: (u8, u8, u8)) {
        let i = 3 * (y * self.width + x);
        self.data[i] = rgb.0;
        self.data[i + 1] = rgb.1;
        self.data[i + 2] = rgb.2;
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn crop(&self, roi: Roi) -> RgbImage {
        let mut out = RgbImage::new(roi.width(), roi.height());
        for y in 0..roi.height() {
            for x in 0..roi.width() {
                out.set(x, y, self.get(roi.x0 + x, roi.y0 + y));
            }
        }
        out
    }
}

/// Binary raster; foreground is 255, background 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width >= 1 && height >= 1, "mask dimensions must be >= 1");
        Mask {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    /// Builds a mask from raw bytes; any nonzero byte becomes foreground.
    pub fn from_vec(width: usize, height: usize, data: Vec<u8>) -> Self {
        assert_eq!(
            data.len(),
            width * height,
            "data length must be width*height"
        );
        let data = data
            .into_iter()
            .map(|v| if v != 0 { 255 } else { 0 })
            .collect();
        Mask {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn is_set(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x] != 0
    }

    /// Out-of-range coordinates read as background.
    #[inline]
    pub fn is_set_i(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.is_set(x as usize, y as usize)
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, fg: bool) {
        self.data[y * self.width + x] = if fg { 255 } else { 0 };
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn crop(&self, roi: Roi) -> Mask {
        let mut out = Mask::new(roi.width(), roi.height());
        for y in 0..roi.height() {
            for x in 0..roi.width() {
                out.set(x, y, self.is_set(roi.x0 + x, roi.y0 + y));
            }
        }
        out
    }

    /// Pixel-wise union.
    pub fn union(&self, other: &Mask) -> Mask {
        assert_eq!((self.width, self.height), (other.width, other.height));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| if a != 0 || b != 0 { 255 } else { 0 })
            .collect();
        Mask {
            width: self.width,
            height: self.height,
            data,
        }
    }

    /// Pixel-wise intersection.
    pub fn intersect(&self, other: &Mask) -> Mask {
        assert_eq!((self.width, self.height), (other.width, other.height));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| if a != 0 && b != 0 { 255 } else { 0 })
            .collect();
        Mask {
            width: self.width,
            height: self.height,
            data,
        }
    }

    /// Pixels of `self` not in `other`.
    pub fn subtract(&self, other: &Mask) -> Mask {
        assert_eq!((self.width, self.height), (other.width, other.height));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| if a != 0 && b == 0 { 255 } else { 0 })
            .collect();
        Mask {
            width: self.width,
            height: self.height,
            data,
        }
    }

    pub fn as_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.clone(),
        }
    }

    /// Dice overlap coefficient between two masks of equal size.
    pub fn dice(&self, other: &Mask) -> f64 {
        assert_eq!((self.width, self.height), (other.width, other.height));
        let inter = self.intersect(other).count();
        let total = self.count() + other.count();
        if total == 0 {
            return 1.0;
        }
        2.0 * inter as f64 / total as f64
    }
}

/// Axis-aligned rectangle with inclusive corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Roi {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Roi {
    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        assert!(x0 <= x1 && y0 <= y1, "Roi corners out of order");
        Roi { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> usize {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0 + 1
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    /// Bounding union of two rectangles.
    pub fn combine(&self, other: &Roi) -> Roi {
        Roi {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    pub fn overlap(&self, other: &Roi) -> Option<Roi> {
        let x0 = self.x0.max(other.x0);
        let y0 = self.y0.max(other.y0);
        let x1 = self.x1.min(other.x1);
        let y1 = self.y1.min(other.y1);
        if x0 <= x1 && y0 <= y1 {
            Some(Roi { x0, y0, x1, y1 })
        } else {
            None
        }
    }

    /// Clip to an image of the given dimensions.
    pub fn clip(&self, width: usize, height: usize) -> Roi {
        Roi {
            x0: self.x0.min(width - 1),
            y0: self.y0.min(height - 1),
            x1: self.x1.min(width - 1),
            y1: self.y1.min(height - 1),
        }
    }
}
