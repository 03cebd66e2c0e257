//! Annotated overlay: class-colored rectangles and 3x5 bitmap labels drawn
//! onto a copy of the input scene.

use bmc_core::features::CellClass;
use bmc_core::imgcore::{RgbImage, Roi};

pub fn class_color(class: CellClass) -> (u8, u8, u8) {
    match class {
        CellClass::Nstg => (220, 40, 40),
        CellClass::Nsbg => (230, 140, 30),
        CellClass::Mbe => (40, 170, 60),
        CellClass::Mls => (50, 90, 220),
        CellClass::Ocs => (180, 50, 180),
    }
}

// 3x5 glyphs for the letters used by the class mnemonics.
fn glyph(c: char) -> [u8; 5] {
    match c {
        'N' => [0b101, 0b111, 0b111, 0b101, 0b101],
        'S' => [0b111, 0b100, 0b111, 0b001, 0b111],
        'T' => [0b111, 0b010, 0b010, 0b010, 0b010],
        'G' => [0b111, 0b100, 0b101, 0b101, 0b111],
        'B' => [0b110, 0b101, 0b110, 0b101, 0b110],
        'M' => [0b101, 0b111, 0b111, 0b101, 0b101],
        'E' => [0b111, 0b100, 0b110, 0b100, 0b111],
        'L' => [0b100, 0b100, 0b100, 0b100, 0b111],
        'O' => [0b111, 0b101, 0b101, 0b101, 0b111],
        'C' => [0b111, 0b100, 0b100, 0b100, 0b111],
        _ => [0b111, 0b001, 0b010, 0b000, 0b010], // '?'
    }
}

fn put(img: &mut RgbImage, x: i64, y: i64, color: (u8, u8, u8)) {
    if x >= 0 && y >= 0 && (x as usize) < img.width() && (y as usize) < img.height() {
        img.set(x as usize, y as usize, color);
    }
}

pub fn draw_rect(img: &mut RgbImage, roi: Roi, color: (u8, u8, u8)) {
    for x in roi.x0..=roi.x1 {
        put(img, x as i64, roi.y0 as i64, color);
        put(img, x as i64, roi.y1 as i64, color);
    }
    for y in roi.y0..=roi.y1 {
        put(img, roi.x0 as i64, y as i64, color);
        put(img, roi.x1 as i64, y as i64, color);
    }
}

pub fn draw_label(img: &mut RgbImage, x: i64, y: i64, text: &str, color: (u8, u8, u8)) {
    for (k, c) in text.chars().enumerate() {
        let rows = glyph(c);
        let gx = x + k as i64 * 4;
        for (ry, bits) in rows.iter().enumerate() {
            for rx in 0..3 {
                if bits & (0b100 >> rx) != 0 {
                    put(img, gx + rx as i64, y + ry as i64, color);
                }
            }
        }
    }
}

/// Draw one labelled detection: rectangle plus mnemonic above its top-left
/// corner.
pub fn annotate(img: &mut RgbImage, roi: Roi, label: &str, class: Option<CellClass>) {
    let color = class.map(class_color).unwrap_or((90, 90, 90));
    draw_rect(img, roi, color);
    let ty = roi.y0 as i64 - 7;
    draw_label(img, roi.x0 as i64, ty.max(0), label, color);
}
