//! Binary PPM (P6) and PGM (P5) readers and writers, maxval 255, bit-exact
//! round trip.

use super::{GrayImage, Mask, RgbImage};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("bad magic number at byte {offset}: expected {expected}")]
    BadMagic {
        offset: usize,
        expected: &'static str,
    },
    #[error("bad header token at byte {offset}")]
    BadToken { offset: usize },
    #[error("unsupported maxval {maxval} at byte {offset}: only 255 is accepted")]
    BadMaxval { offset: usize, maxval: u64 },
    #[error("zero image dimension at byte {offset}")]
    ZeroDimension { offset: usize },
    #[error("truncated payload at byte {offset}: expected {expected} bytes, found {found}")]
    Truncated {
        offset: usize,
        expected: usize,
        found: usize,
    },
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        HeaderReader { bytes, pos: 0 }
    }

    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn read_number(&mut self) -> Result<u64, FormatError> {
        self.skip_space_and_comments();
        let start = self.pos;
        let mut value: u64 = 0;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            value = value * 10 + (self.bytes[self.pos] - b'0') as u64;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(FormatError::BadToken { offset: start });
        }
        Ok(value)
    }
}

fn parse_header(bytes: &[u8], magic: &'static str) -> Result<(usize, usize, usize), FormatError> {
    if bytes.len() < 2 || &bytes[..2] != magic.as_bytes() {
        return Err(FormatError::BadMagic {
            offset: 0,
            expected: magic,
        });
    }
    let mut rd = HeaderReader::new(&bytes[2..]);
    let width = rd.read_number().map_err(|e| bump(e, 2))?;
    let height = rd.read_number().map_err(|e| bump(e, 2))?;
    let maxval_at = rd.pos + 2;
    let maxval = rd.read_number().map_err(|e| bump(e, 2))?;
    if maxval != 255 {
        return Err(FormatError::BadMaxval {
            offset: maxval_at,
            maxval,
        });
    }
    if width == 0 || height == 0 {
        return Err(FormatError::ZeroDimension { offset: 2 });
    }
    // Exactly one whitespace byte separates the header from the payload.
    let data_at = rd.pos + 2 + 1;
    if data_at > bytes.len() {
        return Err(FormatError::Truncated {
            offset: bytes.len(),
            expected: 1,
            found: 0,
        });
    }
    Ok((width as usize, height as usize, data_at))
}

fn bump(e: FormatError, by: usize) -> FormatError {
    match e {
        FormatError::BadToken { offset } => FormatError::BadToken {
            offset: offset + by,
        },
        other => other,
    }
}

pub fn read_ppm(bytes: &[u8]) -> Result<RgbImage, FormatError> {
    let (width, height, data_at) = parse_header(bytes, "P6")?;
    let expected = 3 * width * height;
    let payload = &bytes[data_at..];
    if payload.len() < expected {
        return Err(FormatError::Truncated {
            offset: bytes.len(),
            expected,
            found: payload.len(),
        });
    }
    Ok(RgbImage::from_vec(
        width,
        height,
        payload[..expected].to_vec(),
    ))
}

pub fn write_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage, FormatError> {
    let (width, height, data_at) = parse_header(bytes, "P5")?;
    let expected = width * height;
    let payload = &bytes[data_at..];
    if payload.len() < expected {
        return Err(FormatError::Truncated {
            offset: bytes.len(),
            expected,
            found: payload.len(),
        });
    }
    Ok(GrayImage::from_vec(
        width,
        height,
        payload[..expected].to_vec(),
    ))
}

pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

impl Mask {
    pub fn read_pgm(bytes: &[u8]) -> Result<Mask, FormatError> {
        let img = read_pgm(bytes)?;
        Ok(Mask::from_vec(
            img.width(),
            img.height(),
            img.data().to_vec(),
        ))
    }

    pub fn write_pgm(&self) -> Vec<u8> {
        write_pgm(&self.as_gray())
    }
}
