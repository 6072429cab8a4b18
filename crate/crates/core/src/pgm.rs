//! Netpbm graymap (PGM) reading and writing, ASCII `P2` and binary `P5`.
//!
//! Header tokens may be separated by any whitespace and `#` comments running
//! to the end of the line. In `P5` exactly one whitespace byte follows the
//! maxval; samples are one byte when `maxval < 256`, otherwise two bytes
//! big-endian.

use std::fmt;

use thiserror::Error;

use crate::error::Result;
use crate::field::Field;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("pgm parse error at byte {offset}: {reason}")]
pub struct PgmError {
    pub offset: usize,
    pub reason: String,
}

impl PgmError {
    fn at(offset: usize, reason: impl Into<String>) -> Self {
        PgmError {
            offset,
            reason: reason.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgmFormat {
    Ascii,
    Binary,
}

#[derive(Clone, PartialEq, Eq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub levels: Vec<u16>,
}

impl fmt::Debug for PgmImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PgmImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("maxval", &self.maxval)
            .field("levels", &format_args!("[{} samples]", self.levels.len()))
            .finish()
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn skip_space(&mut self) {
        while self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn number(&mut self, what: &str) -> Result<u64, PgmError> {
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.bytes.get(start) {
                None => PgmError::at(start, format!("unexpected end of input, expected {what}")),
                Some(b) => PgmError::at(start, format!("expected {what}, found byte 0x{b:02x}")),
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| PgmError::at(start, format!("{what} does not fit in 64 bits")))
    }

    /// Next header token and the offset where it starts.
    fn header_number(&mut self, what: &str) -> Result<(u64, usize), PgmError> {
        self.skip_space_and_comments();
        let at = self.pos;
        let n = self.number(what)?;
        if let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_whitespace() && b != b'#' {
                return Err(PgmError::at(
                    self.pos,
                    format!("unexpected byte 0x{b:02x} after {what}"),
                ));
            }
        }
        Ok((n, at))
    }
}

/// Parses a `P2` or `P5` document.
pub fn read_pgm(bytes: &[u8]) -> Result<PgmImage, PgmError> {
    let format = match bytes.get(..2) {
        Some(b"P2") => PgmFormat::Ascii,
        Some(b"P5") => PgmFormat::Binary,
        _ => return Err(PgmError::at(0, "bad magic, expected P2 or P5")),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    match cur.bytes.get(2) {
        Some(b) if b.is_ascii_whitespace() || *b == b'#' => {}
        None => return Err(PgmError::at(2, "unexpected end of input after magic")),
        Some(_) => return Err(PgmError::at(2, "bad magic, expected P2 or P5")),
    }

    let (width, width_at) = cur.header_number("width")?;
    let (height, _) = cur.header_number("height")?;
    let (maxval, maxval_at) = cur.header_number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PgmError::at(width_at, "image dimensions must be positive"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(PgmError::at(maxval_at, format!("maxval {maxval} outside 1..=65535")));
    }
    let count = width
        .checked_mul(height)
        .filter(|&n| n <= (1u64 << 32))
        .ok_or_else(|| PgmError::at(width_at, "image too large"))? as usize;
    let maxval = maxval as u16;

    let levels = match format {
        PgmFormat::Binary => {
            match bytes.get(cur.pos) {
                Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
                _ => return Err(PgmError::at(cur.pos, "expected one whitespace byte before raster")),
            }
            let wide = maxval > 255;
            let need = count * if wide { 2 } else { 1 };
            let raster = bytes.get(cur.pos..cur.pos + need).ok_or_else(|| {
                PgmError::at(
                    bytes.len(),
                    format!("truncated raster: need {need} bytes, have {}", bytes.len() - cur.pos),
                )
            })?;
            let levels: Vec<u16> = if wide {
                raster
                    .chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]))
                    .collect()
            } else {
                raster.iter().map(|&b| b as u16).collect()
            };
            if let Some(i) = levels.iter().position(|&l| l > maxval) {
                let offset = cur.pos + i * if wide { 2 } else { 1 };
                return Err(PgmError::at(
                    offset,
                    format!("sample {} exceeds maxval {maxval}", levels[i]),
                ));
            }
            levels
        }
        PgmFormat::Ascii => {
            let mut levels = Vec::with_capacity(count);
            for _ in 0..count {
                cur.skip_space();
                if cur.pos >= bytes.len() {
                    return Err(PgmError::at(
                        cur.pos,
                        format!("truncated raster: {} of {count} samples", levels.len()),
                    ));
                }
                let at = cur.pos;
                let v = cur.number("sample")?;
                if v > maxval as u64 {
                    return Err(PgmError::at(at, format!("sample {v} exceeds maxval {maxval}")));
                }
                levels.push(v as u16);
            }
            cur.skip_space();
            if cur.pos < bytes.len() {
                return Err(PgmError::at(cur.pos, "trailing data after raster"));
            }
            levels
        }
    };

    Ok(PgmImage {
        width: width as usize,
        height: height as usize,
        maxval,
        levels,
    })
}

/// Serializes an image; the header is `P? W H MAXVAL` on three lines.
pub fn write_pgm(img: &PgmImage, format: PgmFormat) -> Vec<u8> {
    let magic = match format {
        PgmFormat::Ascii => "P2",
        PgmFormat::Binary => "P5",
    };
    let mut out = format!("{magic}\n{} {}\n{}\n", img.width, img.height, img.maxval).into_bytes();
    match format {
        PgmFormat::Binary => {
            if img.maxval > 255 {
                img.levels.iter().for_each(|l| out.extend_from_slice(&l.to_be_bytes()));
            } else {
                out.extend(img.levels.iter().map(|&l| l as u8));
            }
        }
        PgmFormat::Ascii => {
            for row in img.levels.chunks(img.width) {
                let line: Vec<String> = row.iter().map(|l| l.to_string()).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
    }
    out
}

/// Intensities `level / maxval`.
pub fn to_field(img: &PgmImage) -> Result<Field> {
    let m = img.maxval as f64;
    Field::from_values(
        img.height,
        img.width,
        img.levels.iter().map(|&l| l as f64 / m).collect(),
    )
}

/// Quantizes with `round(value × maxval)` (half up), clamped to `[0, maxval]`.
pub fn from_field(field: &Field, maxval: u16) -> PgmImage {
    let m = maxval as f64;
    let levels = field
        .values()
        .iter()
        .map(|&v| (v * m + 0.5).floor().clamp(0.0, m) as u16)
        .collect();
    PgmImage {
        width: field.width(),
        height: field.height(),
        maxval,
        levels,
    }
}
