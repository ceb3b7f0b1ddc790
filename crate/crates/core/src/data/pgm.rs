//! Binary greyscale netpbm ("P5") with an 8-bit maxval of 255.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

fn decode_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Decode {
        offset,
        message: message.into(),
    }
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    /// Skips whitespace and `#` comments running to end of line.
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_separators();
        let start = self.pos;
        let mut value: usize = 0;
        while let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(usize::from(b - b'0')))
                .ok_or_else(|| decode_err(start, format!("{what} overflows")))?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(match self.bytes.get(self.pos) {
                None => decode_err(start, format!("truncated header: missing {what}")),
                Some(_) => decode_err(start, format!("expected {what}")),
            });
        }
        Ok(value)
    }
}

/// Decodes a P5 image into an `H×W×1` tensor with pixel `v` mapped to `v/255`.
pub fn decode_pgm(bytes: &[u8]) -> Result<Tensor> {
    if bytes.len() < 2 {
        return Err(decode_err(0, "truncated magic"));
    }
    if &bytes[..2] != b"P5" {
        return Err(decode_err(
            0,
            format!("bad magic {:?}, expected \"P5\"", String::from_utf8_lossy(&bytes[..2])),
        ));
    }
    let mut h = Header { bytes, pos: 2 };
    if !h.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(decode_err(2, "expected whitespace after magic"));
    }
    let width = h.number("width")?;
    let height = h.number("height")?;
    h.skip_separators();
    let maxval_at = h.pos;
    let maxval = h.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(decode_err(maxval_at, format!("zero image dimension {width}×{height}")));
    }
    if maxval != 255 {
        return Err(decode_err(maxval_at, format!("maxval {maxval} unsupported, expected 255")));
    }
    match bytes.get(h.pos) {
        Some(b) if b.is_ascii_whitespace() => h.pos += 1,
        Some(_) => return Err(decode_err(h.pos, "expected whitespace after maxval")),
        None => return Err(decode_err(h.pos, "truncated header: no pixel data")),
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| decode_err(0, "image dimensions overflow"))?;
    let body = &bytes[h.pos..];
    if body.len() < count {
        return Err(decode_err(
            bytes.len(),
            format!("truncated pixel data: {} of {count} bytes", body.len()),
        ));
    }
    let data = body[..count].iter().map(|&v| f64::from(v) / 255.0).collect();
    Tensor::from_vec(&[height, width, 1], data)
}

/// Encodes an `H×W×1` tensor, rounding `v·255` to the nearest byte after
/// clamping to `[0, 1]`.
pub fn encode_pgm(image: &Tensor) -> Result<Vec<u8>> {
    let &[height, width, 1] = image.shape() else {
        return Err(Error::ShapeMismatch(format!(
            "PGM needs an H×W×1 image, got {:?}",
            image.shape()
        )));
    };
    let mut out = Vec::with_capacity(20 + width * height);
    out.extend_from_slice(format!("P5\n{width} {height}\n255\n").as_bytes());
    out.extend(
        image
            .data()
            .iter()
            .map(|&v| libm::round(v.clamp(0.0, 1.0) * 255.0) as u8),
    );
    Ok(out)
}
