//! Binary portable graymaps (P5), written at 16 bits with maxval 65535.
//!
//! Samples are big-endian when maxval exceeds 255, as the format requires.
//! The reader accepts any maxval in `1..=65535` and comment lines in the header.

use std::path::Path;

use vortex_ao_core::Image;

use crate::error::{Error, Result};
use crate::fsutil;

pub const MAXVAL: u16 = u16::MAX;

/// Quantizes a `[0, 1]` image to a P5 file image.
pub fn encode(img: &Image) -> Result<Vec<u8>> {
    if let Some(v) = img.as_slice().iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Invalid(format!("image value {v} outside [0, 1]")));
    }
    let n = img.n();
    let mut out = format!("P5\n{n} {n}\n{MAXVAL}\n").into_bytes();
    out.reserve(2 * img.len());
    for &v in img.as_slice() {
        let q = (v * f64::from(MAXVAL)).round() as u16;
        out.extend_from_slice(&q.to_be_bytes());
    }
    Ok(out)
}

/// A parse failure at a byte offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmError {
    pub offset: usize,
    pub message: String,
}

impl PgmError {
    fn at(offset: usize, message: impl Into<String>) -> Self {
        Self {
            offset,
            message: message.into(),
        }
    }

    pub fn into_error(self, path: &Path) -> Error {
        Error::Parse {
            path: path.to_path_buf(),
            offset: self.offset,
            message: self.message,
        }
    }
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while self.data.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> std::result::Result<u32, PgmError> {
        self.skip_space();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.data.get(start) {
                None => PgmError::at(start, format!("unexpected end of file, expected {what}")),
                Some(&b) => PgmError::at(start, format!("expected {what}, found byte 0x{b:02x}")),
            });
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PgmError::at(start, format!("{what} does not fit in 32 bits")))
    }
}

/// Parses a square P5 graymap into a `[0, 1]` image.
pub fn decode(data: &[u8]) -> std::result::Result<Image, PgmError> {
    if data.len() < 2 || &data[..2] != b"P5" {
        return Err(PgmError::at(0, "missing P5 magic"));
    }
    let mut cur = Cursor { data, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval_at = cur.pos;
    let maxval = cur.number("maxval")?;
    if !(1..=65535).contains(&maxval) {
        return Err(PgmError::at(
            maxval_at,
            format!("maxval {maxval} outside 1..=65535"),
        ));
    }
    match data.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        Some(_) => return Err(PgmError::at(cur.pos, "expected whitespace after maxval")),
        None => return Err(PgmError::at(cur.pos, "unexpected end of file after maxval")),
    }
    if width != height || width == 0 {
        return Err(PgmError::at(
            0,
            format!("expected a square image, found {width}x{height}"),
        ));
    }
    let n = width as usize;
    let bytes_per = if maxval > 255 { 2 } else { 1 };
    let body = &data[cur.pos..];
    let need = n * n * bytes_per;
    if body.len() < need {
        return Err(PgmError::at(
            data.len(),
            format!("truncated raster: {} of {need} bytes", body.len()),
        ));
    }
    if body.len() > need {
        return Err(PgmError::at(cur.pos + need, "trailing bytes after raster"));
    }
    let scale = 1.0 / f64::from(maxval);
    let mut values = Vec::with_capacity(n * n);
    for (i, chunk) in body.chunks_exact(bytes_per).enumerate() {
        let v = if bytes_per == 2 {
            u32::from(u16::from_be_bytes([chunk[0], chunk[1]]))
        } else {
            u32::from(chunk[0])
        };
        if v > maxval {
            return Err(PgmError::at(
                cur.pos + i * bytes_per,
                format!("sample {v} exceeds maxval {maxval}"),
            ));
        }
        values.push(f64::from(v) * scale);
    }
    Ok(Image::new(n, values).expect("raster length checked"))
}

pub fn export_image(img: &Image, path: &Path) -> Result<()> {
    fsutil::write_atomic(path, &encode(img)?)
}

pub fn import_image(path: &Path) -> Result<Image> {
    decode(&fsutil::read(path)?).map_err(|e| e.into_error(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_size() {
        let bytes = encode(&Image::zeros(256)).unwrap();
        let header = b"P5\n256 256\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(bytes.len(), header.len() + 2 * 65536);
        assert!(bytes[header.len()..].iter().all(|&b| b == 0));
    }

    #[test]
    fn big_endian_samples() {
        let img = Image::new(8, (0..64).map(|i| if i == 0 { 1.0 } else { 0.5 }).collect()).unwrap();
        let bytes = encode(&img).unwrap();
        let off = b"P5\n8 8\n65535\n".len();
        assert_eq!(&bytes[off..off + 4], &[0xff, 0xff, 0x80, 0x00]);
    }

    #[test]
    fn reads_comments_and_8_bit() {
        let mut data = b"P5 # c\n# more\n2 2 255\n".to_vec();
        data.extend_from_slice(&[0, 255, 51, 102]);
        let img = decode(&data).unwrap();
        assert_eq!(img.as_slice(), &[0.0, 1.0, 0.2, 0.4]);
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(decode(b"P6\n").unwrap_err().offset, 0);
        assert_eq!(decode(b"P5\n8 x").unwrap_err().offset, 5);
        let e = decode(b"P5\n2 2\n65535\n\x00\x01").unwrap_err();
        assert_eq!(e.offset, 15);
        assert!(e.message.contains("truncated"));
        let e = decode(b"P5\n1 1\n10\n\x0b").unwrap_err();
        assert_eq!(e.offset, 10);
        assert!(decode(b"P5\n2 3\n255\n123456").is_err());
        assert!(encode(&Image::filled(8, 1.5)).is_err());
    }
}
