//! Netpbm bitmap (`P1` plain or `P4` raw) reader; 1 is ink.

use std::path::Path;

use voxanchor_core::layout::Bitmap;

use crate::error::{io_err, Error, Result};

pub fn read_pbm(path: &Path) -> Result<Bitmap> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    parse_pbm(&bytes).map_err(|msg| Error::Invalid { path: path.to_path_buf(), msg })
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&str> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).ok().filter(|s| !s.is_empty())
    }

    fn number(&mut self, what: &str) -> std::result::Result<usize, String> {
        self.token().and_then(|t| t.parse().ok()).ok_or_else(|| format!("bad {what}"))
    }
}

pub fn parse_pbm(bytes: &[u8]) -> std::result::Result<Bitmap, String> {
    let mut c = Cursor { bytes, pos: 0 };
    let magic = c.token().map(str::to_owned);
    let width = c.number("width")?;
    let height = c.number("height")?;
    let n = width.checked_mul(height).ok_or("image too large")?;
    let ink = match magic.as_deref() {
        Some("P1") => {
            let mut ink = Vec::with_capacity(n);
            while ink.len() < n {
                c.skip_space();
                match c.bytes.get(c.pos) {
                    Some(b'0') => ink.push(false),
                    Some(b'1') => ink.push(true),
                    Some(_) => return Err("bad pixel".into()),
                    None => return Err("truncated pixel data".into()),
                }
                c.pos += 1;
            }
            ink
        }
        Some("P4") => {
            // exactly one whitespace byte separates the header from the raster
            c.pos += 1;
            let stride = width.div_ceil(8);
            let data = c.bytes.get(c.pos..c.pos + stride * height).ok_or("truncated pixel data")?;
            let mut ink = Vec::with_capacity(n);
            for row in data.chunks(stride) {
                ink.extend((0..width).map(|x| row[x / 8] & (0x80 >> (x % 8)) != 0));
            }
            ink
        }
        _ => return Err("not a PBM image (expected P1 or P4)".into()),
    };
    Bitmap::from_ink(width, height, ink).ok_or_else(|| "pixel count mismatch".into())
}
