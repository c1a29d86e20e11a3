//! Recursive XY-cut over a binarized page image.

use alloc::vec;
use alloc::vec::Vec;

use super::Passage;
use crate::error::{Error, Result};

/// A 1-bit page image; `true` is ink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitmap {
    width: usize,
    height: usize,
    ink: Vec<bool>,
}

impl Bitmap {
    pub fn new(width: usize, height: usize) -> Self {
        Bitmap { width, height, ink: vec![false; width * height] }
    }

    pub fn from_ink(width: usize, height: usize, ink: Vec<bool>) -> Option<Self> {
        (ink.len() == width * height).then_some(Bitmap { width, height, ink })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.ink[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.ink[y * self.width + x] = value;
    }

    pub fn fill_rect(&mut self, x: usize, y: usize, w: usize, h: usize) {
        for yy in y..(y + h).min(self.height) {
            for xx in x..(x + w).min(self.width) {
                self.set(xx, yy, true);
            }
        }
    }
}

/// Pixel rectangle; `x + w` and `y + h` are exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct BlockRect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

const MIN_BLOCK: usize = 4;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Axis {
    Rows,
    Columns,
}

impl Axis {
    fn other(self) -> Axis {
        match self {
            Axis::Rows => Axis::Columns,
            Axis::Columns => Axis::Rows,
        }
    }
}

/// Splits a page into text blocks by recursive XY-cut.
///
/// Whitespace bands at least `gap_threshold` pixels thick separate blocks. Cuts
/// alternate between horizontal and vertical bands, starting with horizontal
/// ones; a region with no qualifying band in either direction becomes a leaf,
/// reported as the tight bounding box of its ink. Leaves narrower or shorter
/// than 4 px are dropped. Blocks come back in reading order.
pub fn segment_page_blocks(bitmap: &Bitmap, gap_threshold: usize) -> Result<Vec<BlockRect>> {
    if bitmap.width == 0 || bitmap.height == 0 {
        return Err(Error::EmptyImage);
    }
    let gap = gap_threshold.max(1);
    let mut out = Vec::new();
    let whole = BlockRect { x: 0, y: 0, w: bitmap.width, h: bitmap.height };
    // explicit stack, children pushed in reverse so they pop in reading order
    let mut stack = vec![(whole, Axis::Rows)];
    while let Some((region, axis)) = stack.pop() {
        let Some(tight) = ink_bounds(bitmap, region) else { continue };
        let parts = split(bitmap, tight, axis, gap)
            .map(|p| (p, axis.other()))
            .or_else(|| split(bitmap, tight, axis.other(), gap).map(|p| (p, axis)));
        match parts {
            Some((parts, next_axis)) => {
                for part in parts.into_iter().rev() {
                    stack.push((part, next_axis));
                }
            }
            None => {
                if tight.w >= MIN_BLOCK && tight.h >= MIN_BLOCK {
                    out.push(tight);
                }
            }
        }
    }
    Ok(out)
}

/// Converts blocks into passages on `page` with consecutive ids.
pub fn blocks_to_passages(blocks: &[BlockRect], page: u32, first_id: u32) -> Vec<Passage> {
    blocks
        .iter()
        .zip(first_id..)
        .map(|(b, id)| Passage {
            id,
            page,
            x: b.x as f64,
            y: b.y as f64,
            w: b.w as f64,
            h: b.h as f64,
        })
        .collect()
}

fn ink_bounds(bitmap: &Bitmap, r: BlockRect) -> Option<BlockRect> {
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
    for y in r.y..r.y + r.h {
        for x in r.x..r.x + r.w {
            if bitmap.get(x, y) {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
        }
    }
    (x0 != usize::MAX).then(|| BlockRect { x: x0, y: y0, w: x1 - x0 + 1, h: y1 - y0 + 1 })
}

/// Splits a tight region at every whitespace band of at least `gap` pixels.
fn split(bitmap: &Bitmap, r: BlockRect, axis: Axis, gap: usize) -> Option<Vec<BlockRect>> {
    let (len, profile): (usize, Vec<bool>) = match axis {
        Axis::Rows => (r.h, (r.y..r.y + r.h).map(|y| (r.x..r.x + r.w).any(|x| bitmap.get(x, y))).collect()),
        Axis::Columns => (r.w, (r.x..r.x + r.w).map(|x| (r.y..r.y + r.h).any(|y| bitmap.get(x, y))).collect()),
    };
    let mut spans = Vec::new();
    let mut seg_start = 0usize;
    let mut i = 0usize;
    while i < len {
        if profile[i] {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < len && !profile[i] {
            i += 1;
        }
        if i - run_start >= gap && run_start > 0 && i < len {
            spans.push((seg_start, run_start));
            seg_start = i;
        }
    }
    if spans.is_empty() {
        return None;
    }
    spans.push((seg_start, len));
    Some(
        spans
            .into_iter()
            .map(|(a, b)| match axis {
                Axis::Rows => BlockRect { x: r.x, y: r.y + a, w: r.w, h: b - a },
                Axis::Columns => BlockRect { x: r.x + a, y: r.y, w: b - a, h: r.h },
            })
            .collect(),
    )
}
