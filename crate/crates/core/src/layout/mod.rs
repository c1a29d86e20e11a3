//! Passage geometry and the screen-to-document gaze mapping.
//!
//! Passages are axis-aligned rectangles in document pixels, with `y` measured
//! from the top of their page. The viewport shows one page at a time, shifted
//! vertically by the scroll offset of the most recent [`ScrollEvent`].

mod segment;

pub use segment::{blocks_to_passages, segment_page_blocks, Bitmap, BlockRect};

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::types::{GazeSample, Millis, ScrollEvent, Viewport};

/// One text passage on a page.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Passage {
    pub id: u32,
    pub page: u32,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Passage {
    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    /// Closed-rectangle containment.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x && x <= self.right() && y >= self.y && y <= self.bottom()
    }

    /// Euclidean distance from a point to the rectangle; zero inside.
    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        let dx = (self.x - x).max(0.0).max(x - self.right());
        let dy = (self.y - y).max(0.0).max(y - self.bottom());
        libm::hypot(dx, dy)
    }

    /// Interior overlap; touching edges do not count.
    pub fn overlaps(&self, other: &Passage) -> bool {
        self.x < other.right()
            && other.x < self.right()
            && self.y < other.bottom()
            && other.y < self.bottom()
    }

    pub fn intersects_band(&self, top: f64, bottom: f64) -> bool {
        self.y < bottom && self.bottom() > top
    }
}

/// A page and the passages laid out on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Page {
    pub page: u32,
    pub w: f64,
    pub h: f64,
    pub passages: Vec<Passage>,
}

/// Passage geometry for a whole document.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PageLayout {
    pub pages: Vec<Page>,
}

impl PageLayout {
    pub fn new(pages: Vec<Page>) -> Result<Self> {
        let layout = PageLayout { pages };
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids: Vec<u32> = Vec::new();
        let mut page_numbers: Vec<u32> = Vec::new();
        for page in &self.pages {
            if page.page == 0 {
                return Err(invalid("page indices are 1-based"));
            }
            if !(page.w > 0.0 && page.h > 0.0) {
                return Err(invalid(format!("page {} has non-positive size", page.page)));
            }
            page_numbers.push(page.page);
            for (i, p) in page.passages.iter().enumerate() {
                if p.page != page.page {
                    return Err(invalid(format!("passage {} listed under page {}", p.id, page.page)));
                }
                if !(p.w > 0.0 && p.h > 0.0) {
                    return Err(invalid(format!("passage {} has non-positive size", p.id)));
                }
                if p.x < 0.0 || p.y < 0.0 || p.right() > page.w || p.bottom() > page.h {
                    return Err(invalid(format!("passage {} exceeds page {}", p.id, page.page)));
                }
                if let Some(q) = page.passages[..i].iter().find(|q| q.overlaps(p)) {
                    return Err(invalid(format!("passages {} and {} overlap", q.id, p.id)));
                }
                ids.push(p.id);
            }
        }
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("duplicate passage ids"));
        }
        page_numbers.sort_unstable();
        if page_numbers.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("duplicate page indices"));
        }
        Ok(())
    }

    pub fn page(&self, page: u32) -> Option<&Page> {
        self.pages.iter().find(|p| p.page == page)
    }

    pub fn passage(&self, id: u32) -> Option<&Passage> {
        self.passages().find(|p| p.id == id)
    }

    pub fn passages(&self) -> impl Iterator<Item = &Passage> {
        self.pages.iter().flat_map(|p| p.passages.iter())
    }

    pub fn passage_count(&self) -> usize {
        self.pages.iter().map(|p| p.passages.len()).sum()
    }

    /// Passages in top-to-bottom reading order, page by page.
    pub fn reading_order(&self) -> Vec<Passage> {
        let mut pages: Vec<&Page> = self.pages.iter().collect();
        pages.sort_by_key(|p| p.page);
        let mut out = Vec::with_capacity(self.passage_count());
        for page in pages {
            let start = out.len();
            out.extend(page.passages.iter().copied());
            out[start..].sort_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)).then(a.id.cmp(&b.id)));
        }
        out
    }
}

/// A gaze sample in document coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DocGazeSample {
    pub t: Millis,
    pub page: u32,
    pub x: f64,
    pub y: f64,
    pub on_screen: bool,
}

/// Index of the scroll state in force at `t` (last event with `event.t <= t`).
pub fn scroll_state_at(scrolls: &[ScrollEvent], t: Millis) -> Option<&ScrollEvent> {
    let idx = scrolls.partition_point(|s| s.t <= t);
    idx.checked_sub(1).map(|i| &scrolls[i])
}

/// Replays scrolling to place each screen-space sample on its page.
///
/// A sample is `on_screen` when it lies inside the viewport rectangle and its
/// document position falls on the displayed page.
pub fn map_gaze_to_document(
    gaze: &[GazeSample],
    scrolls: &[ScrollEvent],
    viewport: Viewport,
    layout: &PageLayout,
) -> Vec<DocGazeSample> {
    let mut out = Vec::with_capacity(gaze.len());
    let mut next = 0usize;
    let mut current: Option<&ScrollEvent> = None;
    for s in gaze {
        while next < scrolls.len() && scrolls[next].t <= s.t {
            current = Some(&scrolls[next]);
            next += 1;
        }
        let (page, scroll_y) = match current {
            Some(ev) => (ev.page, ev.scroll_y),
            None => (1, 0.0),
        };
        let x = s.x;
        let y = s.y + scroll_y;
        let in_viewport = s.x >= 0.0 && s.x < viewport.w && s.y >= 0.0 && s.y < viewport.h;
        let on_page = layout
            .page(page)
            .is_some_and(|p| x >= 0.0 && x < p.w && y >= 0.0 && y < p.h);
        out.push(DocGazeSample { t: s.t, page, x, y, on_screen: in_viewport && on_page });
    }
    out
}

/// Passages on the scrolled-to page that intersect the viewport, topmost first.
pub fn visible_passages(layout: &PageLayout, scroll: &ScrollEvent, viewport: Viewport) -> Result<Vec<u32>> {
    let page = layout.page(scroll.page).ok_or(Error::UnknownPage(scroll.page))?;
    let top = scroll.scroll_y;
    let bottom = top + viewport.h;
    let mut visible: Vec<&Passage> = page
        .passages
        .iter()
        .filter(|p| p.intersects_band(top, bottom) && p.x < viewport.w && p.right() > 0.0)
        .collect();
    visible.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.id.cmp(&b.id)));
    Ok(visible.into_iter().map(|p| p.id).collect())
}
