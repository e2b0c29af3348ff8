//! Read order for top-level layout elements.
//!
//! Elements are taken top to bottom. Before an element is emitted, every
//! unplaced element whose vertical center falls inside its (slightly widened)
//! vertical band and which starts further left is placed first, recursively,
//! so text beside a tall block such as a table is read next to it.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub left: f64,
    pub top: f64,
    pub right: f64,
    pub bottom: f64,
}

impl BBox {
    pub fn new(left: f64, top: f64, right: f64, bottom: f64) -> Self {
        BBox {
            left,
            top,
            right,
            bottom,
        }
    }

    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    pub fn height(&self) -> f64 {
        self.bottom - self.top
    }

    pub fn center_y(&self) -> f64 {
        (self.top + self.bottom) / 2.0
    }

    /// Smallest box covering both.
    pub fn union(&self, other: &BBox) -> BBox {
        BBox {
            left: self.left.min(other.left),
            top: self.top.min(other.top),
            right: self.right.max(other.right),
            bottom: self.bottom.max(other.bottom),
        }
    }

    /// True when the interiors intersect.
    pub fn overlaps(&self, other: &BBox) -> bool {
        self.left < other.right
            && other.left < self.right
            && self.top < other.bottom
            && other.top < self.bottom
    }

    pub fn contains(&self, other: &BBox) -> bool {
        self.left <= other.left
            && self.top <= other.top
            && other.right <= self.right
            && other.bottom <= self.bottom
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutElement {
    pub id: usize,
    pub bbox: BBox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadOrderConfig {
    /// Band widening above and below, as a fraction of the element height.
    pub band_fraction: f64,
}

impl Default for ReadOrderConfig {
    fn default() -> Self {
        ReadOrderConfig { band_fraction: 0.3 }
    }
}

struct Placer<'a> {
    elems: Vec<&'a LayoutElement>,
    band_fraction: f64,
    placed: Vec<bool>,
    on_stack: Vec<bool>,
    out: Vec<usize>,
}

impl Placer<'_> {
    fn place(&mut self, e: usize) {
        self.on_stack[e] = true;
        let b = self.elems[e].bbox;
        let slack = self.band_fraction * b.height();
        let (lo, hi) = (b.top - slack, b.bottom + slack);
        let mut left_of: Vec<usize> = (0..self.elems.len())
            .filter(|&o| {
                !self.placed[o] && !self.on_stack[o] && {
                    let ob = self.elems[o].bbox;
                    let c = ob.center_y();
                    c >= lo && c <= hi && ob.left < b.left
                }
            })
            .collect();
        // The sort is stable over the (top, left, id) pre-order.
        left_of.sort_by(|&x, &y| self.elems[x].bbox.left.total_cmp(&self.elems[y].bbox.left));
        for o in left_of {
            if !self.placed[o] && !self.on_stack[o] {
                self.place(o);
            }
        }
        self.on_stack[e] = false;
        self.placed[e] = true;
        self.out.push(self.elems[e].id);
    }
}

/// Returns the element ids in read order.
pub fn order_elements(elements: &[LayoutElement], cfg: &ReadOrderConfig) -> Vec<usize> {
    let mut elems: Vec<&LayoutElement> = elements.iter().collect();
    elems.sort_by(|a, b| {
        a.bbox
            .top
            .total_cmp(&b.bbox.top)
            .then(a.bbox.left.total_cmp(&b.bbox.left))
            .then(a.id.cmp(&b.id))
    });
    let n = elems.len();
    let mut placer = Placer {
        elems,
        band_fraction: cfg.band_fraction.max(0.0),
        placed: vec![false; n],
        on_stack: vec![false; n],
        out: Vec::with_capacity(n),
    };
    for e in 0..n {
        if !placer.placed[e] {
            placer.place(e);
        }
    }
    placer.out
}
