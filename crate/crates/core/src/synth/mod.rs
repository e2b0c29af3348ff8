//! Seeded synthetic form pages with ground-truth parses.
//!
//! A page is packed with label-value sets and tables drawn from text pools.
//! Geometry is vector only: text runs, rule lines and boxes, exportable as SVG.

pub mod labelvalue;
pub mod numbers;
pub mod page;
pub mod paragraph;
pub mod pools;
pub mod rng;
pub mod svg;
pub mod table;

use std::fmt;

use serde::Serialize;

use crate::reading_order::BBox;

pub use labelvalue::{gen_labelvalue_set, layout_lv_set, sample_lv_set_spec, LvSetSpec, PlacedLvSet, RelationshipIndicator};
pub use numbers::{sample_number, NumberFormat};
pub use page::{gen_page, ElementKind, FormPage, PageConfig, PageConfigError, PageElement, ReadGroup};
pub use paragraph::{layout_paragraph, IndentMode, ParagraphStyle};
pub use pools::{load_pools, load_pools_with_cap, ContentPools, PoolError};
pub use rng::{page_seed, SplitMix64};
pub use svg::render_svg;
pub use table::{gen_table, layout_table, sample_table_spec, PlacedTable, TableSpec};

/// Number of abstract font styles a run can name.
pub const FONT_COUNT: u32 = 64;
/// Text height range for form text, in pixels.
pub const FORM_TEXT_HEIGHT: (f64, f64) = (10.0, 24.0);
/// Rule line thickness range, in pixels.
pub const LINE_THICKNESS: (f64, f64) = (1.0, 3.0);

/// Width of a text run at a given text height.
pub trait TextMeasurer: Send + Sync {
    fn width(&self, text: &str, height: f64) -> f64;
}

/// Glyph-free estimate: a fixed fraction of the height per character.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicMeasurer {
    pub char_width: f64,
}

impl Default for HeuristicMeasurer {
    fn default() -> Self {
        HeuristicMeasurer { char_width: 0.55 }
    }
}

impl TextMeasurer for HeuristicMeasurer {
    fn width(&self, text: &str, height: f64) -> f64 {
        self.char_width * height * text.chars().count() as f64
    }
}

impl fmt::Debug for dyn TextMeasurer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TextMeasurer")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FontStyle {
    pub id: u32,
    pub height: f64,
}

impl FontStyle {
    pub fn sample(rng: &mut SplitMix64) -> FontStyle {
        FontStyle {
            id: rng.below(FONT_COUNT as u64) as u32,
            height: rng.uniform(FORM_TEXT_HEIGHT.0, FORM_TEXT_HEIGHT.1),
        }
    }

    pub fn em(&self) -> f64 {
        1.6 * self.height
    }
}

/// One word or short string, positioned by its top-left corner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TextRun {
    pub text: String,
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
    pub font: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rule {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub thickness: f64,
    /// Dash length for dotted or dashed rules.
    pub dash: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Outline {
    pub bbox: BBox,
    pub thickness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Primitive {
    Text(TextRun),
    Line(Rule),
    Rect(Outline),
}

impl Primitive {
    pub fn bbox(&self) -> BBox {
        match self {
            Primitive::Text(t) => BBox::new(t.x, t.y, t.x + t.width, t.y + t.height),
            Primitive::Line(r) => {
                let h = r.thickness / 2.0;
                BBox::new(
                    r.x1.min(r.x2) - h,
                    r.y1.min(r.y2) - h,
                    r.x1.max(r.x2) + h,
                    r.y1.max(r.y2) + h,
                )
            }
            Primitive::Rect(o) => {
                let h = o.thickness / 2.0;
                BBox::new(o.bbox.left - h, o.bbox.top - h, o.bbox.right + h, o.bbox.bottom + h)
            }
        }
    }

    pub fn translate(&mut self, dx: f64, dy: f64) {
        match self {
            Primitive::Text(t) => {
                t.x += dx;
                t.y += dy;
            }
            Primitive::Line(r) => {
                r.x1 += dx;
                r.x2 += dx;
                r.y1 += dy;
                r.y2 += dy;
            }
            Primitive::Rect(o) => {
                o.bbox.left += dx;
                o.bbox.right += dx;
                o.bbox.top += dy;
                o.bbox.bottom += dy;
            }
        }
    }
}

/// Union of primitive boxes, `None` when empty.
pub fn bounds(prims: &[Primitive]) -> Option<BBox> {
    prims.iter().map(Primitive::bbox).reduce(|a, b| a.union(&b))
}

pub(crate) fn sample_thickness(rng: &mut SplitMix64) -> f64 {
    rng.uniform(LINE_THICKNESS.0, LINE_THICKNESS.1)
}
