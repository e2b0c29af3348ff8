//! Table sampling and layout.
//!
//! Column headers sit above the cells and row headers to their right.

use serde::Serialize;

use super::numbers::{sample_number, NumberFormat};
use super::pools::ContentPools;
use super::rng::SplitMix64;
use super::{bounds, sample_thickness, FontStyle, Outline, Primitive, Rule, TextMeasurer, TextRun};
use crate::form_tree::Table;
use crate::reading_order::BBox;

pub const TITLE_PROBABILITY: f64 = 0.33;
pub const TITLE_WORDS: (i64, i64) = (1, 6);
pub const ROWS: (i64, i64) = (2, 15);
pub const COLS: (i64, i64) = (2, 10);
/// Relative weights of 1, 2, 3 and 4 word headers.
pub const HEADER_WORD_WEIGHTS: [f64; 4] = [81.4, 18.6, 6.9, 2.0];
pub const NUMBER_CELL_PROBABILITY: f64 = 0.5;
pub const BLANK_CELL_PROBABILITY: f64 = 0.15;
/// Text height range inside tables, in pixels.
pub const TABLE_TEXT_HEIGHT: (f64, f64) = (10.0, 16.0);

fn table_font(rng: &mut SplitMix64) -> FontStyle {
    FontStyle {
        id: rng.below(super::FONT_COUNT as u64) as u32,
        height: rng.uniform(TABLE_TEXT_HEIGHT.0, TABLE_TEXT_HEIGHT.1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CellKind {
    Word,
    Number(#[serde(serialize_with = "ser_format")] NumberFormat),
}

fn ser_format<S: serde::Serializer>(f: &NumberFormat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{f:?}"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSpec {
    pub kind: CellKind,
    /// Content drawn for the cell, kept even when the cell is blanked.
    pub drawn: String,
    pub blank: bool,
}

impl CellSpec {
    pub fn text(&self) -> &str {
        if self.blank {
            ""
        } else {
            &self.drawn
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableSpec {
    pub title: Option<String>,
    pub row_headers: Vec<String>,
    pub col_headers: Vec<String>,
    pub cells: Vec<Vec<CellSpec>>,
    pub title_font: FontStyle,
    pub header_font: FontStyle,
    pub cell_font: FontStyle,
    pub grid_lines: bool,
    pub border: bool,
}

impl TableSpec {
    pub fn rows(&self) -> usize {
        self.row_headers.len()
    }

    pub fn cols(&self) -> usize {
        self.col_headers.len()
    }

    pub fn to_table(&self) -> Table {
        Table {
            title: self.title.clone(),
            row_headers: self.row_headers.clone(),
            col_headers: self.col_headers.clone(),
            cells: Some(
                self.cells
                    .iter()
                    .map(|r| r.iter().map(|c| c.text().to_string()).collect())
                    .collect(),
            ),
        }
    }
}

fn words(rng: &mut SplitMix64, pool: &[String], n: usize) -> String {
    (0..n)
        .filter_map(|_| rng.pick(pool).cloned())
        .collect::<Vec<_>>()
        .join(" ")
}

fn header_text(rng: &mut SplitMix64, pool: &[String]) -> String {
    let n = rng.weighted(&HEADER_WORD_WEIGHTS) + 1;
    words(rng, pool, n)
}

/// Draws table content and styling. Returns `None` when the pools hold no
/// usable words.
pub fn sample_table_spec(rng: &mut SplitMix64, pools: &ContentPools) -> Option<TableSpec> {
    let pool = pools.content_words();
    if pool.is_empty() {
        return None;
    }
    let title = if rng.chance(TITLE_PROBABILITY) {
        let n = rng.int_in(TITLE_WORDS.0, TITLE_WORDS.1) as usize;
        Some(words(rng, pool, n))
    } else {
        None
    };
    let rows = rng.int_in(ROWS.0, ROWS.1) as usize;
    let cols = rng.int_in(COLS.0, COLS.1) as usize;
    let col_headers = (0..cols).map(|_| header_text(rng, pool)).collect();
    let row_headers = (0..rows).map(|_| header_text(rng, pool)).collect();
    let cells = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    let (kind, drawn) = if rng.chance(NUMBER_CELL_PROBABILITY) {
                        let (f, s) = sample_number(rng);
                        (CellKind::Number(f), s)
                    } else {
                        (CellKind::Word, words(rng, pool, 1))
                    };
                    let blank = rng.chance(BLANK_CELL_PROBABILITY);
                    CellSpec { kind, drawn, blank }
                })
                .collect()
        })
        .collect();
    Some(TableSpec {
        title,
        row_headers,
        col_headers,
        cells,
        title_font: FontStyle::sample(rng),
        header_font: table_font(rng),
        cell_font: table_font(rng),
        grid_lines: rng.chance(0.5),
        border: rng.chance(0.5),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacedTable {
    pub spec: TableSpec,
    pub bbox: BBox,
    pub primitives: Vec<Primitive>,
}

fn run(text: &str, x: f64, y: f64, font: FontStyle, m: &dyn TextMeasurer) -> Primitive {
    Primitive::Text(TextRun {
        text: text.to_string(),
        x,
        y,
        width: m.width(text, font.height),
        height: font.height,
        font: font.id,
    })
}

fn line(rng: &mut SplitMix64, x1: f64, y1: f64, x2: f64, y2: f64) -> Primitive {
    Primitive::Line(Rule {
        x1,
        y1,
        x2,
        y2,
        thickness: sample_thickness(rng),
        dash: None,
    })
}

/// Greedy wrap of `text` into lines no wider than `max_w` (a single word may
/// exceed it). Returns the lines and the widest line's width.
fn wrap(text: &str, font: FontStyle, max_w: f64, m: &dyn TextMeasurer) -> (Vec<String>, f64) {
    let mut lines: Vec<String> = Vec::new();
    for word in text.split_whitespace() {
        match lines.last_mut() {
            Some(line) if m.width(&format!("{line} {word}"), font.height) <= max_w => {
                line.push(' ');
                line.push_str(word);
            }
            _ => lines.push(word.to_string()),
        }
    }
    let widest = lines.iter().map(|l| m.width(l, font.height)).fold(0.0, f64::max);
    (lines, widest)
}

fn widest_word(text: &str, font: FontStyle, m: &dyn TextMeasurer) -> f64 {
    text.split_whitespace().map(|w| m.width(w, font.height)).fold(0.0, f64::max)
}

fn draw_lines(lines: &[String], x: f64, y: f64, font: FontStyle, leading: f64, m: &dyn TextMeasurer, out: &mut Vec<Primitive>) {
    for (i, l) in lines.iter().enumerate() {
        out.push(run(l, x, y + i as f64 * leading, font, m));
    }
}

/// Lays the table out at the region's top-left corner. Header text wraps
/// inside its column. `None` when the table does not fit.
pub fn layout_table(
    spec: &TableSpec,
    rng: &mut SplitMix64,
    region: BBox,
    m: &dyn TextMeasurer,
) -> Option<PlacedTable> {
    let (hf, cf, tf) = (spec.header_font, spec.cell_font, spec.title_font);
    let pad_x = rng.uniform(0.2, 0.6) * cf.height.min(hf.height);
    let pad_y = rng.uniform(0.2, 0.6) * cf.height.min(hf.height);
    let leading = 1.15 * hf.height;

    let mut col_w = Vec::with_capacity(spec.cols());
    let mut col_lines = Vec::with_capacity(spec.cols());
    for j in 0..spec.cols() {
        let body = spec
            .cells
            .iter()
            .map(|r| m.width(r[j].text(), cf.height))
            .fold(0.0, f64::max);
        let head = &spec.col_headers[j];
        let target = body.max(widest_word(head, hf, m));
        let (lines, w) = wrap(head, hf, target, m);
        col_w.push(body.max(w) + 2.0 * pad_x);
        col_lines.push(lines);
    }
    let rh_cap = spec
        .row_headers
        .iter()
        .map(|h| widest_word(h, hf, m))
        .fold(0.0, f64::max)
        .max(6.0 * hf.height);
    let row_lines: Vec<(Vec<String>, f64)> = spec.row_headers.iter().map(|h| wrap(h, hf, rh_cap, m)).collect();
    let rh_w = row_lines.iter().map(|r| r.1).fold(0.0, f64::max) + 2.0 * pad_x;
    let head_lines = col_lines.iter().map(Vec::len).max().unwrap_or(1);
    let head_h = hf.height + (head_lines - 1) as f64 * leading + 2.0 * pad_y;
    let row_h: Vec<f64> = row_lines
        .iter()
        .map(|(l, _)| (hf.height + (l.len() - 1) as f64 * leading).max(cf.height) + 2.0 * pad_y)
        .collect();
    let width = col_w.iter().sum::<f64>() + rh_w;
    let height = head_h + row_h.iter().sum::<f64>();

    let x0 = region.left;
    let mut y = region.top;
    let mut prims = Vec::new();
    if let Some(title) = &spec.title {
        let (lines, tw) = wrap(title, tf, region.width().min(width.max(widest_word(title, tf, m))), m);
        if tw > region.width() {
            return None;
        }
        let tl = 1.15 * tf.height;
        draw_lines(&lines, x0, y, tf, tl, m, &mut prims);
        y += tf.height + (lines.len() - 1) as f64 * tl + rng.uniform(0.3, 1.0) * tf.height;
    }
    // Rules reach past the text by half their thickness, so the body is always inset.
    let border_pad = LINE_PAD;
    if x0 + width + 2.0 * border_pad > region.right || y + height + 2.0 * border_pad > region.bottom {
        return None;
    }
    let x0 = x0 + border_pad;
    let top = y + border_pad;

    let mut col_x = Vec::with_capacity(spec.cols() + 1);
    let mut acc = x0;
    for w in &col_w {
        col_x.push(acc);
        acc += w;
    }
    let rh_x = acc;
    col_x.push(rh_x);
    let mut row_y = Vec::with_capacity(spec.rows() + 1);
    let mut acc = top + head_h;
    for h in &row_h {
        row_y.push(acc);
        acc += h;
    }

    for (j, lines) in col_lines.iter().enumerate() {
        draw_lines(lines, col_x[j] + pad_x, top + pad_y, hf, leading, m, &mut prims);
    }
    for (i, row) in spec.cells.iter().enumerate() {
        let ry = row_y[i];
        for (j, c) in row.iter().enumerate() {
            if !c.blank && !c.drawn.is_empty() {
                prims.push(run(&c.drawn, col_x[j] + pad_x, ry + pad_y, cf, m));
            }
        }
        draw_lines(&row_lines[i].0, rh_x + pad_x, ry + pad_y, hf, leading, m, &mut prims);
    }

    let right = x0 + width;
    let bottom = top + height;
    // Each rule lands somewhere in the gap between neighbouring text.
    let in_gap = |rng: &mut SplitMix64, at: f64, pad: f64| at + rng.uniform(-0.5, 0.5) * pad;
    let sep_y = in_gap(rng, top + head_h, pad_y);
    prims.push(line(rng, x0, sep_y, right, sep_y));
    let sep_x = in_gap(rng, rh_x, pad_x);
    prims.push(line(rng, sep_x, top, sep_x, bottom));
    if spec.grid_lines {
        for &ry in &row_y[1..] {
            let yy = in_gap(rng, ry, pad_y);
            prims.push(line(rng, x0, yy, right, yy));
        }
        for &cx in &col_x[1..spec.cols()] {
            let xx = in_gap(rng, cx, pad_x);
            prims.push(line(rng, xx, top, xx, bottom));
        }
    }
    if spec.border {
        let h = border_pad / 2.0;
        prims.push(Primitive::Rect(Outline {
            bbox: BBox::new(x0 - h, top - h, right + h, bottom + h),
            thickness: sample_thickness(rng),
        }));
    }
    let bbox = bounds(&prims)?;
    if !region.contains(&bbox) {
        return None;
    }
    Some(PlacedTable {
        spec: spec.clone(),
        bbox,
        primitives: prims,
    })
}

/// Inset of the table body inside its region.
const LINE_PAD: f64 = 4.0;

/// Smallest table text height reached by shrinking.
pub const MIN_TABLE_TEXT_HEIGHT: f64 = 6.0;

/// Samples a table and lays it out in `region`, shrinking its text a few
/// times before giving up.
pub fn gen_table(
    rng: &mut SplitMix64,
    pools: &ContentPools,
    region: BBox,
    m: &dyn TextMeasurer,
) -> Option<PlacedTable> {
    let mut spec = sample_table_spec(rng, pools)?;
    loop {
        if let Some(t) = layout_table(&spec, rng, region, m) {
            return Some(t);
        }
        let smallest = spec.header_font.height.min(spec.cell_font.height);
        if smallest * 0.8 < MIN_TABLE_TEXT_HEIGHT {
            return None;
        }
        for f in [&mut spec.header_font, &mut spec.cell_font, &mut spec.title_font] {
            f.height *= 0.8;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::HeuristicMeasurer;

    fn page() -> BBox {
        BBox::new(16.0, 16.0, 752.0, 1136.0)
    }

    #[test]
    fn dimensions_stay_in_range() {
        let pools = ContentPools::builtin();
        let mut rng = SplitMix64::new(1);
        for _ in 0..1000 {
            let s = sample_table_spec(&mut rng, &pools).unwrap();
            assert!((2..=15).contains(&s.rows()));
            assert!((2..=10).contains(&s.cols()));
            assert!(s.cells.iter().all(|r| r.len() == s.cols()));
            if let Some(t) = &s.title {
                assert!((1..=6).contains(&t.split(' ').count()));
            }
            for h in s.col_headers.iter().chain(&s.row_headers) {
                let n = h.split(' ').count();
                assert!((1..=4).contains(&n));
            }
        }
    }

    #[test]
    fn blank_fraction_near_fifteen_percent() {
        let pools = ContentPools::builtin();
        let mut rng = SplitMix64::new(2);
        let (mut blank, mut total) = (0usize, 0usize);
        while total < 10_000 {
            let s = sample_table_spec(&mut rng, &pools).unwrap();
            for c in s.cells.iter().flatten() {
                total += 1;
                blank += c.blank as usize;
            }
        }
        let f = blank as f64 / total as f64;
        assert!((f - 0.15).abs() < 0.015, "{f}");
    }

    #[test]
    fn title_and_cell_kind_rates() {
        let pools = ContentPools::builtin();
        let mut rng = SplitMix64::new(8);
        let n = 10_000;
        let (mut titled, mut numbers, mut cells) = (0usize, 0usize, 0usize);
        for _ in 0..n {
            let s = sample_table_spec(&mut rng, &pools).unwrap();
            titled += s.title.is_some() as usize;
            for c in s.cells.iter().flatten() {
                cells += 1;
                numbers += matches!(c.kind, CellKind::Number(_)) as usize;
            }
        }
        assert!((titled as f64 / n as f64 - 0.33).abs() < 0.02);
        assert!((numbers as f64 / cells as f64 - 0.5).abs() < 0.02);
    }

    #[test]
    fn tiny_region_fails() {
        let pools = ContentPools::builtin();
        let m = HeuristicMeasurer::default();
        let mut rng = SplitMix64::new(3);
        for _ in 0..50 {
            assert!(gen_table(&mut rng, &pools, BBox::new(0.0, 0.0, 20.0, 20.0), &m).is_none());
        }
    }

    #[test]
    fn placed_tables_fit_and_always_have_a_separator() {
        let pools = ContentPools::builtin();
        let m = HeuristicMeasurer::default();
        let mut rng = SplitMix64::new(4);
        let mut placed = 0;
        for _ in 0..300 {
            if let Some(t) = gen_table(&mut rng, &pools, page(), &m) {
                placed += 1;
                assert!(page().contains(&t.bbox));
                let lines = t.primitives.iter().filter(|p| matches!(p, Primitive::Line(_))).count();
                assert!(lines >= 2);
                let table = t.spec.to_table();
                assert_eq!(table.cells.as_ref().unwrap().len(), t.spec.rows());
            }
        }
        assert!(placed > 50);
    }

    #[test]
    fn empty_pools_cannot_make_tables() {
        let pools = ContentPools::from_parts(vec![], vec![], vec![], vec![], vec![], 0.002);
        assert!(sample_table_spec(&mut SplitMix64::new(1), &pools).is_none());
    }
}
