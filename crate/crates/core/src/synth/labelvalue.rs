//! Label-value sets: an optional header over label/value pairs laid out in
//! one or more columns.

use serde::Serialize;

use super::paragraph::{layout_paragraph, ParagraphStyle};
use super::pools::ContentPools;
use super::rng::SplitMix64;
use super::{bounds, sample_thickness, FontStyle, Outline, Primitive, Rule, TextMeasurer, TextRun};
use crate::form_tree::ParseNode;
use crate::reading_order::BBox;

pub const PAIRS_PER_SET: (i64, i64) = (1, 8);
/// Chance a pair comes from the label-value pool rather than a bare label.
pub const PAIR_FROM_POOL: f64 = 0.8;
pub const CHECKBOX_PROBABILITY: f64 = 0.005;
pub const HEADER_PROBABILITY: f64 = 0.5;
pub const LABEL_FONT_IS_HEADER: f64 = 0.3;
pub const VALUE_FONT_IS_LABEL: f64 = 0.5;
/// Separator of list values in the pair pool.
pub const LIST_SEPARATOR: &str = "; ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RelationshipIndicator {
    Colon,
    Line,
    ColonLine,
    DottedLine,
    ColonDottedLine,
    Box,
    ColonBox,
    ToRight,
    ToLeft,
    Below,
}

impl RelationshipIndicator {
    pub const ALL: [RelationshipIndicator; 10] = [
        RelationshipIndicator::Colon,
        RelationshipIndicator::Line,
        RelationshipIndicator::ColonLine,
        RelationshipIndicator::DottedLine,
        RelationshipIndicator::ColonDottedLine,
        RelationshipIndicator::Box,
        RelationshipIndicator::ColonBox,
        RelationshipIndicator::ToRight,
        RelationshipIndicator::ToLeft,
        RelationshipIndicator::Below,
    ];

    pub fn sample(rng: &mut SplitMix64) -> Self {
        Self::ALL[rng.index(Self::ALL.len())]
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|r| *r == self).unwrap()
    }

    pub fn has_colon(self) -> bool {
        matches!(
            self,
            RelationshipIndicator::Colon
                | RelationshipIndicator::ColonLine
                | RelationshipIndicator::ColonDottedLine
                | RelationshipIndicator::ColonBox
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckGlyph {
    Box,
    Parens,
    Brackets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Checkbox {
    pub glyph: CheckGlyph,
    pub checked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSpec {
    /// Label as drawn, colon included when the indicator calls for one.
    pub label: String,
    /// Value lines; empty for a blank value.
    pub values: Vec<String>,
    pub checkbox: Option<Checkbox>,
}

impl PairSpec {
    /// Answer strings recorded in the ground truth.
    pub fn answers(&self) -> Vec<String> {
        match self.checkbox {
            Some(c) if c.checked => vec!["X".to_string()],
            Some(_) => Vec::new(),
            None => self.values.clone(),
        }
    }

    pub fn to_node(&self) -> ParseNode {
        ParseNode::question(self.label.clone(), self.answers())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ValuePlacement {
    Right { aligned: bool },
    Below,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HeaderPlacement {
    /// `beside` starts the pairs right of the header instead of under it.
    TopLeft { beside: bool },
    TopMiddle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LvSetSpec {
    pub header: Option<String>,
    pub pairs: Vec<PairSpec>,
    pub indicator: RelationshipIndicator,
    pub placement: ValuePlacement,
    pub header_placement: HeaderPlacement,
    pub header_font: FontStyle,
    pub label_font: FontStyle,
    pub value_font: FontStyle,
    /// Initial block width as a fraction of the region width.
    pub block_fraction: f64,
}

fn split_values(value: &str) -> Vec<String> {
    value
        .split(LIST_SEPARATOR)
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(str::to_string)
        .collect()
}

fn sample_pair(
    rng: &mut SplitMix64,
    pools: &ContentPools,
    indicator: RelationshipIndicator,
) -> Option<PairSpec> {
    let use_pool = !pools.label_value_pairs.is_empty()
        && (pools.labels.is_empty() || rng.chance(PAIR_FROM_POOL));
    let (label, value) = if use_pool {
        let (l, v) = rng.pick(&pools.label_value_pairs)?;
        (l.as_str(), v.as_str())
    } else {
        (rng.pick(&pools.labels)?.as_str(), "")
    };
    let base = label.trim().trim_end_matches(':').trim_end();
    if base.is_empty() {
        return None;
    }
    let label = if indicator.has_colon() {
        format!("{base}:")
    } else {
        base.to_string()
    };
    let checkbox = rng.chance(CHECKBOX_PROBABILITY).then(|| Checkbox {
        glyph: [CheckGlyph::Box, CheckGlyph::Parens, CheckGlyph::Brackets][rng.index(3)],
        checked: rng.chance(0.5),
    });
    Some(PairSpec {
        label,
        values: split_values(value),
        checkbox,
    })
}

/// Draws the content and styling of a set. `None` when the pools hold no
/// labels at all.
pub fn sample_lv_set_spec(rng: &mut SplitMix64, pools: &ContentPools) -> Option<LvSetSpec> {
    if pools.labels.is_empty() && pools.label_value_pairs.is_empty() {
        return None;
    }
    let indicator = RelationshipIndicator::sample(rng);
    let header = if !pools.titles.is_empty() && rng.chance(HEADER_PROBABILITY) {
        rng.pick(&pools.titles).map(|t| t.trim().to_string()).filter(|t| !t.is_empty())
    } else {
        None
    };
    let n = rng.int_in(PAIRS_PER_SET.0, PAIRS_PER_SET.1);
    let pairs: Vec<PairSpec> = (0..n).filter_map(|_| sample_pair(rng, pools, indicator)).collect();
    if pairs.is_empty() {
        return None;
    }
    let placement = match indicator {
        RelationshipIndicator::ToRight | RelationshipIndicator::ToLeft => {
            ValuePlacement::Right { aligned: true }
        }
        RelationshipIndicator::Below => ValuePlacement::Below,
        _ if rng.chance(0.5) => ValuePlacement::Right {
            aligned: rng.chance(0.5),
        },
        _ => ValuePlacement::Below,
    };
    let header_placement = if rng.chance(0.5) {
        HeaderPlacement::TopLeft {
            beside: rng.chance(0.5),
        }
    } else {
        HeaderPlacement::TopMiddle
    };
    let header_font = FontStyle::sample(rng);
    let label_font = if rng.chance(LABEL_FONT_IS_HEADER) {
        header_font
    } else {
        FontStyle::sample(rng)
    };
    let value_font = if rng.chance(VALUE_FONT_IS_LABEL) {
        label_font
    } else {
        FontStyle::sample(rng)
    };
    Some(LvSetSpec {
        header,
        pairs,
        indicator,
        placement,
        header_placement,
        header_font,
        label_font,
        value_font,
        block_fraction: rng.uniform(0.25, 1.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacedPair {
    /// Index into the spec's pairs.
    pub index: usize,
    pub bbox: BBox,
    pub primitives: Vec<Primitive>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacedHeader {
    pub bbox: BBox,
    pub primitives: Vec<Primitive>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacedLvSet {
    pub spec: LvSetSpec,
    pub header: Option<PlacedHeader>,
    pub pairs: Vec<PlacedPair>,
    pub bbox: BBox,
    pub block_width: f64,
}

/// Decoration drawn around a value.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Deco {
    None,
    Line { dash: Option<f64> },
    Box,
}

/// Geometry drawn once per layout attempt.
struct Ctx<'a> {
    spec: &'a LvSetSpec,
    m: &'a dyn TextMeasurer,
    label_gap: f64,
    pair_gap: f64,
    col_gap: f64,
    align_offset: f64,
}

fn runs_to_prims(runs: Vec<TextRun>) -> Vec<Primitive> {
    runs.into_iter().map(Primitive::Text).collect()
}

fn text_block(
    text: &str,
    font: FontStyle,
    width: f64,
    origin: (f64, f64),
    ctx: &Ctx,
    rng: &mut SplitMix64,
) -> Option<Vec<Primitive>> {
    let words: Vec<&str> = text.split_whitespace().collect();
    if width <= 0.0 {
        return None;
    }
    let style = ParagraphStyle::for_text(rng, width, font.height, font.id);
    layout_paragraph(&words, &style, origin, ctx.m, rng)
        .ok()
        .map(runs_to_prims)
}

/// Draws the value (or checkbox, or blank area) with its top-left at
/// `origin`. Returns the primitives and the value area.
fn value_block(
    pair: &PairSpec,
    width: f64,
    origin: (f64, f64),
    ctx: &Ctx,
    rng: &mut SplitMix64,
) -> Option<(Vec<Primitive>, BBox)> {
    let vf = ctx.spec.value_font;
    let (x, y) = origin;
    if width <= 0.0 {
        return None;
    }
    if let Some(cb) = pair.checkbox {
        let mark = if cb.checked { "X" } else { " " };
        let prims = match cb.glyph {
            CheckGlyph::Box => {
                let mut p = vec![Primitive::Rect(Outline {
                    bbox: BBox::new(x, y, x + vf.height, y + vf.height),
                    thickness: sample_thickness(rng),
                })];
                if cb.checked {
                    let w = ctx.m.width(mark, vf.height);
                    p.push(Primitive::Text(TextRun {
                        text: mark.to_string(),
                        x: x + ((vf.height - w) / 2.0).max(0.0),
                        y,
                        width: w,
                        height: vf.height,
                        font: vf.id,
                    }));
                }
                p
            }
            CheckGlyph::Parens | CheckGlyph::Brackets => {
                let (open, close) = if cb.glyph == CheckGlyph::Parens {
                    ('(', ')')
                } else {
                    ('[', ']')
                };
                let text = format!("{open}{mark}{close}");
                vec![Primitive::Text(TextRun {
                    width: ctx.m.width(&text, vf.height),
                    text,
                    x,
                    y,
                    height: vf.height,
                    font: vf.id,
                })]
            }
        };
        let area = bounds(&prims)?;
        if area.width() > width {
            return None;
        }
        return Some((prims, area));
    }
    if pair.values.is_empty() {
        let w = rng.uniform(0.3, 0.8) * width;
        return Some((Vec::new(), BBox::new(x, y, x + w, y + vf.height)));
    }
    let mut prims = Vec::new();
    let mut cy = y;
    for v in &pair.values {
        let block = text_block(v, vf, width, (x, cy), ctx, rng)?;
        let b = bounds(&block)?;
        cy = b.bottom + 0.25 * vf.height;
        prims.extend(block);
    }
    let area = bounds(&prims)?;
    Some((prims, area))
}

fn decoration(deco: Deco, area: BBox, rng: &mut SplitMix64) -> Option<Primitive> {
    match deco {
        Deco::None => None,
        Deco::Line { dash } => {
            let y = area.bottom + rng.uniform(1.0, 3.0);
            Some(Primitive::Line(Rule {
                x1: area.left,
                y1: y,
                x2: area.right,
                y2: y,
                thickness: sample_thickness(rng),
                dash,
            }))
        }
        Deco::Box => {
            let pad = rng.uniform(2.0, 5.0);
            Some(Primitive::Rect(Outline {
                bbox: BBox::new(area.left - pad, area.top - pad, area.right + pad, area.bottom + pad),
                thickness: sample_thickness(rng),
            }))
        }
    }
}

fn pair_deco(ind: RelationshipIndicator, checkbox: bool, rng: &mut SplitMix64) -> Deco {
    use RelationshipIndicator as R;
    if checkbox {
        return Deco::None;
    }
    match ind {
        R::Line | R::ColonLine => Deco::Line { dash: None },
        R::DottedLine | R::ColonDottedLine => Deco::Line {
            dash: Some(rng.uniform(1.0, 6.0)),
        },
        R::Box | R::ColonBox => Deco::Box,
        R::ToLeft => {
            if rng.chance(0.5) {
                Deco::Line { dash: None }
            } else {
                Deco::Box
            }
        }
        R::Colon | R::ToRight | R::Below => Deco::None,
    }
}

/// Lays out one pair with its top-left at (x, y) inside a column `col_w` wide.
fn layout_pair(
    pair: &PairSpec,
    x: f64,
    y: f64,
    col_w: f64,
    ctx: &Ctx,
    rng: &mut SplitMix64,
) -> Option<(BBox, Vec<Primitive>)> {
    let spec = ctx.spec;
    let lf = spec.label_font;
    let vgap = 0.3 * lf.height.min(spec.value_font.height);
    let deco = pair_deco(spec.indicator, pair.checkbox.is_some(), rng);
    let mut prims = Vec::new();
    match (spec.indicator, spec.placement) {
        (RelationshipIndicator::Below, _) => {
            let (vp, area) = value_block(pair, col_w, (x, y), ctx, rng)?;
            prims.extend(vp);
            let ly = area.bottom + vgap;
            let sep = Primitive::Line(Rule {
                x1: x,
                y1: ly,
                x2: x + area.width().max(ctx.m.width(&pair.label, lf.height).min(col_w)),
                y2: ly,
                thickness: sample_thickness(rng),
                dash: None,
            });
            let sep_bottom = sep.bbox().bottom;
            prims.push(sep);
            prims.extend(text_block(&pair.label, lf, col_w, (x, sep_bottom + vgap), ctx, rng)?);
        }
        (RelationshipIndicator::ToLeft, _) => {
            let vw = ctx.align_offset - ctx.label_gap;
            let (vp, area) = value_block(pair, vw, (x, y), ctx, rng)?;
            prims.extend(vp);
            prims.extend(decoration(deco, area, rng));
            let lx = x + ctx.align_offset;
            prims.extend(text_block(&pair.label, lf, col_w - ctx.align_offset, (lx, y), ctx, rng)?);
        }
        (_, ValuePlacement::Right { aligned }) => {
            let label_w = if aligned {
                ctx.align_offset - ctx.label_gap
            } else {
                0.5 * col_w
            };
            let lp = text_block(&pair.label, lf, label_w, (x, y), ctx, rng)?;
            let lb = bounds(&lp)?;
            let vx = if aligned {
                x + ctx.align_offset
            } else {
                lb.right + ctx.label_gap
            };
            let vy = if aligned { y } else { lb.bottom - lf.height };
            prims.extend(lp);
            let (vp, area) = value_block(pair, x + col_w - vx, (vx, vy), ctx, rng)?;
            prims.extend(vp);
            prims.extend(decoration(deco, area, rng));
        }
        (_, ValuePlacement::Below) => {
            let lp = text_block(&pair.label, lf, col_w, (x, y), ctx, rng)?;
            let lb = bounds(&lp)?;
            prims.extend(lp);
            let indent = rng.uniform(0.0, 2.0) * lf.height;
            let indent = indent.min(col_w / 4.0);
            let pad = if deco == Deco::Box { 5.0 } else { 0.0 };
            let (vp, area) = value_block(pair, col_w - indent - pad, (x + indent, lb.bottom + vgap + pad), ctx, rng)?;
            prims.extend(vp);
            prims.extend(decoration(deco, area, rng));
        }
    }
    let mut bb = bounds(&prims)?;
    // The epsilon keeps the shifted box from landing a rounding error short.
    let nudge = |d: f64| if d > 0.0 { d + 1e-6 } else { 0.0 };
    let (dx, dy) = (nudge(x - bb.left), nudge(y - bb.top));
    if dx > 0.0 || dy > 0.0 {
        for p in &mut prims {
            p.translate(dx, dy);
        }
        bb = bounds(&prims)?;
    }
    Some((bb, prims))
}

fn try_layout(
    spec: &LvSetSpec,
    rng: &mut SplitMix64,
    region: BBox,
    block_w: f64,
    m: &dyn TextMeasurer,
) -> Option<PlacedLvSet> {
    let lf = spec.label_font;
    let mut ctx = Ctx {
        spec,
        m,
        label_gap: rng.uniform(0.3, 1.5) * lf.height,
        pair_gap: rng.uniform(0.3, 1.2) * lf.height,
        col_gap: rng.uniform(1.0, 3.0) * lf.height,
        align_offset: 0.0,
    };
    // The aligned column holds the labels, or the values under ToLeft.
    let (texts, font): (Vec<&str>, FontStyle) = if spec.indicator == RelationshipIndicator::ToLeft {
        (
            spec.pairs.iter().flat_map(|p| p.values.iter().map(String::as_str)).chain(["( )"]).collect(),
            spec.value_font,
        )
    } else {
        (spec.pairs.iter().map(|p| p.label.as_str()).collect(), lf)
    };
    let widest = texts.iter().map(|t| m.width(t, font.height)).fold(0.0, f64::max);
    let widest_word = texts
        .iter()
        .flat_map(|t| t.split_whitespace())
        .map(|w| m.width(w, font.height))
        .fold(0.0, f64::max);
    ctx.align_offset = (widest + ctx.label_gap).min(0.5 * block_w).max(widest_word + ctx.label_gap);

    let mut header = None;
    let mut col_x = region.left;
    let mut top = region.top;
    if let Some(text) = &spec.header {
        let hf = spec.header_font;
        let mut prims = text_block(text, hf, block_w, (region.left, region.top), &ctx, rng)?;
        let mut hb = bounds(&prims)?;
        if spec.header_placement == HeaderPlacement::TopMiddle {
            let shift = ((block_w - hb.width()) / 2.0).max(0.0);
            for p in &mut prims {
                p.translate(shift, 0.0);
            }
            hb = bounds(&prims)?;
        }
        if !region.contains(&hb) {
            return None;
        }
        let gap = rng.uniform(0.3, 1.0) * hf.height;
        if spec.header_placement == (HeaderPlacement::TopLeft { beside: true }) {
            col_x = hb.right + ctx.col_gap;
        } else {
            top = hb.bottom + gap;
        }
        header = Some(PlacedHeader { bbox: hb, primitives: prims });
    }

    let col_w = block_w;
    let room_for_column = |x: f64| x + col_w <= region.right;
    let mut pairs = Vec::new();
    let mut y = top;
    let mut col_right = col_x;
    let mut in_col = 0usize;
    for (i, pair) in spec.pairs.iter().enumerate() {
        if in_col > 0 && rng.chance((0.05 * in_col as f64).min(0.5)) {
            let nx = col_right + ctx.col_gap;
            if room_for_column(nx) {
                col_x = nx;
                col_right = nx;
                y = top;
                in_col = 0;
            }
        }
        let Some(mut placed) = layout_pair(pair, col_x, y, col_w, &ctx, rng) else {
            break;
        };
        if placed.0.bottom > region.bottom && in_col > 0 {
            let nx = col_right + ctx.col_gap;
            if !room_for_column(nx) {
                break;
            }
            col_x = nx;
            col_right = nx;
            y = top;
            in_col = 0;
            match layout_pair(pair, col_x, y, col_w, &ctx, rng) {
                Some(p) => placed = p,
                None => break,
            }
        }
        if !region.contains(&placed.0) {
            break;
        }
        let (bb, prims) = placed;
        y = bb.bottom + ctx.pair_gap;
        col_right = col_right.max(bb.right);
        in_col += 1;
        pairs.push(PlacedPair {
            index: i,
            bbox: bb,
            primitives: prims,
        });
    }
    if pairs.is_empty() {
        return None;
    }
    let mut bbox = pairs[0].bbox;
    for p in &pairs[1..] {
        bbox = bbox.union(&p.bbox);
    }
    if let Some(h) = &header {
        bbox = bbox.union(&h.bbox);
    }
    Some(PlacedLvSet {
        spec: spec.clone(),
        header,
        pairs,
        bbox,
        block_width: block_w,
    })
}

/// Lays a set out at the top-left of `region`, widening the block after
/// each attempt that places no pair. `None` once the full region width fails.
pub fn layout_lv_set(
    spec: &LvSetSpec,
    rng: &mut SplitMix64,
    region: BBox,
    m: &dyn TextMeasurer,
) -> Option<PlacedLvSet> {
    let full = region.width();
    if full <= 0.0 || region.height() <= 0.0 {
        return None;
    }
    let mut w = spec.block_fraction * full;
    loop {
        if let Some(set) = try_layout(spec, rng, region, w, m) {
            return Some(set);
        }
        if w >= full {
            return None;
        }
        w = (w * 1.5).min(full);
    }
}

/// Samples a set and lays it out in `region`.
pub fn gen_labelvalue_set(
    rng: &mut SplitMix64,
    pools: &ContentPools,
    region: BBox,
    m: &dyn TextMeasurer,
) -> Option<PlacedLvSet> {
    let spec = sample_lv_set_spec(rng, pools)?;
    layout_lv_set(&spec, rng, region, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::HeuristicMeasurer;

    fn region() -> BBox {
        BBox::new(16.0, 16.0, 752.0, 1136.0)
    }

    fn spec_with(rng: &mut SplitMix64, ind: RelationshipIndicator) -> LvSetSpec {
        let pools = ContentPools::builtin();
        loop {
            let s = sample_lv_set_spec(rng, &pools).unwrap();
            if s.indicator == ind {
                return s;
            }
        }
    }

    #[test]
    fn indicators_are_uniform() {
        let pools = ContentPools::builtin();
        let mut rng = SplitMix64::new(1);
        let mut counts = [0usize; 10];
        let n = 10_000;
        for _ in 0..n {
            counts[sample_lv_set_spec(&mut rng, &pools).unwrap().indicator.index()] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.1).abs() < 0.02, "{counts:?}");
        }
    }

    #[test]
    fn checkbox_rate_near_half_percent() {
        let pools = ContentPools::builtin();
        let mut rng = SplitMix64::new(2);
        let (mut boxes, mut total) = (0usize, 0usize);
        while total < 100_000 {
            for p in sample_lv_set_spec(&mut rng, &pools).unwrap().pairs {
                total += 1;
                boxes += p.checkbox.is_some() as usize;
            }
        }
        let f = boxes as f64 / total as f64;
        assert!((f - 0.005).abs() < 0.002, "{f}");
    }

    #[test]
    fn font_sharing_rates() {
        let pools = ContentPools::builtin();
        let mut rng = SplitMix64::new(3);
        let n = 10_000;
        let (mut lh, mut vl) = (0, 0);
        for _ in 0..n {
            let s = sample_lv_set_spec(&mut rng, &pools).unwrap();
            lh += (s.label_font == s.header_font) as usize;
            vl += (s.value_font == s.label_font) as usize;
        }
        assert!((lh as f64 / n as f64 - 0.3).abs() < 0.02);
        assert!((vl as f64 / n as f64 - 0.5).abs() < 0.02);
    }

    #[test]
    fn colon_labels_end_with_colon() {
        let mut rng = SplitMix64::new(4);
        for ind in RelationshipIndicator::ALL {
            for _ in 0..20 {
                let s = spec_with(&mut rng, ind);
                for p in &s.pairs {
                    assert_eq!(p.label.ends_with(':'), ind.has_colon(), "{ind:?} {}", p.label);
                }
            }
        }
    }

    #[test]
    fn below_puts_label_under_value_with_one_line() {
        let m = HeuristicMeasurer::default();
        let mut rng = SplitMix64::new(5);
        let mut checked = 0;
        while checked < 30 {
            let mut s = spec_with(&mut rng, RelationshipIndicator::Below);
            for p in &mut s.pairs {
                p.checkbox = None;
                if p.values.is_empty() {
                    p.values.push("value".into());
                }
            }
            let Some(set) = layout_lv_set(&s, &mut rng, region(), &m) else {
                continue;
            };
            for pp in &set.pairs {
                let label = &s.pairs[pp.index].label;
                let lines: Vec<&Rule> = pp
                    .primitives
                    .iter()
                    .filter_map(|p| match p {
                        Primitive::Line(r) => Some(r),
                        _ => None,
                    })
                    .collect();
                assert_eq!(lines.len(), 1);
                let first_label_word = label.split_whitespace().next().unwrap();
                let label_top = pp
                    .primitives
                    .iter()
                    .filter_map(|p| match p {
                        Primitive::Text(t) if t.text == first_label_word && t.y > lines[0].y1 => Some(t.y),
                        _ => None,
                    })
                    .next();
                assert!(label_top.is_some(), "label below line");
                let value_bottom = pp
                    .primitives
                    .iter()
                    .filter_map(|p| match p {
                        Primitive::Text(t) if t.y < lines[0].y1 => Some(t.y + t.height),
                        _ => None,
                    })
                    .fold(f64::MIN, f64::max);
                assert!(value_bottom <= lines[0].y1);
                checked += 1;
            }
        }
    }

    #[test]
    fn zero_height_region_fails() {
        let pools = ContentPools::builtin();
        let m = HeuristicMeasurer::default();
        let mut rng = SplitMix64::new(6);
        for _ in 0..50 {
            let r = BBox::new(16.0, 100.0, 752.0, 100.0);
            assert!(gen_labelvalue_set(&mut rng, &pools, r, &m).is_none());
        }
    }

    #[test]
    fn placed_pairs_fit_and_do_not_overlap() {
        let pools = ContentPools::builtin();
        let m = HeuristicMeasurer::default();
        let mut rng = SplitMix64::new(7);
        let mut placed = 0;
        for _ in 0..500 {
            let r = BBox::new(16.0, 16.0, rng.uniform(100.0, 752.0), rng.uniform(60.0, 1136.0));
            let Some(set) = gen_labelvalue_set(&mut rng, &pools, r, &m) else {
                continue;
            };
            placed += 1;
            assert!(r.contains(&set.bbox));
            let mut boxes: Vec<BBox> = set.pairs.iter().map(|p| p.bbox).collect();
            boxes.extend(set.header.as_ref().map(|h| h.bbox));
            for i in 0..boxes.len() {
                for j in i + 1..boxes.len() {
                    assert!(!boxes[i].overlaps(&boxes[j]), "{:?} {:?}", boxes[i], boxes[j]);
                }
            }
        }
        assert!(placed > 300, "{placed}");
    }

    #[test]
    fn checkbox_answers_are_inner_text() {
        let p = PairSpec {
            label: "Agree".into(),
            values: vec!["yes".into()],
            checkbox: Some(Checkbox {
                glyph: CheckGlyph::Brackets,
                checked: true,
            }),
        };
        assert_eq!(p.answers(), vec!["X"]);
        let blank = PairSpec {
            checkbox: Some(Checkbox {
                glyph: CheckGlyph::Box,
                checked: false,
            }),
            ..p
        };
        assert!(blank.answers().is_empty());
    }

    #[test]
    fn list_values_become_separate_answers() {
        assert_eq!(split_values("Water; Gas; Electric"), vec!["Water", "Gas", "Electric"]);
        assert_eq!(split_values("March 23, 1999"), vec!["March 23, 1999"]);
        assert!(split_values("").is_empty());
    }
}
