//! Page assembly by region packing.

use std::sync::Arc;

use serde::Serialize;

use super::labelvalue::{gen_labelvalue_set, PlacedLvSet};
use super::pools::ContentPools;
use super::rng::SplitMix64;
use super::table::{gen_table, PlacedTable};
use super::{bounds, HeuristicMeasurer, Primitive, TextMeasurer};
use crate::form_tree::{serialize_json, ParseNode, ParseTree};
use crate::reading_order::{order_elements, BBox, LayoutElement, ReadOrderConfig};

/// Regions narrower or shorter than this are dropped instead of tried.
const MIN_REGION: (f64, f64) = (40.0, 15.0);
const MAX_STEPS: usize = 10_000;
/// Vertical jitter the read order must survive, as a fraction of the smaller
/// height of two boxes.
const ORDER_MARGIN: f64 = 0.2;
/// Largest downward nudge tried to move a placement off an order boundary.
const MAX_NUDGE: usize = 12;
/// Placements rejected for an ambiguous read order whose region is retried.
const MAX_RESETTLES: usize = 50;

#[derive(Clone, Debug, Serialize)]
pub struct PageConfig {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    pub seed: u64,
    pub table_probability: f64,
    #[serde(skip)]
    pub measurer: Arc<dyn TextMeasurer>,
}

impl Default for PageConfig {
    fn default() -> Self {
        PageConfig {
            width: 768.0,
            height: 1152.0,
            margin: 16.0,
            seed: 0,
            table_probability: 0.2,
            measurer: Arc::new(HeuristicMeasurer::default()),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PageConfigError {
    #[error("page size must be positive, got {0}x{1}")]
    Size(f64, f64),
    #[error("margins leave no room on a {0}x{1} page")]
    Margin(f64, f64),
    #[error("table probability {0} is outside [0, 1]")]
    TableProbability(f64),
}

impl PageConfig {
    pub fn with_seed(seed: u64) -> Self {
        PageConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), PageConfigError> {
        if !(self.width > 0.0 && self.height > 0.0) {
            return Err(PageConfigError::Size(self.width, self.height));
        }
        if !(self.margin >= 0.0 && 2.0 * self.margin < self.width.min(self.height)) {
            return Err(PageConfigError::Margin(self.width, self.height));
        }
        if !(0.0..=1.0).contains(&self.table_probability) {
            return Err(PageConfigError::TableProbability(self.table_probability));
        }
        Ok(())
    }

    pub fn content_area(&self) -> BBox {
        BBox::new(
            self.margin,
            self.margin,
            self.width - self.margin,
            self.height - self.margin,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Header,
    Pair,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PageElement {
    pub id: usize,
    pub kind: ElementKind,
    pub bbox: BBox,
    pub primitives: Vec<Primitive>,
}

/// A top-level unit of the ground truth and the elements drawing it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReadGroup {
    pub id: usize,
    pub elements: Vec<usize>,
    pub bbox: BBox,
    #[serde(skip)]
    pub node: ParseNode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    pub table_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormPage {
    pub width: f64,
    pub height: f64,
    pub elements: Vec<PageElement>,
    /// Groups in read order.
    pub groups: Vec<ReadGroup>,
    #[serde(skip)]
    pub gt: ParseTree,
    pub provenance: Provenance,
}

impl FormPage {
    /// A page with nothing on it.
    pub fn blank(cfg: &PageConfig) -> FormPage {
        FormPage {
            width: cfg.width,
            height: cfg.height,
            elements: Vec::new(),
            groups: Vec::new(),
            gt: ParseTree::default(),
            provenance: Provenance {
                seed: cfg.seed,
                width: cfg.width,
                height: cfg.height,
                margin: cfg.margin,
                table_probability: cfg.table_probability,
            },
        }
    }

    pub fn gt_json(&self) -> String {
        serialize_json(&self.gt)
    }

    pub fn layout_json(&self) -> String {
        serde_json::to_string(self).expect("page geometry serializes")
    }
}

#[derive(Clone)]
enum Placed {
    Table(PlacedTable),
    Set(PlacedLvSet),
}

fn shifted(b: &BBox, dy: f64) -> BBox {
    BBox::new(b.left, b.top + dy, b.right, b.bottom + dy)
}

impl Placed {
    fn bbox(&self) -> BBox {
        match self {
            Placed::Table(t) => t.bbox,
            Placed::Set(s) => s.bbox,
        }
    }

    /// Boxes of the read groups this placement becomes.
    fn group_boxes(&self) -> Vec<BBox> {
        match self {
            Placed::Table(t) => vec![t.bbox],
            Placed::Set(s) if s.header.is_some() && s.spec.header.is_some() => vec![s.bbox],
            Placed::Set(s) => s.pairs.iter().map(|p| p.bbox).collect(),
        }
    }

    /// Boxes ordered inside a single group.
    fn inner_boxes(&self) -> Vec<BBox> {
        match self {
            Placed::Set(s) if s.header.is_some() && s.spec.header.is_some() => {
                s.pairs.iter().map(|p| p.bbox).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Moves everything down by `dy`. Boxes also cover their shifted
    /// primitives so rounding never leaves a primitive outside.
    fn shift(&mut self, dy: f64) {
        let move_all = |bbox: &mut BBox, prims: &mut Vec<Primitive>| {
            prims.iter_mut().for_each(|p| p.translate(0.0, dy));
            let moved = shifted(bbox, dy);
            *bbox = bounds(prims).map_or(moved, |b| moved.union(&b));
        };
        match self {
            Placed::Table(t) => move_all(&mut t.bbox, &mut t.primitives),
            Placed::Set(s) => {
                let mut all = Vec::new();
                if let Some(h) = &mut s.header {
                    move_all(&mut h.bbox, &mut h.primitives);
                    all.push(h.bbox);
                }
                for p in &mut s.pairs {
                    move_all(&mut p.bbox, &mut p.primitives);
                    all.push(p.bbox);
                }
                let moved = shifted(&s.bbox, dy);
                s.bbox = all.iter().fold(moved, |acc, b| acc.union(b));
            }
        }
    }
}

fn in_band(e: &BBox, o: &BBox, band: f64) -> bool {
    let s = band * e.height();
    let c = o.center_y();
    c >= e.top - s && c <= e.bottom + s
}

/// True when a small vertical jitter of either box could change how
/// `order_elements` relates the two.
fn order_ambiguous(a: &BBox, b: &BBox, band: f64) -> bool {
    let m = ORDER_MARGIN * a.height().min(b.height());
    let near_edge = |e: &BBox, o: &BBox| {
        let s = band * e.height();
        let c = o.center_y();
        (c - (e.top - s)).abs() < m || (c - (e.bottom + s)).abs() < m
    };
    if near_edge(a, b) || near_edge(b, a) {
        return true;
    }
    // With close tops the first element picked decides the order unless the
    // two sit in each other's bands.
    (a.top - b.top).abs() < m && in_band(a, b, band) != in_band(b, a, band)
}

fn any_ambiguous(boxes: &[BBox], against: &[BBox], band: f64) -> bool {
    boxes.iter().enumerate().any(|(i, a)| {
        boxes[i + 1..].iter().chain(against).any(|b| order_ambiguous(a, b, band))
    })
}

/// Moves a placement down until its read order is unambiguous; `false` when
/// no nudge inside the region works.
fn settle(placed: &mut Placed, region: &BBox, groups: &[ReadGroup], band: f64) -> bool {
    if any_ambiguous(&placed.inner_boxes(), &[], band) {
        return false;
    }
    let existing: Vec<BBox> = groups.iter().map(|g| g.bbox).collect();
    let original = placed.clone();
    for step in 0..=MAX_NUDGE {
        let mut candidate = original.clone();
        if step > 0 {
            candidate.shift(step as f64);
        }
        if candidate.bbox().bottom > region.bottom {
            break;
        }
        if !any_ambiguous(&candidate.group_boxes(), &existing, band) {
            *placed = candidate;
            return true;
        }
    }
    false
}

struct Builder {
    elements: Vec<PageElement>,
    groups: Vec<ReadGroup>,
}

impl Builder {
    fn element(&mut self, kind: ElementKind, bbox: BBox, primitives: Vec<Primitive>) -> usize {
        let id = self.elements.len();
        self.elements.push(PageElement {
            id,
            kind,
            bbox,
            primitives,
        });
        id
    }

    fn group(&mut self, elements: Vec<usize>, bbox: BBox, node: ParseNode) {
        let id = self.groups.len();
        self.groups.push(ReadGroup {
            id,
            elements,
            bbox,
            node,
        });
    }

    fn add(&mut self, placed: Placed, order: &ReadOrderConfig) {
        match placed {
            Placed::Table(t) => {
                let e = self.element(ElementKind::Table, t.bbox, t.primitives);
                self.group(vec![e], t.bbox, ParseNode::Table(t.spec.to_table()));
            }
            Placed::Set(s) => {
                let pair_ids: Vec<usize> = s
                    .pairs
                    .iter()
                    .map(|p| self.element(ElementKind::Pair, p.bbox, p.primitives.clone()))
                    .collect();
                match (&s.header, &s.spec.header) {
                    (Some(h), Some(text)) => {
                        let layout: Vec<LayoutElement> = s
                            .pairs
                            .iter()
                            .enumerate()
                            .map(|(i, p)| LayoutElement { id: i, bbox: p.bbox })
                            .collect();
                        let contents = order_elements(&layout, order)
                            .into_iter()
                            .map(|i| s.spec.pairs[s.pairs[i].index].to_node())
                            .collect();
                        let he = self.element(ElementKind::Header, h.bbox, h.primitives.clone());
                        let mut members = vec![he];
                        members.extend(pair_ids);
                        self.group(members, s.bbox, ParseNode::header(text.clone(), contents));
                    }
                    _ => {
                        for (p, e) in s.pairs.iter().zip(pair_ids) {
                            self.group(vec![e], p.bbox, s.spec.pairs[p.index].to_node());
                        }
                    }
                }
            }
        }
    }
}

fn usable(b: &BBox) -> bool {
    b.width() >= MIN_REGION.0 && b.height() >= MIN_REGION.1
}

/// Packs label-value sets and tables into empty regions until every region
/// has failed once. The ground truth lists the placed groups in read order.
pub fn gen_page(cfg: &PageConfig, pools: &ContentPools) -> FormPage {
    let mut page = FormPage::blank(cfg);
    if cfg.validate().is_err() {
        return page;
    }
    let m = cfg.measurer.as_ref();
    let order = ReadOrderConfig::default();
    let mut rng = SplitMix64::new(cfg.seed);
    let area = cfg.content_area();
    let mut regions = vec![area];
    // The region right of all content is tracked apart so it can be replaced.
    let mut right: Option<BBox> = None;
    let mut rightmost = f64::NEG_INFINITY;
    let mut resettles = 0;
    let mut b = Builder {
        elements: Vec::new(),
        groups: Vec::new(),
    };

    for _ in 0..MAX_STEPS {
        let n = regions.len() + right.is_some() as usize;
        if n == 0 {
            break;
        }
        let k = rng.index(n);
        let from_right = k == regions.len();
        let region = if from_right {
            right.take().unwrap()
        } else {
            regions.remove(k)
        };
        let placed = if rng.chance(cfg.table_probability) {
            gen_table(&mut rng, pools, region, m).map(Placed::Table)
        } else {
            gen_labelvalue_set(&mut rng, pools, region, m).map(Placed::Set)
        };
        let Some(mut placed) = placed else {
            continue;
        };
        if !settle(&mut placed, &region, &b.groups, order.band_fraction) {
            if resettles < MAX_RESETTLES {
                resettles += 1;
                if from_right {
                    right = Some(region);
                } else {
                    regions.push(region);
                }
            }
            continue;
        }
        let bb = placed.bbox();
        let gap = rng.uniform(4.0, 16.0);
        let below = BBox::new(bb.left, bb.bottom + gap, bb.right, region.bottom);
        if usable(&below) {
            regions.push(below);
        }
        if bb.right > rightmost {
            rightmost = bb.right;
            let r = BBox::new(rightmost + rng.uniform(4.0, 16.0), area.top, area.right, area.bottom);
            right = usable(&r).then_some(r);
        }
        b.add(placed, &order);
    }

    let layout: Vec<LayoutElement> = b
        .groups
        .iter()
        .map(|g| LayoutElement { id: g.id, bbox: g.bbox })
        .collect();
    let read = order_elements(&layout, &order);
    let mut slots: Vec<Option<ReadGroup>> = b.groups.into_iter().map(Some).collect();
    page.groups = read.into_iter().filter_map(|i| slots[i].take()).collect();
    page.gt = ParseTree::new(page.groups.iter().map(|g| g.node.clone()).collect());
    page.elements = b.elements;
    page
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form_tree::parse_json;

    fn pages(n: u64) -> Vec<FormPage> {
        let pools = ContentPools::builtin();
        (0..n).map(|s| gen_page(&PageConfig::with_seed(s), &pools)).collect()
    }

    #[test]
    fn same_seed_same_page() {
        let pools = ContentPools::builtin();
        let cfg = PageConfig::with_seed(42);
        let a = gen_page(&cfg, &pools);
        let b = gen_page(&cfg, &pools);
        assert_eq!(a, b);
        assert_eq!(a.gt_json(), b.gt_json());
        assert_eq!(a.layout_json(), b.layout_json());
        assert_ne!(a.gt_json(), gen_page(&PageConfig::with_seed(43), &pools).gt_json());
    }

    #[test]
    fn elements_stay_on_page_and_apart() {
        for page in pages(100) {
            let area = BBox::new(0.0, 0.0, page.width, page.height);
            assert!(!page.elements.is_empty());
            for e in &page.elements {
                assert!(area.contains(&e.bbox), "{:?}", e.bbox);
                for p in &e.primitives {
                    assert!(e.bbox.contains(&p.bbox()));
                }
            }
            for (i, a) in page.elements.iter().enumerate() {
                for c in &page.elements[i + 1..] {
                    assert!(!a.bbox.overlaps(&c.bbox), "seed {}: {:?} {:?}", page.provenance.seed, a.bbox, c.bbox);
                }
            }
        }
    }

    #[test]
    fn gt_is_valid_and_round_trips() {
        for page in pages(100) {
            page.gt.validate().unwrap();
            let json = page.gt_json();
            let back = parse_json(&json, false).unwrap();
            assert_eq!(back, page.gt);
            assert_eq!(serialize_json(&back), json);
        }
    }

    #[test]
    fn gt_follows_read_order_of_groups() {
        let order = ReadOrderConfig::default();
        for page in pages(50) {
            let layout: Vec<LayoutElement> = page
                .groups
                .iter()
                .enumerate()
                .map(|(i, g)| LayoutElement { id: i, bbox: g.bbox })
                .collect();
            let read = order_elements(&layout, &order);
            assert_eq!(read, (0..page.groups.len()).collect::<Vec<_>>());
            let nodes: Vec<ParseNode> = page.groups.iter().map(|g| g.node.clone()).collect();
            assert_eq!(nodes, page.gt.roots);
        }
    }

    #[test]
    fn read_order_survives_small_jitter() {
        let order = ReadOrderConfig::default();
        let mut rng = SplitMix64::new(5);
        for page in pages(30) {
            let layout: Vec<LayoutElement> = page
                .groups
                .iter()
                .enumerate()
                .map(|(i, g)| LayoutElement { id: i, bbox: g.bbox })
                .collect();
            let min_h = layout.iter().map(|e| e.bbox.height()).fold(f64::MAX, f64::min);
            for _ in 0..5 {
                let jittered: Vec<LayoutElement> = layout
                    .iter()
                    .map(|e| LayoutElement {
                        id: e.id,
                        bbox: shifted(&e.bbox, rng.uniform(-0.099, 0.099) * min_h),
                    })
                    .collect();
                assert_eq!(order_elements(&jittered, &order), (0..layout.len()).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn tables_appear_at_roughly_the_configured_rate() {
        let pools = ContentPools::builtin();
        let mut tables = 0;
        for s in 0..100 {
            let mut cfg = PageConfig::with_seed(s);
            cfg.table_probability = 1.0;
            tables += gen_page(&cfg, &pools).gt.table_count();
        }
        assert!(tables >= 100);
    }

    #[test]
    fn empty_pools_give_an_empty_page() {
        let pools = ContentPools::from_parts(vec![], vec![], vec![], vec![], vec![], 0.002);
        let mut cfg = PageConfig::with_seed(1);
        cfg.table_probability = 0.5;
        let page = gen_page(&cfg, &pools);
        // Seed labels always exist, so only tables are impossible here.
        assert_eq!(page.gt.table_count(), 0);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = PageConfig {
            width: 0.0,
            ..PageConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(gen_page(&cfg, &ContentPools::builtin()).elements.is_empty());
    }
}
