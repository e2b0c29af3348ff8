//! Greedily-aligned normalized tree edit distance.
//!
//! The predicted tree is walked breadth first. Each node is tried at every
//! position within `window` places of its current index among its siblings,
//! the whole-tree nTED is computed for each position, and the node is left
//! where the score was lowest. After every node has been placed once the
//! score of the resulting tree is the GAnTED score. Tables are converted to
//! trees in both orientations, on both sides, and the minimum is kept.
//!
//! Candidate scores are computed incrementally: subtree distances are kept
//! per predicted node, and a move only invalidates the keyroots on the path
//! from the moved node's parent to the root. Rows of the forest tables that
//! precede the parent's subtree in postorder are shared between candidates.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::edit_metrics::{
    flatten, nted, nted_denominator, real_node_count, PostorderTree, TedCosts,
};
use crate::form_tree::{to_label_tree, LabelTree, ParseTree, TableOrientation};

/// Scores closer than this are treated as ties.
pub const SCORE_TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct GantedConfig {
    /// Maximum displacement tried for each node.
    pub window: usize,
    /// Number of alignment passes; 2 gives "2-GAnTED".
    pub passes: usize,
    pub max_orientation_combos: usize,
    pub costs: TedCosts,
}

impl Default for GantedConfig {
    fn default() -> Self {
        GantedConfig {
            window: 10,
            passes: 1,
            max_orientation_combos: 1024,
            costs: TedCosts::default(),
        }
    }
}

impl GantedConfig {
    pub fn with_passes(passes: usize) -> Self {
        GantedConfig {
            passes: passes.max(1),
            ..Default::default()
        }
    }
}

struct Arena {
    labels: Vec<String>,
    children: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
}

impl Arena {
    fn from_tree(tree: &LabelTree) -> Self {
        let mut arena = Arena {
            labels: Vec::new(),
            children: Vec::new(),
            parent: Vec::new(),
        };
        let mut stack = vec![(tree, None::<usize>)];
        while let Some((node, parent)) = stack.pop() {
            let id = arena.labels.len();
            arena.labels.push(node.label.clone());
            arena.children.push(Vec::with_capacity(node.children.len()));
            arena.parent.push(parent);
            if let Some(p) = parent {
                arena.children[p].push(id);
            }
            for c in node.children.iter().rev() {
                stack.push((c, Some(id)));
            }
        }
        // Children were pushed in reverse visit order of the stack; restore.
        for kids in &mut arena.children {
            kids.sort_unstable();
        }
        arena
    }

    fn to_tree(&self, id: usize) -> LabelTree {
        LabelTree::node(
            self.labels[id].clone(),
            self.children[id].iter().map(|&c| self.to_tree(c)).collect(),
        )
    }

    fn postorder(&self) -> PostorderTree {
        PostorderTree::build(0, |n| self.children[n].clone())
    }
}

struct GtSide {
    post: PostorderTree,
    labels: Vec<String>,
    real_nodes: usize,
    columns: Vec<KeyrootColumns>,
}

/// Column layout of one gt keyroot's forest table.
struct KeyrootColumns {
    /// Postorder index of the keyroot's leftmost leaf.
    first: usize,
    /// Per column, the column where that node's own subtree starts, relative
    /// to `first`. Zero marks the keyroot's leftmost path.
    starts: Vec<usize>,
}

impl GtSide {
    fn new(gt: &LabelTree) -> Self {
        let (post, labels) = flatten(gt);
        let labels = labels.into_iter().map(str::to_string).collect();
        let columns = post
            .keyroots
            .iter()
            .map(|&j| {
                let first = post.leftmost[j];
                KeyrootColumns {
                    first,
                    starts: (first..=j).map(|j1| post.leftmost[j1] - first).collect(),
                }
            })
            .collect();
        GtSide {
            post,
            labels,
            real_nodes: real_node_count(gt),
            columns,
        }
    }
}

#[inline(always)]
fn min(a: f64, b: f64) -> f64 {
    if b < a {
        b
    } else {
        a
    }
}

/// Incremental Zhang–Shasha state for one (pred, gt) pair.
struct Aligner<'g> {
    gt: &'g GtSide,
    arena: Arena,
    m: usize,
    rel: Vec<f64>,
    /// Subtree distances keyed by (pred arena id, gt postorder index).
    td: Vec<f64>,
    del: f64,
    ins: f64,
    denom: f64,
    scratch: Vec<f64>,
}

struct ChainCache {
    /// Pred postorder index where the permuted siblings begin.
    first: usize,
    /// Postorder indices of the chain keyroots, ascending.
    keyroots: Vec<usize>,
    /// Forest tables, one per (chain keyroot, gt keyroot).
    tables: Vec<Vec<Vec<f64>>>,
}

impl<'g> Aligner<'g> {
    fn new(pred: &LabelTree, gt: &'g GtSide, costs: &TedCosts) -> Self {
        let arena = Arena::from_tree(pred);
        let m = gt.post.len();
        let n = arena.labels.len();
        let mut rel = Vec::with_capacity(n * m);
        for label in &arena.labels {
            for gl in &gt.labels {
                rel.push(costs.relabel_cost(label, gl));
            }
        }
        let denom = nted_denominator(n - 1, gt.real_nodes, costs);
        Aligner {
            gt,
            arena,
            m,
            rel,
            td: vec![0.0; n * m],
            del: costs.delete_cost,
            ins: costs.insert_cost,
            denom,
            scratch: Vec::new(),
        }
    }

    /// Forest DP for pred keyroot `k` against one gt keyroot, rows `first_row..`.
    #[allow(clippy::too_many_arguments)]
    fn keyroot_dp(
        a: &PostorderTree,
        gcol: &KeyrootColumns,
        k: usize,
        fd: &mut [f64],
        first_row: usize,
        td: &mut [f64],
        rel: &[f64],
        m: usize,
        del: f64,
        ins: f64,
    ) {
        let lk = a.leftmost[k];
        let rows = k - lk + 1;
        let starts = &gcol.starts[..];
        let cols = starts.len();
        let width = cols + 1;
        if first_row <= 1 {
            fd[0] = 0.0;
            for y in 1..=cols {
                fd[y] = fd[y - 1] + ins;
            }
        }
        for x in first_row.max(1)..=rows {
            let i1 = lk + x - 1;
            let p = a.leftmost[i1] - lk;
            let id = a.keys[i1];
            let (before, rest) = fd.split_at_mut(x * width);
            let prev = &before[(x - 1) * width..];
            let base = &before[p * width..p * width + width];
            let cur = &mut rest[..width];
            let span = id * m + gcol.first..id * m + gcol.first + cols;
            let td_row = &mut td[span.clone()];
            let rel_row = &rel[span];
            let mut left = prev[0] + del;
            cur[0] = left;
            if p == 0 {
                for y in 0..cols {
                    let q = starts[y];
                    let d = if q == 0 {
                        let d = min(min(prev[y + 1] + del, left + ins), prev[y] + rel_row[y]);
                        td_row[y] = d;
                        d
                    } else {
                        min(min(prev[y + 1] + del, left + ins), base[q] + td_row[y])
                    };
                    cur[y + 1] = d;
                    left = d;
                }
            } else {
                for y in 0..cols {
                    let d = min(min(prev[y + 1] + del, left + ins), base[starts[y]] + td_row[y]);
                    cur[y + 1] = d;
                    left = d;
                }
            }
        }
    }

    fn full_recompute(&mut self) -> f64 {
        let a = self.arena.postorder();
        let n = a.len();
        self.scratch.resize((n + 1) * (self.m + 1), 0.0);
        for &k in &a.keyroots {
            for gcol in &self.gt.columns {
                Self::keyroot_dp(
                    &a,
                    gcol,
                    k,
                    &mut self.scratch,
                    1,
                    &mut self.td,
                    &self.rel,
                    self.m,
                    self.del,
                    self.ins,
                );
            }
        }
        self.score_from_td(&a)
    }

    fn score_from_td(&self, a: &PostorderTree) -> f64 {
        let root_id = a.keys[a.len() - 1];
        self.td[root_id * self.m + self.m - 1] / self.denom
    }

    fn is_keyroot(&self, id: usize) -> bool {
        match self.arena.parent[id] {
            None => true,
            Some(p) => self.arena.children[p][0] != id,
        }
    }

    /// Recomputes the chain of `parent` under the current arena order.
    /// With `cache` filled, rows before the subtree of `window_start` (the
    /// first sibling the candidates may permute) are reused.
    fn eval_chain(&mut self, parent: usize, window_start: usize, cache: &mut Option<ChainCache>) -> f64 {
        let a = self.arena.postorder();
        let b = &self.gt.post;
        let mut index_of = vec![0usize; a.len()];
        for (i, &id) in a.keys.iter().enumerate() {
            index_of[id] = i;
        }
        let reuse = cache.is_some();
        if cache.is_none() {
            let mut keyroots = Vec::new();
            let mut cur = Some(parent);
            while let Some(id) = cur {
                if self.is_keyroot(id) {
                    keyroots.push(index_of[id]);
                }
                cur = self.arena.parent[id];
            }
            keyroots.sort_unstable();
            let tables = keyroots
                .iter()
                .map(|&k| {
                    let rows = k - a.leftmost[k] + 1;
                    b.keyroots
                        .iter()
                        .map(|&j| vec![0.0; (rows + 1) * (j - b.leftmost[j] + 2)])
                        .collect()
                })
                .collect();
            *cache = Some(ChainCache {
                first: a.leftmost[index_of[window_start]],
                keyroots,
                tables,
            });
        }
        let c = cache.as_mut().expect("cache initialised above");
        for (ci, &k) in c.keyroots.iter().enumerate() {
            let first_row = if reuse { c.first - a.leftmost[k] + 1 } else { 1 };
            for (bi, gcol) in self.gt.columns.iter().enumerate() {
                Self::keyroot_dp(
                    &a,
                    gcol,
                    k,
                    &mut c.tables[ci][bi],
                    first_row,
                    &mut self.td,
                    &self.rel,
                    self.m,
                    self.del,
                    self.ins,
                );
            }
        }
        self.score_from_td(&a)
    }

    /// One breadth-first alignment pass; returns the final score.
    fn pass(&mut self, window: usize, mut score: f64) -> f64 {
        let mut queue = VecDeque::from([0usize]);
        while let Some(id) = queue.pop_front() {
            queue.extend(self.arena.children[id].iter().copied());
            let Some(parent) = self.arena.parent[id] else {
                continue;
            };
            let siblings = self.arena.children[parent].clone();
            if siblings.len() < 2 || score == 0.0 {
                continue;
            }
            let idx = siblings
                .iter()
                .position(|&s| s == id)
                .expect("node is among its parent's children");
            let lo = idx.saturating_sub(window);
            let hi = (idx + window).min(siblings.len() - 1);

            let start = siblings[lo];
            let mut cache = None;
            let current = self.eval_chain(parent, start, &mut cache);
            debug_assert!((current - score).abs() <= 1e-9);
            let mut scores = Vec::with_capacity(hi - lo + 1);
            let mut last_evaluated = idx;
            for q in lo..=hi {
                if q == idx {
                    scores.push((q, current));
                    continue;
                }
                let mut order = siblings.clone();
                let moved = order.remove(idx);
                order.insert(q, moved);
                self.arena.children[parent] = order;
                scores.push((q, self.eval_chain(parent, start, &mut cache)));
                last_evaluated = q;
            }
            let best = choose_position(&scores, idx);
            let mut order = siblings;
            let moved = order.remove(idx);
            order.insert(best, moved);
            self.arena.children[parent] = order;
            if best != last_evaluated {
                score = self.eval_chain(parent, start, &mut cache);
            } else {
                score = scores
                    .iter()
                    .find(|(q, _)| *q == best)
                    .map(|&(_, s)| s)
                    .expect("best is a candidate");
            }
        }
        score
    }
}

/// Lowest score; near-ties go to the smallest displacement, then the lower index.
fn choose_position(scores: &[(usize, f64)], current: usize) -> usize {
    let min = scores
        .iter()
        .map(|&(_, s)| s)
        .fold(f64::INFINITY, f64::min);
    scores
        .iter()
        .filter(|&&(_, s)| s <= min + SCORE_TIE_EPS)
        .min_by_key(|&&(q, _)| (q.abs_diff(current), q))
        .map(|&(q, _)| q)
        .expect("at least one candidate")
}

/// Runs `passes` alignment passes; returns the aligned tree and the score
/// after each pass.
pub fn align_passes(
    pred: &LabelTree,
    gt: &LabelTree,
    window: usize,
    passes: usize,
    costs: &TedCosts,
) -> (LabelTree, Vec<f64>) {
    let gt_side = GtSide::new(gt);
    let mut al = Aligner::new(pred, &gt_side, costs);
    let mut score = al.full_recompute();
    let mut per_pass = Vec::with_capacity(passes);
    for _ in 0..passes.max(1) {
        score = al.pass(window, score);
        per_pass.push(score);
    }
    (al.arena.to_tree(0), per_pass)
}

/// A single breadth-first alignment pass.
pub fn greedy_align_pass(pred: &LabelTree, gt: &LabelTree, cfg: &GantedConfig) -> (LabelTree, f64) {
    let (tree, scores) = align_passes(pred, gt, cfg.window, 1, &cfg.costs);
    (tree, scores[0])
}

/// GAnTED between two label trees (no table handling); one score per pass.
pub fn ganted_trees(pred: &LabelTree, gt: &LabelTree, cfg: &GantedConfig) -> Vec<f64> {
    align_passes(pred, gt, cfg.window, cfg.passes, &cfg.costs).1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GantedReport {
    /// nTED with every table row-major on both sides.
    pub nted: f64,
    /// Minimum over orientation combinations after each pass.
    pub per_pass: Vec<f64>,
    pub pred_orientations: Vec<TableOrientation>,
    pub gt_orientations: Vec<TableOrientation>,
    pub combos_evaluated: usize,
    /// Set when the combination cap forced some tables to row-major.
    pub capped: bool,
}

impl GantedReport {
    pub fn score(&self) -> f64 {
        *self.per_pass.last().expect("at least one pass")
    }
}

fn orientation_combos(count: usize) -> Vec<Vec<TableOrientation>> {
    (0..1usize << count)
        .map(|bits| {
            (0..count)
                .map(|t| {
                    if bits >> t & 1 == 0 {
                        TableOrientation::RowMajor
                    } else {
                        TableOrientation::ColMajor
                    }
                })
                .collect()
        })
        .collect()
}

fn fits(bits: usize, cap: usize) -> bool {
    bits < usize::BITS as usize - 1 && (1usize << bits) <= cap
}

/// GAnTED between two parses, minimised over table orientations.
pub fn ganted(pred: &ParseTree, gt: &ParseTree, cfg: &GantedConfig) -> (f64, GantedReport) {
    let kp = pred.table_count();
    let kg = gt.table_count();
    let row_major = |k: usize| vec![vec![TableOrientation::RowMajor; k]];
    let (pred_combos, gt_combos, capped) = if fits(kp + kg, cfg.max_orientation_combos) {
        (orientation_combos(kp), orientation_combos(kg), false)
    } else if fits(kp, cfg.max_orientation_combos) {
        (orientation_combos(kp), row_major(kg), true)
    } else {
        (row_major(kp), row_major(kg), true)
    };

    let gt_trees: Vec<GtSide> = gt_combos
        .iter()
        .map(|o| GtSide::new(&to_label_tree(gt, o).expect("orientation per table")))
        .collect();
    let pred_trees: Vec<LabelTree> = pred_combos
        .iter()
        .map(|o| to_label_tree(pred, o).expect("orientation per table"))
        .collect();

    let jobs: Vec<(usize, usize)> = (0..gt_combos.len())
        .flat_map(|g| (0..pred_combos.len()).map(move |p| (g, p)))
        .collect();
    let passes = cfg.passes.max(1);
    let results: Vec<(f64, Vec<f64>)> = jobs
        .par_iter()
        .map(|&(g, p)| {
            let mut al = Aligner::new(&pred_trees[p], &gt_trees[g], &cfg.costs);
            let initial = al.full_recompute();
            let mut score = initial;
            let mut per = Vec::with_capacity(passes);
            for _ in 0..passes {
                score = al.pass(cfg.window, score);
                per.push(score);
            }
            (initial, per)
        })
        .collect();

    let mut per_pass = vec![f64::INFINITY; passes];
    let mut best_job = 0;
    for (ji, (_, per)) in results.iter().enumerate() {
        for (k, &s) in per.iter().enumerate() {
            if s < per_pass[k] {
                per_pass[k] = s;
                if k == passes - 1 {
                    best_job = ji;
                }
            }
        }
    }
    // Job 0 is row-major on both sides.
    let nted_rm = results[0].0;
    let (g, p) = jobs[best_job];
    let report = GantedReport {
        nted: nted_rm,
        per_pass: per_pass.clone(),
        pred_orientations: pred_combos[p].clone(),
        gt_orientations: gt_combos[g].clone(),
        combos_evaluated: jobs.len(),
        capped,
    };
    (per_pass[passes - 1], report)
}

/// nTED between two parses with every table row-major.
pub fn nted_parse(pred: &ParseTree, gt: &ParseTree, costs: &TedCosts) -> f64 {
    let p = to_label_tree(pred, &vec![TableOrientation::RowMajor; pred.table_count()])
        .expect("orientation per table");
    let g = to_label_tree(gt, &vec![TableOrientation::RowMajor; gt.table_count()])
        .expect("orientation per table");
    nted(&p, &g, costs)
}
