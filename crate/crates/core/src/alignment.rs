//! Entity and relationship F-measure by optimal string alignment, and
//! monotone word-sequence alignment.

use serde::{Deserialize, Serialize};

use crate::edit_metrics::{levenshtein, levenshtein_norm};
use crate::form_tree::{EntityClass, ParseNode, ParseTree};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    /// Largest normalized edit distance a true positive may have.
    pub text_threshold: f64,
    /// Only pair entities of the same class.
    pub per_class: bool,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            text_threshold: 0.0,
            per_class: false,
        }
    }
}

impl MatchConfig {
    pub fn is_valid(&self) -> bool {
        (0.0..=1.0).contains(&self.text_threshold)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Prf {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Prf {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f_measure = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Prf {
            precision,
            recall,
            f_measure,
            tp,
            fp,
            fn_,
        }
    }

    /// True when there was nothing to count on either side.
    pub fn is_vacuous(&self) -> bool {
        self.tp + self.fp + self.fn_ == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityItem {
    pub text: String,
    pub class: EntityClass,
}

/// Entities of a parse (table internals excluded) and their links:
/// header to each contents entity, question to each answer.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EntityGraph {
    pub entities: Vec<EntityItem>,
    pub edges: Vec<(usize, usize)>,
}

pub fn entity_graph(tree: &ParseTree) -> EntityGraph {
    fn walk(nodes: &[ParseNode], parent: Option<usize>, g: &mut EntityGraph) {
        for node in nodes {
            let ParseNode::Entity(e) = node else { continue };
            let id = g.entities.len();
            g.entities.push(EntityItem {
                text: e.text.clone(),
                class: e.class,
            });
            if let Some(p) = parent {
                g.edges.push((p, id));
            }
            for a in &e.answers {
                let aid = g.entities.len();
                g.entities.push(EntityItem {
                    text: a.clone(),
                    class: EntityClass::Answer,
                });
                g.edges.push((id, aid));
            }
            walk(&e.children, Some(id), g);
        }
    }
    let mut g = EntityGraph::default();
    walk(&tree.roots, None, &mut g);
    g
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityMatching {
    pub pred: EntityGraph,
    pub gt: EntityGraph,
    /// (pred index, gt index, text cost), sorted by gt index.
    pub pairs: Vec<(usize, usize, f64)>,
    pub unmatched_pred: Vec<usize>,
    pub unmatched_gt: Vec<usize>,
    pub total_cost: f64,
}

/// Minimum-cost assignment on a rectangular matrix. Returns, for each row,
/// the assigned column. Requires rows <= columns.
fn assign(cost: &[Vec<f64>], cols: usize) -> Vec<usize> {
    let n = cost.len();
    let m = cols;
    debug_assert!(n <= m);
    // Potentials and augmenting paths over a 1-based layout.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0; n];
    for j in 1..=m {
        if p[j] != 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}

/// Optimal one-to-one pairing of `gt_ids` with `pred_ids`; unpaired items cost 1.
fn match_subset(
    pred: &EntityGraph,
    gt: &EntityGraph,
    pred_ids: &[usize],
    gt_ids: &[usize],
) -> Vec<(usize, usize, f64)> {
    if pred_ids.is_empty() || gt_ids.is_empty() {
        return Vec::new();
    }
    // Rows are GT entities, columns are predictions plus one dummy per row.
    let cols = pred_ids.len() + gt_ids.len();
    let text = |i: usize, j: usize| {
        levenshtein_norm(&gt.entities[gt_ids[i]].text, &pred.entities[pred_ids[j]].text)
    };
    let cost: Vec<Vec<f64>> = (0..gt_ids.len())
        .map(|i| {
            (0..cols)
                .map(|j| if j < pred_ids.len() { text(i, j) } else { 1.0 })
                .collect()
        })
        .collect();
    assign(&cost, cols)
        .into_iter()
        .enumerate()
        .filter(|&(_, j)| j < pred_ids.len())
        .map(|(i, j)| (pred_ids[j], gt_ids[i], cost[i][j]))
        .collect()
}

pub fn align_entities(pred: &ParseTree, gt: &ParseTree, cfg: &MatchConfig) -> EntityMatching {
    let pg = entity_graph(pred);
    let gg = entity_graph(gt);
    let mut pairs = Vec::new();
    if cfg.per_class {
        for class in EntityClass::ALL {
            let p: Vec<usize> = (0..pg.entities.len())
                .filter(|&i| pg.entities[i].class == class)
                .collect();
            let g: Vec<usize> = (0..gg.entities.len())
                .filter(|&i| gg.entities[i].class == class)
                .collect();
            pairs.extend(match_subset(&pg, &gg, &p, &g));
        }
    } else {
        let p: Vec<usize> = (0..pg.entities.len()).collect();
        let g: Vec<usize> = (0..gg.entities.len()).collect();
        pairs = match_subset(&pg, &gg, &p, &g);
    }
    pairs.sort_by_key(|&(p, g, _)| (g, p));

    let mut pred_used = vec![false; pg.entities.len()];
    let mut gt_used = vec![false; gg.entities.len()];
    for &(p, g, _) in &pairs {
        pred_used[p] = true;
        gt_used[g] = true;
    }
    let unmatched_pred: Vec<usize> = (0..pred_used.len()).filter(|&i| !pred_used[i]).collect();
    let unmatched_gt: Vec<usize> = (0..gt_used.len()).filter(|&i| !gt_used[i]).collect();
    let total_cost = pairs.iter().map(|p| p.2).sum::<f64>()
        + (unmatched_pred.len() + unmatched_gt.len()) as f64;
    EntityMatching {
        pred: pg,
        gt: gg,
        pairs,
        unmatched_pred,
        unmatched_gt,
        total_cost,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassPrf {
    pub class: EntityClass,
    pub prf: Prf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityScores {
    pub micro: Prf,
    pub per_class: Vec<ClassPrf>,
}

impl EntityScores {
    pub fn class(&self, class: EntityClass) -> Prf {
        self.per_class
            .iter()
            .find(|c| c.class == class)
            .map(|c| c.prf)
            .unwrap_or_default()
    }
}

/// Matched pairs that count as correct: same class, text within threshold.
fn true_positives(m: &EntityMatching, cfg: &MatchConfig) -> Vec<(usize, usize)> {
    m.pairs
        .iter()
        .filter(|&&(p, g, c)| {
            m.pred.entities[p].class == m.gt.entities[g].class && c <= cfg.text_threshold
        })
        .map(|&(p, g, _)| (p, g))
        .collect()
}

pub fn entity_prf_from(m: &EntityMatching, cfg: &MatchConfig) -> EntityScores {
    let tps = true_positives(m, cfg);
    let per_class: Vec<ClassPrf> = EntityClass::ALL
        .iter()
        .map(|&class| {
            let tp = tps
                .iter()
                .filter(|&&(_, g)| m.gt.entities[g].class == class)
                .count();
            let np = m.pred.entities.iter().filter(|e| e.class == class).count();
            let ng = m.gt.entities.iter().filter(|e| e.class == class).count();
            ClassPrf {
                class,
                prf: Prf::from_counts(tp, np - tp, ng - tp),
            }
        })
        .collect();
    let tp = tps.len();
    let micro = Prf::from_counts(tp, m.pred.entities.len() - tp, m.gt.entities.len() - tp);
    EntityScores { micro, per_class }
}

pub fn relationship_prf_from(m: &EntityMatching, cfg: &MatchConfig) -> Prf {
    let mut to_gt = vec![None; m.pred.entities.len()];
    for (p, g) in true_positives(m, cfg) {
        to_gt[p] = Some(g);
    }
    let gt_edges: std::collections::HashSet<(usize, usize)> = m.gt.edges.iter().copied().collect();
    let tp = m
        .pred
        .edges
        .iter()
        .filter(|&&(a, b)| match (to_gt[a], to_gt[b]) {
            (Some(ga), Some(gb)) => gt_edges.contains(&(ga, gb)),
            _ => false,
        })
        .count();
    Prf::from_counts(tp, m.pred.edges.len() - tp, m.gt.edges.len() - tp)
}

pub fn entity_prf(pred: &ParseTree, gt: &ParseTree, cfg: &MatchConfig) -> EntityScores {
    entity_prf_from(&align_entities(pred, gt, cfg), cfg)
}

pub fn relationship_prf(pred: &ParseTree, gt: &ParseTree, cfg: &MatchConfig) -> Prf {
    relationship_prf_from(&align_entities(pred, gt, cfg), cfg)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordAlignment {
    /// (pred index, gt index), increasing in both.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_pred: Vec<usize>,
    pub unmatched_gt: Vec<usize>,
    /// Sum of character edit distances over pairs plus lengths of skipped words.
    pub cost: usize,
}

/// Monotone alignment minimizing total character edit distance, where
/// skipping a word costs its length.
pub fn align_word_sequences<S: AsRef<str>>(pred: &[S], gt: &[S]) -> WordAlignment {
    let (n, m) = (pred.len(), gt.len());
    let plen: Vec<usize> = pred.iter().map(|w| w.as_ref().chars().count()).collect();
    let glen: Vec<usize> = gt.iter().map(|w| w.as_ref().chars().count()).collect();
    let mut d = vec![vec![0usize; m + 1]; n + 1];
    for i in 1..=n {
        d[i][0] = d[i - 1][0] + plen[i - 1];
    }
    for j in 1..=m {
        d[0][j] = d[0][j - 1] + glen[j - 1];
    }
    let mut sub = vec![vec![0usize; m]; n];
    for i in 1..=n {
        for j in 1..=m {
            sub[i - 1][j - 1] = levenshtein(pred[i - 1].as_ref(), gt[j - 1].as_ref());
            d[i][j] = (d[i - 1][j - 1] + sub[i - 1][j - 1])
                .min(d[i - 1][j] + plen[i - 1])
                .min(d[i][j - 1] + glen[j - 1]);
        }
    }
    let mut pairs = Vec::new();
    let mut unmatched_pred = Vec::new();
    let mut unmatched_gt = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + sub[i - 1][j - 1] {
            pairs.push((i - 1, j - 1));
            i -= 1;
            j -= 1;
        } else if i > 0 && d[i][j] == d[i - 1][j] + plen[i - 1] {
            unmatched_pred.push(i - 1);
            i -= 1;
        } else {
            unmatched_gt.push(j - 1);
            j -= 1;
        }
    }
    pairs.reverse();
    unmatched_pred.reverse();
    unmatched_gt.reverse();
    WordAlignment {
        pairs,
        unmatched_pred,
        unmatched_gt,
        cost: d[n][m],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form_tree::parse_json;
    use proptest::prelude::*;

    fn tree(s: &str) -> ParseTree {
        parse_json(s, false).unwrap()
    }

    fn others(texts: &[&str]) -> ParseTree {
        ParseTree::new(
            texts
                .iter()
                .map(|t| ParseNode::entity(*t, EntityClass::Other))
                .collect(),
        )
    }

    // Exhaustive oracle for the assignment cost.
    fn brute_force_cost(pred: &[&str], gt: &[&str]) -> f64 {
        fn go(pred: &[&str], gt: &[&str], used: &mut Vec<bool>, i: usize) -> f64 {
            if i == gt.len() {
                return used.iter().filter(|u| !**u).count() as f64;
            }
            let mut best = 1.0 + go(pred, gt, used, i + 1);
            for j in 0..pred.len() {
                if !used[j] {
                    used[j] = true;
                    best = best.min(levenshtein_norm(gt[i], pred[j]) + go(pred, gt, used, i + 1));
                    used[j] = false;
                }
            }
            best
        }
        go(pred, gt, &mut vec![false; pred.len()], 0)
    }

    #[test]
    fn identical_sets_match_at_zero() {
        let t = others(&["a", "b", "c"]);
        let m = align_entities(&t, &t, &MatchConfig::default());
        assert_eq!(m.pairs, vec![(0, 0, 0.0), (1, 1, 0.0), (2, 2, 0.0)]);
        assert_eq!(m.total_cost, 0.0);
    }

    #[test]
    fn near_match_costs_a_quarter() {
        let m = align_entities(&others(&["Nane"]), &others(&["Name"]), &MatchConfig::default());
        assert_eq!(m.pairs, vec![(0, 0, 0.25)]);
    }

    #[test]
    fn empty_prediction_leaves_gt_unmatched() {
        let m = align_entities(&others(&[]), &others(&["A", "B"]), &MatchConfig::default());
        assert_eq!(m.unmatched_gt, vec![0, 1]);
        assert_eq!(m.total_cost, 2.0);
        let s = entity_prf_from(&m, &MatchConfig::default());
        assert_eq!((s.micro.precision, s.micro.recall, s.micro.f_measure), (0.0, 0.0, 0.0));
    }

    #[test]
    fn wrong_class_halves_f() {
        let gt = tree(r#"[{"a": "question"}, {"b": "answer"}]"#);
        let pred = tree(r#"[{"a": "question"}, {"b": "header"}]"#);
        let s = entity_prf(&pred, &gt, &MatchConfig::default());
        assert_eq!((s.micro.tp, s.micro.fp, s.micro.fn_), (1, 1, 1));
        assert_eq!(s.micro.f_measure, 0.5);
        assert_eq!(s.class(EntityClass::Question).f_measure, 1.0);
        assert_eq!(s.class(EntityClass::Answer).recall, 0.0);
    }

    #[test]
    fn relationships_of_identical_trees() {
        let t = tree(r#"[{"Q": "question", "answers":["a1", "a2"]}]"#);
        let r = relationship_prf(&t, &t, &MatchConfig::default());
        assert_eq!((r.tp, r.fp, r.fn_), (2, 0, 0));
        assert_eq!(r.f_measure, 1.0);
    }

    #[test]
    fn answers_on_the_wrong_question() {
        let gt = tree(r#"[{"Q1": "question", "answers":["a"]}, {"Q2": "question", "answers":["b"]}]"#);
        let pred = tree(r#"[{"Q1": "question", "answers":["b"]}, {"Q2": "question", "answers":["a"]}]"#);
        let e = entity_prf(&pred, &gt, &MatchConfig::default());
        assert_eq!(e.micro.f_measure, 1.0);
        let r = relationship_prf(&pred, &gt, &MatchConfig::default());
        assert_eq!((r.tp, r.fp, r.fn_), (0, 2, 2));
    }

    #[test]
    fn no_edges_reports_zero_with_counts() {
        let t = others(&["x"]);
        let r = relationship_prf(&t, &t, &MatchConfig::default());
        assert_eq!(r, Prf::from_counts(0, 0, 0));
        assert!(r.is_vacuous());
        assert_eq!(r.f_measure, 0.0);
    }

    #[test]
    fn header_contents_are_edges_and_tables_are_skipped() {
        let t = tree(
            r#"[{"H": "header", "contents":[{"q": "question", "answers":["v"]}, {"row headers":["r"], "column headers":["c"], "cells":[["x"]]}]}]"#,
        );
        let g = entity_graph(&t);
        let texts: Vec<_> = g.entities.iter().map(|e| e.text.as_str()).collect();
        assert_eq!(texts, vec!["H", "q", "v"]);
        assert_eq!(g.edges, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn per_class_matching_keeps_classes_apart() {
        let gt = tree(r#"[{"abc": "question"}]"#);
        let pred = tree(r#"[{"abc": "answer"}]"#);
        let cfg = MatchConfig {
            per_class: true,
            ..MatchConfig::default()
        };
        let m = align_entities(&pred, &gt, &cfg);
        assert!(m.pairs.is_empty());
        assert_eq!(m.total_cost, 2.0);
    }

    #[test]
    fn threshold_admits_near_matches() {
        let gt = others(&["Name"]);
        let pred = others(&["Nane"]);
        let strict = entity_prf(&pred, &gt, &MatchConfig::default());
        let loose = entity_prf(
            &pred,
            &gt,
            &MatchConfig {
                text_threshold: 0.25,
                ..MatchConfig::default()
            },
        );
        assert_eq!(strict.micro.tp, 0);
        assert_eq!(loose.micro.tp, 1);
    }

    #[test]
    fn word_alignment_examples() {
        let a = align_word_sequences(&["the", "cat"], &["the", "cat"]);
        assert_eq!((a.pairs.clone(), a.cost), (vec![(0, 0), (1, 1)], 0));
        let a = align_word_sequences(&["thw", "cat"], &["the", "cat"]);
        assert_eq!((a.pairs.clone(), a.cost), (vec![(0, 0), (1, 1)], 1));
        let a = align_word_sequences(&["cat"], &["the", "cat"]);
        assert_eq!(a.pairs, vec![(0, 1)]);
        assert_eq!(a.unmatched_gt, vec![0]);
        assert_eq!(a.cost, 3);
        let e: [&str; 0] = [];
        assert_eq!(align_word_sequences(&e, &e).cost, 0);
    }

    fn arb_words() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec("[a-c]{1,4}", 0..7)
    }

    proptest! {
        #[test]
        fn assignment_matches_exhaustive_search(p in arb_words(), g in arb_words()) {
            let pr: Vec<&str> = p.iter().map(String::as_str).collect();
            let gr: Vec<&str> = g.iter().map(String::as_str).collect();
            let m = align_entities(&others(&pr), &others(&gr), &MatchConfig::default());
            prop_assert!((m.total_cost - brute_force_cost(&pr, &gr)).abs() < 1e-9);
        }

        #[test]
        fn cost_is_permutation_invariant(p in arb_words(), g in arb_words(), k in 0usize..7) {
            let pr: Vec<&str> = p.iter().map(String::as_str).collect();
            let gr: Vec<&str> = g.iter().map(String::as_str).collect();
            let mut pr2 = pr.clone();
            let mut gr2 = gr.clone();
            if !pr2.is_empty() { let r = k % pr2.len(); pr2.rotate_left(r); pr2.reverse(); }
            if !gr2.is_empty() { let r = k % gr2.len(); gr2.rotate_left(r); }
            let cfg = MatchConfig::default();
            let a = align_entities(&others(&pr), &others(&gr), &cfg).total_cost;
            let b = align_entities(&others(&pr2), &others(&gr2), &cfg).total_cost;
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn self_prf_is_one(g in prop::collection::vec("[a-z]{1,5}", 1..8)) {
            let gr: Vec<&str> = g.iter().map(String::as_str).collect();
            let t = others(&gr);
            let s = entity_prf(&t, &t, &MatchConfig::default());
            prop_assert_eq!(s.micro.f_measure, 1.0);
            prop_assert_eq!(s.micro.precision, 1.0);
            prop_assert_eq!(s.micro.recall, 1.0);
        }

        #[test]
        fn tp_monotone_in_threshold(p in arb_words(), g in arb_words(), t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
            let pr: Vec<&str> = p.iter().map(String::as_str).collect();
            let gr: Vec<&str> = g.iter().map(String::as_str).collect();
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let m = align_entities(&others(&pr), &others(&gr), &MatchConfig::default());
            let at = |t| entity_prf_from(&m, &MatchConfig { text_threshold: t, per_class: false }).micro.tp;
            prop_assert!(at(lo) <= at(hi));
        }

        #[test]
        fn prf_counts_are_consistent(p in arb_words(), g in arb_words()) {
            let pr: Vec<&str> = p.iter().map(String::as_str).collect();
            let gr: Vec<&str> = g.iter().map(String::as_str).collect();
            let s = entity_prf(&others(&pr), &others(&gr), &MatchConfig::default()).micro;
            prop_assert!(s.tp <= pr.len().min(gr.len()));
            prop_assert_eq!(s.tp + s.fp, pr.len());
            prop_assert_eq!(s.tp + s.fn_, gr.len());
        }

        #[test]
        fn word_alignment_not_worse_than_all_gaps(p in arb_words(), g in arb_words()) {
            let a = align_word_sequences(&p, &g);
            let gaps: usize = p.iter().chain(&g).map(|w| w.chars().count()).sum();
            prop_assert!(a.cost <= gaps);
            let recomputed: usize = a.pairs.iter().map(|&(i, j)| levenshtein(&p[i], &g[j])).sum::<usize>()
                + a.unmatched_pred.iter().map(|&i| p[i].chars().count()).sum::<usize>()
                + a.unmatched_gt.iter().map(|&j| g[j].chars().count()).sum::<usize>();
            prop_assert_eq!(recomputed, a.cost);
            prop_assert!(a.pairs.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
        }
    }
}
