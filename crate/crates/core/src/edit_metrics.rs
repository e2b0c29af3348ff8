//! String and ordered-tree edit distances.
//!
//! [`ted`] is the Zhang–Shasha keyroot dynamic program. [`ted_bruteforce`]
//! enumerates every valid ordered mapping and exists to check it on small
//! trees.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::form_tree::LabelTree;

pub type RelabelFn = Arc<dyn Fn(&str, &str) -> f64 + Send + Sync>;
pub type LabelNormalizer = Arc<dyn Fn(&str) -> String + Send + Sync>;

/// Raw Levenshtein distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

pub(crate) fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Levenshtein distance divided by the longer length; 0 when both are empty.
pub fn levenshtein_norm(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 0.0;
    }
    levenshtein_chars(&a, &b) as f64 / longest as f64
}

/// Denominator used by [`nted`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NtedNormalization {
    /// Node count of the ground-truth tree, super-root excluded.
    #[default]
    GtNodes,
    /// Larger of the two node counts, super-roots excluded.
    MaxNodes,
}

#[derive(Clone)]
pub struct TedCosts {
    pub delete_cost: f64,
    pub insert_cost: f64,
    pub relabel: RelabelFn,
    /// Applied to both labels before `relabel`; off by default.
    pub normalizer: Option<LabelNormalizer>,
    pub normalization: NtedNormalization,
}

impl Default for TedCosts {
    fn default() -> Self {
        TedCosts {
            delete_cost: 1.0,
            insert_cost: 1.0,
            relabel: Arc::new(levenshtein_norm),
            normalizer: None,
            normalization: NtedNormalization::GtNodes,
        }
    }
}

impl fmt::Debug for TedCosts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TedCosts")
            .field("delete_cost", &self.delete_cost)
            .field("insert_cost", &self.insert_cost)
            .field("normalizer", &self.normalizer.is_some())
            .field("normalization", &self.normalization)
            .finish_non_exhaustive()
    }
}

impl TedCosts {
    pub fn relabel_cost(&self, a: &str, b: &str) -> f64 {
        match &self.normalizer {
            None => (self.relabel)(a, b),
            Some(norm) => (self.relabel)(&norm(a), &norm(b)),
        }
    }

    /// Costs with ordinary unit edits and the given relabel function.
    pub fn with_relabel(relabel: impl Fn(&str, &str) -> f64 + Send + Sync + 'static) -> Self {
        TedCosts {
            relabel: Arc::new(relabel),
            ..TedCosts::default()
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EditMetricsError {
    #[error("brute-force TED supports at most {max} nodes per tree, got {got}")]
    TooLarge { max: usize, got: usize },
}

/// A tree flattened in postorder, the layout the keyroot DP works on.
#[derive(Debug, Clone)]
pub(crate) struct PostorderTree {
    /// Caller-defined key per node (a label index or an arena id).
    pub keys: Vec<usize>,
    /// Leftmost leaf descendant of each node.
    pub leftmost: Vec<usize>,
    pub keyroots: Vec<usize>,
}

impl PostorderTree {
    /// `children_of(n)` lists the children of node `n` in order.
    pub fn build<F>(root: usize, children_of: F) -> Self
    where
        F: Fn(usize) -> Vec<usize>,
    {
        let mut keys = Vec::new();
        let mut leftmost = Vec::new();
        // (node, children, next child index, leftmost leaf once known)
        let mut stack: Vec<(usize, Vec<usize>, usize, Option<usize>)> =
            vec![(root, children_of(root), 0, None)];
        while let Some(top) = stack.last_mut() {
            if top.2 < top.1.len() {
                let child = top.1[top.2];
                top.2 += 1;
                let kids = children_of(child);
                stack.push((child, kids, 0, None));
            } else {
                let (node, _, _, lm) = stack.pop().expect("non-empty stack");
                let index = keys.len();
                let lm = lm.unwrap_or(index);
                keys.push(node);
                leftmost.push(lm);
                if let Some(parent) = stack.last_mut() {
                    if parent.3.is_none() {
                        parent.3 = Some(lm);
                    }
                }
            }
        }
        let keyroots = keyroots_of(&leftmost);
        PostorderTree {
            keys,
            leftmost,
            keyroots,
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }
}

fn keyroots_of(leftmost: &[usize]) -> Vec<usize> {
    // A keyroot is the highest node for each distinct leftmost leaf.
    let mut highest = vec![usize::MAX; leftmost.len()];
    for (i, &l) in leftmost.iter().enumerate() {
        highest[l] = i;
    }
    let mut roots: Vec<usize> = highest.into_iter().filter(|&k| k != usize::MAX).collect();
    roots.sort_unstable();
    roots
}

/// Flattens a label tree; keys index into the returned label list.
pub(crate) fn flatten(tree: &LabelTree) -> (PostorderTree, Vec<&str>) {
    let mut nodes: Vec<&LabelTree> = Vec::new();
    let mut kids: Vec<Vec<usize>> = Vec::new();
    fn collect<'a>(t: &'a LabelTree, nodes: &mut Vec<&'a LabelTree>, kids: &mut Vec<Vec<usize>>) -> usize {
        let id = nodes.len();
        nodes.push(t);
        kids.push(Vec::new());
        for c in &t.children {
            let cid = collect(c, nodes, kids);
            kids[id].push(cid);
        }
        id
    }
    collect(tree, &mut nodes, &mut kids);
    let post = PostorderTree::build(0, |n| kids[n].clone());
    let labels = post.keys.iter().map(|&k| nodes[k].label.as_str()).collect();
    (post, labels)
}

/// Reusable buffers for the keyroot DP.
#[derive(Debug, Default)]
pub(crate) struct ZsWorkspace {
    tree_dist: Vec<f64>,
    forest: Vec<f64>,
}

/// Zhang–Shasha distance. `relabel(i, j)` takes postorder indices.
pub(crate) fn zhang_shasha<R>(
    a: &PostorderTree,
    b: &PostorderTree,
    del: f64,
    ins: f64,
    relabel: R,
    ws: &mut ZsWorkspace,
) -> f64
where
    R: Fn(usize, usize) -> f64,
{
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return n as f64 * del + m as f64 * ins;
    }
    ws.tree_dist.clear();
    ws.tree_dist.resize(n * m, 0.0);
    let width = m + 1;
    ws.forest.clear();
    ws.forest.resize((n + 1) * width, 0.0);
    let td = &mut ws.tree_dist;
    let fd = &mut ws.forest;

    for &i in &a.keyroots {
        let li = a.leftmost[i];
        let rows = i - li + 1;
        for &j in &b.keyroots {
            let lj = b.leftmost[j];
            let cols = j - lj + 1;
            fd[0] = 0.0;
            for x in 1..=rows {
                fd[x * width] = fd[(x - 1) * width] + del;
            }
            for y in 1..=cols {
                fd[y] = fd[y - 1] + ins;
            }
            for x in 1..=rows {
                let i1 = li + x - 1;
                let li1 = a.leftmost[i1];
                let row = x * width;
                let prev_row = row - width;
                for y in 1..=cols {
                    let j1 = lj + y - 1;
                    let lj1 = b.leftmost[j1];
                    let by_del = fd[prev_row + y] + del;
                    let by_ins = fd[row + y - 1] + ins;
                    let best = if li1 == li && lj1 == lj {
                        let d = by_del.min(by_ins).min(fd[prev_row + y - 1] + relabel(i1, j1));
                        td[i1 * m + j1] = d;
                        d
                    } else {
                        let p = li1 - li;
                        let q = lj1 - lj;
                        by_del.min(by_ins).min(fd[p * width + q] + td[i1 * m + j1])
                    };
                    fd[row + y] = best;
                }
            }
        }
    }
    td[(n - 1) * m + (m - 1)]
}

/// Exact ordered tree edit distance.
pub fn ted(a: &LabelTree, b: &LabelTree, costs: &TedCosts) -> f64 {
    let (pa, la) = flatten(a);
    let (pb, lb) = flatten(b);
    let mut ws = ZsWorkspace::default();
    zhang_shasha(
        &pa,
        &pb,
        costs.delete_cost,
        costs.insert_cost,
        |i, j| costs.relabel_cost(la[i], lb[j]),
        &mut ws,
    )
}

pub const BRUTEFORCE_MAX_NODES: usize = 7;

/// Exhaustive TED over all valid ordered mappings; small trees only.
pub fn ted_bruteforce(a: &LabelTree, b: &LabelTree, costs: &TedCosts) -> Result<f64, EditMetricsError> {
    for t in [a, b] {
        let got = t.size();
        if got > BRUTEFORCE_MAX_NODES {
            return Err(EditMetricsError::TooLarge {
                max: BRUTEFORCE_MAX_NODES,
                got,
            });
        }
    }
    let na = number(a);
    let nb = number(b);
    let rel: Vec<Vec<f64>> = na
        .iter()
        .map(|x| nb.iter().map(|y| costs.relabel_cost(&x.label, &y.label)).collect())
        .collect();
    let mut search = MappingSearch {
        a: &na,
        b: &nb,
        rel: &rel,
        del: costs.delete_cost,
        ins: costs.insert_cost,
        used: vec![false; nb.len()],
        pairs: Vec::new(),
        best: f64::INFINITY,
    };
    search.run(0, 0.0);
    Ok(search.best)
}

struct Numbered {
    label: String,
    pre: usize,
    post: usize,
}

fn number(t: &LabelTree) -> Vec<Numbered> {
    fn walk(t: &LabelTree, pre: &mut usize, post: &mut usize, out: &mut Vec<Numbered>) {
        let idx = out.len();
        out.push(Numbered {
            label: t.label.clone(),
            pre: *pre,
            post: 0,
        });
        *pre += 1;
        for c in &t.children {
            walk(c, pre, post, out);
        }
        out[idx].post = *post;
        *post += 1;
    }
    let mut out = Vec::new();
    walk(t, &mut 0, &mut 0, &mut out);
    out
}

struct MappingSearch<'a> {
    a: &'a [Numbered],
    b: &'a [Numbered],
    rel: &'a [Vec<f64>],
    del: f64,
    ins: f64,
    used: Vec<bool>,
    pairs: Vec<(usize, usize)>,
    best: f64,
}

impl MappingSearch<'_> {
    /// A pair may join the mapping iff it preserves both preorder and
    /// postorder relations with every pair already chosen.
    fn consistent(&self, i: usize, j: usize) -> bool {
        self.pairs.iter().all(|&(k, l)| {
            let (ai, ak) = (&self.a[i], &self.a[k]);
            let (bj, bl) = (&self.b[j], &self.b[l]);
            (ai.pre < ak.pre) == (bj.pre < bl.pre) && (ai.post < ak.post) == (bj.post < bl.post)
        })
    }

    fn run(&mut self, i: usize, matched_cost: f64) {
        if i == self.a.len() {
            let k = self.pairs.len();
            let total = matched_cost
                + (self.a.len() - k) as f64 * self.del
                + (self.b.len() - k) as f64 * self.ins;
            if total < self.best {
                self.best = total;
            }
            return;
        }
        self.run(i + 1, matched_cost);
        for j in 0..self.b.len() {
            if !self.used[j] && self.consistent(i, j) {
                self.used[j] = true;
                self.pairs.push((i, j));
                self.run(i + 1, matched_cost + self.rel[i][j]);
                self.pairs.pop();
                self.used[j] = false;
            }
        }
    }
}

/// Nodes counted by the nTED denominator (super-root excluded).
pub fn real_node_count(t: &LabelTree) -> usize {
    t.size() - 1
}

pub(crate) fn nted_denominator(pred_nodes: usize, gt_nodes: usize, costs: &TedCosts) -> f64 {
    let d = match costs.normalization {
        NtedNormalization::GtNodes => gt_nodes,
        NtedNormalization::MaxNodes => gt_nodes.max(pred_nodes),
    };
    d.max(1) as f64
}

/// Tree edit distance normalized by the ground-truth node count.
pub fn nted(pred: &LabelTree, gt: &LabelTree, costs: &TedCosts) -> f64 {
    let d = nted_denominator(real_node_count(pred), real_node_count(gt), costs);
    ted(pred, gt, costs) / d
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn leaf(s: &str) -> LabelTree {
        LabelTree::leaf(s)
    }
    fn node(s: &str, c: Vec<LabelTree>) -> LabelTree {
        LabelTree::node(s, c)
    }

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein_norm("Date", "Data"), 0.25);
        assert_eq!(levenshtein_norm("", ""), 0.0);
        assert_eq!(levenshtein_norm("abc", ""), 1.0);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("ü", "u"), 1);
        assert_eq!(levenshtein_norm("ab", "ba"), 1.0);
    }

    #[test]
    fn ted_examples() {
        let c = TedCosts::default();
        let a = node("", vec![node("Q", vec![leaf("A1")])]);
        let b = node("", vec![node("Q", vec![leaf("A1"), leaf("A2")])]);
        assert_eq!(ted(&a, &a, &c), 0.0);
        assert_eq!(ted(&a, &b, &c), 1.0);
        assert_eq!(ted_bruteforce(&a, &b, &c).unwrap(), 1.0);
        let x = node("", vec![leaf("abcd")]);
        let y = node("", vec![leaf("abXY")]);
        assert!((ted(&x, &y, &c) - 0.5).abs() < 1e-12);
        assert!((nted(&a, &b, &c) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn nted_of_empty_prediction_is_one() {
        let c = TedCosts::default();
        let gt = node("", vec![node("Q", vec![leaf("A1"), leaf("A2")]), leaf("H")]);
        assert_eq!(nted(&leaf(""), &gt, &c), 1.0);
        assert_eq!(nted(&gt, &gt, &c), 0.0);
    }

    #[test]
    fn bruteforce_forced_minimum_and_bound() {
        let c = TedCosts::default();
        assert_eq!(ted_bruteforce(&leaf("a"), &leaf("b"), &c).unwrap(), 1.0);
        let three = node("r", vec![leaf("x"), leaf("y")]);
        assert_eq!(ted_bruteforce(&three, &three, &c).unwrap(), 0.0);
        let big = node("", (0..7).map(|i| leaf(&i.to_string())).collect());
        assert_eq!(
            ted_bruteforce(&big, &three, &c),
            Err(EditMetricsError::TooLarge { max: 7, got: 8 })
        );
    }

    #[test]
    fn classic_zhang_shasha_example() {
        // f(d(a c(b)) e) vs f(c(d(a b)) e), unit relabel: distance 2.
        let unit = TedCosts::with_relabel(|a, b| if a == b { 0.0 } else { 1.0 });
        let t1 = node("f", vec![node("d", vec![leaf("a"), node("c", vec![leaf("b")])]), leaf("e")]);
        let t2 = node("f", vec![node("c", vec![node("d", vec![leaf("a"), leaf("b")])]), leaf("e")]);
        assert_eq!(ted(&t1, &t2, &unit), 2.0);
        assert_eq!(ted_bruteforce(&t1, &t2, &unit).unwrap(), 2.0);
    }

    #[test]
    fn normalizer_hook_applies_to_both_sides() {
        let c = TedCosts {
            normalizer: Some(Arc::new(|s: &str| s.to_lowercase())),
            ..TedCosts::default()
        };
        assert_eq!(ted(&leaf("NAME"), &leaf("name"), &c), 0.0);
        assert_eq!(ted(&leaf("NAME"), &leaf("name"), &TedCosts::default()), 1.0);
    }

    #[test]
    fn max_nodes_normalization() {
        let c = TedCosts {
            normalization: NtedNormalization::MaxNodes,
            ..TedCosts::default()
        };
        let a = node("", vec![leaf("x"), leaf("y"), leaf("z"), leaf("w")]);
        let b = node("", vec![leaf("x")]);
        assert_eq!(nted(&a, &b, &c), 3.0 / 4.0);
    }

    fn arb_tree(max_nodes: usize) -> impl Strategy<Value = LabelTree> {
        let label = "[ab]{0,2}";
        let leaf_s = label.prop_map(LabelTree::leaf);
        leaf_s
            .prop_recursive(3, max_nodes as u32, 3, move |inner| {
                ("[ab]{0,2}", prop::collection::vec(inner, 0..3))
                    .prop_map(|(l, c)| LabelTree::node(l, c))
            })
            .prop_filter("size bound", move |t| t.size() <= max_nodes)
    }

    proptest! {
        #[test]
        fn zhang_shasha_matches_bruteforce(a in arb_tree(6), b in arb_tree(6)) {
            let c = TedCosts::default();
            let fast = ted(&a, &b, &c);
            let slow = ted_bruteforce(&a, &b, &c).unwrap();
            prop_assert!((fast - slow).abs() < 1e-9, "{} vs {} for {} / {}", fast, slow, a, b);
        }

        #[test]
        fn ted_is_symmetric_and_bounded(a in arb_tree(12), b in arb_tree(12)) {
            let c = TedCosts::default();
            let ab = ted(&a, &b, &c);
            prop_assert!((ab - ted(&b, &a, &c)).abs() < 1e-9);
            prop_assert!(ab <= (a.size() + b.size()) as f64 + 1e-9);
            prop_assert_eq!(ted(&a, &a, &c), 0.0);
        }

        #[test]
        fn ted_triangle_inequality(a in arb_tree(8), b in arb_tree(8), x in arb_tree(8)) {
            let c = TedCosts::default();
            prop_assert!(ted(&a, &x, &c) <= ted(&a, &b, &c) + ted(&b, &x, &c) + 1e-9);
        }

        #[test]
        fn nted_range(a in arb_tree(10), b in arb_tree(10)) {
            let c = TedCosts::default();
            let gt = LabelTree::node("", vec![b]);
            let pred = LabelTree::node("", vec![a]);
            let v = nted(&pred, &gt, &c);
            let bound = (real_node_count(&pred) + real_node_count(&gt)) as f64 / real_node_count(&gt) as f64;
            prop_assert!(v >= 0.0 && v <= bound + 1e-12);
        }
    }
}
