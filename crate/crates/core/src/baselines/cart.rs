use serde::Serialize;

use crate::error::{contract, Result};
use crate::preprocess::BitMatrix;

/// Nodes smaller than this are not split.
pub const DEFAULT_MIN_SPLIT: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum CartNode {
    Leaf { value: f64, rows: usize },
    /// Rows with the column unset go left, set go right (threshold 0.5).
    Split { column: usize, left: usize, right: usize },
}

/// Regression tree over one-hot columns; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegressionTree {
    pub nodes: Vec<CartNode>,
}

impl RegressionTree {
    pub fn predict(&self, m: &BitMatrix, row: usize) -> f64 {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                CartNode::Leaf { value, .. } => return value,
                CartNode::Split { column, left, right } => id = if m.get(row, column) { right } else { left },
            }
        }
    }

    pub fn leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, CartNode::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &RegressionTree, id: usize) -> usize {
            match t.nodes[id] {
                CartNode::Leaf { .. } => 0,
                CartNode::Split { left, right, .. } => 1 + walk(t, left).max(walk(t, right)),
            }
        }
        walk(self, 0)
    }
}

/// Fits a tree to `targets[k]` observed at matrix row `rows[k]`.
pub fn cart_fit(m: &BitMatrix, rows: &[usize], targets: &[f64]) -> Result<RegressionTree> {
    cart_fit_with(m, rows, targets, DEFAULT_MIN_SPLIT)
}

pub fn cart_fit_with(m: &BitMatrix, rows: &[usize], targets: &[f64], min_split: usize) -> Result<RegressionTree> {
    if rows.len() < 2 {
        return Err(contract("regression trees need at least two rows"));
    }
    if rows.len() != targets.len() {
        return Err(contract("one target per training row is required"));
    }
    if targets.iter().any(|t| !t.is_finite()) {
        return Err(contract("training targets must be finite"));
    }
    let mut tree = RegressionTree { nodes: Vec::new() };
    let items: Vec<(usize, f64)> = rows.iter().copied().zip(targets.iter().copied()).collect();
    grow(m, items, min_split.max(2), &mut tree);
    Ok(tree)
}

fn sse(n: f64, sum: f64, sumsq: f64) -> f64 {
    if n == 0.0 {
        0.0
    } else {
        (sumsq - sum * sum / n).max(0.0)
    }
}

fn grow(m: &BitMatrix, items: Vec<(usize, f64)>, min_split: usize, tree: &mut RegressionTree) -> usize {
    let id = tree.nodes.len();
    let n = items.len() as f64;
    let sum: f64 = items.iter().map(|p| p.1).sum();
    let sumsq: f64 = items.iter().map(|p| p.1 * p.1).sum();
    let mean = sum / n;
    tree.nodes.push(CartNode::Leaf {
        value: mean,
        rows: items.len(),
    });
    let parent_sse = sse(n, sum, sumsq);
    if items.len() < min_split || parent_sse <= 1e-12 * (1.0 + sumsq) {
        return id;
    }
    // per-column statistics of the rows with the bit set
    let mut on_n = vec![0usize; m.cols()];
    let mut on_sum = vec![0.0; m.cols()];
    let mut on_sq = vec![0.0; m.cols()];
    for &(r, y) in &items {
        for (w, &word) in m.row(r).iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let c = w * 64 + bits.trailing_zeros() as usize;
                on_n[c] += 1;
                on_sum[c] += y;
                on_sq[c] += y * y;
                bits &= bits - 1;
            }
        }
    }
    let mut best: Option<(usize, f64)> = None;
    for c in 0..m.cols() {
        if on_n[c] == 0 || on_n[c] == items.len() {
            continue;
        }
        let k = on_n[c] as f64;
        let child = sse(k, on_sum[c], on_sq[c]) + sse(n - k, sum - on_sum[c], sumsq - on_sq[c]);
        let gain = parent_sse - child;
        if gain > 1e-12 * (1.0 + parent_sse) && best.is_none_or(|b| gain > b.1) {
            best = Some((c, gain));
        }
    }
    let Some((column, _)) = best else {
        return id;
    };
    let (right, left): (Vec<_>, Vec<_>) = items.into_iter().partition(|&(r, _)| m.get(r, column));
    let l = grow(m, left, min_split, tree);
    let r = grow(m, right, min_split, tree);
    tree.nodes[id] = CartNode::Split {
        column,
        left: l,
        right: r,
    };
    id
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&str]) -> BitMatrix {
        let rows: Vec<Vec<bool>> = rows.iter().map(|r| r.chars().map(|c| c == '1').collect()).collect();
        BitMatrix::from_rows(&rows)
    }

    #[test]
    fn constant_target_is_one_leaf() {
        let m = matrix(&["01", "10", "11", "00", "01"]);
        let t = cart_fit(&m, &[0, 1, 2, 3, 4], &[3.0; 5]).unwrap();
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.predict(&m, 2), 3.0);
    }

    #[test]
    fn target_equal_to_a_column_needs_one_split() {
        let m = matrix(&["010", "110", "011", "101", "000", "111"]);
        let y: Vec<f64> = (0..6).map(|r| if m.get(r, 1) { 1.0 } else { 0.0 }).collect();
        let t = cart_fit(&m, &[0, 1, 2, 3, 4, 5], &y).unwrap();
        assert_eq!(t.depth(), 1);
        for (r, &v) in y.iter().enumerate() {
            assert_eq!(t.predict(&m, r), v);
        }
    }

    #[test]
    fn eight_rows_match_brute_force_partition() {
        let m = matrix(&["000", "001", "010", "011", "100", "101", "110", "111"]);
        let y = [1.0, 1.5, 4.0, 4.5, 1.2, 1.1, 8.0, 9.0];
        let rows: Vec<usize> = (0..8).collect();
        let t = cart_fit(&m, &rows, &y).unwrap();
        // brute force the root split by hand-rolled SSE
        let sse_of = |v: &[f64]| {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
        };
        let split_cost = |c: usize| {
            let (on, off): (Vec<f64>, Vec<f64>) = {
                let on = rows.iter().filter(|&&r| m.get(r, c)).map(|&r| y[r]).collect();
                let off = rows.iter().filter(|&&r| !m.get(r, c)).map(|&r| y[r]).collect();
                (on, off)
            };
            sse_of(&on) + sse_of(&off)
        };
        let best = (0..3).min_by(|&a, &b| split_cost(a).total_cmp(&split_cost(b))).unwrap();
        let CartNode::Split { column, left, right } = t.nodes[0] else {
            panic!("root should split")
        };
        assert_eq!(column, best);
        assert_eq!(column, 1);
        // each side of size 4 splits once more on its own best column
        let side = |id: usize, members: Vec<usize>| {
            let vals: Vec<f64> = members.iter().map(|&r| y[r]).collect();
            let mut leaf_means: Vec<f64> = match t.nodes[id] {
                CartNode::Split { left, right, .. } => [left, right]
                    .iter()
                    .map(|&k| match t.nodes[k] {
                        CartNode::Leaf { value, .. } => value,
                        _ => panic!("depth 2 nodes are leaves (size < 4)"),
                    })
                    .collect(),
                CartNode::Leaf { value, .. } => vec![value],
            };
            leaf_means.sort_by(f64::total_cmp);
            (vals, leaf_means)
        };
        let (_, off_means) = side(left, vec![0, 1, 4, 5]);
        assert_eq!(off_means.len(), 2);
        // {1.0, 1.5} vs {1.2, 1.1} on column 0 or {1.0, 1.2} vs {1.5, 1.1} on column 2
        let c0 = sse_of(&[1.0, 1.5]) + sse_of(&[1.2, 1.1]);
        let c2 = sse_of(&[1.0, 1.2]) + sse_of(&[1.5, 1.1]);
        let expect: Vec<f64> = if c0 <= c2 { vec![1.15, 1.25] } else { vec![1.1, 1.3] };
        for (a, b) in off_means.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let (_, on_means) = side(right, vec![2, 3, 6, 7]);
        assert!((on_means[0] - 4.25).abs() < 1e-12);
        assert!((on_means[1] - 8.5).abs() < 1e-12);
    }

    #[test]
    fn mse_does_not_grow_as_min_split_shrinks() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Vec<bool>> = (0..60).map(|_| (0..12).map(|_| rng.gen_bool(0.5)).collect()).collect();
        let m = BitMatrix::from_rows(&rows);
        let y: Vec<f64> = (0..60).map(|_| rng.gen_range(0.0..10.0)).collect();
        let idx: Vec<usize> = (0..60).collect();
        let mse = |k: usize| {
            let t = cart_fit_with(&m, &idx, &y, k).unwrap();
            idx.iter().map(|&r| (t.predict(&m, r) - y[r]).powi(2)).sum::<f64>() / 60.0
        };
        let mut last = f64::INFINITY;
        for k in [32, 16, 8, 4, 2] {
            let e = mse(k);
            assert!(e <= last + 1e-12);
            last = e;
        }
    }

    #[test]
    fn needs_two_rows() {
        let m = matrix(&["1"]);
        assert!(cart_fit(&m, &[0], &[1.0]).is_err());
    }
}
