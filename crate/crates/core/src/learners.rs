//! Least-squares base learners: the count-matrix selector stump and
//! depth-bounded regression trees.
//!
//! Splits send `value <= threshold` left. Candidate thresholds are midpoints
//! between consecutive distinct sorted values. Among equal reductions the
//! lower feature index wins, then the lower threshold.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::CountMatrix;

/// Reductions below this fraction of `sum(r^2)` are rounding noise.
const NOISE: f64 = 1e-12;

/// SSE reduction of splitting `n` rows into (`n_left`, `sum_left`) and the rest.
#[inline]
fn split_gain(n_left: usize, sum_left: f64, n: usize, sum: f64) -> f64 {
    let n_right = n - n_left;
    let mean_left = sum_left / n_left as f64;
    let mean_right = (sum - sum_left) / n_right as f64;
    let diff = mean_left - mean_right;
    (n_left as f64) * (n_right as f64) / (n as f64) * diff * diff
}

fn noise_floor(r: &[f64]) -> f64 {
    NOISE * r.iter().map(|x| x * x).sum::<f64>()
}

fn midpoint(a: f64, b: f64) -> f64 {
    let mid = a + (b - a) / 2.0;
    if mid >= b {
        a
    } else {
        mid
    }
}

/// Depth-one split on a count-matrix column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature_index: usize,
    pub threshold: f64,
    pub left_value: f64,
    pub right_value: f64,
    pub sse_reduction: f64,
}

impl Stump {
    pub fn is_degenerate(&self) -> bool {
        self.sse_reduction <= 0.0
    }

    pub fn predict(&self, value: f64) -> f64 {
        if value <= self.threshold {
            self.left_value
        } else {
            self.right_value
        }
    }
}

/// Best stump of every column.
#[derive(Debug, Clone)]
pub struct StumpScan {
    pub per_column: Vec<Stump>,
}

impl StumpScan {
    /// Winning stump under the tie rule.
    pub fn best(&self) -> Stump {
        let mut best = self.per_column[0];
        for s in &self.per_column[1..] {
            if s.sse_reduction > best.sse_reduction {
                best = *s;
            }
        }
        best
    }

    /// Largest reduction among columns other than `winner` (0 if none).
    pub fn second_best(&self, winner: usize) -> f64 {
        self.per_column
            .iter()
            .filter(|s| s.feature_index != winner)
            .map(|s| s.sse_reduction)
            .fold(0.0, f64::max)
    }
}

fn column_stump(x: &CountMatrix, c: usize, r: &[f64], sum: f64, floor: f64) -> Stump {
    let n = r.len();
    let values = x.column(c);
    let order = x.sorted_rows(c);
    let mean = sum / n as f64;
    let mut best = Stump {
        feature_index: c,
        threshold: f64::INFINITY,
        left_value: mean,
        right_value: mean,
        sse_reduction: 0.0,
    };
    let mut sum_left = 0.0;
    for i in 0..n - 1 {
        let row = order[i] as usize;
        sum_left += r[row];
        let (a, b) = (values[row], values[order[i + 1] as usize]);
        if a == b {
            continue;
        }
        let gain = split_gain(i + 1, sum_left, n, sum);
        if gain > best.sse_reduction && gain > floor {
            best = Stump {
                feature_index: c,
                threshold: (a as f64 + b as f64) / 2.0,
                left_value: sum_left / (i + 1) as f64,
                right_value: (sum - sum_left) / (n - i - 1) as f64,
                sse_reduction: gain,
            };
        }
    }
    best
}

/// Best stump of each column of `x` for residuals `r`.
pub fn scan_stumps(x: &CountMatrix, r: &[f64]) -> Result<StumpScan> {
    if x.cols() == 0 {
        return Err(Error::Usage("count matrix has no columns".into()));
    }
    if r.len() != x.rows() || r.is_empty() {
        return Err(Error::Usage(format!(
            "{} residuals for {} rows",
            r.len(),
            x.rows()
        )));
    }
    let sum: f64 = r.iter().sum();
    let floor = noise_floor(r);
    let per_column = (0..x.cols())
        .into_par_iter()
        .map(|c| column_stump(x, c, r, sum, floor))
        .collect();
    Ok(StumpScan { per_column })
}

/// Stump maximising SSE reduction over all columns and thresholds.
///
/// When no split reduces the error the result has `sse_reduction == 0`.
pub fn fit_stump(x: &CountMatrix, r: &[f64]) -> Result<Stump> {
    Ok(scan_stumps(x, r)?.best())
}

/// Best reduction among columns other than `winner`.
pub fn second_best_reduction(x: &CountMatrix, r: &[f64], winner: usize) -> Result<f64> {
    if x.cols() < 2 {
        log::debug!("single candidate column; second-best reduction is 0");
        return Ok(0.0);
    }
    Ok(scan_stumps(x, r)?.second_best(winner))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeNode {
    Leaf {
        value: f64,
        samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn visit_features(&self, out: &mut Vec<usize>) {
        if let TreeNode::Split {
            feature, left, right, ..
        } = self
        {
            out.push(*feature);
            left.visit_features(out);
            right.visit_features(out);
        }
    }
}

/// Regression tree over fixed-width feature rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub n_features: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub root: TreeNode,
}

impl RegressionTree {
    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Feature indices used by split nodes, in pre-order.
    pub fn split_features(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.root.visit_features(&mut out);
        out
    }

    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.n_features {
            return Err(Error::Usage(format!(
                "row has {} features, tree expects {}",
                row.len(),
                self.n_features
            )));
        }
        Ok(self.predict_unchecked(row))
    }

    pub(crate) fn predict_unchecked(&self, row: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { value, .. } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }
}

/// Prediction of `tree` for `row`.
pub fn predict_tree(tree: &RegressionTree, row: &[f64]) -> Result<f64> {
    tree.predict(row)
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
}

struct Builder<'a> {
    rows: &'a [Vec<f64>],
    r: &'a [f64],
    max_depth: usize,
    min_leaf: usize,
    floor: f64,
    n_features: usize,
}

impl Builder<'_> {
    fn leaf(&self, idx: &[usize]) -> TreeNode {
        let sum: f64 = idx.iter().map(|&i| self.r[i]).sum();
        TreeNode::Leaf {
            value: sum / idx.len() as f64,
            samples: idx.len(),
        }
    }

    fn best_split(&self, idx: &[usize]) -> Option<SplitChoice> {
        let n = idx.len();
        if n < 2 * self.min_leaf {
            return None;
        }
        let sum: f64 = idx.iter().map(|&i| self.r[i]).sum();
        let candidates: Vec<Option<SplitChoice>> = (0..self.n_features)
            .into_par_iter()
            .map(|f| {
                let mut order = idx.to_vec();
                order.sort_by(|&a, &b| self.rows[a][f].total_cmp(&self.rows[b][f]).then(a.cmp(&b)));
                let mut best: Option<SplitChoice> = None;
                let mut sum_left = 0.0;
                for i in 0..n - 1 {
                    sum_left += self.r[order[i]];
                    let n_left = i + 1;
                    if n_left < self.min_leaf || n - n_left < self.min_leaf {
                        continue;
                    }
                    let (a, b) = (self.rows[order[i]][f], self.rows[order[i + 1]][f]);
                    if a == b {
                        continue;
                    }
                    let gain = split_gain(n_left, sum_left, n, sum);
                    if gain > self.floor && best.as_ref().is_none_or(|s| gain > s.gain) {
                        best = Some(SplitChoice {
                            feature: f,
                            threshold: midpoint(a, b),
                            gain,
                        });
                    }
                }
                best
            })
            .collect();
        let mut best: Option<SplitChoice> = None;
        for c in candidates.into_iter().flatten() {
            if best.as_ref().is_none_or(|b| c.gain > b.gain) {
                best = Some(c);
            }
        }
        best
    }

    fn grow(&self, idx: Vec<usize>, depth: usize) -> TreeNode {
        if depth >= self.max_depth {
            return self.leaf(&idx);
        }
        let Some(split) = self.best_split(&idx) else {
            return self.leaf(&idx);
        };
        let (left, right): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.rows[i][split.feature] <= split.threshold);
        TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(self.grow(left, depth + 1)),
            right: Box::new(self.grow(right, depth + 1)),
        }
    }
}

/// Greedy least-squares tree on `rows` for residuals `r`.
pub fn fit_tree(rows: &[Vec<f64>], r: &[f64], max_depth: usize, min_leaf: usize) -> Result<RegressionTree> {
    if rows.is_empty() {
        return Err(Error::Usage("cannot fit a tree on zero rows".into()));
    }
    if rows.len() != r.len() {
        return Err(Error::Usage(format!(
            "{} rows but {} residuals",
            rows.len(),
            r.len()
        )));
    }
    let n_features = rows[0].len();
    if rows.iter().any(|row| row.len() != n_features) {
        return Err(Error::Usage("feature rows differ in width".into()));
    }
    let min_leaf = min_leaf.max(1);
    let builder = Builder {
        rows,
        r,
        max_depth,
        min_leaf,
        floor: noise_floor(r),
        n_features,
    };
    let root = builder.grow((0..rows.len()).collect(), 0);
    Ok(RegressionTree {
        n_features,
        max_depth,
        min_leaf,
        root,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::LabelledPath;

    fn matrix(cols: &[&[u64]]) -> CountMatrix {
        let mut m = CountMatrix::new(cols[0].len());
        for (i, c) in cols.iter().enumerate() {
            m.push_column(LabelledPath::single(i as u32), c.to_vec()).unwrap();
        }
        m
    }

    #[test]
    fn perfectly_separating_column() {
        let m = matrix(&[&[0, 0, 1, 1]]);
        let s = fit_stump(&m, &[-1.0, -1.0, 1.0, 1.0]).unwrap();
        assert_eq!(s.feature_index, 0);
        assert_eq!(s.threshold, 0.5);
        assert_eq!(s.sse_reduction, 4.0);
        assert_eq!((s.left_value, s.right_value), (-1.0, 1.0));
    }

    #[test]
    fn constant_residuals_give_degenerate_stump() {
        let m = matrix(&[&[0, 1, 2, 3], &[3, 1, 1, 0]]);
        let s = fit_stump(&m, &[0.3; 4]).unwrap();
        assert!(s.is_degenerate());
        assert_eq!(s.sse_reduction, 0.0);
    }

    #[test]
    fn identical_columns_prefer_lower_index() {
        let m = matrix(&[&[2, 0, 1, 1], &[0, 0, 1, 1], &[0, 0, 1, 1]]);
        let s = fit_stump(&m, &[-1.0, -1.0, 1.0, 1.0]).unwrap();
        assert_eq!(s.feature_index, 1);
    }

    #[test]
    fn runner_up_reduction() {
        // column 1 isolates one +1 row: means -1/3 vs 1 -> 3*1/4*(4/3)^2 = 4/3
        let m = matrix(&[&[0, 0, 1, 1], &[0, 0, 0, 1]]);
        let r = [-1.0, -1.0, 1.0, 1.0];
        assert_eq!(second_best_reduction(&m, &r, 0).unwrap(), 4.0 / 3.0);
        let dup = matrix(&[&[0, 0, 1, 1], &[0, 0, 1, 1]]);
        assert_eq!(second_best_reduction(&dup, &r, 0).unwrap(), 4.0);
        let flat = matrix(&[&[0, 0, 1, 1], &[5, 5, 5, 5]]);
        assert_eq!(second_best_reduction(&flat, &r, 0).unwrap(), 0.0);
        let single = matrix(&[&[0, 0, 1, 1]]);
        assert_eq!(second_best_reduction(&single, &r, 0).unwrap(), 0.0);
    }

    #[test]
    fn depth_zero_tree_is_mean() {
        let rows = vec![vec![1.0], vec![2.0], vec![3.0]];
        let t = fit_tree(&rows, &[1.0, 2.0, 6.0], 0, 1).unwrap();
        assert_eq!(t.predict(&[10.0]).unwrap(), 3.0);
        assert_eq!(t.depth(), 0);
    }

    #[test]
    fn step_function_is_recovered() {
        let rows: Vec<Vec<f64>> = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]
            .iter()
            .map(|&x| vec![7.0, x])
            .collect();
        let r = [-2.0, -2.0, -2.0, 5.0, 5.0, 5.0];
        let t = fit_tree(&rows, &r, 1, 1).unwrap();
        assert_eq!(t.split_features(), vec![1]);
        for (row, &y) in rows.iter().zip(&r) {
            assert_eq!(predict_tree(&t, row).unwrap(), y);
        }
        assert_eq!(t.predict(&[0.0, 2.5]).unwrap(), -2.0);
        assert_eq!(t.predict(&[0.0, 2.6]).unwrap(), 5.0);
    }

    #[test]
    fn min_leaf_of_n_forbids_splits() {
        let rows: Vec<Vec<f64>> = (0..6).map(|x| vec![x as f64]).collect();
        let r = [-2.0, -2.0, -2.0, 5.0, 5.0, 5.0];
        let t = fit_tree(&rows, &r, 5, 6).unwrap();
        assert_eq!(t.depth(), 0);
    }

    #[test]
    fn errors_on_bad_input() {
        assert!(fit_tree(&[], &[], 2, 1).is_err());
        assert!(fit_tree(&[vec![1.0], vec![1.0, 2.0]], &[0.0, 0.0], 2, 1).is_err());
        let t = fit_tree(&[vec![1.0]], &[0.0], 2, 1).unwrap();
        assert!(t.predict(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn tree_round_trips_through_json() {
        let rows: Vec<Vec<f64>> = (0..6).map(|x| vec![x as f64]).collect();
        let t = fit_tree(&rows, &[0.0, 0.0, 1.0, 1.0, 3.0, 3.0], 2, 1).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("\"split\""));
        let back: RegressionTree = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }
}
