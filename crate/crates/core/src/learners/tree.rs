use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_features, check_training_data, Predictor};
use crate::error::Result;
use crate::Scalar;

/// User-facing CART hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or hit `min_leaf`.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_leaf: 1,
        }
    }
}

/// Growth controls for a single tree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitParams {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features examined per node; `None` examines all, in index order.
    pub max_features: Option<usize>,
}

impl From<TreeParams> for SplitParams {
    fn from(t: TreeParams) -> Self {
        Self {
            max_depth: t.max_depth,
            min_leaf: t.min_leaf.max(1),
            max_features: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node<T> {
    Leaf { value: T },
    Split { feature: usize, threshold: T, left: usize, right: usize },
}

/// CART regression tree with exhaustive squared-error split search.
///
/// Thresholds sit at midpoints between consecutive distinct feature values;
/// a row goes left when `x[feature] <= threshold`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionTree<T: Scalar> {
    nodes: Vec<Node<T>>,
    n_features: usize,
}

struct Candidate<T> {
    feature: usize,
    threshold: T,
    score: T,
}

impl<T: Scalar> RegressionTree<T> {
    pub fn fit<R: Rng + ?Sized>(x: &DMatrix<T>, y: &DVector<T>, params: &SplitParams, rng: &mut R) -> Result<Self> {
        check_training_data(x, y)?;
        Ok(Self::fit_rows(x, y, (0..y.len()).collect(), params, rng))
    }

    /// Grows a tree on the given rows of `x` (repeats allowed, as in bootstrap
    /// samples). Inputs are assumed validated.
    pub(crate) fn fit_rows<R: Rng + ?Sized>(
        x: &DMatrix<T>,
        y: &DVector<T>,
        rows: Vec<usize>,
        params: &SplitParams,
        rng: &mut R,
    ) -> Self {
        let d = x.ncols();
        let mut nodes = vec![Node::Leaf { value: T::zero() }];
        let mut stack = vec![(0usize, rows, 0usize)];
        let mut buf: Vec<(T, T)> = Vec::new();
        let mut features: Vec<usize> = (0..d).collect();

        while let Some((id, rows, depth)) = stack.pop() {
            let n = rows.len();
            let sum = rows.iter().fold(T::zero(), |acc, &i| acc + y[i]);
            let value = sum / T::from_count(n);
            nodes[id] = Node::Leaf { value };

            let depth_ok = params.max_depth.is_none_or(|m| depth < m);
            if !depth_ok || n < 2 * params.min_leaf || is_pure(y, &rows) {
                continue;
            }
            if params.max_features.is_some_and(|m| m < d) {
                features.shuffle(rng);
            }
            let Some(best) = best_split(x, y, &rows, &features, params, &mut buf) else {
                continue;
            };
            let col = x.column(best.feature);
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&i| col[i] <= best.threshold);
            let left = nodes.len();
            nodes.push(Node::Leaf { value });
            nodes.push(Node::Leaf { value });
            nodes[id] = Node::Split {
                feature: best.feature,
                threshold: best.threshold,
                left,
                right: left + 1,
            };
            stack.push((left + 1, right_rows, depth + 1));
            stack.push((left, left_rows, depth + 1));
        }
        Self { nodes, n_features: d }
    }

    fn predict_row(&self, x: &DMatrix<T>, i: usize) -> T {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if x[(i, feature)] <= threshold { left } else { right },
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[Node<T>], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

fn is_pure<T: Scalar>(y: &DVector<T>, rows: &[usize]) -> bool {
    let first = y[rows[0]];
    rows.iter().all(|&i| y[i] == first)
}

fn best_split<T: Scalar>(
    x: &DMatrix<T>,
    y: &DVector<T>,
    rows: &[usize],
    features: &[usize],
    params: &SplitParams,
    buf: &mut Vec<(T, T)>,
) -> Option<Candidate<T>> {
    let n = rows.len();
    let min_leaf = params.min_leaf;
    let budget = params.max_features.unwrap_or(features.len()).max(1);
    let total = rows.iter().fold(T::zero(), |acc, &i| acc + y[i]);
    let mut best: Option<Candidate<T>> = None;
    let mut visited = 0;

    for &j in features {
        if visited >= budget {
            break;
        }
        let col = x.column(j);
        buf.clear();
        buf.extend(rows.iter().map(|&i| (col[i], y[i])));
        buf.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));
        if buf[0].0 == buf[n - 1].0 {
            continue;
        }
        visited += 1;

        let mut left_sum = T::zero();
        for (i, &(_, yv)) in buf.iter().enumerate().take(n - min_leaf) {
            left_sum += yv;
            let n_left = i + 1;
            if n_left < min_leaf || buf[i].0 == buf[i + 1].0 {
                continue;
            }
            let right_sum = total - left_sum;
            let score = left_sum * left_sum / T::from_count(n_left)
                + right_sum * right_sum / T::from_count(n - n_left);
            if best.as_ref().is_none_or(|b| score > b.score) {
                let (lo, hi) = (buf[i].0, buf[i + 1].0);
                let mut threshold = (lo + hi) / T::lit(2.0);
                if threshold >= hi {
                    threshold = lo;
                }
                best = Some(Candidate {
                    feature: j,
                    threshold,
                    score,
                });
            }
        }
    }
    best
}

impl<T: Scalar> Predictor<T> for RegressionTree<T> {
    fn predict(&self, x: &DMatrix<T>) -> Result<DVector<T>> {
        check_features(Some(self.n_features), x)?;
        Ok(DVector::from_fn(x.nrows(), |i, _| self.predict_row(x, i)))
    }

    fn n_features(&self) -> Option<usize> {
        Some(self.n_features)
    }
}
