use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, DVectorView};
use rand::Rng;

use crate::error::{dim_err, Error, Result};
use crate::Scalar;

/// Piecewise-constant function given by a complete binary tree of depth `d`.
///
/// Splits are stored in heap order (children of node `i` are `2i + 1` and
/// `2i + 2`); leaves are indexed left to right. A point goes left when
/// `x[feature] <= threshold`.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeFunction<T: Scalar> {
    input_dim: usize,
    depth: usize,
    splits: Vec<(usize, T)>,
    leaves: Vec<T>,
}

impl<T: Scalar> TreeFunction<T> {
    /// Builds a tree from explicit splits (heap order, `2^depth − 1` of them)
    /// and `2^depth` leaf values. Features are zero-based.
    pub fn from_parts(input_dim: usize, splits: Vec<(usize, T)>, leaves: Vec<T>) -> Result<Self> {
        let n_leaves = leaves.len();
        if n_leaves < 2 || !n_leaves.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "leaf count {n_leaves} is not a power of two >= 2"
            )));
        }
        if splits.len() != n_leaves - 1 {
            return Err(Error::InvalidInput(format!(
                "{} splits do not match {} leaves",
                splits.len(),
                n_leaves
            )));
        }
        if let Some((j, _)) = splits.iter().find(|(j, _)| *j >= input_dim) {
            return Err(dim_err(format!("split feature {j} outside input dimension {input_dim}")));
        }
        Ok(Self {
            input_dim,
            depth: n_leaves.trailing_zeros() as usize,
            splits,
            leaves,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn splits(&self) -> &[(usize, T)] {
        &self.splits
    }

    pub fn leaf_values(&self) -> &[T] {
        &self.leaves
    }

    /// Index of the leaf region containing `x`.
    pub fn leaf_index(&self, x: DVectorView<'_, T>) -> usize {
        let mut node = 0;
        for _ in 0..self.depth {
            let (j, s) = self.splits[node];
            node = if x[j] <= s { 2 * node + 1 } else { 2 * node + 2 };
        }
        node - self.splits.len()
    }

    pub fn eval_point(&self, x: DVectorView<'_, T>) -> T {
        self.leaves[self.leaf_index(x)]
    }

    pub fn evaluate(&self, x: &DMatrix<T>) -> Result<DVector<T>> {
        if x.ncols() != self.input_dim {
            return Err(dim_err(format!(
                "tree expects {} features, got {}",
                self.input_dim,
                x.ncols()
            )));
        }
        let xt = x.transpose();
        Ok(DVector::from_iterator(
            x.nrows(),
            xt.column_iter().map(|row| self.eval_point(row.as_view())),
        ))
    }
}

/// Samples a random tree on the first `p_eff` of `p` coordinates.
///
/// Each internal node splits on a feature drawn uniformly from
/// `{0, …, p_eff − 1}` at a point uniform on `split_range`; the `2^depth`
/// leaf values are i.i.d. `N(0, theta_sd²)`.
pub fn sample_tree_function<T: Scalar, R: Rng + ?Sized>(
    p: usize,
    p_eff: usize,
    depth: usize,
    theta_sd: T,
    split_range: (T, T),
    rng: &mut R,
) -> Result<TreeFunction<T>> {
    if p_eff > p {
        return Err(dim_err(format!("p_eff = {p_eff} exceeds p = {p}")));
    }
    if p_eff == 0 || depth == 0 {
        return Err(Error::InvalidInput("tree needs p_eff >= 1 and depth >= 1".into()));
    }
    if !(split_range.0 < split_range.1) {
        return Err(Error::InvalidInput("split range must be a non-empty interval".into()));
    }
    let n_leaves = 1usize << depth;
    let splits = (0..n_leaves - 1)
        .map(|_| {
            let j = rng.random_range(0..p_eff);
            let s = T::sample_uniform(rng, split_range.0, split_range.1);
            (j, s)
        })
        .collect();
    let leaves = (0..n_leaves)
        .map(|_| theta_sd * T::sample_standard_normal(rng))
        .collect();
    TreeFunction::from_parts(p, splits, leaves)
}

type PointFn<T> = dyn Fn(DVectorView<'_, T>) -> T + Send + Sync;

/// The structural function `f0` of a model.
#[derive(Clone)]
pub enum StructuralFunction<T: Scalar> {
    Tree(TreeFunction<T>),
    Linear { coefficients: DVector<T>, intercept: T },
    Custom { input_dim: usize, f: Arc<PointFn<T>> },
}

impl<T: Scalar> fmt::Debug for StructuralFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructuralFunction::Tree(t) => f.debug_tuple("Tree").field(t).finish(),
            StructuralFunction::Linear {
                coefficients,
                intercept,
            } => f
                .debug_struct("Linear")
                .field("coefficients", coefficients)
                .field("intercept", intercept)
                .finish(),
            StructuralFunction::Custom { input_dim, .. } => f
                .debug_struct("Custom")
                .field("input_dim", input_dim)
                .finish_non_exhaustive(),
        }
    }
}

impl<T: Scalar> StructuralFunction<T> {
    pub fn linear(coefficients: DVector<T>) -> Self {
        StructuralFunction::Linear {
            coefficients,
            intercept: T::zero(),
        }
    }

    pub fn custom<F>(input_dim: usize, f: F) -> Self
    where
        F: Fn(DVectorView<'_, T>) -> T + Send + Sync + 'static,
    {
        StructuralFunction::Custom {
            input_dim,
            f: Arc::new(f),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            StructuralFunction::Tree(t) => t.input_dim(),
            StructuralFunction::Linear { coefficients, .. } => coefficients.len(),
            StructuralFunction::Custom { input_dim, .. } => *input_dim,
        }
    }

    pub fn evaluate(&self, x: &DMatrix<T>) -> Result<DVector<T>> {
        if x.ncols() != self.input_dim() {
            return Err(dim_err(format!(
                "structural function expects {} features, got {}",
                self.input_dim(),
                x.ncols()
            )));
        }
        match self {
            StructuralFunction::Tree(t) => t.evaluate(x),
            StructuralFunction::Linear {
                coefficients,
                intercept,
            } => Ok(x * coefficients).map(|v| v.add_scalar(*intercept)),
            StructuralFunction::Custom { f, .. } => {
                let xt = x.transpose();
                Ok(DVector::from_iterator(
                    x.nrows(),
                    xt.column_iter().map(|row| f(row.as_view())),
                ))
            }
        }
    }
}
