use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::Scalar;

/// Which category probabilities the encoding uses.
#[derive(Clone, Debug, PartialEq)]
pub enum CategoricalEncoding {
    /// User-supplied population probabilities `π_0, …, π_r`; the population
    /// mean of the encoded vector is exactly zero.
    Population(Vec<f64>),
    /// Probabilities estimated from the label frequencies; the sample mean of
    /// the encoded rows is then zero.
    Empirical { n_categories: usize },
}

/// Encodes categorical labels `0..=r` as mean-zero vectors in `R^r`.
///
/// Category `j >= 1` maps to the unit vector `e_j`; the reference category
/// `0` maps to `−(π_1/π_0, …, π_r/π_0)`.
pub fn encode_categorical<T: Scalar>(labels: &[usize], encoding: &CategoricalEncoding) -> Result<DMatrix<T>> {
    let probs = match encoding {
        CategoricalEncoding::Population(pi) => pi.clone(),
        CategoricalEncoding::Empirical { n_categories } => {
            if labels.is_empty() {
                return Err(Error::Empty("no labels to estimate frequencies from".into()));
            }
            let mut counts = vec![0usize; *n_categories];
            for &l in labels {
                if l >= *n_categories {
                    return Err(Error::InvalidInput(format!("label {l} outside 0..{n_categories}")));
                }
                counts[l] += 1;
            }
            counts.iter().map(|&c| c as f64 / labels.len() as f64).collect()
        }
    };
    if probs.len() < 2 {
        return Err(Error::InvalidInput("need at least two categories".into()));
    }
    if probs.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
        return Err(Error::InvalidInput("category probabilities must be positive".into()));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("category probabilities sum to {total}, not 1")));
    }
    let r = probs.len() - 1;
    let reference: Vec<T> = probs[1..].iter().map(|&p| T::lit(-p / probs[0])).collect();
    let mut out = DMatrix::zeros(labels.len(), r);
    for (i, &label) in labels.iter().enumerate() {
        match label {
            0 => {
                for j in 0..r {
                    out[(i, j)] = reference[j];
                }
            }
            l if l <= r => out[(i, l - 1)] = T::one(),
            l => {
                return Err(Error::InvalidInput(format!("label {l} outside 0..={r}")));
            }
        }
    }
    Ok(out)
}
