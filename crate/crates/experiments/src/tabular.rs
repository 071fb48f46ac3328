use std::collections::HashMap;
use std::path::Path;

use bcf_core::bcf::{fit_bcf, fit_ls};
use bcf_core::learners::{mse, Predictor};
use bcf_core::seed::{derive_seed, stream};
use bcf_core::simdg::Dataset;
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;

use crate::config::{ExperimentConfig, ExperimentKind, TabularConfig};
use crate::error::{Error, Result};
use crate::exp1::constant_mse;
use crate::predicate::Predicate;
use crate::results::{ResultRow, RunMeta, RunOutput};
use crate::runner::{run_tasks, Task};

/// Numeric columns of a CSV file.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    /// Row-major values for `columns`.
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    /// Reads the named columns; every other column is ignored.
    pub fn load(path: &Path, wanted: &[&str]) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let header = reader
            .headers()
            .map_err(|source| Error::Csv {
                path: path.to_path_buf(),
                source,
            })?
            .clone();
        let mut positions = Vec::with_capacity(wanted.len());
        for name in wanted {
            let pos = header
                .iter()
                .position(|h| h.trim() == *name)
                .ok_or_else(|| Error::Data(format!("{}: missing column {name:?}", path.display())))?;
            positions.push(pos);
        }
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|source| Error::Csv {
                path: path.to_path_buf(),
                source,
            })?;
            let mut row = Vec::with_capacity(wanted.len());
            for (name, &pos) in wanted.iter().zip(&positions) {
                let cell = record.get(pos).unwrap_or("").trim();
                let v: f64 = cell.parse().map_err(|_| {
                    Error::Data(format!(
                        "{}: non-numeric value {cell:?} in column {name:?} on line {}",
                        path.display(),
                        i + 2
                    ))
                })?;
                if !v.is_finite() {
                    return Err(Error::Data(format!(
                        "{}: non-finite value in column {name:?} on line {}",
                        path.display(),
                        i + 2
                    )));
                }
                row.push(v);
            }
            rows.push(row);
        }
        Ok(Self {
            columns: wanted.iter().map(|s| s.to_string()).collect(),
            rows,
        })
    }

    fn matrix(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| self.rows[rows[i]][cols[j]])
    }
}

/// Column names of the header of `path`.
pub fn read_header(path: &Path) -> Result<Vec<String>> {
    let mut reader = csv::Reader::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let header = reader.headers().map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(header.iter().map(|h| h.trim().to_string()).collect())
}

/// Columns, region split and design matrices of a tabular experiment.
#[derive(Clone, Debug)]
pub struct TabularData {
    pub predictors: Vec<String>,
    pub train: Dataset<f64>,
    pub test_x: DMatrix<f64>,
    pub test_y: DVector<f64>,
}

pub fn load_tabular(t: &TabularConfig) -> Result<TabularData> {
    let predicate = Predicate::parse(&t.train_region)?;
    let header = read_header(&t.path)?;
    let predictors: Vec<String> = match &t.predictors {
        Some(p) => p.clone(),
        None => header
            .iter()
            .filter(|h| **h != t.target && !t.exogenous.contains(h))
            .cloned()
            .collect(),
    };
    if predictors.is_empty() {
        return Err(Error::Data("no predictor columns".into()));
    }
    let mut wanted: Vec<&str> = vec![t.target.as_str()];
    for name in predictors.iter().chain(&t.exogenous).map(String::as_str).chain(predicate.columns()) {
        if !wanted.contains(&name) {
            wanted.push(name);
        }
    }
    let table = Table::load(&t.path, &wanted)?;
    let index: HashMap<&str, usize> = wanted.iter().enumerate().map(|(i, c)| (*c, i)).collect();

    let mut train_rows = Vec::new();
    let mut test_rows = Vec::new();
    for (i, row) in table.rows.iter().enumerate() {
        if predicate.eval(&index, row)? {
            train_rows.push(i);
        } else {
            test_rows.push(i);
        }
    }
    if train_rows.is_empty() {
        return Err(Error::EmptySplit(format!("no rows satisfy {:?}", t.train_region)));
    }
    if test_rows.is_empty() {
        return Err(Error::EmptySplit(format!("every row satisfies {:?}, the test region is empty", t.train_region)));
    }
    let cols = |names: &[String]| -> Vec<usize> { names.iter().map(|n| index[n.as_str()]).collect() };
    let (x_cols, z_cols, y_col) = (cols(&predictors), cols(&t.exogenous), [0usize]);
    let train = Dataset::new(
        table.matrix(&train_rows, &x_cols),
        table.matrix(&train_rows, &y_col).column(0).into_owned(),
        table.matrix(&train_rows, &z_cols),
    )?;
    Ok(TabularData {
        predictors,
        test_x: table.matrix(&test_rows, &x_cols),
        test_y: table.matrix(&test_rows, &y_col).column(0).into_owned(),
        train,
    })
}

/// Fits on random subsamples of the training region and scores on the
/// remaining training rows and on the test region.
pub fn run_tabular(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate(ExperimentKind::Tabular)?;
    let t = cfg.tabular.as_ref().expect("validated");
    let data = load_tabular(t)?;
    let n = data.train.n();
    let n_fit = (t.fraction * n as f64).round() as usize;
    if n_fit == 0 {
        return Err(Error::EmptySplit("the training subsample is empty".into()));
    }
    let tasks: Vec<Task<()>> = (0..cfg.reps)
        .map(|rep| Task {
            rep,
            cell: None,
            seed: derive_seed(cfg.seed, rep as u64),
        })
        .collect();
    let (rows, failures) = run_tasks(&tasks, cfg.workers, |task| {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut stream(task.seed, 0));
        let (fit_rows, held_rows) = order.split_at(n_fit);
        let mut fit_rows = fit_rows.to_vec();
        let mut held_rows = held_rows.to_vec();
        fit_rows.sort_unstable();
        held_rows.sort_unstable();
        repetition(cfg, t.fraction, &data, &fit_rows, &held_rows, task.rep, task.seed)
    })?;
    Ok(RunOutput {
        meta: RunMeta {
            experiment: ExperimentKind::Tabular.to_string(),
            seed: cfg.seed,
            reps: cfg.reps,
            rows: rows.len(),
            excluded: failures.len(),
            failures,
        },
        rows,
    })
}

fn repetition(
    cfg: &ExperimentConfig,
    fraction: f64,
    data: &TabularData,
    fit_rows: &[usize],
    held_rows: &[usize],
    rep: usize,
    seed: u64,
) -> Result<Vec<ResultRow>> {
    let fit_set = data.train.select_rows(fit_rows)?;
    let mut bcf_cfg = cfg.bcf.clone();
    bcf_cfg.rankreg.seed = derive_seed(seed, 2);
    bcf_cfg.learner_f.seed = derive_seed(seed, 3);
    bcf_cfg.learner_gamma.seed = derive_seed(seed, 4);
    if let Some(d) = bcf_cfg.learner_delta.as_mut() {
        d.seed = derive_seed(seed, 5);
    }
    let mut ls_cfg = cfg.ls_learner().clone();
    ls_cfg.seed = derive_seed(seed, 6);
    let bcf = fit_bcf(&fit_set, &bcf_cfg)?;
    let ls = fit_ls(&fit_set, &ls_cfg)?;

    let mut rows = vec![ResultRow::new(rep, "bcf", "fraction", fraction, "q_hat", bcf.q_hat() as f64)?];
    let mut score = |metric: &str, x: &DMatrix<f64>, y: &DVector<f64>| -> Result<()> {
        for (method, value) in [
            ("bcf", mse(&bcf.predict(x)?, y)),
            ("ls", mse(&ls.predict(x)?, y)),
            ("constant", constant_mse(y)),
        ] {
            rows.push(ResultRow::new(rep, method, "fraction", fraction, metric, value)?);
        }
        Ok(())
    };
    if !held_rows.is_empty() {
        let held = data.train.select_rows(held_rows)?;
        score("mse_holdout", held.x(), held.y())?;
    }
    score("mse_test", &data.test_x, &data.test_y)?;
    Ok(rows)
}
