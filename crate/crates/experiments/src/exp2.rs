use bcf_core::linalg::subspace_distance;
use bcf_core::rankreg;
use bcf_core::seed::{derive_seed, stream};
use bcf_core::simdg::sample_m0;
use bcf_core::Scalar;
use nalgebra::DMatrix;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::Result;
use crate::results::{ResultRow, RunMeta, RunOutput};
use crate::runner::{run_tasks, Task};

/// One `(p, r, τ, n)` combination.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exp2Cell {
    pub p: usize,
    pub r: usize,
    pub tau: f64,
    pub n: usize,
}

impl Exp2Cell {
    /// Method label shared by every sample size of a `(p, r, τ)` curve.
    pub fn method(&self) -> String {
        format!("rrr_p{}_r{}_tau{}", self.p, self.r, self.tau)
    }
}

/// Subspace distance between `M̂` and `M0 = τ A Bᵀ` over a grid of
/// eigengaps and sample sizes.
pub fn run_experiment2(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate(ExperimentKind::Exp2)?;
    let e = &cfg.exp2;
    let mut cells = Vec::new();
    for &(p, r) in &e.dims {
        for &tau in &e.taus {
            for &n in &e.ns {
                cells.push(Exp2Cell { p, r, tau, n });
            }
        }
    }
    let mut tasks = Vec::with_capacity(cells.len() * cfg.reps);
    for rep in 0..cfg.reps {
        let rep_seed = derive_seed(cfg.seed, rep as u64);
        for (i, cell) in cells.iter().enumerate() {
            tasks.push(Task {
                rep,
                cell: Some((format!("{} n={}", cell.method(), cell.n), *cell)),
                seed: derive_seed(rep_seed, i as u64),
            });
        }
    }
    let (rows, failures) = run_tasks(&tasks, cfg.workers, |t| {
        let (_, cell) = t.cell.as_ref().expect("exp2 tasks carry a cell");
        repetition(cfg, t.rep, cell, t.seed)
    })?;
    Ok(RunOutput {
        meta: RunMeta {
            experiment: ExperimentKind::Exp2.to_string(),
            seed: cfg.seed,
            reps: cfg.reps,
            rows: rows.len(),
            excluded: failures.len(),
            failures,
        },
        rows,
    })
}

fn repetition(cfg: &ExperimentConfig, rep: usize, cell: &Exp2Cell, seed: u64) -> Result<Vec<ResultRow>> {
    let Exp2Cell { p, r, tau, n } = *cell;
    let mut rng = stream(seed, 0);
    let m0 = sample_m0::<f64, _>(p, r, cfg.q, tau, &mut rng)?;
    let mut z_rng = stream(seed, 1);
    let z = DMatrix::from_fn(n, r, |_, _| f64::sample_standard_normal(&mut z_rng));
    let mut x = &z * m0.transpose();
    if !cfg.exp2.noiseless {
        let mut v_rng = stream(seed, 2);
        x += DMatrix::from_fn(n, p, |_, _| f64::sample_standard_normal(&mut v_rng));
    }
    let mut rr = cfg.bcf.rankreg.clone();
    rr.seed = derive_seed(seed, 3);
    let fit = rankreg::fit(&x, &z, &rr)?;
    let method = cell.method();
    Ok(vec![
        ResultRow::new(rep, &method, "n", n as f64, "distance", subspace_distance(&fit.m_hat, &m0)?)?,
        ResultRow::new(rep, &method, "n", n as f64, "q_hat", fit.q_hat as f64)?,
    ])
}
