use bcf_core::bcf::{fit_bcf, fit_ls, structural_oracle, ImpOracle};
use bcf_core::learners::{mse, Predictor};
use bcf_core::seed::{derive_seed, stream};
use bcf_core::simdg::SimdgSpec;
use nalgebra::DVector;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::Result;
use crate::results::{ResultRow, RunMeta, RunOutput};
use crate::runner::{run_tasks, Task};

/// Test MSE of every method under shifts of growing strength.
pub fn run_experiment1(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate(ExperimentKind::Exp1)?;
    let tasks: Vec<Task<()>> = (0..cfg.reps)
        .map(|rep| Task {
            rep,
            cell: None,
            seed: derive_seed(cfg.seed, rep as u64),
        })
        .collect();
    let (rows, failures) = run_tasks(&tasks, cfg.workers, |t| repetition(cfg, t.rep, t.seed))?;
    Ok(RunOutput {
        meta: RunMeta {
            experiment: ExperimentKind::Exp1.to_string(),
            seed: cfg.seed,
            reps: cfg.reps,
            rows: rows.len(),
            excluded: failures.len(),
            failures,
        },
        rows,
    })
}

/// Variance of `y`: the MSE of the best constant on the evaluation sample.
pub(crate) fn constant_mse(y: &DVector<f64>) -> f64 {
    let mean = y.mean();
    mse(&DVector::from_element(y.len(), mean), y)
}

fn repetition(cfg: &ExperimentConfig, rep: usize, seed: u64) -> Result<Vec<ResultRow>> {
    let spec = SimdgSpec::<f64>::sample(&cfg.simdg_params(), &mut stream(seed, 0))?;
    let train = spec.generate(1.0, cfg.n_train, &mut stream(seed, 1))?;

    let mut bcf_cfg = cfg.bcf.clone();
    bcf_cfg.rankreg.seed = derive_seed(seed, 2);
    bcf_cfg.learner_f.seed = derive_seed(seed, 3);
    bcf_cfg.learner_gamma.seed = derive_seed(seed, 4);
    if let Some(d) = bcf_cfg.learner_delta.as_mut() {
        d.seed = derive_seed(seed, 5);
    }
    let mut ls_cfg = cfg.ls_learner().clone();
    ls_cfg.seed = derive_seed(seed, 6);

    let bcf = fit_bcf(&train, &bcf_cfg)?;
    let ls = fit_ls(&train, &ls_cfg)?;
    let f0 = structural_oracle(&spec);
    let imp = ImpOracle::new(&spec)?;

    let mut rows = vec![ResultRow::new(rep, "bcf", "n", cfg.n_train as f64, "q_hat", bcf.q_hat() as f64)?];
    for (i, &k) in cfg.k_values.iter().enumerate() {
        let test = spec.generate(k, cfg.n_test, &mut stream(seed, 100 + i as u64))?;
        let (x, y) = (test.x(), test.y());
        let scores = [
            ("bcf", mse(&bcf.predict(x)?, y)),
            ("ls", mse(&ls.predict(x)?, y)),
            ("structural", mse(&f0.predict(x)?, y)),
            ("imp", mse(&imp.predict(x)?, y)),
            ("constant", constant_mse(y)),
        ];
        for (method, value) in scores {
            rows.push(ResultRow::new(rep, method, "k", k, "mse", value)?);
        }
        rows.push(ResultRow::new(rep, "imp", "k", k, "risk", imp.risk())?);
    }
    Ok(rows)
}
