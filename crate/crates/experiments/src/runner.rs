use log::warn;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::results::{Failure, ResultRow};

/// One self-contained unit of work: a repetition, possibly of one grid cell.
#[derive(Clone, Debug)]
pub struct Task<C> {
    pub rep: usize,
    pub cell: Option<(String, C)>,
    pub seed: u64,
}

/// Runs `f` on every task with at most `workers` threads.
///
/// Failed tasks are logged and reported separately; output order follows
/// task order, independent of scheduling.
pub fn run_tasks<C, F>(tasks: &[Task<C>], workers: Option<usize>, f: F) -> Result<(Vec<ResultRow>, Vec<Failure>)>
where
    C: Sync,
    F: Fn(&Task<C>) -> Result<Vec<ResultRow>> + Sync + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::Pool(e.to_string()))?;
    let outcomes: Vec<Result<Vec<ResultRow>>> = pool.install(|| tasks.par_iter().map(&f).collect());

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (task, outcome) in tasks.iter().zip(outcomes) {
        match outcome {
            Ok(r) => rows.extend(r),
            Err(e) => {
                let cell = task.cell.as_ref().map(|(name, _)| name.clone());
                warn!("repetition {} {} failed: {e}", task.rep, cell.as_deref().unwrap_or(""));
                failures.push(Failure {
                    rep: task.rep,
                    cell,
                    error: e.to_string(),
                });
            }
        }
    }
    Ok((rows, failures))
}
