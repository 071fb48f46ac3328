use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bcf_core::bcf::BcfConfig;
use bcf_core::learners::LearnerConfig;
use bcf_core::simdg::SimdgParams;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Exp1,
    Exp2,
    Tabular,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::Exp1 => "exp1",
            ExperimentKind::Exp2 => "exp2",
            ExperimentKind::Tabular => "tabular",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

/// Grid of the first-stage estimation study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Exp2Config {
    pub taus: Vec<f64>,
    pub ns: Vec<usize>,
    /// `(p, r)` pairs.
    pub dims: Vec<(usize, usize)>,
    /// Drop the first-stage noise, `X = M0 Z`.
    pub noiseless: bool,
}

impl Default for Exp2Config {
    fn default() -> Self {
        Self {
            taus: vec![0.5, 1.0, 2.0],
            ns: vec![100, 500, 1000, 2000],
            dims: vec![(10, 10)],
            noiseless: false,
        }
    }
}

/// A CSV dataset split into a training and a test region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TabularConfig {
    pub path: PathBuf,
    pub target: String,
    pub exogenous: Vec<String>,
    /// Defaults to every column that is neither target nor exogenous.
    pub predictors: Option<Vec<String>>,
    /// Rows satisfying this predicate form the training region, e.g.
    /// `latitude >= 35 and longitude < -120`.
    pub train_region: String,
    /// Share of the training region used for fitting; the rest is held out.
    pub fraction: f64,
}

impl Default for TabularConfig {
    fn default() -> Self {
        Self {
            path: PathBuf::new(),
            target: "y".into(),
            exogenous: Vec::new(),
            predictors: None,
            train_region: String::new(),
            fraction: 0.8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub p: usize,
    pub r: usize,
    pub q: usize,
    pub p_eff: usize,
    pub depth: usize,
    pub theta_sd: f64,
    pub split_range: (f64, f64),
    /// Confounding strength.
    pub c: f64,
    /// Standard deviation of the response noise not explained by `V`.
    pub sd: f64,
    /// Eigengap of `M0` in the shift experiment.
    pub tau: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub k_values: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub bcf: BcfConfig,
    /// Learner of the plain regression baseline; defaults to `bcf.learner_f`.
    pub ls_learner: Option<LearnerConfig>,
    pub exp2: Exp2Config,
    pub tabular: Option<TabularConfig>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    /// Worker threads; defaults to the number of CPUs.
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let model = SimdgParams::default();
        Self {
            experiment: None,
            p: model.p,
            r: model.r,
            q: model.q,
            p_eff: model.p_eff,
            depth: model.depth,
            theta_sd: model.theta_sd,
            split_range: model.split_range,
            c: model.confounding,
            sd: model.noise_sd,
            tau: model.tau,
            n_train: 1000,
            n_test: 1000,
            k_values: (1..=10).map(f64::from).collect(),
            reps: 10,
            seed: 0,
            bcf: BcfConfig::default(),
            ls_learner: None,
            exp2: Exp2Config::default(),
            tabular: None,
            out: None,
            format: OutputFormat::Csv,
            workers: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn simdg_params(&self) -> SimdgParams {
        SimdgParams {
            p: self.p,
            r: self.r,
            q: self.q,
            p_eff: self.p_eff,
            depth: self.depth,
            theta_sd: self.theta_sd,
            split_range: self.split_range,
            confounding: self.c,
            noise_sd: self.sd,
            tau: self.tau,
        }
    }

    pub fn ls_learner(&self) -> &LearnerConfig {
        self.ls_learner.as_ref().unwrap_or(&self.bcf.learner_f)
    }

    pub fn validate(&self, kind: ExperimentKind) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if let Some(declared) = self.experiment {
            if declared != kind {
                return bad(format!("config is for {declared}, not {kind}"));
            }
        }
        if self.reps == 0 {
            return bad("reps must be positive".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be positive".into());
        }
        if self.bcf.rounds == 0 {
            return bad("bcf.rounds must be positive".into());
        }
        self.bcf.learner_f.validate()?;
        self.bcf.learner_gamma.validate()?;
        self.bcf.delta_learner().validate()?;
        self.ls_learner().validate()?;
        match kind {
            ExperimentKind::Exp1 => {
                self.simdg_params().validate()?;
                if self.n_train == 0 || self.n_test == 0 {
                    return bad("n_train and n_test must be positive".into());
                }
                if self.k_values.is_empty() || self.k_values.iter().any(|k| !(*k >= 1.0) || !k.is_finite()) {
                    return bad("k_values must be non-empty and every k >= 1".into());
                }
            }
            ExperimentKind::Exp2 => {
                let e = &self.exp2;
                if e.taus.is_empty() || e.ns.is_empty() || e.dims.is_empty() {
                    return bad("exp2 grids must be non-empty".into());
                }
                if e.taus.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
                    return bad("exp2 taus must be non-negative".into());
                }
                if e.ns.contains(&0) {
                    return bad("exp2 sample sizes must be positive".into());
                }
                for &(p, r) in &e.dims {
                    if p == 0 || r == 0 || self.q > p.min(r) {
                        return bad(format!("q = {} does not fit (p, r) = ({p}, {r})", self.q));
                    }
                }
            }
            ExperimentKind::Tabular => {
                let Some(t) = &self.tabular else {
                    return bad("tabular experiments need a `tabular` section".into());
                };
                if t.exogenous.is_empty() {
                    return bad("tabular.exogenous must list at least one column".into());
                }
                if !(t.fraction > 0.0 && t.fraction <= 1.0) {
                    return bad("tabular.fraction must lie in (0, 1]".into());
                }
                if t.train_region.trim().is_empty() {
                    return bad("tabular.train_region is empty".into());
                }
            }
        }
        Ok(())
    }
}
