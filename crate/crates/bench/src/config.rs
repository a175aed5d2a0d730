//! Experiment configuration.
//!
//! A run is described by one JSON document; every field has a default, so
//! `{}` is the desk-scale experiment. Example:
//!
//! ```json
//! {
//!   "problems": [
//!     { "name": "gravity", "n": 200, "regularizer": "D1" },
//!     { "name": "blur", "side": 32, "regularizer": "identity", "label": "blur32" }
//!   ],
//!   "alphas": [1e-2, 1e-4, 1e-6],
//!   "seeds": { "count": 20, "base": 1 },
//!   "methods": ["SS_P3", "DF", "GCV", "SURE", "OPT"],
//!   "picard": { "eps": 0.05, "h": null },
//!   "grid": { "lo": 1e-15, "hi": 1e5, "points": 1000 },
//!   "output": { "dir": "results", "svg": true, "gsvd_cache": null },
//!   "workers": null
//! }
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tikhonov_picard::minimize::GridSpec;
use tikhonov_picard::operators::{ProblemInstance, ProblemKind, Regularizer};
use tikhonov_picard::picard::DEFAULT_EPS;
use tikhonov_picard::selectors::Method;

use crate::error::{BenchError, Result};

/// One test problem of the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: ProblemKind,
    /// `n` for one-dimensional problems, the image side for `blur`.
    #[serde(alias = "n", alias = "side")]
    pub size: usize,
    /// Defaults to the problem's customary regularizer.
    #[serde(default, alias = "L")]
    pub regularizer: Option<Regularizer>,
    /// Name written to the `problem` column; defaults to `name`.
    #[serde(default)]
    pub label: Option<String>,
}

impl ProblemSpec {
    pub fn new(name: ProblemKind, size: usize, regularizer: Regularizer) -> Self {
        ProblemSpec { name, size, regularizer: Some(regularizer), label: None }
    }

    pub fn regularizer(&self) -> Regularizer {
        self.regularizer.unwrap_or_else(|| self.name.default_regularizer())
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.name.to_string())
    }

    pub fn instance(&self) -> Result<ProblemInstance> {
        Ok(self.name.generate(self.size)?.with_regularizer(self.regularizer())?)
    }

    /// File stem used for cached decompositions.
    pub fn cache_key(&self) -> String {
        format!("{}_{}_{}", self.name, self.size, self.regularizer())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeedSpec {
    pub count: usize,
    pub base: u64,
}

impl Default for SeedSpec {
    fn default() -> Self {
        SeedSpec { count: 20, base: 1 }
    }
}

impl SeedSpec {
    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.count as u64).map(move |i| self.base.wrapping_add(i))
    }
}

/// Settings of the V-sequence Picard rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PicardSpec {
    pub eps: f64,
    /// Fixed step; `null` means `⌈m/50⌉`.
    pub h: Option<usize>,
}

impl Default for PicardSpec {
    fn default() -> Self {
        PicardSpec { eps: DEFAULT_EPS, h: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub svg: bool,
    /// Directory for binary GSVD caches, reused across runs.
    pub gsvd_cache: Option<PathBuf>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: PathBuf::from("results"), svg: true, gsvd_cache: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub problems: Vec<ProblemSpec>,
    pub alphas: Vec<f64>,
    pub seeds: SeedSpec,
    pub methods: Vec<Method>,
    pub picard: PicardSpec,
    pub grid: GridSpec,
    pub output: OutputSpec,
    /// Worker threads; `null` uses the available parallelism.
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            problems: vec![
                ProblemSpec::new(ProblemKind::Gravity, 200, Regularizer::D1),
                ProblemSpec::new(ProblemKind::Phillips, 200, Regularizer::D2),
                ProblemSpec::new(ProblemKind::Heat, 200, Regularizer::Identity),
            ],
            alphas: vec![1e-2, 1e-4, 1e-6],
            seeds: SeedSpec::default(),
            methods: Method::ALL.to_vec(),
            picard: PicardSpec::default(),
            grid: GridSpec::default(),
            output: OutputSpec::default(),
            workers: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.problems.is_empty() {
            return Err(BenchError::Config("no problems configured".into()));
        }
        let mut labels = HashSet::new();
        for p in &self.problems {
            if !labels.insert(p.label()) {
                return Err(BenchError::Config(format!("duplicate problem label `{}`", p.label())));
            }
            if p.size == 0 {
                return Err(BenchError::Config(format!("problem `{}` has size 0", p.label())));
            }
        }
        if self.alphas.is_empty() {
            return Err(BenchError::Config("no noise levels configured".into()));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(BenchError::Config(format!("noise level must be positive, got {a}")));
        }
        if self.seeds.count == 0 {
            return Err(BenchError::Config("seed count must be positive".into()));
        }
        if self.methods.is_empty() {
            return Err(BenchError::Config("no methods configured".into()));
        }
        if !(self.picard.eps > 0.0) || self.picard.h == Some(0) {
            return Err(BenchError::Config("Picard eps and h must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(BenchError::Config("worker count must be positive".into()));
        }
        self.grid.validate()?;
        Ok(())
    }

    pub fn worker_count(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
    }
}
