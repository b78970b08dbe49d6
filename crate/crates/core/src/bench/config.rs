use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::baselines::OracleConfig;
use crate::solver::SolverConfig;

/// Output locations; anything left unset is not written.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    /// Line chart of mean min-SNR against transmit power.
    pub svg: Option<PathBuf>,
    /// Plot SVG values in dB instead of linear SNR.
    pub svg_db: bool,
}

fn default_variance() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
    /// Transmit powers in dB; linear `P_t = 10^(dB/10)` with unit noise.
    pub pt_grid_db: Vec<f64>,
    pub n_realizations: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub outputs: OutputPaths,
    #[serde(default = "default_variance")]
    pub channel_variance: f64,
    /// Also evaluate the matched-filter and eigenvector baselines.
    #[serde(default = "default_true")]
    pub baselines: bool,
    /// Worker threads; `None` uses one per core.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Record wall-clock times. Off by default because timings make outputs
    /// non-reproducible.
    #[serde(default)]
    pub timing: bool,
}

impl SweepConfig {
    /// A config with default solver settings and no outputs.
    pub fn new(m: usize, k: usize, pt_grid_db: Vec<f64>, n_realizations: usize, master_seed: u64) -> Self {
        Self {
            m,
            k,
            pt_grid_db,
            n_realizations,
            master_seed,
            solver: SolverConfig::default(),
            oracle: None,
            outputs: OutputPaths::default(),
            channel_variance: 1.0,
            baselines: true,
            workers: None,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: String| Err(BenchError::InvalidConfig(msg));
        if self.m == 0 || self.k == 0 {
            return bad(format!("M and K must be at least 1 (got M={}, K={})", self.m, self.k));
        }
        if self.n_realizations == 0 {
            return bad("n_realizations must be at least 1".into());
        }
        if self.pt_grid_db.is_empty() {
            return bad("pt_grid_db must not be empty".into());
        }
        if let Some(p) = self.pt_grid_db.iter().find(|p| !p.is_finite()) {
            return bad(format!("pt_grid_db entries must be finite, got {p}"));
        }
        if !(self.channel_variance > 0.0 && self.channel_variance.is_finite()) {
            return bad(format!("channel_variance must be positive, got {}", self.channel_variance));
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        if let Some(o) = &self.oracle {
            if o.samples == 0 {
                return bad("oracle.samples must be at least 1".into());
            }
        }
        self.solver.validate().map_err(|e| BenchError::InvalidConfig(e.to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| BenchError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| BenchError::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Stream labels for [`derive_seed`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedTag {
    Channel = 1,
    Solver = 2,
    Oracle = 3,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Folds `parts` into `master` through splitmix64, one word at a time.
pub fn derive_seed(master: u64, tag: SeedTag, parts: &[u64]) -> u64 {
    let mut s = splitmix64(master ^ splitmix64(tag as u64));
    for &p in parts {
        s = splitmix64(s ^ p);
    }
    s
}
