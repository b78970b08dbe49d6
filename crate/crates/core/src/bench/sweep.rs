use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{db_to_linear, derive_seed, SeedTag, SweepConfig};
use super::BenchError;
use crate::baselines::{mrt_weakest, random_sampling_oracle, sum_eig, OracleConfig};
use crate::channel::{generate_iid, ChannelSet};
use crate::solver::{snrs, solve, KktResiduals, Precoder, RankCase, SolverConfig, SolverError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FpSolver,
    MrtWeakest,
    SumEig,
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::FpSolver => "fp_solver",
            Method::MrtWeakest => "mrt_weakest",
            Method::SumEig => "sum_eig",
            Method::Oracle => "oracle",
        }
    }
}

/// One method on one (P_t, realization) instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub method: Method,
    pub pt_db: f64,
    pub pt_index: usize,
    pub realization: usize,
    pub channel_seed: u64,
    pub min_snr: Option<f64>,
    pub per_user_snr: Vec<f64>,
    pub balanced: Option<bool>,
    pub rank_case: RankCase,
    pub iters: Option<usize>,
    pub certified: Option<bool>,
    pub kkt: Option<KktResiduals>,
    pub wall_ms: Option<f64>,
    pub error: Option<String>,
}

impl SweepRecord {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: Method,
    pub pt_db: f64,
    /// `None` when every record failed.
    pub mean_min_snr: Option<f64>,
    pub n_ok: usize,
    pub n_failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub methods: Vec<Method>,
    pub aggregates: Vec<Aggregate>,
    /// Ordered by P_t index, then realization, then method.
    pub records: Vec<SweepRecord>,
}

impl SweepResult {
    pub fn n_failed(&self) -> usize {
        self.records.iter().filter(|r| !r.ok()).count()
    }
}

fn methods_for(cfg: &SweepConfig) -> Vec<Method> {
    let mut m = vec![Method::FpSolver];
    if cfg.baselines {
        m.push(Method::MrtWeakest);
        m.push(Method::SumEig);
    }
    if cfg.oracle.is_some() {
        m.push(Method::Oracle);
    }
    m
}

fn relative_spread(v: &[f64]) -> f64 {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo > 0.0 {
        (hi - lo) / lo
    } else if hi == lo {
        0.0
    } else {
        f64::INFINITY
    }
}

struct Instance<'a> {
    cfg: &'a SweepConfig,
    channels: &'a ChannelSet,
    pt_index: usize,
    realization: usize,
    channel_seed: u64,
}

impl Instance<'_> {
    fn pt(&self) -> f64 {
        db_to_linear(self.cfg.pt_grid_db[self.pt_index])
    }

    fn blank(&self, method: Method) -> SweepRecord {
        bare_record(self.cfg, method, self.pt_index, self.realization, self.channel_seed)
    }

    fn precoder_record(&self, method: Method, w: Result<Precoder, SolverError>, wall_ms: f64) -> SweepRecord {
        let mut rec = self.blank(method);
        match w.and_then(|w| snrs(&w, self.channels)) {
            Ok(s) => self.fill(&mut rec, s, wall_ms),
            Err(e) => rec.error = Some(e.to_string()),
        }
        rec
    }

    fn fill(&self, rec: &mut SweepRecord, per_user: Vec<f64>, wall_ms: f64) {
        rec.min_snr = Some(per_user.iter().cloned().fold(f64::INFINITY, f64::min));
        rec.balanced = Some(relative_spread(&per_user) <= self.cfg.solver.balance_tol);
        rec.per_user_snr = per_user;
        if self.cfg.timing {
            rec.wall_ms = Some(wall_ms);
        }
    }

    fn seed(&self, tag: SeedTag) -> u64 {
        derive_seed(self.cfg.master_seed, tag, &[self.pt_index as u64, self.realization as u64])
    }

    fn run(&self, method: Method) -> SweepRecord {
        let t0 = Instant::now();
        let ms = || t0.elapsed().as_secs_f64() * 1e3;
        match method {
            Method::FpSolver => {
                let solver = SolverConfig {
                    start_seed: self.seed(SeedTag::Solver),
                    ..self.cfg.solver.clone()
                };
                let mut rec = self.blank(method);
                match solve(self.channels, self.pt(), &solver) {
                    Ok(sol) => {
                        let r = sol.report;
                        self.fill(&mut rec, r.per_user_snr, ms());
                        rec.balanced = Some(r.balanced);
                        rec.iters = Some(r.iters);
                        rec.certified = Some(r.certified);
                        rec.kkt = Some(r.kkt);
                    }
                    Err(e) => rec.error = Some(e.to_string()),
                }
                rec
            }
            Method::MrtWeakest => self.precoder_record(method, mrt_weakest(self.channels, self.pt()), ms()),
            Method::SumEig => self.precoder_record(method, sum_eig(self.channels, self.pt()), ms()),
            Method::Oracle => {
                let oracle = OracleConfig {
                    seed: self.seed(SeedTag::Oracle),
                    ..self.cfg.oracle.clone().unwrap_or_default()
                };
                let w = random_sampling_oracle(self.channels, self.pt(), &oracle).map(|r| r.precoder);
                self.precoder_record(method, w, ms())
            }
        }
    }
}

fn channel_seed(cfg: &SweepConfig, realization: usize) -> u64 {
    derive_seed(cfg.master_seed, SeedTag::Channel, &[realization as u64])
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, BenchError> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| BenchError::Pool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every method on every (P_t, realization) pair.
///
/// Per-instance failures are stored in the record's `error` field; only an
/// invalid configuration aborts the sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult, BenchError> {
    cfg.validate()?;
    let methods = methods_for(cfg);
    let n_pt = cfg.pt_grid_db.len();
    let n_real = cfg.n_realizations;

    let units: Vec<Vec<SweepRecord>> = in_pool(cfg.workers, || {
        (0..n_pt * n_real)
            .into_par_iter()
            .map(|u| {
                let (pt_index, realization) = (u / n_real, u % n_real);
                let seed = channel_seed(cfg, realization);
                let channels = generate_iid(seed, cfg.m, cfg.k, cfg.channel_variance);
                let Ok(channels) = channels else {
                    let msg = channels.unwrap_err().to_string();
                    return methods
                        .iter()
                        .map(|&m| {
                            let mut r = bare_record(cfg, m, pt_index, realization, seed);
                            r.error = Some(msg.clone());
                            r
                        })
                        .collect();
                };
                let inst = Instance {
                    cfg,
                    channels: &channels,
                    pt_index,
                    realization,
                    channel_seed: seed,
                };
                methods.iter().map(|&m| inst.run(m)).collect()
            })
            .collect()
    })?;
    let records: Vec<SweepRecord> = units.into_iter().flatten().collect();
    let aggregates = aggregate(cfg, &methods, &records);
    Ok(SweepResult {
        config: cfg.clone(),
        methods,
        aggregates,
        records,
    })
}

fn bare_record(cfg: &SweepConfig, method: Method, pt_index: usize, realization: usize, seed: u64) -> SweepRecord {
    SweepRecord {
        method,
        pt_db: cfg.pt_grid_db[pt_index],
        pt_index,
        realization,
        channel_seed: seed,
        min_snr: None,
        per_user_snr: Vec::new(),
        balanced: None,
        rank_case: RankCase::classify(cfg.m, cfg.k),
        iters: None,
        certified: None,
        kkt: None,
        wall_ms: None,
        error: None,
    }
}

fn aggregate(cfg: &SweepConfig, methods: &[Method], records: &[SweepRecord]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for &method in methods {
        for (pt_index, &pt_db) in cfg.pt_grid_db.iter().enumerate() {
            let (mut sum, mut n_ok, mut n_failed) = (0.0, 0, 0);
            for r in records.iter().filter(|r| r.method == method && r.pt_index == pt_index) {
                match r.min_snr {
                    Some(v) if r.ok() => {
                        sum += v;
                        n_ok += 1;
                    }
                    _ => n_failed += 1,
                }
            }
            out.push(Aggregate {
                method,
                pt_db,
                mean_min_snr: (n_ok > 0).then(|| sum / n_ok as f64),
                n_ok,
                n_failed,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub method: Method,
    pub per_user_snr: Vec<f64>,
    pub min_snr: Option<f64>,
    pub spread: Option<f64>,
    pub error: Option<String>,
}

/// Per-user SNRs of every method on a single instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub pt_db: f64,
    pub channel_seed: u64,
    pub rows: Vec<SnapshotRow>,
}

/// Per-user SNR table for a config with exactly one grid point and one
/// realization.
pub fn snapshot_users(cfg: &SweepConfig) -> Result<Snapshot, BenchError> {
    if cfg.pt_grid_db.len() != 1 || cfg.n_realizations != 1 {
        return Err(BenchError::InvalidConfig(format!(
            "snapshot needs one P_t and one realization (got {} and {})",
            cfg.pt_grid_db.len(),
            cfg.n_realizations
        )));
    }
    let result = run_sweep(cfg)?;
    let rows = result
        .records
        .into_iter()
        .map(|r| SnapshotRow {
            method: r.method,
            spread: r.error.is_none().then(|| relative_spread(&r.per_user_snr)),
            min_snr: r.min_snr,
            per_user_snr: r.per_user_snr,
            error: r.error,
        })
        .collect();
    Ok(Snapshot {
        m: cfg.m,
        k: cfg.k,
        pt_db: cfg.pt_grid_db[0],
        channel_seed: channel_seed(cfg, 0),
        rows,
    })
}
