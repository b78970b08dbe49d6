use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::active_set::w_step_from;
use super::dual::{build_dual_system, DualSolution};
use super::fp::{snrs, update_beta, AuxVars, Precoder};
use super::kkt::{kkt_residuals, KktResiduals};
use super::rank::{rank_case, RankDiagnostics};
use super::{check_power, ActiveSetPolicy, InitStrategy, SolverConfig, SolverError};
use crate::baselines::{mrt_weakest, sum_eig, sum_of_channels};
use crate::channel::{detect_collinear, ChannelSet};
use crate::linalg::{phase_distance, CVector};

/// Slack on the ascent guard for uncertified w-updates.
const ASCENT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// Channel parallel to the representative's; solved through it.
    Collinear { representative: usize },
    /// Zero dual weight at the solution; clears the level without being tight.
    Inactive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedUser {
    pub user: usize,
    pub reason: DropReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub per_user_snr: Vec<f64>,
    pub min_snr: f64,
    /// Min-SNR at the start point and after every accepted outer iteration.
    pub trajectory: Vec<f64>,
    /// KKT residuals of the last w-update, at the auxiliary variables it used.
    pub kkt: KktResiduals,
    /// Stationarity after refreshing the auxiliary variables at the final precoder.
    pub refreshed_stationarity: f64,
    /// Phase-aligned distance between the last two iterates, relative to `√P_t`.
    pub fixed_point_gap: f64,
    pub rank: RankDiagnostics,
    /// `(max − min)/min` over all users.
    pub spread: f64,
    /// `(max − min)/min` over users with nonzero dual weight.
    pub active_spread: f64,
    pub balanced: bool,
    pub dropped_users: Vec<DroppedUser>,
    pub iters: usize,
    pub converged: bool,
    /// Last w-update was certified, KKT residuals are within tolerance and
    /// the power constraint is tight.
    pub certified: bool,
    pub dual_feasible: bool,
    /// The greedy active-set reduction was used at some iteration.
    pub heuristic: bool,
    pub starts: usize,
    pub best_start: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub precoder: Precoder,
    /// Dual variables of the last w-update, indexed over all users.
    pub dual: DualSolution,
    /// Auxiliary variables of the last w-update, indexed over all users.
    pub beta: AuxVars,
    pub report: SolveReport,
}

struct Run {
    w: Precoder,
    w_prev: Precoder,
    beta: AuxVars,
    dual: DualSolution,
    trajectory: Vec<f64>,
    iters: usize,
    converged: bool,
    certified: bool,
    heuristic: bool,
}

impl Run {
    fn final_min(&self) -> f64 {
        *self.trajectory.last().expect("trajectory holds the start point")
    }
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn spread_of(v: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if !(lo > 0.0) {
        return if hi == lo { 0.0 } else { f64::INFINITY };
    }
    (hi - lo) / lo
}

fn start_from(strategy: &InitStrategy, channels: &ChannelSet, pt: f64) -> Result<Precoder, SolverError> {
    match strategy {
        InitStrategy::SumOfChannels => sum_of_channels(channels, pt),
        InitStrategy::PrincipalEigenvector => sum_eig(channels, pt),
        InitStrategy::MatchedWeakest => mrt_weakest(channels, pt),
        InitStrategy::UserSupplied(pairs) => {
            if pairs.len() != channels.antennas() {
                return Err(SolverError::DimensionMismatch {
                    what: "initial precoder length vs antenna count",
                    expected: channels.antennas(),
                    found: pairs.len(),
                });
            }
            let w = Precoder::from_pairs(pairs, pt)?;
            Precoder::normalized(w.vector().clone(), pt)
        }
    }
}

fn random_start(channels: &ChannelSet, pt: f64, seed: u64, stream: u64) -> Result<Precoder, SolverError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let w = CVector::from_fn(channels.antennas(), |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        num_complex::Complex64::new(re, im)
    });
    Precoder::normalized(w, pt)
}

/// Start points in priority order; later entries only win on strictly
/// larger final min-SNR.
fn starts(channels: &ChannelSet, pt: f64, cfg: &SolverConfig) -> Result<Vec<Precoder>, SolverError> {
    let mut out = Vec::new();
    let primary = start_from(&cfg.init_strategy, channels, pt);
    match primary {
        Ok(w) => out.push(w),
        Err(SolverError::ZeroPrecoder) if cfg.init_strategy == InitStrategy::SumOfChannels => {
            out.push(sum_eig(channels, pt)?)
        }
        Err(e) => return Err(e),
    }
    if cfg.multi_start {
        for s in [
            InitStrategy::SumOfChannels,
            InitStrategy::PrincipalEigenvector,
            InitStrategy::MatchedWeakest,
        ] {
            if s != cfg.init_strategy {
                if let Ok(w) = start_from(&s, channels, pt) {
                    out.push(w);
                }
            }
        }
    }
    for i in 0..cfg.random_starts {
        out.push(random_start(channels, pt, cfg.start_seed, i as u64)?);
    }
    Ok(out)
}

fn run(channels: &ChannelSet, pt: f64, w0: Precoder, cfg: &SolverConfig) -> Result<Run, SolverError> {
    let mut w = w0;
    let mut cur = min_of(&snrs(&w, channels)?);
    let mut trajectory = vec![cur];
    let mut last: Option<(Precoder, AuxVars, DualSolution, bool)> = None;
    let mut heuristic = false;
    let mut converged = false;
    let mut iters = 0;

    for _ in 0..cfg.max_outer_iters {
        let current = snrs(&w, channels)?;
        let beta = update_beta(&w, channels)?;
        let warm = last.as_ref().map(|l| l.2.active.as_slice());
        let step = match w_step_from(&beta, channels, pt, &current, cfg, warm) {
            Ok(s) => s,
            Err(e) if last.is_none() => return Err(e),
            Err(_) => break,
        };
        let next = min_of(&snrs(&step.precoder, channels)?);
        let guarded = cfg.policy == ActiveSetPolicy::DualFeasible && !step.certified;
        if guarded && last.is_some() && next < cur - ASCENT_SLACK * cur.abs().max(1.0) {
            break;
        }
        heuristic |= step.heuristic;
        iters += 1;
        let prev = std::mem::replace(&mut w, step.precoder);
        last = Some((prev, beta, step.dual, step.certified));
        trajectory.push(next);
        let done = (next - cur).abs() <= cfg.outer_tol * cur.abs().max(f64::MIN_POSITIVE);
        cur = next;
        if done {
            converged = true;
            break;
        }
    }
    let (w_prev, beta, dual, certified) = last.ok_or(SolverError::ActiveSetExhausted)?;
    Ok(Run {
        w,
        w_prev,
        beta,
        dual,
        trajectory,
        iters,
        converged,
        certified,
        heuristic,
    })
}

/// Solves `max_w min_k |h_k^H w|²` subject to `‖w‖² ≤ P_t`.
///
/// Collinear users are folded into a representative first; every start from
/// [`SolverConfig`] is iterated to convergence in parallel and the best final
/// min-SNR is kept (ties go to the earlier start).
pub fn solve(channels: &ChannelSet, pt: f64, cfg: &SolverConfig) -> Result<Solution, SolverError> {
    cfg.validate()?;
    check_power(pt)?;
    let t0 = Instant::now();
    let k = channels.users();

    let groups = detect_collinear(channels, cfg.collinear_tol)?;
    let kept = groups.kept_users();
    let reduced = channels.select(&kept);

    let points = starts(&reduced, pt, cfg)?;
    let n_starts = points.len();
    let runs: Vec<Result<Run, SolverError>> = points.into_par_iter().map(|w0| run(&reduced, pt, w0, cfg)).collect();

    let mut best: Option<(usize, Run)> = None;
    let mut first_err = None;
    for (i, r) in runs.into_iter().enumerate() {
        match r {
            Ok(r) => {
                let better = match &best {
                    Some((_, b)) => b.final_min() < r.final_min(),
                    None => true,
                };
                if better {
                    best = Some((i, r));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let (best_start, run) = match best {
        Some(b) => b,
        None => return Err(first_err.unwrap_or(SolverError::ActiveSetExhausted)),
    };

    let per_user_snr = snrs(&run.w, channels)?;
    let min_snr = min_of(&per_user_snr);
    let dual = run.dual.embed(&kept, k);
    let beta = update_beta(&run.w_prev, channels)?;
    let kkt = kkt_residuals(&run.w, &dual, &beta, channels)?;
    let refreshed = update_beta(&run.w, channels)?;
    let refreshed_stationarity = kkt_residuals(&run.w, &dual, &refreshed, channels)?.stationarity;
    let sys = build_dual_system(&run.beta, &reduced, pt)?;
    let rank = rank_case(&reduced, &sys, cfg.cond_threshold);

    let mut dropped_users: Vec<DroppedUser> = groups
        .dropped()
        .into_iter()
        .map(|(user, representative)| DroppedUser {
            user,
            reason: DropReason::Collinear { representative },
        })
        .collect();
    for &u in &kept {
        if dual.lambda[u] == 0.0 {
            dropped_users.push(DroppedUser {
                user: u,
                reason: DropReason::Inactive,
            });
        }
    }
    dropped_users.sort_by_key(|d| d.user);

    let spread = spread_of(per_user_snr.iter().cloned());
    let active_spread = spread_of(dual.active.iter().map(|&u| per_user_snr[u]));
    let dual_feasible = kkt.dual_infeasibility <= 1e-10;
    let certified = run.certified && kkt.within(cfg.kkt_tol) && kkt.power_gap <= 1e-10;
    let fixed_point_gap = phase_distance(run.w.vector(), run.w_prev.vector()) / pt.sqrt();

    let report = SolveReport {
        per_user_snr,
        min_snr,
        trajectory: run.trajectory,
        kkt,
        refreshed_stationarity,
        fixed_point_gap,
        rank,
        spread,
        active_spread,
        balanced: spread <= cfg.balance_tol,
        dropped_users,
        iters: run.iters,
        converged: run.converged,
        certified,
        dual_feasible,
        heuristic: run.heuristic,
        starts: n_starts,
        best_start,
        wall_ms: t0.elapsed().as_secs_f64() * 1e3,
    };
    Ok(Solution {
        precoder: run.w,
        dual,
        beta,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::generate_iid;
    use num_complex::Complex64;

    #[test]
    fn single_user_is_matched_filter() {
        let h = ChannelSet::from_columns(&[vec![Complex64::new(1.0, 1.0), Complex64::new(0.0, 2.0), Complex64::new(-1.0, 0.5)]]).unwrap();
        let sol = solve(&h, 3.0, &SolverConfig::default()).unwrap();
        let expect = 3.0 * h.norm(0).powi(2);
        assert!((sol.report.min_snr - expect).abs() <= 1e-10 * expect);
        assert_eq!(sol.dual.lambda, vec![1.0]);
    }

    #[test]
    fn orthonormal_users_split_power() {
        let h = ChannelSet::from_real_columns(&[
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        let sol = solve(&h, 6.0, &SolverConfig::default()).unwrap();
        for (k, s) in sol.report.per_user_snr.iter().enumerate() {
            assert!((s - 2.0).abs() < 1e-9, "{s}");
            assert!((sol.dual.lambda[k] - 1.0 / 3.0).abs() < 1e-9);
        }
        assert!(sol.report.balanced);
        assert!(sol.report.certified);
    }

    #[test]
    fn trajectory_is_monotone_and_power_tight() {
        for seed in 0..10 {
            let h = generate_iid(seed, 6, 4, 1.0).unwrap();
            let sol = solve(&h, 10.0, &SolverConfig::default()).unwrap();
            for pair in sol.report.trajectory.windows(2) {
                assert!(pair[1] >= pair[0] - 1e-9 * pair[0].max(1.0));
            }
            assert!((sol.precoder.power() - 10.0).abs() <= 1e-10 * 10.0);
            assert!(sol.report.kkt.within(1e-6), "{:?}", sol.report.kkt);
        }
    }

    #[test]
    fn collinear_user_is_folded() {
        let h = ChannelSet::from_real_columns(&[vec![1.0, 0.0, 0.5], vec![0.0, 1.0, 0.0], vec![3.0, 0.0, 1.5]]).unwrap();
        let sol = solve(&h, 1.0, &SolverConfig::default()).unwrap();
        assert!(sol
            .report
            .dropped_users
            .contains(&DroppedUser { user: 2, reason: DropReason::Collinear { representative: 0 } }));
        assert_eq!(sol.dual.lambda[2], 0.0);
    }

    #[test]
    fn invalid_power_rejected() {
        let h = generate_iid(1, 2, 2, 1.0).unwrap();
        assert!(matches!(solve(&h, 0.0, &SolverConfig::default()), Err(SolverError::InvalidPower(_))));
        assert!(matches!(solve(&h, f64::NAN, &SolverConfig::default()), Err(SolverError::InvalidPower(_))));
    }

    #[test]
    fn user_supplied_start_length_checked() {
        let h = generate_iid(1, 3, 2, 1.0).unwrap();
        let cfg = SolverConfig {
            init_strategy: InitStrategy::UserSupplied(vec![[1.0, 0.0]]),
            ..SolverConfig::default()
        };
        assert!(matches!(solve(&h, 1.0, &cfg), Err(SolverError::DimensionMismatch { .. })));
    }
}
