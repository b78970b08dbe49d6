use std::collections::HashSet;

use super::dual::{bisect_mu, build_dual_system, reconstruct_w, solve_lambda_qp, DualSolution};
use super::fp::{surrogate, AuxVars, Precoder};
use super::{ActiveSetPolicy, SolverConfig, SolverError};
use crate::channel::ChannelSet;
use crate::linalg::rcond;

/// Dual weights below this are treated as negative when testing dual feasibility.
const LAMBDA_TOL: f64 = 1e-10;

/// Result of one w-update.
#[derive(Debug, Clone)]
pub struct WStep {
    pub precoder: Precoder,
    /// Indexed over the users of the channel set passed in.
    pub dual: DualSolution,
    /// Surrogates of all users at `precoder`.
    pub surrogates: Vec<f64>,
    /// For `DualFeasible`: nonnegative weights and every inactive user at or
    /// above the level, so the update is the exact surrogate optimum. For
    /// `AllActive`: the full user set was solved.
    pub certified: bool,
    /// The greedy drop-highest-SNR reduction was needed.
    pub heuristic: bool,
    /// Number of active sets tried.
    pub attempts: usize,
}

impl WStep {
    fn value(&self) -> f64 {
        self.surrogates.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Slack allowed on inactive users: `s_k ≥ z − 1e-9·max(1, |z|)`.
pub fn level_slack(z: f64) -> f64 {
    1e-9 * z.abs().max(1.0)
}

fn most_violated(surrogates: &[f64], dual: &DualSolution) -> Option<usize> {
    let floor = dual.z - level_slack(dual.z);
    (0..surrogates.len())
        .filter(|k| dual.active.binary_search(k).is_err() && surrogates[*k] < floor)
        .min_by(|&a, &b| surrogates[a].total_cmp(&surrogates[b]).then(a.cmp(&b)))
}

fn most_negative(dual: &DualSolution) -> Option<usize> {
    dual.active
        .iter()
        .copied()
        .filter(|&k| dual.lambda[k] < -LAMBDA_TOL)
        .min_by(|&a, &b| dual.lambda[a].total_cmp(&dual.lambda[b]).then(a.cmp(&b)))
}

fn highest_snr(active: &[usize], current_snr: &[f64]) -> usize {
    *active
        .iter()
        .max_by(|&&a, &&b| current_snr[a].total_cmp(&current_snr[b]).then(b.cmp(&a)))
        .expect("active set is non-empty")
}

/// Balanced solve restricted to `users` through the ρ-route.
fn solve_subset(
    beta: &AuxVars,
    channels: &ChannelSet,
    pt: f64,
    users: &[usize],
    cfg: &SolverConfig,
) -> Result<(DualSolution, Precoder), SolverError> {
    let sub = channels.select(users);
    let sys = build_dual_system(&beta.select(users), &sub, pt)?;
    let dual = solve_lambda_qp(&sys, cfg.cond_threshold)?;
    let w = reconstruct_w(&dual.lambda, &sys)?;
    Ok((dual.embed(users, channels.users()), w))
}

/// One w-update for fixed auxiliary variables.
///
/// Starts from all users active. With [`ActiveSetPolicy::DualFeasible`] the
/// active set is then exchanged (drop the most negative weight, add the most
/// violated inactive user) until the balanced solution on the set is dual
/// feasible; a rank-deficient set is reduced by [`active_set_fallback`].
pub fn w_step(
    beta: &AuxVars,
    channels: &ChannelSet,
    pt: f64,
    current_snr: &[f64],
    cfg: &SolverConfig,
) -> Result<WStep, SolverError> {
    w_step_from(beta, channels, pt, current_snr, cfg, None)
}

/// [`w_step`] with the exchange started from `warm` instead of all users.
///
/// The accepted step satisfies the same certificate; only the number of
/// exchanges changes. Ignored under [`ActiveSetPolicy::AllActive`].
pub fn w_step_from(
    beta: &AuxVars,
    channels: &ChannelSet,
    pt: f64,
    current_snr: &[f64],
    cfg: &SolverConfig,
    warm: Option<&[usize]>,
) -> Result<WStep, SolverError> {
    let k = channels.users();
    let all: Vec<usize> = (0..k).collect();

    if cfg.policy == ActiveSetPolicy::AllActive {
        return match solve_subset(beta, channels, pt, &all, cfg) {
            Ok((dual, precoder)) => {
                let surrogates = surrogate(&precoder, beta, channels)?;
                Ok(WStep {
                    precoder,
                    dual,
                    surrogates,
                    certified: true,
                    heuristic: false,
                    attempts: 1,
                })
            }
            Err(SolverError::RankDeficient { .. } | SolverError::Infeasible(_)) => {
                active_set_fallback(beta, channels, pt, current_snr, cfg)
            }
            Err(e) => Err(e),
        };
    }

    let mut active = match warm {
        Some(w) if !w.is_empty() && w.iter().all(|&u| u < k) => {
            let mut v = w.to_vec();
            v.sort_unstable();
            v.dedup();
            v
        }
        _ => all,
    };
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut best: Option<WStep> = None;
    let mut heuristic = false;
    let mut attempts = 0;
    let cap = 4 * k + 8;

    while attempts < cap && !active.is_empty() && seen.insert(active.clone()) {
        attempts += 1;
        let (dual, precoder) = match solve_subset(beta, channels, pt, &active, cfg) {
            Ok(r) => r,
            Err(SolverError::RankDeficient { .. } | SolverError::Infeasible(_)) => {
                heuristic = true;
                if attempts == 1 && active.len() == k {
                    let fb = active_set_fallback(beta, channels, pt, current_snr, cfg)?;
                    if fb.certified {
                        return Ok(WStep { attempts, ..fb });
                    }
                    active = fb.dual.active.clone();
                    keep_best(&mut best, fb);
                } else {
                    let drop = highest_snr(&active, current_snr);
                    active.retain(|&u| u != drop);
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        let surrogates = surrogate(&precoder, beta, channels)?;
        let step = WStep {
            precoder,
            dual,
            surrogates,
            certified: false,
            heuristic,
            attempts,
        };
        if let Some(neg) = most_negative(&step.dual) {
            active.retain(|&u| u != neg);
            keep_best(&mut best, step);
            continue;
        }
        if let Some(add) = most_violated(&step.surrogates, &step.dual) {
            let pos = active.binary_search(&add).unwrap_err();
            active.insert(pos, add);
            keep_best(&mut best, step);
            continue;
        }
        return Ok(WStep {
            certified: true,
            ..step
        });
    }
    best.map(|b| WStep {
        certified: false,
        heuristic,
        attempts,
        ..b
    })
    .ok_or(SolverError::ActiveSetExhausted)
}

fn keep_best(best: &mut Option<WStep>, cand: WStep) {
    let better = match best {
        Some(b) => cand.value() > b.value(),
        None => true,
    };
    if better {
        *best = Some(cand);
    }
}

/// Greedy active-set reduction for a singular dual system.
///
/// Repeatedly removes the active user with the highest current SNR until
/// both `D_𝓘` and `Re{B_𝓘}` are invertible, solves `λ_𝓘 = D_𝓘⁻¹ d_𝓘` with the
/// μ-bisection, and accepts the first set whose weights are nonnegative and
/// whose excluded users all stay at or above the balanced level. If no set
/// qualifies, the best candidate seen is returned uncertified.
pub fn active_set_fallback(
    beta: &AuxVars,
    channels: &ChannelSet,
    pt: f64,
    current_snr: &[f64],
    cfg: &SolverConfig,
) -> Result<WStep, SolverError> {
    let k = channels.users();
    if current_snr.len() != k {
        return Err(SolverError::DimensionMismatch {
            what: "current SNRs vs user count",
            expected: k,
            found: current_snr.len(),
        });
    }
    let mut active: Vec<usize> = (0..k).collect();
    let mut best: Option<WStep> = None;
    let mut attempts = 0;
    loop {
        if active.is_empty() {
            return Err(SolverError::ActiveSetExhausted);
        }
        attempts += 1;
        if let Some(step) = fallback_candidate(beta, channels, pt, &active, cfg, attempts)? {
            let feasible = most_negative(&step.dual).is_none() && most_violated(&step.surrogates, &step.dual).is_none();
            if feasible {
                return Ok(WStep {
                    certified: true,
                    ..step
                });
            }
            keep_best(&mut best, step);
        }
        if active.len() == 1 {
            break;
        }
        let drop = highest_snr(&active, current_snr);
        active.retain(|&u| u != drop);
    }
    best.map(|b| WStep {
        certified: false,
        attempts,
        ..b
    })
    .ok_or(SolverError::ActiveSetExhausted)
}

fn fallback_candidate(
    beta: &AuxVars,
    channels: &ChannelSet,
    pt: f64,
    active: &[usize],
    cfg: &SolverConfig,
    attempts: usize,
) -> Result<Option<WStep>, SolverError> {
    let sub = channels.select(active);
    let sys = build_dual_system(&beta.select(active), &sub, pt)?;
    if rcond(&sys.d) < cfg.cond_threshold || rcond(&sys.re_gram) < cfg.cond_threshold {
        return Ok(None);
    }
    let lin = match bisect_mu(&sys, cfg) {
        Ok(l) => l,
        Err(SolverError::RankDeficient { .. } | SolverError::BracketFailure { .. } | SolverError::BisectionStalled { .. }) => {
            return Ok(None)
        }
        Err(e) => return Err(e),
    };
    let precoder = Precoder::normalized(lin.precoder.vector().clone(), pt)?;
    let surrogates = surrogate(&precoder, beta, channels)?;
    let z = active
        .iter()
        .map(|&u| surrogates[u])
        .fold(f64::INFINITY, f64::min);
    let combined = sys.combine(&lin.lambda).norm();
    let zeta = if combined > 0.0 { pt.sqrt() / combined } else { 0.0 };
    let local = DualSolution {
        lambda: lin.lambda,
        mu: lin.mu,
        zeta,
        z,
        eta: -z,
        active: (0..active.len()).collect(),
    };
    Ok(Some(WStep {
        precoder,
        dual: local.embed(active, channels.users()),
        surrogates,
        certified: false,
        heuristic: true,
        attempts,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::generate_iid;
    use crate::linalg::CVector;
    use crate::solver::fp::{snrs, update_beta};

    fn state(h: &ChannelSet, pt: f64) -> (AuxVars, Vec<f64>) {
        let w0: CVector = (0..h.users()).map(|j| h.matrix().column(j).into_owned()).sum();
        let w = Precoder::normalized(w0, pt).unwrap();
        (update_beta(&w, h).unwrap(), snrs(&w, h).unwrap())
    }

    #[test]
    fn underloaded_independent_never_needs_fallback() {
        let cfg = SolverConfig::default();
        for seed in 0..20 {
            let h = generate_iid(seed, 6, 3, 1.0).unwrap();
            let (beta, snr) = state(&h, 1.0);
            let step = w_step(&beta, &h, 1.0, &snr, &cfg).unwrap();
            assert!(!step.heuristic);
            assert!(step.certified);
        }
    }

    #[test]
    fn certified_step_is_dual_feasible() {
        let cfg = SolverConfig::default();
        for seed in 0..30 {
            let h = generate_iid(100 + seed, 3, 3, 1.0).unwrap();
            let (beta, snr) = state(&h, 1.0);
            let step = w_step(&beta, &h, 1.0, &snr, &cfg).unwrap();
            assert!(step.certified);
            assert!((step.dual.lambda.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for u in 0..3 {
                if step.dual.active.contains(&u) {
                    assert!(step.dual.lambda[u] >= -LAMBDA_TOL);
                    assert!((step.surrogates[u] - step.dual.z).abs() < 1e-9 * step.dual.z.abs().max(1.0));
                } else {
                    assert_eq!(step.dual.lambda[u], 0.0);
                    assert!(step.surrogates[u] >= step.dual.z - level_slack(step.dual.z));
                }
            }
        }
    }

    #[test]
    fn duplicate_users_are_reduced() {
        // Users 1 and 2 share a channel; the full system is singular.
        let h = ChannelSet::from_real_columns(&[vec![1.0, 0.2, 0.0], vec![0.0, 1.0, 0.3], vec![0.0, 1.0, 0.3]]).unwrap();
        let (beta, snr) = state(&h, 1.0);
        let step = active_set_fallback(&beta, &h, 1.0, &snr, &SolverConfig::default()).unwrap();
        assert!(step.dual.active.len() < 3);
        let sub = h.select(&step.dual.active);
        let sys = build_dual_system(&beta.select(&step.dual.active), &sub, 1.0).unwrap();
        assert!(rcond(&sys.d) >= 1e-12);
    }

    #[test]
    fn heavily_overloaded_fallback_output_is_valid() {
        let cfg = SolverConfig::default();
        for seed in 0..20 {
            let h = generate_iid(500 + seed, 2, 5, 1.0).unwrap();
            let (beta, snr) = state(&h, 1.0);
            let step = active_set_fallback(&beta, &h, 1.0, &snr, &cfg).unwrap();
            let act = &step.dual.active;
            assert!(act.len() <= 4);
            let sys = build_dual_system(&beta.select(act), &h.select(act), 1.0).unwrap();
            assert!(rcond(&sys.d) >= cfg.cond_threshold);
            if step.certified {
                for u in 0..5 {
                    if !act.contains(&u) {
                        assert!(step.surrogates[u] >= step.dual.z - level_slack(step.dual.z));
                    }
                }
            }
            assert!((step.precoder.power() - 1.0).abs() < 1e-10);
        }
    }
}
