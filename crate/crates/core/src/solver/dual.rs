//! Dual systems of the surrogate max-min problem and their two solution routes.
//!
//! Route one (`solve_lambda_qp`) parametrizes the stationarity system by
//! `ρ = ζλ`, so that `Re{B} ρ = (b + z·1)/2` and the balanced level `z` solves
//! the scalar quadratic `‖H̃ρ(z)‖² = P_t`. Route two eliminates `z` instead,
//! giving the linear system `Dλ = d(μ)` whose right-hand side is affine in the
//! power multiplier `μ`, which `bisect_mu` then tunes until `‖w‖² = P_t`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fp::{AuxVars, Precoder};
use super::{check_power, SolverConfig, SolverError};
use crate::channel::ChannelSet;
use crate::linalg::{CMatrix, CVector, Factorization};

/// Upper end of the μ bracket expansion.
pub const MU_MAX: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct DualLinearSystem {
    /// `H̃ = [β_1 h_1, …, β_K h_K]`.
    pub htil: CMatrix,
    /// `B = H̃^H H̃`.
    pub gram: CMatrix,
    pub re_gram: DMatrix<f64>,
    /// `b_k = |β_k|²`.
    pub beta_sq: DVector<f64>,
    /// Rows `1..K−1` equate user `i` with user `K`; the last row is all ones.
    pub d: DMatrix<f64>,
    /// `|β_K|² − |β_j|²` for `j < K`.
    pub gaps: DVector<f64>,
    /// `a_j = β_K h_K − β_j h_j` for `j < K`, as columns.
    pub diffs: CMatrix,
    pub power_budget: f64,
}

impl DualLinearSystem {
    pub fn users(&self) -> usize {
        self.htil.ncols()
    }

    pub fn antennas(&self) -> usize {
        self.htil.nrows()
    }

    /// `A = 2ζ Re{B}`.
    pub fn a_matrix(&self, zeta: f64) -> DMatrix<f64> {
        &self.re_gram * (2.0 * zeta)
    }

    /// `d` with `d_i = μ (|β_K|² − |β_i|²)` for `i < K` and `d_K = 1`.
    pub fn rhs(&self, mu: f64) -> DVector<f64> {
        let k = self.users();
        DVector::from_fn(k, |i, _| if i + 1 == k { 1.0 } else { mu * self.gaps[i] })
    }

    /// `H̃λ` for real weights.
    pub fn combine(&self, lambda: &[f64]) -> CVector {
        let lam = CVector::from_iterator(lambda.len(), lambda.iter().map(|&x| Complex64::new(x, 0.0)));
        &self.htil * lam
    }
}

/// Dual variables of one w-update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSolution {
    /// One weight per user; exactly zero outside `active`.
    pub lambda: Vec<f64>,
    /// Multiplier of the power constraint.
    pub mu: f64,
    /// Precoder scale in `w = ζ H̃ λ`.
    pub zeta: f64,
    /// Balanced surrogate level of the active users.
    pub z: f64,
    /// Simplex multiplier in the convention `Aλ − b + η·1 = 0`, i.e. `−z`.
    pub eta: f64,
    /// Active users, ascending.
    pub active: Vec<usize>,
}

impl DualSolution {
    pub fn simplex_residual(&self) -> f64 {
        (self.lambda.iter().sum::<f64>() - 1.0).abs()
    }

    /// Re-indexes a solution computed on the sub-problem `users` into a
    /// problem with `total` users.
    pub fn embed(&self, users: &[usize], total: usize) -> DualSolution {
        let mut lambda = vec![0.0; total];
        for (local, &global) in users.iter().enumerate() {
            lambda[global] = self.lambda[local];
        }
        let mut active: Vec<usize> = self.active.iter().map(|&l| users[l]).collect();
        active.sort_unstable();
        DualSolution {
            lambda,
            active,
            ..self.clone()
        }
    }
}

/// Assembles `H̃`, `B`, `b` and the elimination system `D`.
pub fn build_dual_system(beta: &AuxVars, channels: &ChannelSet, pt: f64) -> Result<DualLinearSystem, SolverError> {
    check_power(pt)?;
    let (m, k) = (channels.antennas(), channels.users());
    if beta.len() != k {
        return Err(SolverError::DimensionMismatch {
            what: "auxiliary variables vs user count",
            expected: k,
            found: beta.len(),
        });
    }
    let htil = CMatrix::from_fn(m, k, |r, c| channels.column(c)[r] * beta.beta[c]);
    let g = channels.gram();
    let gram = CMatrix::from_fn(k, k, |i, j| beta.beta[i].conj() * g[(i, j)] * beta.beta[j]);
    let re_gram = gram.map(|x| x.re);
    let beta_sq = DVector::from_fn(k, |i, _| beta.beta[i].norm_sqr());
    let last = k - 1;
    let gaps = DVector::from_fn(last, |i, _| beta_sq[last] - beta_sq[i]);
    let diffs = CMatrix::from_fn(m, last, |r, i| htil[(r, last)] - htil[(r, i)]);
    // a_i^H (β_j h_j) = B_{K,j} − B_{i,j}
    let d = DMatrix::from_fn(k, k, |i, j| {
        if i == last {
            1.0
        } else {
            2.0 * (gram[(last, j)] - gram[(i, j)]).re - gaps[i] * beta_sq[j] / pt
        }
    });
    Ok(DualLinearSystem {
        htil,
        gram,
        re_gram,
        beta_sq,
        d,
        gaps,
        diffs,
        power_budget: pt,
    })
}

/// Closed-form balanced dual solution through the ρ-parametrization.
///
/// Among the two roots of the level quadratic only the larger one gives a
/// positive scale `ζ = 1ᵀρ`: the quadratic's vertex is where `1ᵀρ(z) = 0`.
pub fn solve_lambda_qp(sys: &DualLinearSystem, cond_threshold: f64) -> Result<DualSolution, SolverError> {
    let k = sys.users();
    let pt = sys.power_budget;
    let fact = Factorization::new(&sys.re_gram);
    if fact.rcond() < cond_threshold {
        return Err(SolverError::RankDeficient {
            matrix: "Re{B}",
            rcond: fact.rcond(),
        });
    }
    let half_b = &sys.beta_sq * 0.5;
    let half_ones = DVector::from_element(k, 0.5);
    let (rho0, rho1) = match (fact.solve(&half_b), fact.solve(&half_ones)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(SolverError::RankDeficient {
                matrix: "Re{B}",
                rcond: 0.0,
            })
        }
    };
    // ‖H̃ρ(z)‖² = ρᵀRe{B}ρ = α z² + 2γ z + δ, using Re{B}ρ0 = b/2, Re{B}ρ1 = 1/2.
    let alpha = rho1.sum() / 2.0;
    let gamma = rho0.sum() / 2.0;
    let delta = rho0.dot(&sys.beta_sq) / 2.0;
    let c0 = delta - pt;
    let disc = gamma * gamma - alpha * c0;
    if !(alpha > 0.0) || !(disc >= 0.0) {
        return Err(SolverError::Infeasible("level quadratic has no real root"));
    }
    let sq = disc.sqrt();
    let z = if gamma > 0.0 { -c0 / (gamma + sq) } else { (sq - gamma) / alpha };
    let rho = &rho0 + &rho1 * z;
    let zeta = rho.sum();
    if !(zeta > 0.0) || !zeta.is_finite() {
        return Err(SolverError::Infeasible("precoder scale is not positive"));
    }
    let lambda: Vec<f64> = rho.iter().map(|r| r / zeta).collect();
    let mu = 1.0 / zeta - lambda.iter().zip(sys.beta_sq.iter()).map(|(l, b)| l * b).sum::<f64>() / pt;
    Ok(DualSolution {
        lambda,
        mu,
        zeta,
        z,
        eta: -z,
        active: (0..k).collect(),
    })
}

/// `λ = D⁻¹ d(μ)`.
pub fn solve_lambda_linear(sys: &DualLinearSystem, mu: f64, cond_threshold: f64) -> Result<Vec<f64>, SolverError> {
    let fact = factor_d(sys, cond_threshold)?;
    fact.solve(&sys.rhs(mu))
        .map(|v| v.iter().cloned().collect())
        .ok_or(SolverError::RankDeficient { matrix: "D", rcond: 0.0 })
}

fn factor_d(sys: &DualLinearSystem, cond_threshold: f64) -> Result<Factorization, SolverError> {
    let fact = Factorization::new(&sys.d);
    if fact.rcond() < cond_threshold {
        return Err(SolverError::RankDeficient {
            matrix: "D",
            rcond: fact.rcond(),
        });
    }
    Ok(fact)
}

/// Output of the linear route.
#[derive(Debug, Clone)]
pub struct LinearPathSolution {
    pub mu: f64,
    pub lambda: Vec<f64>,
    pub precoder: Precoder,
    /// Number of power-residual evaluations.
    pub probes: usize,
}

/// Finds `μ ≥ 0` so that `w(μ) = H̃λ(μ) / (λ(μ)ᵀb/P_t + μ)` meets the power
/// budget, with `λ(μ) = D⁻¹d(μ)`.
///
/// `D` is factored once; since `d` is affine in `μ`, every probe is
/// `λ = p + μq` with `p = D⁻¹e_K` and `q = D⁻¹[gaps; 0]`. The bracket starts at
/// `[0, 1]` and doubles up to [`MU_MAX`]. A probe whose denominator is not
/// positive counts as an excess-power probe.
pub fn bisect_mu(sys: &DualLinearSystem, cfg: &SolverConfig) -> Result<LinearPathSolution, SolverError> {
    let k = sys.users();
    let pt = sys.power_budget;
    let fact = factor_d(sys, cfg.cond_threshold)?;
    let e_last = DVector::from_fn(k, |i, _| if i + 1 == k { 1.0 } else { 0.0 });
    let gap_rhs = DVector::from_fn(k, |i, _| if i + 1 == k { 0.0 } else { sys.gaps[i] });
    let singular = || SolverError::RankDeficient { matrix: "D", rcond: 0.0 };
    let p = fact.solve(&e_last).ok_or_else(singular)?;
    let q = fact.solve(&gap_rhs).ok_or_else(singular)?;

    let probes = std::cell::Cell::new(0usize);
    let eval = |mu: f64| -> (f64, Vec<f64>, CVector) {
        probes.set(probes.get() + 1);
        let lam: Vec<f64> = p.iter().zip(q.iter()).map(|(a, b)| a + mu * b).collect();
        let denom = lam.iter().zip(sys.beta_sq.iter()).map(|(l, b)| l * b).sum::<f64>() / pt + mu;
        let v = sys.combine(&lam);
        if !(denom > 0.0) {
            return (f64::INFINITY, lam, v);
        }
        let w = v / Complex64::new(denom, 0.0);
        (w.norm_squared() - pt, lam, w)
    };
    let tol = cfg.bisect_tol * pt;

    let finish = |mu: f64, lam: Vec<f64>, w: CVector| -> Result<LinearPathSolution, SolverError> {
        Ok(LinearPathSolution {
            mu,
            lambda: lam,
            precoder: Precoder::new(w, pt)?,
            probes: probes.get(),
        })
    };

    let (f0, lam0, w0) = eval(0.0);
    if f0.abs() <= tol {
        return finish(0.0, lam0, w0);
    }
    let (mut lo, mut flo) = (0.0, f0);
    let mut hi = 1.0;
    let (mut fhi, mut lam_hi, mut w_hi) = eval(hi);
    while fhi.signum() == flo.signum() && fhi.abs() > tol {
        if hi >= MU_MAX {
            return Err(SolverError::BracketFailure {
                mu_max: MU_MAX,
                at_zero: f0,
                at_max: fhi,
            });
        }
        lo = hi;
        flo = fhi;
        hi *= 2.0;
        (fhi, lam_hi, w_hi) = eval(hi);
    }
    if fhi.abs() <= tol {
        return finish(hi, lam_hi, w_hi);
    }

    let mut best = (fhi.abs(), hi, lam_hi, w_hi);
    for _ in 0..cfg.bisect_max_iters {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (fm, lam, w) = eval(mid);
        if fm.abs() < best.0 {
            best = (fm.abs(), mid, lam.clone(), w.clone());
        }
        if fm.abs() <= tol {
            break;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let (res, mu, lam, w) = best;
    if res > tol {
        return Err(SolverError::BisectionStalled { mu, residual: res / pt });
    }
    finish(mu, lam, w)
}

/// `w = ζ H̃λ` with `ζ = √P_t / ‖H̃λ‖`.
pub fn reconstruct_w(lambda: &[f64], sys: &DualLinearSystem) -> Result<Precoder, SolverError> {
    if lambda.len() != sys.users() {
        return Err(SolverError::DimensionMismatch {
            what: "dual weights vs user count",
            expected: sys.users(),
            found: lambda.len(),
        });
    }
    let v = sys.combine(lambda);
    let n = v.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(SolverError::DegenerateDirection);
    }
    Precoder::normalized(v, sys.power_budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::generate_iid;
    use crate::linalg::{inner, phase_distance};
    use crate::solver::fp::{snrs, surrogate, update_beta};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn identity_instance() -> (ChannelSet, AuxVars) {
        let h = ChannelSet::from_real_columns(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let beta = AuxVars::new(CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]));
        (h, beta)
    }

    fn random_state(seed: u64, m: usize, k: usize, pt: f64) -> (ChannelSet, AuxVars) {
        let h = generate_iid(seed, m, k, 1.0).unwrap();
        let w0: CVector = (0..k).map(|j| h.matrix().column(j).into_owned()).sum();
        let w = Precoder::normalized(w0, pt).unwrap();
        let beta = update_beta(&w, &h).unwrap();
        (h, beta)
    }

    #[test]
    fn hand_system_entries() {
        let (h, beta) = identity_instance();
        let sys = build_dual_system(&beta, &h, 2.0).unwrap();
        assert_eq!(sys.d, DMatrix::from_row_slice(2, 2, &[-2.0, 2.0, 1.0, 1.0]));
        assert_eq!(sys.gaps.as_slice(), &[0.0]);
        assert_eq!(sys.rhs(3.0).as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn single_user_system() {
        let h = ChannelSet::from_real_columns(&[vec![1.0, 2.0]]).unwrap();
        let beta = AuxVars::new(CVector::from_vec(vec![c(0.5, 0.5)]));
        let sys = build_dual_system(&beta, &h, 1.0).unwrap();
        assert_eq!(sys.d, DMatrix::from_element(1, 1, 1.0));
        assert_eq!(sys.rhs(7.0).as_slice(), &[1.0]);
    }

    #[test]
    fn identical_users_give_zero_rows() {
        let h = ChannelSet::from_real_columns(&[vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let beta = AuxVars::new(CVector::from_element(3, c(0.3, -0.2)));
        let sys = build_dual_system(&beta, &h, 1.0).unwrap();
        for i in 0..2 {
            assert!(sys.d.row(i).iter().all(|&x| x == 0.0));
        }
        assert!(matches!(
            solve_lambda_linear(&sys, 0.0, 1e-12),
            Err(SolverError::RankDeficient { matrix: "D", .. })
        ));
    }

    #[test]
    fn d_entries_match_explicit_difference_vectors() {
        for seed in 0..10 {
            let (h, beta) = random_state(seed, 4, 3, 2.5);
            let sys = build_dual_system(&beta, &h, 2.5).unwrap();
            let k = 3;
            let b: Vec<f64> = (0..k).map(|j| beta.beta[j].norm_sqr()).collect();
            for i in 0..k - 1 {
                let a: Vec<Complex64> = (0..4)
                    .map(|r| beta.beta[k - 1] * h.column(k - 1)[r] - beta.beta[i] * h.column(i)[r])
                    .collect();
                let gap = b[k - 1] - b[i];
                for j in 0..k {
                    let expect = 2.0 * (beta.beta[j] * inner(&a, h.column(j))).re - gap * b[j] / 2.5;
                    assert!((sys.d[(i, j)] - expect).abs() < 1e-12 * expect.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn qp_hand_solution() {
        let (h, beta) = identity_instance();
        let sys = build_dual_system(&beta, &h, 2.0).unwrap();
        let dual = solve_lambda_qp(&sys, 1e-12).unwrap();
        assert!((dual.z - 1.0).abs() < 1e-14);
        assert!((dual.zeta - 2.0).abs() < 1e-14);
        assert!((dual.lambda[0] - 0.5).abs() < 1e-15 && (dual.lambda[1] - 0.5).abs() < 1e-15);
        assert!(dual.mu.abs() < 1e-14);
        assert_eq!(dual.eta, -dual.z);
    }

    /// Dual objective `φ(λ) = 2√P_t ‖H̃λ‖ − bᵀλ`, minimized over the segment
    /// `λ = (t, 1 − t)` by ternary search (φ is convex).
    fn brute_force_two_user(sys: &DualLinearSystem) -> f64 {
        let pt = sys.power_budget;
        let phi = |t: f64| {
            let lam = [t, 1.0 - t];
            2.0 * pt.sqrt() * sys.combine(&lam).norm() - sys.beta_sq[0] * t - sys.beta_sq[1] * (1.0 - t)
        };
        let (mut lo, mut hi) = (-5.0, 5.0);
        for _ in 0..300 {
            let a = lo + (hi - lo) / 3.0;
            let b = hi - (hi - lo) / 3.0;
            if phi(a) < phi(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn qp_matches_brute_force_dual_minimum() {
        let (h, beta) = identity_instance();
        let sys = build_dual_system(&beta, &h, 2.0).unwrap();
        assert!((brute_force_two_user(&sys) - 0.5).abs() < 1e-7);
        for seed in 0..20 {
            let (h, beta) = random_state(seed, 3, 2, 1.7);
            let sys = build_dual_system(&beta, &h, 1.7).unwrap();
            let dual = solve_lambda_qp(&sys, 1e-12).unwrap();
            let t = brute_force_two_user(&sys);
            assert!((dual.lambda[0] - t).abs() < 1e-6, "seed {seed}: {} vs {t}", dual.lambda[0]);
        }
    }

    #[test]
    fn qp_balance_residual() {
        for seed in 0..20 {
            let (h, beta) = random_state(seed, 6, 4, 3.0);
            let sys = build_dual_system(&beta, &h, 3.0).unwrap();
            let dual = solve_lambda_qp(&sys, 1e-12).unwrap();
            assert!(dual.simplex_residual() < 1e-12);
            let lam = DVector::from_column_slice(&dual.lambda);
            let resid = sys.a_matrix(dual.zeta) * lam - DVector::from_element(4, dual.z) - &sys.beta_sq;
            assert!(resid.amax() < 1e-10, "seed {seed}: {}", resid.amax());
            // the reconstructed precoder balances the surrogates at level z
            let w = reconstruct_w(&dual.lambda, &sys).unwrap();
            let s = surrogate(&w, &beta, &h).unwrap();
            for v in s {
                assert!((v - dual.z).abs() < 1e-9 * dual.z.abs().max(1.0));
            }
        }
    }

    #[test]
    fn qp_single_user() {
        let h = ChannelSet::from_columns(&[vec![c(1.0, -1.0), c(0.5, 2.0)]]).unwrap();
        let beta = AuxVars::new(CVector::from_vec(vec![c(0.7, 0.1)]));
        let sys = build_dual_system(&beta, &h, 3.0).unwrap();
        let dual = solve_lambda_qp(&sys, 1e-12).unwrap();
        assert_eq!(dual.lambda, vec![1.0]);
        let w = reconstruct_w(&dual.lambda, &sys).unwrap();
        let b = beta.beta[0];
        let expect = 2.0 * (b.conj() * inner(h.column(0), w.as_slice())).re - b.norm_sqr();
        assert!((dual.z - expect).abs() < 1e-12);
    }

    #[test]
    fn qp_rank_deficient() {
        let h = generate_iid(1, 1, 3, 1.0).unwrap();
        let beta = AuxVars::new(CVector::from_element(3, c(1.0, 0.0)));
        let sys = build_dual_system(&beta, &h, 1.0).unwrap();
        assert!(matches!(
            solve_lambda_qp(&sys, 1e-12),
            Err(SolverError::RankDeficient { matrix: "Re{B}", .. })
        ));
    }

    #[test]
    fn linear_hand_solution_is_mu_independent() {
        let (h, beta) = identity_instance();
        let sys = build_dual_system(&beta, &h, 2.0).unwrap();
        for mu in [0.0, 0.3, 17.0] {
            let lam = solve_lambda_linear(&sys, mu, 1e-12).unwrap();
            assert!((lam[0] - 0.5).abs() < 1e-15 && (lam[1] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_residual_contract() {
        for seed in 0..10 {
            let (h, beta) = random_state(seed, 5, 4, 1.0);
            let sys = build_dual_system(&beta, &h, 1.0).unwrap();
            let lam = solve_lambda_linear(&sys, 0.4, 1e-12).unwrap();
            let r = &sys.d * DVector::from_column_slice(&lam) - sys.rhs(0.4);
            assert!(r.amax() < 1e-10);
            assert!((lam.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bisect_hand_examples() {
        let cfg = SolverConfig::default();
        let (h, beta) = identity_instance();
        let sys = build_dual_system(&beta, &h, 2.0).unwrap();
        let sol = bisect_mu(&sys, &cfg).unwrap();
        assert_eq!(sol.mu, 0.0);
        assert!((sol.lambda[0] - 0.5).abs() < 1e-15);
        assert!((sol.precoder.vector()[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((sol.precoder.vector()[1] - c(1.0, 0.0)).norm() < 1e-14);

        // K = 1, ‖w(μ)‖² = 1/(1/4 + μ)² = 4  ⇒  μ = 1/4, w = (2, 0)
        let h = ChannelSet::from_real_columns(&[vec![1.0, 0.0]]).unwrap();
        let beta = AuxVars::new(CVector::from_vec(vec![c(1.0, 0.0)]));
        let sys = build_dual_system(&beta, &h, 4.0).unwrap();
        let sol = bisect_mu(&sys, &cfg).unwrap();
        assert!((sol.mu - 0.25).abs() < 1e-12);
        assert!((sol.precoder.vector()[0] - c(2.0, 0.0)).norm() < 1e-12);
        assert!((sol.precoder.power() - 4.0).abs() <= cfg.bisect_tol * 4.0);
    }

    #[test]
    fn bisect_agrees_with_qp() {
        let cfg = SolverConfig::default();
        for seed in 0..20 {
            let (h, beta) = random_state(seed, 6, 3, 2.0);
            let sys = build_dual_system(&beta, &h, 2.0).unwrap();
            let lin = bisect_mu(&sys, &cfg).unwrap();
            let qp = solve_lambda_qp(&sys, cfg.cond_threshold).unwrap();
            assert!((lin.precoder.power() - 2.0).abs() <= cfg.bisect_tol * 2.0);
            for (a, b) in lin.lambda.iter().zip(&qp.lambda) {
                assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-3), "seed {seed}: {a} vs {b}");
            }
            assert!((lin.mu - qp.mu).abs() < 1e-8);
            let wq = reconstruct_w(&qp.lambda, &sys).unwrap();
            assert!(phase_distance(lin.precoder.vector(), wq.vector()) < 1e-8);
        }
    }

    #[test]
    fn reconstruct_examples() {
        let (h, beta) = identity_instance();
        let sys = build_dual_system(&beta, &h, 2.0).unwrap();
        let w = reconstruct_w(&[0.5, 0.5], &sys).unwrap();
        assert!((w.vector()[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((w.vector()[1] - c(1.0, 0.0)).norm() < 1e-15);

        let (h, beta) = random_state(4, 3, 2, 5.0);
        let sys = build_dual_system(&beta, &h, 5.0).unwrap();
        let w = reconstruct_w(&[1.0, 0.0], &sys).unwrap();
        let col = sys.htil.column(0).into_owned();
        let expect = &col * Complex64::new(5f64.sqrt() / col.norm(), 0.0);
        assert!((w.vector() - expect).norm() < 1e-12);
        assert!((w.power() - 5.0).abs() < 1e-12 * 5.0);
        assert!(matches!(
            reconstruct_w(&[0.0, 0.0], &sys),
            Err(SolverError::DegenerateDirection)
        ));
        let _ = snrs(&w, &h).unwrap();
    }
}
