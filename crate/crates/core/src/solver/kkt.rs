use serde::{Deserialize, Serialize};

use super::dual::DualSolution;
use super::fp::{surrogate, AuxVars, Precoder};
use super::SolverError;
use crate::channel::ChannelSet;
use crate::linalg::CMatrix;

/// KKT residuals of the surrogate w-problem at `(w, λ, μ)` for fixed `β`.
///
/// All entries are relative and dimensionless; `max` is the largest of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    /// `|Σλ_k − 1|`.
    pub simplex: f64,
    /// `‖H̃λ − (λᵀb/P_t + μ) w‖`, relative to the larger of the two terms.
    pub stationarity: f64,
    /// `λ_k (s_k(w) − t)` per user, with `t = min_k s_k(w)`, relative to `max(1, |t|)`.
    pub slackness: Vec<f64>,
    pub max_slackness: f64,
    /// `|μ (‖w‖² − P_t)| / P_t`.
    pub power_slackness: f64,
    /// `max(0, ‖w‖² − P_t) / P_t`.
    pub primal_infeasibility: f64,
    /// `max(0, −min λ, −μ)`.
    pub dual_infeasibility: f64,
    /// `|‖w‖² − P_t| / P_t`.
    pub power_gap: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        [
            self.simplex,
            self.stationarity,
            self.max_slackness,
            self.power_slackness,
            self.primal_infeasibility,
            self.dual_infeasibility,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

fn positive_part(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

pub fn kkt_residuals(
    w: &Precoder,
    dual: &DualSolution,
    beta: &AuxVars,
    channels: &ChannelSet,
) -> Result<KktResiduals, SolverError> {
    let k = channels.users();
    if dual.lambda.len() != k {
        return Err(SolverError::DimensionMismatch {
            what: "dual weights vs user count",
            expected: k,
            found: dual.lambda.len(),
        });
    }
    let s = surrogate(w, beta, channels)?;
    let pt = w.power_budget();
    let lam = &dual.lambda;

    let htil = CMatrix::from_fn(channels.antennas(), k, |r, c| channels.column(c)[r] * beta.beta[c]);
    let combined = htil * crate::linalg::CVector::from_iterator(k, lam.iter().map(|&x| x.into()));
    let lb: f64 = lam.iter().enumerate().map(|(i, l)| l * beta.beta[i].norm_sqr()).sum();
    let coef = lb / pt + dual.mu;
    let scaled = w.vector() * num_complex::Complex64::new(coef, 0.0);
    let scale = combined.norm().max(scaled.norm()).max(f64::MIN_POSITIVE);
    let stationarity = (&combined - &scaled).norm() / scale;

    let t = s.iter().cloned().fold(f64::INFINITY, f64::min);
    let denom = t.abs().max(1.0);
    let slackness: Vec<f64> = lam.iter().zip(&s).map(|(l, sk)| (l * (sk - t)).abs() / denom).collect();
    let max_slackness = slackness.iter().cloned().fold(0.0, f64::max);

    let gap = w.power() - pt;
    let min_lambda = lam.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(KktResiduals {
        simplex: (lam.iter().sum::<f64>() - 1.0).abs(),
        stationarity,
        slackness,
        max_slackness,
        power_slackness: (dual.mu * gap).abs() / pt,
        primal_infeasibility: positive_part(gap) / pt,
        dual_infeasibility: positive_part((-min_lambda).max(-dual.mu)),
        power_gap: gap.abs() / pt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::generate_iid;
    use crate::solver::dual::{build_dual_system, reconstruct_w, solve_lambda_qp};
    use crate::solver::fp::update_beta;

    #[test]
    fn balanced_qp_solution_satisfies_kkt() {
        for seed in 0..20 {
            let h = generate_iid(seed, 5, 3, 1.0).unwrap();
            let w0 = Precoder::normalized(h.matrix().column(0).into_owned(), 2.0).unwrap();
            let beta = update_beta(&w0, &h).unwrap();
            let sys = build_dual_system(&beta, &h, 2.0).unwrap();
            let dual = solve_lambda_qp(&sys, 1e-12).unwrap();
            let w = reconstruct_w(&dual.lambda, &sys).unwrap();
            let r = kkt_residuals(&w, &dual, &beta, &h).unwrap();
            assert!(r.stationarity < 1e-9, "{r:?}");
            assert!(r.max_slackness < 1e-9, "{r:?}");
            assert!(r.simplex < 1e-12);
            assert!(r.power_gap < 1e-12);
        }
    }

    #[test]
    fn perturbed_precoder_is_detected() {
        let h = generate_iid(7, 4, 2, 1.0).unwrap();
        let w0 = Precoder::normalized(h.matrix().column(1).into_owned(), 1.0).unwrap();
        let beta = update_beta(&w0, &h).unwrap();
        let sys = build_dual_system(&beta, &h, 1.0).unwrap();
        let dual = solve_lambda_qp(&sys, 1e-12).unwrap();
        let w = reconstruct_w(&dual.lambda, &sys).unwrap();
        let bad = Precoder::normalized(w.vector() + h.matrix().column(0) * num_complex::Complex64::new(0.1, 0.0), 1.0).unwrap();
        let r = kkt_residuals(&bad, &dual, &beta, &h).unwrap();
        assert!(r.max() > 1e-4);
    }

    #[test]
    fn negative_weights_count_as_dual_infeasible() {
        let h = ChannelSet::from_real_columns(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let w = Precoder::normalized(crate::linalg::CVector::from_element(2, 1.0.into()), 2.0).unwrap();
        let beta = update_beta(&w, &h).unwrap();
        let dual = DualSolution {
            lambda: vec![1.5, -0.5],
            mu: 0.0,
            zeta: 1.0,
            z: 1.0,
            eta: -1.0,
            active: vec![0, 1],
        };
        let r = kkt_residuals(&w, &dual, &beta, &h).unwrap();
        assert_eq!(r.dual_infeasibility, 0.5);
        assert!(!r.within(1e-6));
    }
}
