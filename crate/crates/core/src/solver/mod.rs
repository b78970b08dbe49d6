//! Fractional-programming solver for max-min fair multicast beamforming.
//!
//! The outer loop alternates between the closed-form auxiliary update
//! ([`update_beta`]) and a w-update that solves the max-min surrogate problem
//! exactly through its dual ([`solve_lambda_qp`], with [`bisect_mu`] as the
//! independent linear-system route). Rank-deficient dual systems are handled
//! by shrinking the active user set ([`active_set_fallback`]).

mod active_set;
mod alternating;
mod dual;
mod fp;
mod kkt;
mod rank;

pub use active_set::{active_set_fallback, level_slack, w_step, w_step_from, WStep};
pub use alternating::{solve, DroppedUser, DropReason, Solution, SolveReport};
pub use dual::{
    bisect_mu, build_dual_system, reconstruct_w, solve_lambda_linear, solve_lambda_qp, DualLinearSystem,
    DualSolution, LinearPathSolution,
};
pub use fp::{snr, snrs, surrogate, update_beta, AuxVars, Precoder};
pub use kkt::{kkt_residuals, KktResiduals};
pub use rank::{rank_case, BalanceOutlook, RankCase, RankDiagnostics};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelError, DEFAULT_COLLINEAR_TOL};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("dimension mismatch: {what} (expected {expected}, found {found})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("precoder has zero norm")]
    ZeroPrecoder,
    #[error("power budget must be positive and finite, got {0}")]
    InvalidPower(f64),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("{matrix} is singular (reciprocal condition {rcond:.3e})")]
    RankDeficient { matrix: &'static str, rcond: f64 },
    #[error("no balanced level with positive precoder scale: {0}")]
    Infeasible(&'static str),
    #[error("power residual keeps its sign on [0, {mu_max:e}] (f(0) = {at_zero:.3e}, f(max) = {at_max:.3e})")]
    BracketFailure { mu_max: f64, at_zero: f64, at_max: f64 },
    #[error("bisection stopped at mu = {mu:.6e} with relative power residual {residual:.3e}")]
    BisectionStalled { mu: f64, residual: f64 },
    #[error("combined beam direction vanishes")]
    DegenerateDirection,
    #[error("active set shrank below one user")]
    ActiveSetExhausted,
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// How the outer loop is started.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    /// `w₀ ∝ Σ_k h_k/‖h_k‖`.
    SumOfChannels,
    /// Principal eigenvector of `Σ_k h_k h_k^H`.
    PrincipalEigenvector,
    /// Matched filter toward the user with the weakest channel.
    MatchedWeakest,
    /// Explicit start as `[re, im]` pairs.
    UserSupplied(Vec<[f64; 2]>),
}

/// Which users the w-update may leave inactive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActiveSetPolicy {
    /// Dual weights must be nonnegative and every inactive user must clear
    /// the balanced level; the w-update is then the exact surrogate optimum.
    DualFeasible,
    /// Every user active whenever the dual system is invertible (the
    /// closed-form balanced update). Signed weights are accepted as-is.
    AllActive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub outer_tol: f64,
    pub max_outer_iters: usize,
    pub bisect_tol: f64,
    pub bisect_max_iters: usize,
    /// Reciprocal-condition cutoff below which `D` or `Re{B}` count as singular.
    pub cond_threshold: f64,
    pub collinear_tol: f64,
    pub init_strategy: InitStrategy,
    pub policy: ActiveSetPolicy,
    /// Also run the other deterministic starts and keep the best result.
    pub multi_start: bool,
    pub random_starts: usize,
    pub start_seed: u64,
    pub kkt_tol: f64,
    pub balance_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            outer_tol: 1e-8,
            max_outer_iters: 200,
            bisect_tol: 1e-12,
            bisect_max_iters: 200,
            cond_threshold: 1e-12,
            collinear_tol: DEFAULT_COLLINEAR_TOL,
            init_strategy: InitStrategy::SumOfChannels,
            policy: ActiveSetPolicy::DualFeasible,
            multi_start: true,
            random_starts: 2,
            start_seed: 0,
            kkt_tol: 1e-6,
            balance_tol: 1e-6,
        }
    }
}

impl SolverConfig {
    /// Single start, no extra restarts.
    pub fn single_start(mut self) -> Self {
        self.multi_start = false;
        self.random_starts = 0;
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let positive = [
            ("outer_tol", self.outer_tol),
            ("bisect_tol", self.bisect_tol),
            ("cond_threshold", self.cond_threshold),
            ("kkt_tol", self.kkt_tol),
            ("balance_tol", self.balance_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SolverError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.collinear_tol > 0.0 && self.collinear_tol < 1.0) {
            return Err(SolverError::InvalidConfig(format!(
                "collinear_tol must lie in (0, 1), got {}",
                self.collinear_tol
            )));
        }
        if self.max_outer_iters == 0 || self.bisect_max_iters == 0 {
            return Err(SolverError::InvalidConfig("iteration caps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Rejects budgets that are not positive and finite.
pub fn check_power(pt: f64) -> Result<(), SolverError> {
    if pt > 0.0 && pt.is_finite() {
        Ok(())
    } else {
        Err(SolverError::InvalidPower(pt))
    }
}
