use serde::{Deserialize, Serialize};

use super::dual::DualLinearSystem;
use crate::channel::ChannelSet;
use crate::linalg::rcond;

/// Load regime of the user set relative to the antenna count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankCase {
    #[serde(rename = "K<=M")]
    Underloaded,
    #[serde(rename = "M<K<=2M")]
    Overloaded,
    #[serde(rename = "K>2M")]
    HeavilyOverloaded,
}

impl RankCase {
    pub fn classify(antennas: usize, users: usize) -> Self {
        if users <= antennas {
            RankCase::Underloaded
        } else if users <= 2 * antennas {
            RankCase::Overloaded
        } else {
            RankCase::HeavilyOverloaded
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RankCase::Underloaded => "K<=M",
            RankCase::Overloaded => "M<K<=2M",
            RankCase::HeavilyOverloaded => "K>2M",
        }
    }
}

/// Whether the all-users balanced update can exist at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceOutlook {
    /// `K ≤ M` with linearly independent channels.
    Guaranteed,
    /// `K ≤ M` with dependent channels, or `M < K ≤ 2M`: depends on the rank
    /// of the real Gram matrix at the current auxiliary variables.
    Conditional,
    /// `K > 2M`: `Re{B}` has rank at most `2M < K`.
    Impossible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankDiagnostics {
    pub case: RankCase,
    pub antennas: usize,
    pub users: usize,
    /// Numerical rank of the channel matrix.
    pub channel_rank: usize,
    /// Numerical rank of `Re{B}`.
    pub re_gram_rank: usize,
    pub re_gram_rcond: f64,
    pub d_rcond: f64,
    pub outlook: BalanceOutlook,
}

impl RankDiagnostics {
    /// Both dual matrices pass the conditioning threshold.
    pub fn invertible(&self, threshold: f64) -> bool {
        self.re_gram_rcond >= threshold && self.d_rcond >= threshold
    }
}

/// Eigenvalues of a symmetric PSD matrix above `tol · λ_max`.
fn psd_rank(eigs: impl Iterator<Item = f64>, tol: f64) -> usize {
    let v: Vec<f64> = eigs.collect();
    let top = v.iter().cloned().fold(0.0, f64::max);
    if top <= 0.0 {
        return 0;
    }
    v.iter().filter(|&&e| e > tol * top).count()
}

/// Classifies the user load and measures how well-posed the dual systems are.
///
/// `tol` is the relative eigenvalue cutoff used for the numerical ranks.
pub fn rank_case(channels: &ChannelSet, sys: &DualLinearSystem, tol: f64) -> RankDiagnostics {
    let (m, k) = (channels.antennas(), channels.users());
    let case = RankCase::classify(m, k);
    let gram = channels.matrix().adjoint() * channels.matrix();
    let channel_rank = psd_rank(gram.symmetric_eigenvalues().iter().cloned(), tol);
    let re_gram_rank = psd_rank(sys.re_gram.clone().symmetric_eigenvalues().iter().cloned(), tol);
    let outlook = match case {
        RankCase::Underloaded if channel_rank == k => BalanceOutlook::Guaranteed,
        RankCase::HeavilyOverloaded => BalanceOutlook::Impossible,
        _ => BalanceOutlook::Conditional,
    };
    RankDiagnostics {
        case,
        antennas: m,
        users: k,
        channel_rank,
        re_gram_rank,
        re_gram_rcond: rcond(&sys.re_gram),
        d_rcond: rcond(&sys.d),
        outlook,
    }
}
