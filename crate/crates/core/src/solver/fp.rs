use num_complex::Complex64;

use super::{check_power, SolverError};
use crate::channel::ChannelSet;
use crate::linalg::{canonical_phase, inner, CVector};

/// Multicast precoder `w` together with its power budget `P_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    w: CVector,
    power_budget: f64,
}

impl Precoder {
    pub fn new(w: CVector, power_budget: f64) -> Result<Self, SolverError> {
        check_power(power_budget)?;
        Ok(Self { w, power_budget })
    }

    /// Rescales `w` so that `‖w‖² = P_t`.
    pub fn normalized(w: CVector, power_budget: f64) -> Result<Self, SolverError> {
        check_power(power_budget)?;
        let n = w.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(SolverError::ZeroPrecoder);
        }
        let scale = Complex64::new(power_budget.sqrt() / n, 0.0);
        Ok(Self {
            w: w * scale,
            power_budget,
        })
    }

    pub fn from_pairs(pairs: &[[f64; 2]], power_budget: f64) -> Result<Self, SolverError> {
        let w = CVector::from_iterator(pairs.len(), pairs.iter().map(|&[re, im]| Complex64::new(re, im)));
        Self::new(w, power_budget)
    }

    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        self.w.iter().map(|x| [x.re, x.im]).collect()
    }

    pub fn vector(&self) -> &CVector {
        &self.w
    }

    pub fn as_slice(&self) -> &[Complex64] {
        self.w.as_slice()
    }

    pub fn power_budget(&self) -> f64 {
        self.power_budget
    }

    /// `‖w‖²`.
    pub fn power(&self) -> f64 {
        self.w.norm_squared()
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// Unit-norm direction in canonical phase (largest entry real, nonnegative).
    pub fn canonical_direction(&self) -> CVector {
        let n = self.w.norm();
        canonical_phase(&(&self.w / Complex64::new(n, 0.0)))
    }
}

/// Auxiliary variables `β_k` of the quadratic transform, one per user.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxVars {
    pub beta: CVector,
}

impl AuxVars {
    pub fn new(beta: CVector) -> Self {
        Self { beta }
    }

    pub fn from_pairs(pairs: &[[f64; 2]]) -> Self {
        Self::new(CVector::from_iterator(
            pairs.len(),
            pairs.iter().map(|&[re, im]| Complex64::new(re, im)),
        ))
    }

    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        self.beta.iter().map(|x| [x.re, x.im]).collect()
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    /// Restriction to the given users, in order.
    pub fn select(&self, users: &[usize]) -> AuxVars {
        AuxVars::new(CVector::from_iterator(users.len(), users.iter().map(|&k| self.beta[k])))
    }
}

fn check_antennas(w: &Precoder, channels: &ChannelSet) -> Result<(), SolverError> {
    if w.len() != channels.antennas() {
        return Err(SolverError::DimensionMismatch {
            what: "precoder length vs antenna count",
            expected: channels.antennas(),
            found: w.len(),
        });
    }
    Ok(())
}

/// `|h^H w|²` under unit noise power.
pub fn snr(w: &Precoder, h: &[Complex64]) -> Result<f64, SolverError> {
    if h.len() != w.len() {
        return Err(SolverError::DimensionMismatch {
            what: "channel length vs precoder length",
            expected: w.len(),
            found: h.len(),
        });
    }
    Ok(inner(h, w.as_slice()).norm_sqr())
}

/// Per-user SNRs for every channel in the set.
pub fn snrs(w: &Precoder, channels: &ChannelSet) -> Result<Vec<f64>, SolverError> {
    check_antennas(w, channels)?;
    Ok((0..channels.users())
        .map(|k| inner(channels.column(k), w.as_slice()).norm_sqr())
        .collect())
}

/// `β_k = h_k^H w · P_t / ‖w‖²` for every user.
pub fn update_beta(w: &Precoder, channels: &ChannelSet) -> Result<AuxVars, SolverError> {
    check_antennas(w, channels)?;
    let p = w.power();
    if !(p > 0.0) {
        return Err(SolverError::ZeroPrecoder);
    }
    let ratio = w.power_budget() / p;
    let beta = CVector::from_iterator(
        channels.users(),
        (0..channels.users()).map(|k| inner(channels.column(k), w.as_slice()) * ratio),
    );
    Ok(AuxVars::new(beta))
}

/// Quadratic-transform surrogate per user:
/// `2 Re{β_k^* h_k^H w} − (|β_k|²/P_t) ‖w‖²`.
pub fn surrogate(w: &Precoder, beta: &AuxVars, channels: &ChannelSet) -> Result<Vec<f64>, SolverError> {
    check_antennas(w, channels)?;
    if beta.len() != channels.users() {
        return Err(SolverError::DimensionMismatch {
            what: "auxiliary variables vs user count",
            expected: channels.users(),
            found: beta.len(),
        });
    }
    let ratio = w.power() / w.power_budget();
    Ok((0..channels.users())
        .map(|k| {
            let b = beta.beta[k];
            2.0 * (b.conj() * inner(channels.column(k), w.as_slice())).re - b.norm_sqr() * ratio
        })
        .collect())
}
