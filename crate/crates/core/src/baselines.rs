//! Reference precoders: closed-form baselines and a random-sampling oracle.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::linalg::{principal_eigenvector, CVector};
use crate::solver::{check_power, snrs, Precoder, SolverError};

fn min_snr(w: &Precoder, channels: &ChannelSet) -> f64 {
    snrs(w, channels)
        .map(|v| v.into_iter().fold(f64::INFINITY, f64::min))
        .unwrap_or(f64::NEG_INFINITY)
}

/// Matched filter toward the user with the smallest channel norm
/// (lowest index on ties), at full power.
pub fn mrt_weakest(channels: &ChannelSet, pt: f64) -> Result<Precoder, SolverError> {
    check_power(pt)?;
    let weakest = (0..channels.users())
        .min_by(|&a, &b| channels.norm(a).total_cmp(&channels.norm(b)).then(a.cmp(&b)))
        .ok_or(SolverError::ZeroPrecoder)?;
    Precoder::normalized(channels.matrix().column(weakest).into_owned(), pt)
}

/// Principal eigenvector of `Σ_k h_k h_k^H` at full power, canonical phase.
pub fn sum_eig(channels: &ChannelSet, pt: f64) -> Result<Precoder, SolverError> {
    check_power(pt)?;
    let h = channels.matrix();
    let v = principal_eigenvector(&(h * h.adjoint()));
    Precoder::normalized(v, pt)
}

/// `Σ_k h_k/‖h_k‖` at full power.
pub fn sum_of_channels(channels: &ChannelSet, pt: f64) -> Result<Precoder, SolverError> {
    check_power(pt)?;
    let mut w = CVector::zeros(channels.antennas());
    for k in 0..channels.users() {
        w += channels.matrix().column(k) / Complex64::new(channels.norm(k), 0.0);
    }
    Precoder::normalized(w, pt)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub samples: usize,
    pub seed: u64,
    /// Polish the best sample with coordinate perturbations.
    pub refine: bool,
    pub refine_sweeps: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 0,
            refine: true,
            refine_sweeps: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub precoder: Precoder,
    pub min_snr: f64,
    /// Best value among the raw samples, before refinement.
    pub sampled_min_snr: f64,
    pub best_sample: usize,
}

fn sample_direction(m: usize, seed: u64, index: u64) -> CVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let v = CVector::from_fn(m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

/// Best of `samples` isotropic random directions at full power.
///
/// Sample `i` is drawn from its own ChaCha stream, so the result does not
/// depend on the thread count; ties go to the lowest sample index.
pub fn random_sampling_oracle(channels: &ChannelSet, pt: f64, cfg: &OracleConfig) -> Result<OracleResult, SolverError> {
    check_power(pt)?;
    if cfg.samples == 0 {
        return Err(SolverError::InvalidConfig("oracle needs at least one sample".into()));
    }
    let m = channels.antennas();
    let scale = Complex64::new(pt.sqrt(), 0.0);
    let (value, index) = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let w = Precoder::new(sample_direction(m, cfg.seed, i as u64) * scale, pt).expect("power checked");
            (min_snr(&w, channels), i)
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    let best = Precoder::normalized(sample_direction(m, cfg.seed, index as u64), pt)?;
    let (precoder, refined) = if cfg.refine {
        refine(best, value, channels, pt, cfg.refine_sweeps)?
    } else {
        (best, value)
    };
    Ok(OracleResult {
        precoder,
        min_snr: refined,
        sampled_min_snr: value,
        best_sample: index,
    })
}

/// Cyclic ± perturbation of each real and imaginary coordinate; only strict
/// improvements are kept and the step halves after a sweep without one.
fn refine(
    mut w: Precoder,
    mut value: f64,
    channels: &ChannelSet,
    pt: f64,
    sweeps: usize,
) -> Result<(Precoder, f64), SolverError> {
    let mut step = 0.1 * (pt / w.len() as f64).sqrt();
    let dirs = [
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
    ];
    for _ in 0..sweeps {
        let mut improved = false;
        for m in 0..w.len() {
            for d in dirs {
                let mut v = w.vector().clone();
                v[m] += d * step;
                let Ok(cand) = Precoder::normalized(v, pt) else { continue };
                let cv = min_snr(&cand, channels);
                if cv > value {
                    w = cand;
                    value = cv;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((w, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::generate_iid;

    #[test]
    fn mrt_weakest_picks_smallest_norm() {
        let h = ChannelSet::from_real_columns(&[vec![2.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]]).unwrap();
        let w = mrt_weakest(&h, 4.0).unwrap();
        assert_eq!(w.to_pairs(), vec![[0.0, 0.0], [2.0, 0.0]]);
    }

    #[test]
    fn sum_eig_on_orthogonal_channels() {
        let h = ChannelSet::from_real_columns(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let w = sum_eig(&h, 1.0).unwrap();
        assert!((w.vector()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn sum_of_channels_cancelling_is_zero() {
        let h = ChannelSet::from_real_columns(&[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        assert!(matches!(sum_of_channels(&h, 1.0), Err(SolverError::ZeroPrecoder)));
    }

    #[test]
    fn oracle_is_thread_count_invariant() {
        let h = generate_iid(9, 3, 2, 1.0).unwrap();
        let cfg = OracleConfig {
            samples: 2000,
            seed: 5,
            ..OracleConfig::default()
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| random_sampling_oracle(&h, 1.0, &cfg)).unwrap();
        let b = four.install(|| random_sampling_oracle(&h, 1.0, &cfg)).unwrap();
        assert_eq!(a.best_sample, b.best_sample);
        assert_eq!(a.min_snr.to_bits(), b.min_snr.to_bits());
    }

    #[test]
    fn refinement_never_decreases() {
        for seed in 0..10 {
            let h = generate_iid(seed, 3, 3, 1.0).unwrap();
            let r = random_sampling_oracle(
                &h,
                1.0,
                &OracleConfig {
                    samples: 200,
                    seed,
                    ..OracleConfig::default()
                },
            )
            .unwrap();
            assert!(r.min_snr >= r.sampled_min_snr);
            assert!((r.precoder.power() - 1.0).abs() < 1e-12);
        }
    }
}
