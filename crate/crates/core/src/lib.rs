//! Max-min fair multicast beamforming.
//!
//! A single precoder `w` serves every user; the solver maximizes the weakest
//! user's SNR `|h_k^H w|²` under a total power budget using a
//! fractional-programming outer loop with an exact dual w-update.

pub mod baselines;
pub mod bench;
pub mod channel;
pub mod linalg;
pub mod solver;

pub use channel::{generate_iid, load_channels, save_channels, ChannelError, ChannelSet};
pub use solver::{solve, ActiveSetPolicy, InitStrategy, Precoder, Solution, SolveReport, SolverConfig, SolverError};
