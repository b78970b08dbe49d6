//! A user whose channel is a scaled copy of another's is solved through the
//! weaker copy and reported as dropped.

use mmfcast::channel::ChannelSet;
use mmfcast::{generate_iid, solve, SolverConfig};
use num_complex::Complex64;

fn main() -> anyhow::Result<()> {
    let base = generate_iid(11, 4, 3, 1.0)?;
    let mut cols: Vec<Vec<Complex64>> = (0..3).map(|k| base.column(k).to_vec()).collect();
    let scale = Complex64::from_polar(3.0, 1.2);
    cols.push(base.column(1).iter().map(|x| x * scale).collect());
    let h = ChannelSet::from_columns(&cols)?;

    let full = solve(&h, 10.0, &SolverConfig::default())?;
    let reduced = solve(&base, 10.0, &SolverConfig::default())?;
    println!("dropped: {:?}", full.report.dropped_users);
    println!("min SNR with copy {:.12}, without {:.12}", full.report.min_snr, reduced.report.min_snr);
    println!("per-user SNR {:?}", full.report.per_user_snr);
    let gap = (full.precoder.vector() - reduced.precoder.vector()).norm();
    println!("precoder difference {gap:.2e}");
    Ok(())
}
