//! Check the solver against brute-force random sampling on small instances.

use mmfcast::baselines::{random_sampling_oracle, OracleConfig};
use mmfcast::{generate_iid, solve, SolverConfig};

fn main() -> anyhow::Result<()> {
    let oracle_cfg = OracleConfig {
        samples: 100_000,
        ..OracleConfig::default()
    };
    println!("{:>5} {:>4} {:>12} {:>12} {:>12} {:>10}", "seed", "MxK", "sampled", "refined", "solver", "gap");
    for seed in 0..6 {
        let (m, k) = [(2, 2), (3, 2), (3, 3)][seed as usize % 3];
        let h = generate_iid(seed, m, k, 1.0)?;
        let o = random_sampling_oracle(&h, 1.0, &OracleConfig { seed, ..oracle_cfg.clone() })?;
        let s = solve(&h, 1.0, &SolverConfig::default())?;
        let gap = (s.report.min_snr - o.min_snr) / o.min_snr;
        println!(
            "{seed:>5} {m}x{k} {:>12.6} {:>12.6} {:>12.6} {gap:>+10.2e}",
            o.sampled_min_snr, o.min_snr, s.report.min_snr
        );
    }
    Ok(())
}
