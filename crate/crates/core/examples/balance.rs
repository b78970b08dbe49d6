//! Solve one underloaded instance (M=10, K=5, 10 dB) and compare the
//! dual-feasible w-update with the all-users-active one.
//!
//! cargo run --release --example balance -- [seed]

use mmfcast::{generate_iid, solve, ActiveSetPolicy, SolverConfig};

fn main() -> anyhow::Result<()> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(5);
    let h = generate_iid(seed, 10, 5, 1.0)?;
    let pt = 10.0;

    for policy in [ActiveSetPolicy::DualFeasible, ActiveSetPolicy::AllActive] {
        let cfg = SolverConfig {
            policy,
            ..SolverConfig::default()
        };
        let sol = solve(&h, pt, &cfg)?;
        let r = &sol.report;
        println!("{policy:?}");
        println!("  min SNR   {:.6}  (spread {:.2e}, balanced {})", r.min_snr, r.spread, r.balanced);
        println!("  per user  {:?}", r.per_user_snr.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>());
        println!("  lambda    {:?}", sol.dual.lambda.iter().map(|v| format!("{v:+.4}")).collect::<Vec<_>>());
        println!("  certified {}  iterations {}  KKT max {:.2e}", r.certified, r.iters, r.kkt.max());
    }
    Ok(())
}
