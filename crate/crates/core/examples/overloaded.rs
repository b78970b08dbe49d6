//! More users than antennas. With M < K <= 2M the dual system is usually
//! still invertible; with K > 2M it never is and the greedy active-set
//! reduction takes over.

use mmfcast::baselines::{mrt_weakest, sum_eig};
use mmfcast::solver::snrs;
use mmfcast::{generate_iid, solve, SolverConfig};

fn min(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn main() -> anyhow::Result<()> {
    let pt = 10.0;
    for (m, k) in [(8, 10), (2, 5)] {
        let h = generate_iid(3, m, k, 1.0)?;
        let sol = solve(&h, pt, &SolverConfig::default())?;
        let r = &sol.report;
        println!("M={m} K={k}: case {} outlook {:?}", r.rank.case.label(), r.rank.outlook);
        println!("  rcond Re{{B}} {:.2e}, rcond D {:.2e}", r.rank.re_gram_rcond, r.rank.d_rcond);
        println!("  solver       {:.5}  (heuristic {}, certified {})", r.min_snr, r.heuristic, r.certified);
        println!("  mrt_weakest  {:.5}", min(&snrs(&mrt_weakest(&h, pt)?, &h)?));
        println!("  sum_eig      {:.5}", min(&snrs(&sum_eig(&h, pt)?, &h)?));
        println!("  active users {:?}", sol.dual.active);
    }
    Ok(())
}
