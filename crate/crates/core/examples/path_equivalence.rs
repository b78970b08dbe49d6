//! The two routes to the balanced dual weights: the closed-form level
//! quadratic and the linear system D λ = d(μ) with a bisection on μ.

use mmfcast::linalg::phase_distance;
use mmfcast::solver::{bisect_mu, build_dual_system, reconstruct_w, solve_lambda_qp, update_beta};
use mmfcast::{generate_iid, Precoder, SolverConfig};

fn main() -> anyhow::Result<()> {
    let cfg = SolverConfig::default();
    let pt = 10.0;
    for (m, k) in [(4, 2), (6, 4), (10, 5)] {
        let h = generate_iid(5, m, k, 1.0)?;
        let w0 = Precoder::normalized(h.matrix().column_sum(), pt)?;
        let beta = update_beta(&w0, &h)?;
        let sys = build_dual_system(&beta, &h, pt)?;

        let qp = solve_lambda_qp(&sys, cfg.cond_threshold)?;
        let lin = bisect_mu(&sys, &cfg)?;
        let wq = reconstruct_w(&qp.lambda, &sys)?;
        let dl = qp.lambda.iter().zip(&lin.lambda).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("M={m} K={k}");
        println!("  qp:     mu {:+.3e}  z {:.6}  lambda {:?}", qp.mu, qp.z, qp.lambda);
        println!("  linear: mu {:+.3e}  probes {}", lin.mu, lin.probes);
        println!(
            "  max |dlambda| {dl:.2e}, precoder gap {:.2e}",
            phase_distance(wq.vector(), lin.precoder.vector())
        );
    }
    Ok(())
}
