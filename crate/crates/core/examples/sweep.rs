//! Mean min-SNR against transmit power for all methods, written as CSV,
//! JSON and an SVG line chart.
//!
//! cargo run --release --example sweep -- [out_dir]

use std::path::PathBuf;

use mmfcast::baselines::OracleConfig;
use mmfcast::bench::{emit, run_sweep, EmitFormat, SweepConfig};

fn main() -> anyhow::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "sweep_out".into()));
    std::fs::create_dir_all(&out)?;

    let mut cfg = SweepConfig::new(4, 3, (0..=20).step_by(5).map(f64::from).collect(), 50, 1);
    cfg.oracle = Some(OracleConfig {
        samples: 5_000,
        refine: false,
        ..OracleConfig::default()
    });
    let result = run_sweep(&cfg)?;

    emit(&result, EmitFormat::Csv, out.join("sweep.csv"))?;
    emit(&result, EmitFormat::Json, out.join("sweep.json"))?;
    emit(&result, EmitFormat::Svg { db: true }, out.join("sweep.svg"))?;

    for a in &result.aggregates {
        println!("{:<12} {:>5} dB  {:>10.4}", a.method.name(), a.pt_db, a.mean_min_snr.unwrap_or(f64::NAN));
    }
    println!("wrote {}", out.display());
    Ok(())
}
