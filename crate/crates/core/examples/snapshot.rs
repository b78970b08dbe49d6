//! Per-user SNRs of every method on one realization, as a bar chart.

use mmfcast::bench::{snapshot_users, svg, write_snapshot_csv, SweepConfig};

fn main() -> anyhow::Result<()> {
    let snap = snapshot_users(&SweepConfig::new(10, 5, vec![10.0], 1, 2))?;
    for row in &snap.rows {
        let bars: Vec<String> = row.per_user_snr.iter().map(|v| format!("{v:8.4}")).collect();
        println!("{:<12} {}  spread {:.1e}", row.method.name(), bars.join(" "), row.spread.unwrap_or(f64::NAN));
    }
    std::fs::write("snapshot.svg", svg::bar_chart(&snap, false))?;
    write_snapshot_csv(&snap, "snapshot.csv")?;
    println!("wrote snapshot.svg and snapshot.csv");
    Ok(())
}
