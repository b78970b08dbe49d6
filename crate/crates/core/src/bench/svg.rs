//! Minimal SVG charts: mean min-SNR against transmit power, and per-user bars.

use std::fmt::Write;

use super::sweep::{Method, Snapshot, SweepResult};

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn color(method: Method) -> &'static str {
    COLORS[method as usize % COLORS.len()]
}

fn to_db(v: f64) -> f64 {
    10.0 * v.log10()
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = values
            .filter(|v| v.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        Self { lo, hi }
    }

    fn frac(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }
}

fn header(out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{title}</text>"#, W / 2.0);
    let _ = writeln!(
        out,
        r#"<line x1="{PAD}" y1="{}" x2="{}" y2="{}" stroke="black"/><line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{}" stroke="black"/>"#,
        H - PAD,
        W - PAD,
        H - PAD,
        H - PAD
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#, W / 2.0, H - 16.0);
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{ylabel}</text>"#,
        H / 2.0,
        H / 2.0
    );
}

fn y_ticks(out: &mut String, axis: &Axis) {
    for i in 0..=4 {
        let v = axis.lo + (axis.hi - axis.lo) * i as f64 / 4.0;
        let y = H - PAD - axis.frac(v) * (H - 2.0 * PAD);
        let _ = writeln!(out, r#"<text x="{}" y="{y:.2}" text-anchor="end">{v:.3}</text>"#, PAD - 4.0);
    }
}

fn legend(out: &mut String, methods: &[Method]) {
    for (i, m) in methods.iter().enumerate() {
        let y = PAD + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            W - PAD - 110.0,
            y - 9.0,
            color(*m),
            W - PAD - 96.0,
            y,
            m.name()
        );
    }
}

/// Mean min-SNR per method against P_t in dB.
pub fn line_chart(result: &SweepResult, db: bool) -> String {
    let ys = |v: f64| if db { to_db(v) } else { v };
    let xa = Axis::new(result.config.pt_grid_db.iter().cloned());
    let ya = Axis::new(result.aggregates.iter().filter_map(|a| a.mean_min_snr.map(ys)));
    let mut out = String::new();
    let ylabel = if db { "mean min-SNR (dB)" } else { "mean min-SNR" };
    header(&mut out, "Minimum SNR vs transmit power", "P_t (dB)", ylabel);
    y_ticks(&mut out, &ya);
    for &p in &result.config.pt_grid_db {
        let x = PAD + xa.frac(p) * (W - 2.0 * PAD);
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{p}</text>"#, H - PAD + 16.0);
    }
    for &m in &result.methods {
        let pts: Vec<String> = result
            .aggregates
            .iter()
            .filter(|a| a.method == m)
            .filter_map(|a| {
                let v = ys(a.mean_min_snr?);
                let x = PAD + xa.frac(a.pt_db) * (W - 2.0 * PAD);
                let y = H - PAD - ya.frac(v) * (H - 2.0 * PAD);
                Some(format!("{x:.2},{y:.2}"))
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
            color(m),
            pts.join(" ")
        );
    }
    legend(&mut out, &result.methods);
    out.push_str("</svg>\n");
    out
}

/// Grouped bars: one group per user, one bar per method.
pub fn bar_chart(snapshot: &Snapshot, db: bool) -> String {
    let ys = |v: f64| if db { to_db(v) } else { v };
    let rows: Vec<_> = snapshot.rows.iter().filter(|r| r.error.is_none()).collect();
    let mut ya = Axis::new(rows.iter().flat_map(|r| r.per_user_snr.iter().map(|&v| ys(v))));
    if !db {
        ya.lo = ya.lo.min(0.0);
    }
    let mut out = String::new();
    let title = format!("Per-user SNR at P_t = {} dB", snapshot.pt_db);
    header(&mut out, &title, "user", if db { "SNR (dB)" } else { "SNR" });
    y_ticks(&mut out, &ya);
    let k = snapshot.k.max(1) as f64;
    let group = (W - 2.0 * PAD) / k;
    let bar = group * 0.8 / rows.len().max(1) as f64;
    let base = H - PAD - ya.frac(ya.lo.max(0.0).min(ya.hi)) * (H - 2.0 * PAD);
    for u in 0..snapshot.k {
        let gx = PAD + group * u as f64 + group * 0.1;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            gx + group * 0.4,
            H - PAD + 16.0,
            u + 1
        );
        for (i, r) in rows.iter().enumerate() {
            let Some(&v) = r.per_user_snr.get(u) else { continue };
            let y = H - PAD - ya.frac(ys(v)) * (H - 2.0 * PAD);
            let (top, h) = if y < base { (y, base - y) } else { (base, y - base) };
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{top:.2}" width="{bar:.2}" height="{h:.2}" fill="{}"><title>{} user {}: {v}</title></rect>"#,
                gx + bar * i as f64,
                color(r.method),
                r.method.name(),
                u + 1
            );
        }
    }
    let methods: Vec<Method> = rows.iter().map(|r| r.method).collect();
    legend(&mut out, &methods);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{run_sweep, snapshot_users, SweepConfig};

    #[test]
    fn line_chart_has_one_polyline_per_method() {
        let res = run_sweep(&SweepConfig::new(3, 2, vec![0.0, 10.0], 2, 1)).unwrap();
        let s = line_chart(&res, false);
        assert_eq!(s.matches("<polyline").count(), res.methods.len());
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(line_chart(&res, true).contains("(dB)"));
    }

    #[test]
    fn bar_chart_has_k_times_methods_bars() {
        let snap = snapshot_users(&SweepConfig::new(4, 3, vec![10.0], 1, 1)).unwrap();
        let s = bar_chart(&snap, false);
        assert_eq!(s.matches("<title>").count(), 3 * snap.rows.len());
    }
}
