use std::fs;
use std::path::Path;

use serde::Serialize;

use super::sweep::{Snapshot, SweepResult};
use super::{svg, BenchError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
    /// Line chart; `db` plots 10·log10 of the SNR.
    Svg { db: bool },
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

/// Aggregate section, a blank line, then the per-record section.
pub fn to_csv_string(result: &SweepResult) -> Result<String, BenchError> {
    let mut agg = csv::Writer::from_writer(Vec::new());
    agg.write_record(["method", "pt_db", "mean_min_snr", "n_ok", "n_failed"])?;
    for a in &result.aggregates {
        agg.write_record([
            a.method.name().to_string(),
            a.pt_db.to_string(),
            opt(&a.mean_min_snr),
            a.n_ok.to_string(),
            a.n_failed.to_string(),
        ])?;
    }
    let mut rec = csv::Writer::from_writer(Vec::new());
    rec.write_record(["method", "pt_db", "realization", "min_snr", "balanced", "rank_case", "iters", "wall_ms"])?;
    for r in &result.records {
        rec.write_record([
            r.method.name().to_string(),
            r.pt_db.to_string(),
            r.realization.to_string(),
            opt(&r.min_snr),
            opt(&r.balanced),
            r.rank_case.label().to_string(),
            opt(&r.iters),
            opt(&r.wall_ms),
        ])?;
    }
    let mut out = into_string(agg)?;
    out.push('\n');
    out.push_str(&into_string(rec)?);
    Ok(out)
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String, BenchError> {
    let bytes = w.into_inner().map_err(|e| BenchError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn read_json(path: impl AsRef<Path>) -> Result<SweepResult, BenchError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| BenchError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), BenchError> {
    fs::write(path, text).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn emit(result: &SweepResult, format: EmitFormat, path: impl AsRef<Path>) -> Result<(), BenchError> {
    let path = path.as_ref();
    let text = match format {
        EmitFormat::Csv => to_csv_string(result)?,
        EmitFormat::Json => to_json_string(result),
        EmitFormat::Svg { db } => svg::line_chart(result, db),
    };
    write(path, &text)
}

/// `method,user,snr` rows.
pub fn write_snapshot_csv(snapshot: &Snapshot, path: impl AsRef<Path>) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "user", "snr"])?;
    for row in &snapshot.rows {
        for (u, s) in row.per_user_snr.iter().enumerate() {
            w.write_record([row.method.name().to_string(), u.to_string(), s.to_string()])?;
        }
    }
    write(path.as_ref(), &into_string(w)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{run_sweep, SweepConfig};

    #[test]
    fn empty_result_is_header_only() {
        let res = SweepResult {
            config: SweepConfig::new(2, 2, vec![0.0], 1, 0),
            methods: vec![],
            aggregates: vec![],
            records: vec![],
        };
        let csv = to_csv_string(&res).unwrap();
        assert_eq!(
            csv,
            "method,pt_db,mean_min_snr,n_ok,n_failed\n\nmethod,pt_db,realization,min_snr,balanced,rank_case,iters,wall_ms\n"
        );
    }

    #[test]
    fn two_methods_three_points() {
        let mut cfg = SweepConfig::new(3, 2, vec![0.0, 3.0, 6.0], 2, 4);
        cfg.baselines = false;
        cfg.oracle = Some(crate::baselines::OracleConfig {
            samples: 100,
            ..Default::default()
        });
        let res = run_sweep(&cfg).unwrap();
        let csv = to_csv_string(&res).unwrap();
        let sections: Vec<&str> = csv.split("\n\n").collect();
        assert_eq!(sections.len(), 2);
        assert_eq!(sections[0].lines().count(), 1 + 6);
        assert_eq!(sections[1].lines().count(), 1 + 2 * 3 * 2);
        assert!(sections[1].lines().nth(1).unwrap().contains(",K<=M,"));
    }

    #[test]
    fn json_round_trip() {
        let cfg = SweepConfig::new(3, 4, vec![0.0, 10.0], 2, 11);
        let res = run_sweep(&cfg).unwrap();
        let text = to_json_string(&res);
        let back: SweepResult = serde_json::from_str(&text).unwrap();
        assert_eq!(back, res);
    }

    #[test]
    fn pinned_sweep_matches_golden_csv() {
        let cfg = SweepConfig::new(4, 3, vec![0.0, 5.0, 10.0], 5, 2024);
        let csv = to_csv_string(&run_sweep(&cfg).unwrap()).unwrap();
        assert_eq!(csv, include_str!("../../tests/golden/tiny_sweep.csv"));
    }
}
