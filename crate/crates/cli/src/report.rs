//! CSV rows for scenario results.
//!
//! Numbers are written with fixed precision so identical runs give identical
//! bytes.

use std::io::Write;

use crate::config::ScenarioConfig;
use crate::error::AppResult;
use crate::scenario::ScenarioOutcome;

pub const COLUMNS: [&str; 17] = [
    "id",
    "altitude_km",
    "payload",
    "elevation_deg",
    "rtt_ms",
    "snr_db",
    "tbs_bits",
    "n_rep",
    "mode",
    "n_tbphc",
    "n_harq_required",
    "suf",
    "throughput_bps",
    "gain_pct",
    "power_nw",
    "mc_goodput_bps",
    "mc_retransmission_rate",
];

/// A finished scenario, or one whose link could not meet its target.
#[derive(Debug, Clone, PartialEq)]
pub enum RowResult {
    Done(Box<ScenarioOutcome>),
    Infeasible {
        rtt_ms: Option<f64>,
        snr_db: Option<f64>,
    },
}

pub fn row(cfg: &ScenarioConfig, result: &RowResult) -> Vec<String> {
    let g = &cfg.geometry;
    let mut r = vec![
        cfg.id.clone(),
        format!("{:.1}", g.altitude_km),
        g.payload.to_string(),
        format!("{:.1}", g.elevation_deg),
    ];
    let opt = |v: Option<f64>, prec: usize| v.map(|x| format!("{x:.prec$}")).unwrap_or_default();
    match result {
        RowResult::Done(out) => {
            let m = &out.metrics;
            r.extend([
                format!("{:.3}", out.link.rtt_ms),
                format!("{:.2}", out.link.snr_db),
                cfg.tbs_bits.to_string(),
                out.link.n_rep.to_string(),
                cfg.mode.to_string(),
                out.plan.params.n_tbphc.to_string(),
                out.plan.n_harq_required.to_string(),
                format!("{:.6}", m.suf),
                format!("{:.1}", m.throughput_bps),
                format!("{:.2}", m.gain_vs_baseline * 100.0),
                format!("{:.3}", m.power_w * 1e9),
                opt(out.monte_carlo.as_ref().map(|mc| mc.goodput_bps), 1),
                opt(out.monte_carlo.as_ref().map(|mc| mc.retransmission_rate), 6),
            ]);
        }
        RowResult::Infeasible { rtt_ms, snr_db } => {
            r.extend([
                opt(*rtt_ms, 3),
                opt(*snr_db, 2),
                cfg.tbs_bits.to_string(),
                String::new(),
            ]);
            r.push(cfg.mode.to_string());
            r.extend(std::iter::repeat_n(String::new(), COLUMNS.len() - r.len()));
        }
    }
    r
}

pub fn write_csv<W: Write>(out: W, rows: &[Vec<String>]) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()
        .map_err(|e| crate::error::AppError::io("<csv>", e))?;
    Ok(())
}

pub fn csv_string(rows: &[Vec<String>]) -> AppResult<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("CSV fields are UTF-8"))
}
