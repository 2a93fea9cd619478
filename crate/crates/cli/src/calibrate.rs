//! Search for the grant repetitions and ACK processing time that reproduce a
//! target throughput gain.

use std::ops::RangeInclusive;

use ntn_harq::bler::BlerTable;
use ntn_harq::metrics::SchedulingMode;
use toml_edit::{value, DocumentMut, Item, Table};

use crate::config::ScenarioConfig;
use crate::error::{AppError, AppResult};
use crate::scenario::run_scenario;

pub const PDCCH_REPS: RangeInclusive<u32> = 1..=8;
pub const ACK_PROC_SF: RangeInclusive<u32> = 0..=4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub rep_pdcch: u32,
    pub ack_proc_sf: u32,
    pub n_tbphc: u32,
    pub gain_pct: f64,
    pub target_pct: f64,
    pub tolerance_pct: f64,
}

impl Calibration {
    pub fn within_tolerance(&self) -> bool {
        (self.gain_pct - self.target_pct).abs() <= self.tolerance_pct
    }

    pub fn apply(&self, cfg: &mut ScenarioConfig) {
        cfg.cycle.rep_pdcch = self.rep_pdcch;
        cfg.harq.ack_proc_sf = self.ack_proc_sf;
    }
}

/// Scans the grid in order and keeps the first pair closest to the target.
/// Pairs the scheduler rejects are skipped.
pub fn calibrate(cfg: &ScenarioConfig, table: &BlerTable) -> AppResult<Calibration> {
    let (default_target, default_tol) = cfg.protocol.calibration_target();
    let target_pct = cfg.calibration.target_gain_pct.unwrap_or(default_target);
    let tolerance_pct = cfg.calibration.tolerance_pct.unwrap_or(default_tol);
    let mut best: Option<Calibration> = None;
    let mut last_err = None;
    for rep_pdcch in PDCCH_REPS {
        for ack_proc_sf in ACK_PROC_SF {
            let mut trial = cfg.clone();
            trial.mode = SchedulingMode::ProposedVariable;
            trial.cycle.rep_pdcch = rep_pdcch;
            trial.harq.ack_proc_sf = ack_proc_sf;
            let out = match run_scenario(&trial, table) {
                Ok(out) => out,
                Err(e) if e.exit_code() == 2 => return Err(e),
                Err(e) => {
                    last_err = Some(e);
                    continue;
                }
            };
            let cand = Calibration {
                rep_pdcch,
                ack_proc_sf,
                n_tbphc: out.plan.params.n_tbphc,
                gain_pct: out.metrics.gain_vs_baseline * 100.0,
                target_pct,
                tolerance_pct,
            };
            let closer = best.is_none_or(|b| {
                (cand.gain_pct - target_pct).abs() < (b.gain_pct - target_pct).abs()
            });
            if closer {
                best = Some(cand);
            }
        }
    }
    best.ok_or_else(|| {
        last_err.unwrap_or_else(|| AppError::Config("empty calibration grid".into()))
    })
}

/// Writes the calibrated pair into a scenario file, keeping its layout.
pub fn write_calibration(text: &str, cal: &Calibration) -> AppResult<String> {
    let mut doc: DocumentMut = text
        .parse()
        .map_err(|e: toml_edit::TomlError| AppError::Config(e.to_string()))?;
    set(&mut doc, "cycle", "rep_pdcch", i64::from(cal.rep_pdcch))?;
    set(&mut doc, "harq", "ack_proc_sf", i64::from(cal.ack_proc_sf))?;
    Ok(doc.to_string())
}

fn set(doc: &mut DocumentMut, section: &str, key: &str, v: i64) -> AppResult<()> {
    let root = doc.as_table_mut();
    if !root.contains_key(section) {
        let mut t = Table::new();
        t.set_implicit(true);
        t.set_dotted(
            root.iter()
                .any(|(_, item)| item.as_table().is_some_and(|t| t.is_dotted())),
        );
        root.insert(section, Item::Table(t));
    }
    let table = root[section]
        .as_table_like_mut()
        .ok_or_else(|| AppError::Config(format!("{section} is not a table")))?;
    match table.get_mut(key) {
        Some(item) => *item = value(v),
        None => {
            table.insert(key, value(v));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_dotted_keys_in_place() {
        let text = "id = \"x\"\ncycle.rep_pdcch = 1 # tuned\ngeometry.payload = \"transparent\"\n";
        let cal = Calibration {
            rep_pdcch: 3,
            ack_proc_sf: 2,
            n_tbphc: 4,
            gain_pct: 28.0,
            target_pct: 28.0,
            tolerance_pct: 2.0,
        };
        let out = write_calibration(text, &cal).unwrap();
        let parsed: toml::Table = out.parse().unwrap();
        assert_eq!(parsed["cycle"]["rep_pdcch"].as_integer(), Some(3));
        assert_eq!(parsed["harq"]["ack_proc_sf"].as_integer(), Some(2));
        assert!(out.contains("cycle.rep_pdcch = 3"), "{out}");
        assert!(out.contains("harq.ack_proc_sf = 2"), "{out}");
    }

    #[test]
    fn writes_into_table_sections() {
        let text = "id = \"x\"\n\n[harq]\nextended = true\n";
        let cal = Calibration {
            rep_pdcch: 5,
            ack_proc_sf: 0,
            n_tbphc: 2,
            gain_pct: 31.0,
            target_pct: 31.0,
            tolerance_pct: 3.0,
        };
        let out = write_calibration(text, &cal).unwrap();
        let parsed: toml::Table = out.parse().unwrap();
        assert_eq!(parsed["cycle"]["rep_pdcch"].as_integer(), Some(5));
        assert_eq!(parsed["harq"]["ack_proc_sf"].as_integer(), Some(0));
        assert_eq!(parsed["harq"]["extended"].as_bool(), Some(true));
    }
}
