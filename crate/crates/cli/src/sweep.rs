//! Cartesian parameter sweeps over a scenario template.

use ntn_harq::bler::BlerTable;
use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::error::{AppError, AppResult};
use crate::report::{row, RowResult};
use crate::scenario::run_scenario;

/// One swept parameter: a dotted key and the values it takes.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<toml::Value>,
}

impl Axis {
    /// Parses `key=v1,v2,...`. Values are read as TOML scalars and fall back
    /// to bare strings, so `mode=legacy,proposed` needs no quoting.
    pub fn parse(spec: &str) -> AppResult<Self> {
        let (key, values) = spec
            .split_once('=')
            .ok_or_else(|| AppError::Config(format!("axis {spec:?} is not key=v1,v2,...")))?;
        let key = key.trim();
        if key.is_empty() || key.split('.').any(str::is_empty) {
            return Err(AppError::Config(format!("axis {spec:?} has an empty key")));
        }
        let values: Vec<toml::Value> = values
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(scalar)
            .collect();
        if values.is_empty() {
            return Err(AppError::Config(format!("axis {key} has no values")));
        }
        Ok(Axis {
            key: key.to_string(),
            values,
        })
    }
}

fn scalar(text: &str) -> toml::Value {
    format!("v = {text}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(text.to_string()))
}

/// Sets a dotted key, creating tables on the way. An integer written over a
/// float keeps the float type.
fn set_path(root: &mut toml::Value, key: &str, value: &toml::Value) -> AppResult<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let leaf = parts.pop().expect("split yields at least one part");
    let mut node = root;
    for part in parts {
        let table = node
            .as_table_mut()
            .ok_or_else(|| AppError::Config(format!("{key}: {part} is not a table")))?;
        node = table
            .entry(part)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| AppError::Config(format!("{key}: parent is not a table")))?;
    let value = match (table.get(leaf), value) {
        (Some(toml::Value::Float(_)), toml::Value::Integer(i)) => toml::Value::Float(*i as f64),
        _ => value.clone(),
    };
    table.insert(leaf.to_string(), value);
    Ok(())
}

/// Every combination of axis values, first axis varying slowest.
pub fn expand(template: &ScenarioConfig, axes: &[Axis]) -> AppResult<Vec<ScenarioConfig>> {
    let mut cells = vec![(template.to_value(), Vec::<String>::new())];
    for axis in axes {
        let mut next = Vec::with_capacity(cells.len() * axis.values.len());
        for (value, labels) in &cells {
            for v in &axis.values {
                let mut value = value.clone();
                set_path(&mut value, &axis.key, v)?;
                let mut labels = labels.clone();
                labels.push(format!("{}={}", axis.key, display(v)));
                next.push((value, labels));
            }
        }
        cells = next;
    }
    cells
        .into_iter()
        .map(|(value, labels)| {
            let mut cfg = ScenarioConfig::from_value(value)?;
            if !labels.is_empty() {
                cfg.id = format!("{}[{}]", template.id, labels.join(";"));
            }
            Ok(cfg)
        })
        .collect()
}

fn display(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Runs every cell in parallel and returns CSV rows in cell order.
///
/// Cells whose link misses the BLER target give a row with empty metrics;
/// any other error stops the sweep.
pub fn sweep(
    template: &ScenarioConfig,
    axes: &[Axis],
    table: &BlerTable,
) -> AppResult<Vec<Vec<String>>> {
    let cells = expand(template, axes)?;
    cells
        .par_iter()
        .map(|cfg| {
            let result = match run_scenario(cfg, table) {
                Ok(out) => RowResult::Done(Box::new(out)),
                Err(e) if e.exit_code() == 2 => {
                    let orbit = cfg.geometry.orbit()?;
                    let rtt = cfg
                        .geometry
                        .rtt_override_ms
                        .or(orbit.round_trip_time_ms().ok());
                    let snr = orbit
                        .service_slant_range_km()
                        .ok()
                        .and_then(|d| ntn_harq::linkbudget::snr_db(&cfg.link, d * 1e3).ok());
                    RowResult::Infeasible {
                        rtt_ms: rtt,
                        snr_db: snr,
                    }
                }
                Err(e) => return Err(e),
            };
            Ok(row(cfg, &result))
        })
        .collect()
}
