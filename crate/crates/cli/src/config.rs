//! Scenario files.
//!
//! A scenario is a TOML document; sections may be written as tables or as
//! dotted keys (`geometry.altitude_km = 600.0`). Unknown keys are rejected.
//! Protocol-dependent values that are left out take the protocol's defaults.

use std::path::Path;

use ntn_harq::geometry::{OrbitGeometry, Payload, DEFAULT_FEEDER_ELEVATION_DEG};
use ntn_harq::harq::{AckBundling, CycleParams, Direction, GrantMode, Repetitions};
use ntn_harq::linkbudget::LinkBudgetParams;
use ntn_harq::metrics::SchedulingMode;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protocol {
    #[serde(rename = "lte-m")]
    LteM,
    #[serde(rename = "nb-iot")]
    NbIot,
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Protocol::LteM => f.write_str("lte-m"),
            Protocol::NbIot => f.write_str("nb-iot"),
        }
    }
}

/// Timing constants a protocol fixes when the scenario does not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolDefaults {
    pub ug2d_min: u32,
    pub dd2a_min: u32,
    pub n_dg2d: u32,
    pub n_switch: u32,
    pub max_harq: u32,
}

impl Protocol {
    pub fn defaults(self, extended_harq: bool) -> ProtocolDefaults {
        match self {
            Protocol::LteM => ProtocolDefaults {
                ug2d_min: 3,
                dd2a_min: 3,
                n_dg2d: 1,
                n_switch: 1,
                max_harq: 8,
            },
            Protocol::NbIot => ProtocolDefaults {
                ug2d_min: 8,
                dd2a_min: 12,
                n_dg2d: 4,
                n_switch: 2,
                max_harq: if extended_harq { 4 } else { 2 },
            },
        }
    }

    /// Published throughput gain (percent) and the tolerance it is matched to.
    pub fn calibration_target(self) -> (f64, f64) {
        match self {
            Protocol::LteM => (28.0, 2.0),
            Protocol::NbIot => (31.0, 3.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub altitude_km: f64,
    pub elevation_deg: f64,
    #[serde(default = "default_feeder")]
    pub feeder_elevation_deg: f64,
    pub payload: Payload,
    /// Replaces the computed round trip; the link budget still uses the geometry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtt_override_ms: Option<f64>,
}

fn default_feeder() -> f64 {
    DEFAULT_FEEDER_ELEVATION_DEG
}

impl GeometryConfig {
    pub fn orbit(&self) -> AppResult<OrbitGeometry> {
        let geom = OrbitGeometry {
            altitude_km: self.altitude_km,
            service_elevation_deg: self.elevation_deg,
            feeder_elevation_deg: self.feeder_elevation_deg,
            payload: self.payload,
        };
        geom.validate()
            .map_err(|e| AppError::Config(e.to_string()))?;
        Ok(geom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleConfig {
    /// TBs per cycle. When absent, the largest count the HARQ processes allow.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_tbphc: Option<u32>,
    #[serde(default = "one")]
    pub rep_pdcch: u32,
    /// Data repetitions; when absent they come from the BLER table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rep_data: Option<Repetitions>,
    #[serde(default = "one")]
    pub rep_pucch: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_switch: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_dg2d: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dd2a_min: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ug2d_min: Option<u32>,
    #[serde(default = "one")]
    pub n_bundle: u32,
    /// STBG for uplink and MTBG for downlink when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grant_mode: Option<GrantMode>,
    #[serde(default = "no_bundling")]
    pub bundling: AckBundling,
}

fn one() -> u32 {
    1
}

fn no_bundling() -> AckBundling {
    AckBundling::None
}

impl Default for CycleConfig {
    fn default() -> Self {
        CycleConfig {
            n_tbphc: None,
            rep_pdcch: 1,
            rep_data: None,
            rep_pucch: 1,
            n_switch: None,
            n_dg2d: None,
            dd2a_min: None,
            ug2d_min: None,
            n_bundle: 1,
            grant_mode: None,
            bundling: AckBundling::None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarqConfig {
    /// Use the extended HARQ process count where the protocol has one.
    #[serde(default)]
    pub extended: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_processes: Option<u32>,
    /// Base station ACK processing time in subframes.
    #[serde(default)]
    pub ack_proc_sf: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerConfig {
    pub efficiency_mops_per_mw: f64,
    pub op_rate_per_s: f64,
}

impl Default for PowerConfig {
    /// A 144 MOPS/mW processor evaluating the delay once per subframe.
    fn default() -> Self {
        PowerConfig {
            efficiency_mops_per_mw: 144.0,
            op_rate_per_s: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSettings {
    pub bler_per_attempt: Vec<f64>,
    pub n_cycles: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_gain_pct: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    pub protocol: Protocol,
    #[serde(default = "default_mode")]
    pub mode: SchedulingMode,
    pub direction: Direction,
    pub tbs_bits: u32,
    #[serde(default = "default_target_bler")]
    pub target_bler: f64,
    #[serde(default = "default_t_tb_ms")]
    pub t_tb_ms: f64,
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub link: LinkBudgetParams,
    #[serde(default)]
    pub cycle: CycleConfig,
    #[serde(default)]
    pub harq: HarqConfig,
    #[serde(default)]
    pub power: PowerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloSettings>,
    #[serde(default)]
    pub calibration: CalibrationConfig,
}

fn default_mode() -> SchedulingMode {
    SchedulingMode::ProposedVariable
}

fn default_target_bler() -> f64 {
    0.1
}

fn default_t_tb_ms() -> f64 {
    1.0
}

impl ScenarioConfig {
    pub fn load(path: impl AsRef<Path>) -> AppResult<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            AppError::Config(msg) => AppError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> AppResult<Self> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| AppError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_value(value: toml::Value) -> AppResult<Self> {
        let cfg: ScenarioConfig = value
            .try_into()
            .map_err(|e: toml::de::Error| AppError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_value(&self) -> toml::Value {
        toml::Value::try_from(self).expect("scenario configs always serialize")
    }

    pub fn validate(&self) -> AppResult<()> {
        let fail = |msg: String| Err(AppError::Config(msg));
        if self.tbs_bits == 0 {
            return fail("tbs_bits must be positive".into());
        }
        if !(self.target_bler > 0.0 && self.target_bler < 1.0) {
            return fail(format!("target_bler {} outside (0, 1)", self.target_bler));
        }
        if !(self.t_tb_ms > 0.0) {
            return fail("t_tb_ms must be positive".into());
        }
        if let Some(rtt) = self.geometry.rtt_override_ms {
            if !(rtt >= 0.0) {
                return fail(format!("rtt_override_ms must be >= 0, got {rtt}"));
            }
        }
        self.geometry.orbit()?;
        self.link
            .validate()
            .map_err(|e| AppError::Config(e.to_string()))?;
        if self.max_harq() == 0 {
            return fail("harq.max_processes must be >= 1".into());
        }
        if !(self.power.efficiency_mops_per_mw > 0.0 && self.power.op_rate_per_s > 0.0) {
            return fail("power settings must be positive".into());
        }
        if self.direction == Direction::Uplink && self.cycle.bundling == AckBundling::Bundled {
            return fail("ACK bundling only applies to downlink scenarios".into());
        }
        Ok(())
    }

    pub fn protocol_defaults(&self) -> ProtocolDefaults {
        self.protocol.defaults(self.harq.extended)
    }

    pub fn max_harq(&self) -> u32 {
        self.harq
            .max_processes
            .unwrap_or(self.protocol_defaults().max_harq)
    }

    pub fn t_tb_s(&self) -> f64 {
        self.t_tb_ms * 1e-3
    }

    /// Cycle parameters for `n_tbphc` TBs at `n_rep` data repetitions.
    pub fn cycle_params(&self, n_rep: u32, n_tbphc: u32) -> CycleParams {
        let d = self.protocol_defaults();
        let c = &self.cycle;
        let data = c.rep_data.clone().unwrap_or(Repetitions::Uniform(n_rep));
        let grant_mode = c.grant_mode.unwrap_or(match self.direction {
            Direction::Uplink => GrantMode::Single,
            Direction::Downlink => GrantMode::Multiple,
        });
        CycleParams {
            n_tbphc,
            rep_pdcch: c.rep_pdcch,
            rep_pdsch: data.clone(),
            rep_pusch: data,
            rep_pucch: c.rep_pucch,
            n_switch: c.n_switch.unwrap_or(d.n_switch),
            n_dg2d: c.n_dg2d.unwrap_or(d.n_dg2d),
            dd2a_min: c.dd2a_min.unwrap_or(d.dd2a_min),
            ug2d_min: c.ug2d_min.unwrap_or(d.ug2d_min),
            n_bundle: c.n_bundle,
            grant_mode,
            bundling: c.bundling,
        }
    }
}
