//! HARQ delay calculus.
//!
//! Legacy scheduling uses one fixed DL-data-to-ACK (DD2A) delay and one fixed
//! UL-grant-to-data (UG2D) delay. The variable-delay scheme gives every TB `j`
//! of a HARQ cycle its own delay so that all data blocks of the cycle can be
//! sent back to back and all ACKs (or UL data) follow after a single switch.
//!
//! Positions and delays are in subframes (SF). TB positions `j` are 1-based.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "dl")]
    Downlink,
    #[serde(rename = "ul")]
    Uplink,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Downlink => f.write_str("DL"),
            Direction::Uplink => f.write_str("UL"),
        }
    }
}

/// How grants are issued within a cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GrantMode {
    /// STBG: one PDCCH block per TB.
    #[serde(rename = "stbg")]
    Single,
    /// MTBG: one PDCCH block schedules every TB of the cycle.
    #[serde(rename = "mtbg")]
    Multiple,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AckBundling {
    None,
    /// `n_bundle` ACKs share one PUCCH transmission. Downlink only.
    Bundled,
}

/// Repetition count of a physical channel, uniform or listed per TB.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Repetitions {
    Uniform(u32),
    PerTb(Vec<u32>),
}

impl Repetitions {
    /// Repetitions of TB `k` (1-based).
    pub fn of(&self, k: u32) -> u32 {
        match self {
            Repetitions::Uniform(r) => *r,
            Repetitions::PerTb(v) => v[(k - 1) as usize],
        }
    }

    /// Sum of repetitions over TBs `from..=to`; zero when the range is empty.
    pub fn sum(&self, from: u32, to: u32) -> u32 {
        (from..=to).map(|k| self.of(k)).sum()
    }

    fn check(&self, name: &str, n_tbphc: u32) -> Result<()> {
        match self {
            Repetitions::Uniform(0) => Err(Error::invalid(format!("{name} must be >= 1"))),
            Repetitions::Uniform(_) => Ok(()),
            Repetitions::PerTb(v) => {
                if v.len() != n_tbphc as usize {
                    return Err(Error::invalid(format!(
                        "{name} lists {} TBs but the cycle holds {n_tbphc}",
                        v.len()
                    )));
                }
                if v.contains(&0) {
                    return Err(Error::invalid(format!("{name} entries must be >= 1")));
                }
                Ok(())
            }
        }
    }
}

impl From<u32> for Repetitions {
    fn from(r: u32) -> Self {
        Repetitions::Uniform(r)
    }
}

/// Everything that shapes one HARQ cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleParams {
    /// TBs scheduled per HARQ cycle.
    pub n_tbphc: u32,
    pub rep_pdcch: u32,
    pub rep_pdsch: Repetitions,
    pub rep_pusch: Repetitions,
    pub rep_pucch: u32,
    /// Rx/Tx switching time.
    pub n_switch: u32,
    /// DL grant to DL data gap.
    pub n_dg2d: u32,
    /// Minimum DD2A; also the fixed DD2A of legacy scheduling.
    pub dd2a_min: u32,
    /// Minimum UG2D; also the fixed UG2D of legacy scheduling.
    pub ug2d_min: u32,
    pub n_bundle: u32,
    pub grant_mode: GrantMode,
    pub bundling: AckBundling,
}

impl Default for CycleParams {
    fn default() -> Self {
        CycleParams {
            n_tbphc: 1,
            rep_pdcch: 1,
            rep_pdsch: Repetitions::Uniform(1),
            rep_pusch: Repetitions::Uniform(1),
            rep_pucch: 1,
            n_switch: 1,
            n_dg2d: 1,
            dd2a_min: 3,
            ug2d_min: 3,
            n_bundle: 1,
            grant_mode: GrantMode::Single,
            bundling: AckBundling::None,
        }
    }
}

impl CycleParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_tbphc == 0 {
            return Err(Error::invalid("n_tbphc must be >= 1"));
        }
        if self.rep_pdcch == 0 || self.rep_pucch == 0 {
            return Err(Error::invalid("control channel repetitions must be >= 1"));
        }
        if self.n_bundle == 0 {
            return Err(Error::invalid("n_bundle must be >= 1"));
        }
        self.rep_pdsch.check("rep_pdsch", self.n_tbphc)?;
        self.rep_pusch.check("rep_pusch", self.n_tbphc)?;
        Ok(())
    }

    pub fn validate_for(&self, direction: Direction) -> Result<()> {
        self.validate()?;
        if direction == Direction::Uplink && self.bundling == AckBundling::Bundled {
            return Err(Error::invalid(
                "ACK bundling only applies to downlink cycles",
            ));
        }
        Ok(())
    }

    /// Repetitions of the data channel carrying TBs in `direction`.
    pub fn data_reps(&self, direction: Direction) -> &Repetitions {
        match direction {
            Direction::Downlink => &self.rep_pdsch,
            Direction::Uplink => &self.rep_pusch,
        }
    }

    /// Data subframes of the whole cycle.
    pub fn data_total(&self, direction: Direction) -> u32 {
        self.data_reps(direction).sum(1, self.n_tbphc)
    }

    /// Number of PDCCH blocks in a variable-delay cycle.
    pub fn grant_blocks(&self) -> u32 {
        match self.grant_mode {
            GrantMode::Single => self.n_tbphc,
            GrantMode::Multiple => 1,
        }
    }

    pub fn effective_bundle(&self) -> u32 {
        match self.bundling {
            AckBundling::None => 1,
            AckBundling::Bundled => self.n_bundle,
        }
    }

    /// Number of PUCCH blocks in a downlink variable-delay cycle.
    pub fn ack_blocks(&self) -> u32 {
        self.n_tbphc.div_ceil(self.effective_bundle())
    }

    /// First TB sharing an ACK with TB `j`.
    pub fn ack_group_leader(&self, j: u32) -> u32 {
        let b = self.effective_bundle();
        (j - 1) / b * b + 1
    }

    fn check_position(&self, j: u32) -> Result<()> {
        if j == 0 || j > self.n_tbphc {
            return Err(Error::invalid(format!(
                "TB position {j} outside 1..={}",
                self.n_tbphc
            )));
        }
        Ok(())
    }
}

/// Per-TB delays for one HARQ cycle: DD2A for downlink, UG2D for uplink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelayPlan {
    pub direction: Direction,
    /// `delays[j - 1]` belongs to TB `j`.
    pub delays: Vec<u32>,
}

impl DelayPlan {
    pub fn delay(&self, j: u32) -> u32 {
        self.delays[(j - 1) as usize]
    }

    pub fn min_delay(&self) -> u32 {
        self.delays.iter().copied().min().unwrap_or(0)
    }
}

/// Position of the subframe that follows a fixed delay after `anchor_sf`.
///
/// Downlink: `anchor_sf` is the last SF of DL data and the result is the ACK.
/// Uplink: `anchor_sf` is the last SF of the grant and the result is the first
/// SF of UL data.
pub fn fixed_position(anchor_sf: u32, fixed_delay: u32) -> u32 {
    anchor_sf + fixed_delay + 1
}

/// HARQ processes needed to keep the link busy over one round trip, with
/// `rep_data` repetitions per TB. `rep_data = 1` gives the unrepeated bound.
pub fn required_harq_count(rtt_ms: f64, t_tb_ms: f64, rep_data: u32) -> u32 {
    ceil_count(rtt_ms / (f64::from(rep_data) * t_tb_ms))
}

/// Variable DD2A of TB `j`: the remaining TBs' data, the ACKs of TBs before it
/// and one switch.
pub fn dd2a_variable(params: &CycleParams, j: u32) -> Result<u32> {
    params.check_position(j)?;
    let remaining = params.rep_pdsch.sum(j + 1, params.n_tbphc);
    Ok(remaining + (j - 1) * params.rep_pucch + params.n_switch)
}

/// Variable DD2A of TB `j` when `n_bundle` ACKs share one PUCCH block.
pub fn dd2a_bundled(params: &CycleParams, j: u32) -> Result<u32> {
    params.check_position(j)?;
    if params.n_bundle == 0 {
        return Err(Error::invalid("n_bundle must be >= 1"));
    }
    let remaining = params.rep_pdsch.sum(j + 1, params.n_tbphc);
    Ok(remaining + (j - 1) / params.n_bundle * params.rep_pucch + params.n_switch)
}

/// Variable UG2D of TB `j`: the grants still to come after grant `j`, the UL
/// data of the TBs before it and one switch.
///
/// With MTBG the single grant is the last PDCCH block, so the first term is zero.
pub fn ug2d_variable(params: &CycleParams, j: u32) -> Result<u32> {
    params.check_position(j)?;
    let grants_after = match params.grant_mode {
        GrantMode::Single => params.n_tbphc - j,
        GrantMode::Multiple => 0,
    };
    let previous = params.rep_pusch.sum(1, j - 1);
    Ok(grants_after * params.rep_pdcch + previous + params.n_switch)
}

/// The delay of every TB in the cycle, picking the formula that matches the
/// direction and bundling mode.
pub fn delay_plan(params: &CycleParams, direction: Direction) -> Result<DelayPlan> {
    params.validate_for(direction)?;
    let delays = (1..=params.n_tbphc)
        .map(|j| match (direction, params.bundling) {
            (Direction::Uplink, _) => ug2d_variable(params, j),
            (Direction::Downlink, AckBundling::None) => dd2a_variable(params, j),
            (Direction::Downlink, AckBundling::Bundled) => dd2a_bundled(params, j),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DelayPlan { direction, delays })
}

/// HARQ processes needed to run `n_tbphc` TBs per cycle when the round trip
/// and the base station's ACK processing (`ack_proc_sf`) are spread over the
/// cycle.
///
/// The data term uses the channel of `direction` (PDSCH or PUSCH); the grant,
/// DG2D, ACK and switching terms are taken from `params` as they are.
pub fn harq_for_tbphc(
    params: &CycleParams,
    direction: Direction,
    rtt_ms: f64,
    t_tb_ms: f64,
    ack_proc_sf: u32,
) -> u32 {
    let n = f64::from(params.n_tbphc);
    let cycle_sf = params.rep_pdcch
        + params.n_dg2d
        + params.data_total(direction)
        + params.n_tbphc * params.rep_pucch
        + 2 * params.n_switch;
    let wait_ms = rtt_ms + f64::from(ack_proc_sf) * t_tb_ms;
    ceil_count(n * (1.0 + wait_ms / (t_tb_ms * f64::from(cycle_sf))))
}

// Values that are integers on paper can come out a few ulps high.
fn ceil_count(x: f64) -> u32 {
    (x - 1e-9).ceil().max(0.0) as u32
}
