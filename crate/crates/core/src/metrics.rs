//! Subframe utilisation, throughput, gain and the power cost of computing
//! variable delays.
//!
//! The cycle lengths here are closed forms. The scheduler builds the same
//! cycles slot by slot; the two must agree exactly.

use serde::{Deserialize, Serialize};

use crate::harq::{AckBundling, CycleParams, Direction};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchedulingMode {
    /// One TB per cycle with fixed DD2A/UG2D.
    #[serde(rename = "legacy")]
    LegacyFixed,
    /// Several TBs per cycle with per-TB variable delays.
    #[serde(rename = "proposed")]
    ProposedVariable,
}

impl std::fmt::Display for SchedulingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SchedulingMode::LegacyFixed => f.write_str("legacy"),
            SchedulingMode::ProposedVariable => f.write_str("proposed"),
        }
    }
}

/// Fraction of cycle time that carries payload: `n_data / (n_rep · n_hc)`.
pub fn suf_generic(n_data: u32, n_rep: u32, n_hc: u32) -> Result<f64> {
    if n_rep == 0 || n_hc == 0 {
        return Err(Error::invalid(
            "SUF needs a non-zero repetition count and cycle length",
        ));
    }
    if u64::from(n_data) > u64::from(n_rep) * u64::from(n_hc) {
        return Err(Error::invalid(format!(
            "{n_data} data subframes do not fit in {n_hc} cycle subframes at {n_rep} repetitions"
        )));
    }
    Ok(f64::from(n_data) / (f64::from(n_rep) * f64::from(n_hc)))
}

/// Length of one HARQ cycle in subframes.
///
/// Legacy cycles hold one TB and one switch block. Variable-delay cycles hold
/// `n_tbphc` TBs and two switch blocks; the fixed minimum delay only shows up
/// when the grants (UL) or ACKs (DL) of the cycle are too few to cover it.
pub fn cycle_length(
    params: &CycleParams,
    direction: Direction,
    mode: SchedulingMode,
) -> Result<u32> {
    params.validate_for(direction)?;
    let p = params.rep_pdcch;
    let a = params.rep_pucch;
    let s = params.n_switch;
    let data = params.data_total(direction);
    match mode {
        SchedulingMode::LegacyFixed => {
            if params.n_tbphc != 1 {
                return Err(Error::invalid(
                    "legacy scheduling has a closed form only for one TB per cycle",
                ));
            }
            Ok(match direction {
                Direction::Downlink => p + params.n_dg2d + data + a + params.dd2a_min + s,
                Direction::Uplink => p + data + params.ug2d_min + s,
            })
        }
        SchedulingMode::ProposedVariable => {
            let g = params.grant_blocks();
            Ok(match direction {
                Direction::Downlink => {
                    let acks_after_first = (params.ack_blocks() - 1) * a;
                    g * p + params.n_dg2d + data + a + params.dd2a_min.max(acks_after_first) + 2 * s
                }
                Direction::Uplink => {
                    let grants_after_first = (g - 1) * p;
                    p + params.ug2d_min.max(grants_after_first) + data + 2 * s
                }
            })
        }
    }
}

/// TBs delivered per cycle subframe.
pub fn suf_closed_form(
    params: &CycleParams,
    direction: Direction,
    mode: SchedulingMode,
) -> Result<f64> {
    let n_hc = cycle_length(params, direction, mode)?;
    Ok(f64::from(params.n_tbphc) / f64::from(n_hc))
}

/// Useful data rate in bit/s.
pub fn throughput_bps(suf: f64, tbs_bits: u32, t_tb_s: f64) -> f64 {
    suf * f64::from(tbs_bits) / t_tb_s
}

/// Relative gain of `suf` over `baseline`; 0.28 means 28 % more throughput.
pub fn gain(suf: f64, baseline: f64) -> f64 {
    suf / baseline - 1.0
}

/// Which delay formula a UE evaluates every subframe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DelayScheme {
    Dd2a,
    Ug2d,
    Dd2aBundled,
}

impl DelayScheme {
    pub fn for_cycle(params: &CycleParams, direction: Direction) -> Self {
        match (direction, params.bundling) {
            (Direction::Uplink, _) => DelayScheme::Ug2d,
            (Direction::Downlink, AckBundling::None) => DelayScheme::Dd2a,
            (Direction::Downlink, AckBundling::Bundled) => DelayScheme::Dd2aBundled,
        }
    }

    /// Arithmetic operations in one evaluation of the formula: the additions,
    /// subtractions and multiplications, plus division and floor for bundling.
    pub fn op_count(self) -> u32 {
        match self {
            DelayScheme::Dd2a | DelayScheme::Ug2d => 6,
            DelayScheme::Dd2aBundled => 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessorProfile {
    /// MOPS per mW.
    pub efficiency_mops_per_mw: f64,
    /// Delay evaluations per second.
    pub op_rate_per_s: f64,
    /// Operations per evaluation.
    pub op_count: f64,
}

impl ProcessorProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.efficiency_mops_per_mw > 0.0) || !(self.op_rate_per_s > 0.0) {
            return Err(Error::invalid(
                "processor efficiency and rate must be positive",
            ));
        }
        if !(self.op_count >= 0.0) {
            return Err(Error::invalid("operation count must be >= 0"));
        }
        Ok(())
    }
}

/// Power drawn by evaluating one delay formula at `op_rate_per_s`, in watts.
pub fn delay_power_w(profile: &ProcessorProfile) -> f64 {
    // 1 MOPS/mW = 1e9 operations per joule
    profile.op_rate_per_s * profile.op_count / (profile.efficiency_mops_per_mw * 1e9)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    pub suf: f64,
    pub throughput_bps: f64,
    /// Relative to legacy scheduling of the same link; zero for legacy itself.
    pub gain_vs_baseline: f64,
    pub required_harq: u32,
    pub power_w: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harq::{GrantMode, Repetitions};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn generic_suf() {
        assert_eq!(suf_generic(1, 4, 11).unwrap(), 1.0 / 44.0);
        assert_eq!(suf_generic(7, 1, 7).unwrap(), 1.0);
        assert_eq!(suf_generic(1, 1, 8).unwrap(), 0.125);
        assert!(suf_generic(1, 0, 8).is_err());
        assert!(suf_generic(1, 1, 0).is_err());
        assert!(suf_generic(9, 1, 8).is_err());
    }

    #[test]
    fn legacy_uplink() {
        let p = CycleParams {
            rep_pusch: 12.into(),
            ..CycleParams::default()
        };
        assert_eq!(
            cycle_length(&p, Direction::Uplink, SchedulingMode::LegacyFixed).unwrap(),
            17
        );
        assert_eq!(
            suf_closed_form(&p, Direction::Uplink, SchedulingMode::LegacyFixed).unwrap(),
            1.0 / 17.0
        );
        let ul_r3 = CycleParams {
            rep_pusch: 3.into(),
            ..CycleParams::default()
        };
        assert_eq!(
            cycle_length(&ul_r3, Direction::Uplink, SchedulingMode::LegacyFixed).unwrap(),
            8
        );
    }

    #[test]
    fn legacy_rejects_several_tbs() {
        let p = CycleParams {
            n_tbphc: 2,
            ..CycleParams::default()
        };
        assert!(suf_closed_form(&p, Direction::Downlink, SchedulingMode::LegacyFixed).is_err());
    }

    #[test]
    fn proposed_examples() {
        let ul = CycleParams {
            n_tbphc: 5,
            rep_pusch: 12.into(),
            ..CycleParams::default()
        };
        assert_eq!(
            cycle_length(&ul, Direction::Uplink, SchedulingMode::ProposedVariable).unwrap(),
            67
        );
        assert_eq!(
            suf_closed_form(&ul, Direction::Uplink, SchedulingMode::ProposedVariable).unwrap(),
            5.0 / 67.0
        );
        let dl = CycleParams {
            n_tbphc: 4,
            rep_pdsch: 4.into(),
            grant_mode: GrantMode::Multiple,
            ..CycleParams::default()
        };
        assert_eq!(
            cycle_length(&dl, Direction::Downlink, SchedulingMode::ProposedVariable).unwrap(),
            24
        );
    }

    #[test]
    fn single_tb_matches_generic() {
        for dir in [Direction::Downlink, Direction::Uplink] {
            let p = CycleParams {
                rep_pdsch: 4.into(),
                rep_pusch: 4.into(),
                ..CycleParams::default()
            };
            for mode in [
                SchedulingMode::LegacyFixed,
                SchedulingMode::ProposedVariable,
            ] {
                let n_hc = cycle_length(&p, dir, mode).unwrap();
                assert_eq!(
                    suf_closed_form(&p, dir, mode).unwrap(),
                    suf_generic(4, 4, n_hc).unwrap()
                );
            }
        }
    }

    #[test]
    fn per_tb_lengths_use_the_sum() {
        let p = CycleParams {
            n_tbphc: 3,
            rep_pusch: Repetitions::PerTb(vec![2, 4, 6]),
            ..CycleParams::default()
        };
        // 1 + max(3, 2) + 12 + 2
        assert_eq!(
            cycle_length(&p, Direction::Uplink, SchedulingMode::ProposedVariable).unwrap(),
            18
        );
    }

    #[test]
    fn throughput_examples() {
        assert!(close(throughput_bps(1.0, 504, 1e-3), 504_000.0, 1e-6));
        assert!(close(throughput_bps(5.0 / 67.0, 504, 1e-3), 37_611.9, 0.1));
        assert!(close(throughput_bps(1.0 / 17.0, 504, 1e-3), 29_647.1, 0.1));
    }

    #[test]
    fn power_examples() {
        let lean = ProcessorProfile {
            efficiency_mops_per_mw: 970.0,
            op_rate_per_s: 1000.0,
            op_count: 6.0,
        };
        assert!(close(delay_power_w(&lean) * 1e9, 6.186, 1e-3));
        let bundled = ProcessorProfile {
            efficiency_mops_per_mw: 144.0,
            op_count: 8.0,
            ..lean
        };
        assert!(close(delay_power_w(&bundled) * 1e9, 55.556, 1e-3));
        let idle = ProcessorProfile {
            op_count: 0.0,
            ..lean
        };
        assert_eq!(delay_power_w(&idle), 0.0);
        assert!(ProcessorProfile {
            efficiency_mops_per_mw: 0.0,
            ..lean
        }
        .validate()
        .is_err());
    }

    #[test]
    fn scheme_selection() {
        let mut p = CycleParams::default();
        assert_eq!(
            DelayScheme::for_cycle(&p, Direction::Uplink),
            DelayScheme::Ug2d
        );
        assert_eq!(
            DelayScheme::for_cycle(&p, Direction::Downlink),
            DelayScheme::Dd2a
        );
        p.bundling = AckBundling::Bundled;
        assert_eq!(
            DelayScheme::for_cycle(&p, Direction::Downlink),
            DelayScheme::Dd2aBundled
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn reps() -> impl Strategy<Value = u32> {
            prop_oneof![Just(1u32), Just(2), Just(4), Just(12), Just(24)]
        }

        fn direction() -> impl Strategy<Value = Direction> {
            prop_oneof![Just(Direction::Downlink), Just(Direction::Uplink)]
        }

        fn grant_mode() -> impl Strategy<Value = GrantMode> {
            prop_oneof![Just(GrantMode::Single), Just(GrantMode::Multiple)]
        }

        proptest! {
            #[test]
            fn suf_non_decreasing_in_tbs(n in 1u32..8, r in reps(), p in 1u32..4, s in 1u32..3,
                                         dir in direction(), gm in grant_mode()) {
                let base = CycleParams {
                    n_tbphc: n, rep_pdcch: p, rep_pdsch: r.into(), rep_pusch: r.into(),
                    n_switch: s, grant_mode: gm, ..CycleParams::default()
                };
                let next = CycleParams { n_tbphc: n + 1, ..base.clone() };
                let mode = SchedulingMode::ProposedVariable;
                prop_assert!(suf_closed_form(&next, dir, mode).unwrap() >= suf_closed_form(&base, dir, mode).unwrap());
            }

            #[test]
            fn proposed_beats_legacy_when_data_dominates(n in 2u32..9, r in reps(), d in 1u32..13, dir in direction()) {
                prop_assume!(r > d);
                let one = CycleParams {
                    rep_pdsch: r.into(), rep_pusch: r.into(), dd2a_min: d, ug2d_min: d,
                    grant_mode: GrantMode::Multiple, ..CycleParams::default()
                };
                let many = CycleParams { n_tbphc: n, ..one.clone() };
                let legacy = suf_closed_form(&one, dir, SchedulingMode::LegacyFixed).unwrap();
                let proposed = suf_closed_form(&many, dir, SchedulingMode::ProposedVariable).unwrap();
                prop_assert!(proposed > legacy);
            }

            #[test]
            fn gain_shrinks_with_repetitions(n in 2u32..9, r in 1u32..40, extra in 1u32..40, p in 1u32..6,
                                             s in 1u32..3, d in 1u32..13, dir in direction(), gm in grant_mode()) {
                let at = |rep: u32| {
                    let one = CycleParams {
                        rep_pdcch: p, rep_pdsch: rep.into(), rep_pusch: rep.into(), n_switch: s,
                        dd2a_min: d, ug2d_min: d, grant_mode: gm, ..CycleParams::default()
                    };
                    let many = CycleParams { n_tbphc: n, ..one.clone() };
                    gain(
                        suf_closed_form(&many, dir, SchedulingMode::ProposedVariable).unwrap(),
                        suf_closed_form(&one, dir, SchedulingMode::LegacyFixed).unwrap(),
                    )
                };
                prop_assert!(at(r + extra) <= at(r) + 1e-12);
            }
        }
    }
}
