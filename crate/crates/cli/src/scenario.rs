//! One scenario from geometry to throughput.

use ntn_harq::bler::BlerTable;
use ntn_harq::harq::{harq_for_tbphc, AckBundling, CycleParams, Direction, Repetitions};
use ntn_harq::linkbudget::snr_db;
use ntn_harq::metrics::{
    cycle_length, delay_power_w, gain, suf_closed_form, throughput_bps, DelayScheme, MetricsReport,
    ProcessorProfile, SchedulingMode,
};
use ntn_harq::scheduler::{
    build_legacy_cycle, build_proposed_cycle, monte_carlo_goodput, GoodputReport, LegacyOutcome,
    MonteCarloConfig, SubframeTimeline,
};
use ntn_harq::Error;

use crate::config::ScenarioConfig;
use crate::error::{AppError, AppResult};

/// BLER curves are digitised to 0.1 dB; the operating SNR is looked up at the
/// same resolution.
pub const SNR_STEPS_PER_DB: f64 = 10.0;

pub fn quantize_snr(snr_db: f64) -> f64 {
    // dividing keeps tabulated values such as -5.6 exact
    (snr_db * SNR_STEPS_PER_DB).round() / SNR_STEPS_PER_DB
}

/// Link conditions shared by every scheduling choice of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    pub rtt_ms: f64,
    pub snr_db: f64,
    /// Data repetitions of the first TB.
    pub n_rep: u32,
}

pub fn link_state(cfg: &ScenarioConfig, table: &BlerTable) -> AppResult<LinkState> {
    let orbit = cfg.geometry.orbit()?;
    let rtt_ms = match cfg.geometry.rtt_override_ms {
        Some(rtt) => rtt,
        None => orbit.round_trip_time_ms()?,
    };
    let distance_m = orbit.service_slant_range_km()? * 1e3;
    let snr = snr_db(&cfg.link, distance_m)?;
    let n_rep = match &cfg.cycle.rep_data {
        Some(reps) => reps.of(1),
        None => match table.select_repetitions(cfg.tbs_bits, quantize_snr(snr), cfg.target_bler) {
            Ok(n) => n,
            Err(e @ Error::CurveNotFound { .. }) => return Err(AppError::Config(e.to_string())),
            Err(e) => return Err(e.into()),
        },
    };
    Ok(LinkState {
        rtt_ms,
        snr_db: snr,
        n_rep,
    })
}

/// The cycle a scenario runs, with the HARQ processes it needs.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclePlan {
    pub params: CycleParams,
    pub n_harq_required: u32,
}

pub fn plan_cycle(cfg: &ScenarioConfig, link: &LinkState) -> AppResult<CyclePlan> {
    let max = cfg.max_harq();
    let needed = |n: u32| {
        let params = cfg.cycle_params(link.n_rep, n);
        let h = harq_for_tbphc(
            &params,
            cfg.direction,
            link.rtt_ms,
            cfg.t_tb_ms,
            cfg.harq.ack_proc_sf,
        );
        (params, h)
    };
    let requested = match cfg.mode {
        SchedulingMode::LegacyFixed => Some(cfg.cycle.n_tbphc.unwrap_or(1)),
        SchedulingMode::ProposedVariable => cfg.cycle.n_tbphc,
    };
    let (params, n_harq_required) = match requested {
        Some(n) => {
            if n == 0 {
                return Err(AppError::Config("cycle.n_tbphc must be >= 1".into()));
            }
            let (params, h) = needed(n);
            if h > max {
                return Err(AppError::Config(format!(
                    "{n} TBs per cycle need {h} HARQ processes at a {:.2} ms round trip, \
                     more than the {max} available",
                    link.rtt_ms
                )));
            }
            (params, h)
        }
        None => (1..=max)
            .rev()
            .map(needed)
            .find(|(_, h)| *h <= max)
            .ok_or_else(|| {
                AppError::Config(format!(
                    "even one TB per cycle needs more than the {max} available HARQ processes"
                ))
            })?,
    };
    params.validate_for(cfg.direction)?;
    Ok(CyclePlan {
        params,
        n_harq_required,
    })
}

/// Everything a scenario run reports.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub link: LinkState,
    pub plan: CyclePlan,
    pub cycle_len: u32,
    pub metrics: MetricsReport,
    pub monte_carlo: Option<GoodputReport>,
}

/// Builds the scenario's cycle on the UE side. Legacy cycles with a slot
/// claimed twice come back as `Err` with the attempted timeline.
pub fn scenario_timeline(
    cfg: &ScenarioConfig,
    params: &CycleParams,
) -> AppResult<std::result::Result<SubframeTimeline, LegacyOutcome>> {
    match cfg.mode {
        SchedulingMode::LegacyFixed => match build_legacy_cycle(params, cfg.direction)? {
            LegacyOutcome::Feasible(t) => Ok(Ok(t)),
            conflicted => Ok(Err(conflicted)),
        },
        SchedulingMode::ProposedVariable => build_proposed_cycle(params, cfg.direction)
            .map(Ok)
            .map_err(|e| match e {
                Error::MinDelayViolation { .. } => AppError::Config(e.to_string()),
                other => other.into(),
            }),
    }
}

pub fn run_scenario(cfg: &ScenarioConfig, table: &BlerTable) -> AppResult<ScenarioOutcome> {
    let link = link_state(cfg, table)?;
    let plan = plan_cycle(cfg, &link)?;
    let params = &plan.params;
    if cfg.mode == SchedulingMode::LegacyFixed && params.n_tbphc != 1 {
        return Err(AppError::Config(
            "legacy scenarios carry one TB per cycle; render larger legacy cycles with `timeline`"
                .into(),
        ));
    }
    let timeline = scenario_timeline(cfg, params)?
        .map_err(|_| AppError::Infeasible("legacy cycle has overlapping subframes".into()))?;
    let cycle_len = timeline.len() as u32;
    let closed = cycle_length(params, cfg.direction, cfg.mode)?;
    assert_eq!(
        cycle_len, closed,
        "built cycle disagrees with its closed form"
    );

    let suf = f64::from(params.n_tbphc) / f64::from(cycle_len);
    let baseline = legacy_suf(params, cfg.direction)?;
    let (gain_vs_baseline, power_w) = match cfg.mode {
        SchedulingMode::LegacyFixed => (0.0, 0.0),
        SchedulingMode::ProposedVariable => {
            let profile = ProcessorProfile {
                efficiency_mops_per_mw: cfg.power.efficiency_mops_per_mw,
                op_rate_per_s: cfg.power.op_rate_per_s,
                op_count: f64::from(DelayScheme::for_cycle(params, cfg.direction).op_count()),
            };
            (gain(suf, baseline), delay_power_w(&profile))
        }
    };
    let metrics = MetricsReport {
        suf,
        throughput_bps: throughput_bps(suf, cfg.tbs_bits, cfg.t_tb_s()),
        gain_vs_baseline,
        required_harq: plan.n_harq_required,
        power_w,
    };

    let monte_carlo = match (&cfg.monte_carlo, cfg.mode) {
        (Some(mc), SchedulingMode::ProposedVariable) => Some(monte_carlo_goodput(
            params,
            cfg.direction,
            &MonteCarloConfig {
                bler_per_attempt: mc.bler_per_attempt.clone(),
                n_cycles: mc.n_cycles,
                seed: mc.seed,
                tbs_bits: cfg.tbs_bits,
                t_tb_s: cfg.t_tb_s(),
            },
        )?),
        _ => None,
    };

    Ok(ScenarioOutcome {
        link,
        plan,
        cycle_len,
        metrics,
        monte_carlo,
    })
}

/// SUF of one TB per cycle with the fixed delays and the same repetitions.
fn legacy_suf(params: &CycleParams, direction: Direction) -> AppResult<f64> {
    let r = params.data_reps(direction).of(1);
    let single = CycleParams {
        n_tbphc: 1,
        rep_pdsch: Repetitions::Uniform(r),
        rep_pusch: Repetitions::Uniform(r),
        bundling: AckBundling::None,
        ..params.clone()
    };
    Ok(suf_closed_form(
        &single,
        direction,
        SchedulingMode::LegacyFixed,
    )?)
}
