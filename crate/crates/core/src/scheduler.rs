//! Subframe timelines for legacy and variable-delay HARQ cycles.
//!
//! A UE timeline holds one activity per subframe; a slot with two activities
//! is a half-duplex conflict. Builders place every channel block from the
//! delay formulas and then turn the Idle subframes right before a change of
//! radio direction into Switch subframes.

use std::fmt;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::harq::{delay_plan, fixed_position, AckBundling, CycleParams, Direction, GrantMode};
use crate::metrics::throughput_bps;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActivityKind {
    RxPdcch,
    RxPdsch,
    TxPucch,
    TxPusch,
    Switch,
    Idle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Radio {
    Rx,
    Tx,
}

impl ActivityKind {
    pub const ALL: [ActivityKind; 6] = [
        ActivityKind::RxPdcch,
        ActivityKind::RxPdsch,
        ActivityKind::TxPucch,
        ActivityKind::TxPusch,
        ActivityKind::Switch,
        ActivityKind::Idle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActivityKind::RxPdcch => "RxPDCCH",
            ActivityKind::RxPdsch => "RxPDSCH",
            ActivityKind::TxPucch => "TxPUCCH",
            ActivityKind::TxPusch => "TxPUSCH",
            ActivityKind::Switch => "Switch",
            ActivityKind::Idle => "Idle",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Physical channel name, for channel activities.
    pub fn channel(self) -> Option<&'static str> {
        match self {
            ActivityKind::RxPdcch => Some("PDCCH"),
            ActivityKind::RxPdsch => Some("PDSCH"),
            ActivityKind::TxPucch => Some("PUCCH"),
            ActivityKind::TxPusch => Some("PUSCH"),
            ActivityKind::Switch | ActivityKind::Idle => None,
        }
    }

    fn radio(self) -> Option<Radio> {
        match self {
            ActivityKind::RxPdcch | ActivityKind::RxPdsch => Some(Radio::Rx),
            ActivityKind::TxPucch | ActivityKind::TxPusch => Some(Radio::Tx),
            ActivityKind::Switch | ActivityKind::Idle => None,
        }
    }
}

impl fmt::Display for ActivityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubframeActivity {
    pub kind: ActivityKind,
    /// 1-based position of the TB within its cycle.
    pub tb_index: Option<u32>,
    pub harq_id: Option<u32>,
}

impl SubframeActivity {
    pub const IDLE: SubframeActivity = SubframeActivity::bare(ActivityKind::Idle);
    pub const SWITCH: SubframeActivity = SubframeActivity::bare(ActivityKind::Switch);

    pub const fn bare(kind: ActivityKind) -> Self {
        SubframeActivity {
            kind,
            tb_index: None,
            harq_id: None,
        }
    }

    /// Activity for TB `j`, which runs on HARQ process `j - 1`.
    pub fn for_tb(kind: ActivityKind, j: u32) -> Self {
        SubframeActivity {
            kind,
            tb_index: Some(j),
            harq_id: Some(j - 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Perspective {
    Ue,
    Bs,
}

impl fmt::Display for Perspective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Perspective::Ue => f.write_str("ue"),
            Perspective::Bs => f.write_str("bs"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubframeTimeline {
    pub perspective: Perspective,
    pub direction: Direction,
    /// Absolute subframe index of `slots[0]`.
    pub start: i64,
    /// Never empty per slot; unused subframes hold an explicit Idle.
    pub slots: Vec<Vec<SubframeActivity>>,
    /// Starts of each cycle followed by `slots.len()`.
    pub cycle_boundaries: Vec<usize>,
}

impl SubframeTimeline {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn cycles(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.cycle_boundaries.windows(2).map(|w| w[0]..w[1])
    }

    pub fn cycle_lengths(&self) -> Vec<usize> {
        self.cycles().map(|r| r.len()).collect()
    }

    /// Kinds of single-activity slots, in order. Conflicted slots are skipped.
    pub fn kinds(&self) -> Vec<ActivityKind> {
        self.slots
            .iter()
            .filter(|s| s.len() == 1)
            .map(|s| s[0].kind)
            .collect()
    }

    pub fn count(&self, kind: ActivityKind) -> usize {
        self.slots
            .iter()
            .flatten()
            .filter(|a| a.kind == kind)
            .count()
    }

    /// One line per activity: `index,perspective,activity,tb_index,harq_id`.
    pub fn to_export(&self) -> String {
        let mut out = String::from("index,perspective,activity,tb_index,harq_id\n");
        for (i, slot) in self.slots.iter().enumerate() {
            for a in slot {
                let opt = |v: Option<u32>| v.map(|x| x.to_string()).unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    self.start + i as i64,
                    self.perspective,
                    a.kind,
                    opt(a.tb_index),
                    opt(a.harq_id)
                ));
            }
        }
        out
    }

    /// Reads the export format back. The result holds a single cycle; the
    /// direction is uplink when any PUSCH activity is present.
    pub fn parse_export(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: String| Error::TimelineFormat { line, msg };
        let mut perspective = None;
        let mut start = None;
        let mut slots: Vec<Vec<SubframeActivity>> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with("index,") {
                continue;
            }
            let fields: Vec<&str> = raw.split(',').collect();
            if fields.len() != 5 {
                return Err(bad(
                    line,
                    format!("expected 5 fields, found {}", fields.len()),
                ));
            }
            let index: i64 = fields[0]
                .parse()
                .map_err(|_| bad(line, format!("bad index {:?}", fields[0])))?;
            let p = match fields[1] {
                "ue" => Perspective::Ue,
                "bs" => Perspective::Bs,
                other => return Err(bad(line, format!("unknown perspective {other:?}"))),
            };
            if *perspective.get_or_insert(p) != p {
                return Err(bad(line, "mixed perspectives".into()));
            }
            let kind = ActivityKind::from_name(fields[2])
                .ok_or_else(|| bad(line, format!("unknown activity {:?}", fields[2])))?;
            let opt = |s: &str| -> Result<Option<u32>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse()
                        .map(Some)
                        .map_err(|_| bad(line, format!("bad number {s:?}")))
                }
            };
            let activity = SubframeActivity {
                kind,
                tb_index: opt(fields[3])?,
                harq_id: opt(fields[4])?,
            };
            let first = *start.get_or_insert(index);
            let offset = index - first;
            let last = slots.len() as i64 - 1;
            if offset == last {
                slots
                    .last_mut()
                    .expect("offset matched an existing slot")
                    .push(activity);
            } else if offset == last + 1 {
                slots.push(vec![activity]);
            } else {
                return Err(bad(line, format!("index {index} is out of sequence")));
            }
        }
        let perspective = perspective.ok_or_else(|| bad(0, "no subframes".into()))?;
        let direction = if slots
            .iter()
            .flatten()
            .any(|a| a.kind == ActivityKind::TxPusch)
        {
            Direction::Uplink
        } else {
            Direction::Downlink
        };
        let len = slots.len();
        Ok(SubframeTimeline {
            perspective,
            direction,
            start: start.unwrap_or(0),
            slots,
            cycle_boundaries: vec![0, len],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConflictKind {
    /// Two activities share one subframe.
    Overlap {
        first: SubframeActivity,
        second: SubframeActivity,
    },
    /// Data to ACK (downlink) or grant to data (uplink) is too short.
    MinDelay {
        tb: u32,
        direction: Direction,
        delay: i64,
        min: u32,
    },
    /// A change of radio direction without enough Switch subframes before it.
    MissingSwitch { found: u32, required: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conflict {
    /// Index into `SubframeTimeline::slots`.
    pub sf_index: usize,
    pub kind: ConflictKind,
}

impl Conflict {
    pub fn tb_indices(&self) -> Vec<u32> {
        match &self.kind {
            ConflictKind::Overlap { first, second } => {
                first.tb_index.into_iter().chain(second.tb_index).collect()
            }
            ConflictKind::MinDelay { tb, .. } => vec![*tb],
            ConflictKind::MissingSwitch { .. } => Vec::new(),
        }
    }
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tb = |a: &SubframeActivity| a.tb_index.map(|j| format!(" TB{j}")).unwrap_or_default();
        match &self.kind {
            ConflictKind::Overlap { first, second } => write!(
                f,
                "SF {}: {}{} overlaps {}{}",
                self.sf_index,
                first.kind,
                tb(first),
                second.kind,
                tb(second)
            ),
            ConflictKind::MinDelay {
                tb,
                direction,
                delay,
                min,
            } => write!(
                f,
                "SF {}: TB{tb} {direction} delay {delay} below minimum {min}",
                self.sf_index
            ),
            ConflictKind::MissingSwitch { found, required } => write!(
                f,
                "SF {}: {found} switch subframes before direction change, {required} required",
                self.sf_index
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConflictReport {
    pub conflicts: Vec<Conflict>,
}

impl ConflictReport {
    pub fn is_empty(&self) -> bool {
        self.conflicts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.conflicts.len()
    }

    pub fn overlaps(&self) -> impl Iterator<Item = &Conflict> {
        self.conflicts
            .iter()
            .filter(|c| matches!(c.kind, ConflictKind::Overlap { .. }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LegacyOutcome {
    Feasible(SubframeTimeline),
    /// Some subframe is claimed twice. `attempted` keeps every claim.
    Conflicted {
        attempted: SubframeTimeline,
        report: ConflictReport,
    },
}

impl LegacyOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LegacyOutcome::Feasible(_))
    }

    pub fn timeline(&self) -> &SubframeTimeline {
        match self {
            LegacyOutcome::Feasible(t) => t,
            LegacyOutcome::Conflicted { attempted, .. } => attempted,
        }
    }
}

/// Slots under construction; empty slots become Idle when finished.
#[derive(Default)]
struct Grid {
    slots: Vec<Vec<SubframeActivity>>,
}

impl Grid {
    fn place(&mut self, start: usize, len: u32, activity: SubframeActivity) {
        let end = start + len as usize;
        if self.slots.len() < end {
            self.slots.resize_with(end, Vec::new);
        }
        for slot in &mut self.slots[start..end] {
            slot.push(activity);
        }
    }

    fn append(&mut self, len: u32, activity: SubframeActivity) -> usize {
        let at = self.slots.len();
        self.place(at, len, activity);
        at
    }

    fn finish(mut self, switch_len: u32, direction: Direction) -> SubframeTimeline {
        for slot in &mut self.slots {
            if slot.is_empty() {
                slot.push(SubframeActivity::IDLE);
            }
        }
        mark_switches(&mut self.slots, switch_len);
        let len = self.slots.len();
        SubframeTimeline {
            perspective: Perspective::Ue,
            direction,
            start: 0,
            slots: self.slots,
            cycle_boundaries: vec![0, len],
        }
    }
}

fn slot_radio(slot: &[SubframeActivity]) -> Option<Option<Radio>> {
    let mut radios = slot.iter().filter_map(|a| a.kind.radio());
    match (radios.next(), radios.next()) {
        (None, _) => None,
        (Some(r), None) => Some(Some(r)),
        // a double-booked slot has no single direction
        (Some(_), Some(_)) => Some(None),
    }
}

/// Turns up to `n_switch` Idle slots right before each change of radio
/// direction into Switch slots.
fn mark_switches(slots: &mut [Vec<SubframeActivity>], n_switch: u32) {
    let mut last: Option<Radio> = None;
    for i in 0..slots.len() {
        let Some(radio) = slot_radio(&slots[i]) else {
            continue;
        };
        if let (Some(prev), Some(cur)) = (last, radio) {
            if prev != cur {
                let mut k = i;
                let mut marked = 0;
                while k > 0 && marked < n_switch && slots[k - 1] == [SubframeActivity::IDLE] {
                    slots[k - 1] = vec![SubframeActivity::SWITCH];
                    k -= 1;
                    marked += 1;
                }
            }
        }
        last = radio;
    }
}

/// Schedules `n_tbphc` TBs with the fixed minimum delays as the legacy delays.
///
/// Data blocks go back to back. Downlink uses one grant block and puts each
/// ACK at the fixed DD2A after its data; uplink puts each grant at the fixed
/// UG2D before its data. A trailing switch block returns the UE to receive.
pub fn build_legacy_cycle(params: &CycleParams, direction: Direction) -> Result<LegacyOutcome> {
    params.validate_for(direction)?;
    if params.bundling == AckBundling::Bundled {
        return Err(Error::invalid(
            "legacy scheduling acknowledges every TB separately",
        ));
    }
    let n = params.n_tbphc;
    let p = params.rep_pdcch;
    let reps = params.data_reps(direction);
    let mut grid = Grid::default();
    match direction {
        Direction::Downlink => {
            // one grant schedules the whole cycle
            let grant = if n == 1 {
                SubframeActivity::for_tb(ActivityKind::RxPdcch, 1)
            } else {
                SubframeActivity::bare(ActivityKind::RxPdcch)
            };
            grid.place(0, p, grant);
            let mut at = (p + params.n_dg2d) as usize;
            for j in 1..=n {
                let r = reps.of(j);
                grid.place(at, r, SubframeActivity::for_tb(ActivityKind::RxPdsch, j));
                let last = (at + r as usize - 1) as u32;
                let ack = fixed_position(last, params.dd2a_min) as usize;
                grid.place(
                    ack,
                    params.rep_pucch,
                    SubframeActivity::for_tb(ActivityKind::TxPucch, j),
                );
                at += r as usize;
            }
        }
        Direction::Uplink => {
            let mut at = (p + params.ug2d_min) as usize;
            for j in 1..=n {
                let r = reps.of(j);
                // the grant's last SF sits UG2D + 1 before the data
                let grant = at - (params.ug2d_min + p) as usize;
                grid.place(grant, p, SubframeActivity::for_tb(ActivityKind::RxPdcch, j));
                debug_assert_eq!(
                    fixed_position((grant + p as usize - 1) as u32, params.ug2d_min) as usize,
                    at
                );
                grid.place(at, r, SubframeActivity::for_tb(ActivityKind::TxPusch, j));
                at += r as usize;
            }
        }
    }
    grid.append(params.n_switch, SubframeActivity::SWITCH);
    let timeline = grid.finish(params.n_switch, direction);
    if timeline.slots.iter().any(|s| s.len() > 1) {
        let report = validate(&timeline, params);
        Ok(LegacyOutcome::Conflicted {
            attempted: timeline,
            report,
        })
    } else {
        Ok(LegacyOutcome::Feasible(timeline))
    }
}

/// Schedules one variable-delay cycle.
///
/// Grants come first (one block per TB with STBG, one per cycle with MTBG).
/// Every later block is placed at the delay its TB gets from the delay
/// formulas, plus the padding that lifts the shortest delay to the minimum.
/// Data blocks then run back to back, followed by a switch and the ACKs
/// (downlink), and a closing switch.
pub fn build_proposed_cycle(
    params: &CycleParams,
    direction: Direction,
) -> Result<SubframeTimeline> {
    let plan = delay_plan(params, direction)?;
    let n = params.n_tbphc;
    let p = params.rep_pdcch;
    let g = params.grant_blocks();
    let reps = params.data_reps(direction);
    let mut grid = Grid::default();

    for b in 0..g {
        let act = match params.grant_mode {
            GrantMode::Single => SubframeActivity::for_tb(ActivityKind::RxPdcch, b + 1),
            GrantMode::Multiple => SubframeActivity::bare(ActivityKind::RxPdcch),
        };
        grid.append(p, act);
    }

    match direction {
        Direction::Downlink => {
            let pad = params
                .dd2a_min
                .saturating_sub((params.ack_blocks() - 1) * params.rep_pucch);
            let mut at = (g * p + params.n_dg2d) as usize;
            for j in 1..=n {
                let r = reps.of(j);
                grid.place(at, r, SubframeActivity::for_tb(ActivityKind::RxPdsch, j));
                at += r as usize;
                let delay = plan.delay(j) + pad;
                if delay < params.dd2a_min {
                    return Err(Error::MinDelayViolation {
                        direction,
                        tb: j,
                        delay,
                        min: params.dd2a_min,
                    });
                }
                let leader = params.ack_group_leader(j);
                if leader == j {
                    let ack = fixed_position(at as u32 - 1, delay) as usize;
                    grid.place(
                        ack,
                        params.rep_pucch,
                        SubframeActivity::for_tb(ActivityKind::TxPucch, j),
                    );
                }
            }
        }
        Direction::Uplink => {
            let pad = params.ug2d_min.saturating_sub((g - 1) * p);
            for j in 1..=n {
                let grant_end = match params.grant_mode {
                    GrantMode::Single => j * p - 1,
                    GrantMode::Multiple => p - 1,
                };
                let delay = plan.delay(j) + pad;
                if delay < params.ug2d_min {
                    return Err(Error::MinDelayViolation {
                        direction,
                        tb: j,
                        delay,
                        min: params.ug2d_min,
                    });
                }
                let at = fixed_position(grant_end, delay) as usize;
                grid.place(
                    at,
                    reps.of(j),
                    SubframeActivity::for_tb(ActivityKind::TxPusch, j),
                );
            }
        }
    }
    grid.append(params.n_switch, SubframeActivity::SWITCH);
    Ok(grid.finish(params.n_switch, direction))
}

/// Checks a timeline against the half-duplex and minimum-delay constraints.
///
/// UE timelines report every double-booked slot, every per-TB delay below the
/// minimum and every change of radio direction preceded by fewer than
/// `n_switch` Switch slots; the timeline is treated as repeating. BS timelines
/// are full duplex, so only two receptions or two transmissions in one slot
/// are reported there.
pub fn validate(timeline: &SubframeTimeline, params: &CycleParams) -> ConflictReport {
    let mut conflicts = Vec::new();
    for (i, slot) in timeline.slots.iter().enumerate() {
        let busy: Vec<&SubframeActivity> = slot
            .iter()
            .filter(|a| a.kind != ActivityKind::Idle)
            .collect();
        for pair in busy.windows(2) {
            let clash = match timeline.perspective {
                Perspective::Ue => true,
                Perspective::Bs => {
                    pair[0].kind.radio().is_some() && pair[0].kind.radio() == pair[1].kind.radio()
                }
            };
            if clash {
                conflicts.push(Conflict {
                    sf_index: i,
                    kind: ConflictKind::Overlap {
                        first: *pair[0],
                        second: *pair[1],
                    },
                });
            }
        }
    }
    if timeline.perspective == Perspective::Ue {
        for cycle in timeline.cycles() {
            check_delays(timeline, cycle, params, &mut conflicts);
        }
        check_switches(timeline, params.n_switch, &mut conflicts);
    }
    conflicts.sort_by_key(|c| c.sf_index);
    ConflictReport { conflicts }
}

fn check_delays(
    timeline: &SubframeTimeline,
    cycle: Range<usize>,
    params: &CycleParams,
    out: &mut Vec<Conflict>,
) {
    let in_cycle = |kind: ActivityKind, tb: Option<u32>| {
        cycle.clone().filter(move |&i| {
            timeline.slots[i]
                .iter()
                .any(|a| a.kind == kind && a.tb_index == tb)
        })
    };
    let tbs = |kind: ActivityKind| {
        let mut v: Vec<u32> = cycle
            .clone()
            .flat_map(|i| timeline.slots[i].iter())
            .filter(|a| a.kind == kind)
            .filter_map(|a| a.tb_index)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let direction = timeline.direction;
    match direction {
        Direction::Downlink => {
            for j in tbs(ActivityKind::RxPdsch) {
                let data_end = in_cycle(ActivityKind::RxPdsch, Some(j)).next_back();
                let leader = if j <= params.n_tbphc {
                    params.ack_group_leader(j)
                } else {
                    j
                };
                let ack = in_cycle(ActivityKind::TxPucch, Some(leader)).next();
                if let (Some(end), Some(ack)) = (data_end, ack) {
                    let delay = ack as i64 - end as i64 - 1;
                    if delay < i64::from(params.dd2a_min) {
                        out.push(Conflict {
                            sf_index: ack,
                            kind: ConflictKind::MinDelay {
                                tb: j,
                                direction,
                                delay,
                                min: params.dd2a_min,
                            },
                        });
                    }
                }
            }
        }
        Direction::Uplink => {
            for j in tbs(ActivityKind::TxPusch) {
                let Some(data_start) = in_cycle(ActivityKind::TxPusch, Some(j)).next() else {
                    continue;
                };
                let grant_end = in_cycle(ActivityKind::RxPdcch, Some(j))
                    .rfind(|&i| i < data_start)
                    .or_else(|| in_cycle(ActivityKind::RxPdcch, None).rfind(|&i| i < data_start));
                if let Some(end) = grant_end {
                    let delay = data_start as i64 - end as i64 - 1;
                    if delay < i64::from(params.ug2d_min) {
                        out.push(Conflict {
                            sf_index: data_start,
                            kind: ConflictKind::MinDelay {
                                tb: j,
                                direction,
                                delay,
                                min: params.ug2d_min,
                            },
                        });
                    }
                }
            }
        }
    }
}

fn check_switches(timeline: &SubframeTimeline, n_switch: u32, out: &mut Vec<Conflict>) {
    let len = timeline.slots.len();
    let mut last: Option<Radio> = None;
    let mut switches = 0u32;
    // the first pass only primes the state carried across the cycle wrap
    for step in 0..2 * len {
        let i = step % len;
        let slot = &timeline.slots[i];
        match slot_radio(slot) {
            Some(Some(radio)) => {
                if let Some(prev) = last {
                    if prev != radio && switches < n_switch && step >= len {
                        out.push(Conflict {
                            sf_index: i,
                            kind: ConflictKind::MissingSwitch {
                                found: switches,
                                required: n_switch,
                            },
                        });
                    }
                }
                last = Some(radio);
                switches = 0;
            }
            Some(None) => {
                last = None;
                switches = 0;
            }
            None => {
                if slot.iter().any(|a| a.kind == ActivityKind::Switch) {
                    switches += 1;
                }
            }
        }
    }
}

/// The same cycle as seen by the base station, `rtt_ms` away.
///
/// Downlink activities are sent half a round trip before the UE receives them
/// and uplink activities arrive half a round trip after the UE sends them.
/// Switch slots are UE-internal and stay on the UE clock.
pub fn bs_view(timeline: &SubframeTimeline, rtt_ms: f64) -> Result<SubframeTimeline> {
    if timeline.perspective != Perspective::Ue {
        return Err(Error::invalid("the BS view is derived from a UE timeline"));
    }
    if !(rtt_ms >= 0.0) || !rtt_ms.is_finite() {
        return Err(Error::invalid(format!(
            "round-trip time must be >= 0, got {rtt_ms}"
        )));
    }
    let half = (rtt_ms / 2.0).ceil() as usize;
    let len = timeline.slots.len() + 2 * half;
    let mut slots: Vec<Vec<SubframeActivity>> = vec![Vec::new(); len];
    for (i, slot) in timeline.slots.iter().enumerate() {
        for a in slot {
            let at = match a.kind.radio() {
                Some(Radio::Rx) => i,
                Some(Radio::Tx) => i + 2 * half,
                None if a.kind == ActivityKind::Switch => i + half,
                None => continue,
            };
            slots[at].push(*a);
        }
    }
    for slot in &mut slots {
        if slot.is_empty() {
            slot.push(SubframeActivity::IDLE);
        }
    }
    let mut boundaries = vec![0];
    let inner = &timeline.cycle_boundaries;
    if inner.len() > 2 {
        boundaries.extend(inner[1..inner.len() - 1].iter().map(|b| b + half));
    }
    boundaries.push(len);
    Ok(SubframeTimeline {
        perspective: Perspective::Bs,
        direction: timeline.direction,
        start: timeline.start - half as i64,
        slots,
        cycle_boundaries: boundaries,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    /// Failure probability of attempt k; the last entry covers later attempts.
    pub bler_per_attempt: Vec<f64>,
    pub n_cycles: u32,
    pub seed: u64,
    pub tbs_bits: u32,
    pub t_tb_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CycleTrace {
    pub new_tbs: u32,
    pub retransmissions: u32,
    pub delivered: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodputReport {
    pub goodput_bps: f64,
    /// Share of transmissions that were retransmissions.
    pub retransmission_rate: f64,
    pub attempts: u64,
    pub delivered: u64,
    /// First attempts that failed.
    pub first_attempt_failures: u64,
    pub cycle_len: u32,
    pub trace: Vec<CycleTrace>,
}

/// Runs `n_cycles` variable-delay cycles with random TB failures.
///
/// Every TB slot of a cycle carries either a pending retransmission (oldest
/// first) or a new TB. A failed TB waits for a slot in a later cycle, so the
/// cycle layout never changes.
pub fn monte_carlo_goodput(
    params: &CycleParams,
    direction: Direction,
    config: &MonteCarloConfig,
) -> Result<GoodputReport> {
    let probs = &config.bler_per_attempt;
    if probs.is_empty() {
        return Err(Error::invalid("bler_per_attempt needs at least one entry"));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::invalid(format!(
            "failure probability {p} outside [0, 1]"
        )));
    }
    if config.n_cycles == 0 {
        return Err(Error::invalid("n_cycles must be >= 1"));
    }
    if !(config.t_tb_s > 0.0) {
        return Err(Error::invalid("TB duration must be positive"));
    }
    let cycle_len = build_proposed_cycle(params, direction)?.len() as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut pending: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    let (mut attempts, mut delivered, mut first_failures) = (0u64, 0u64, 0u64);
    let mut trace = Vec::with_capacity(config.n_cycles as usize);

    for _ in 0..config.n_cycles {
        let mut row = CycleTrace {
            new_tbs: 0,
            retransmissions: 0,
            delivered: 0,
        };
        for _ in 0..params.n_tbphc {
            let attempt = match pending.pop_front() {
                Some(k) => {
                    row.retransmissions += 1;
                    k
                }
                None => {
                    row.new_tbs += 1;
                    0
                }
            };
            attempts += 1;
            let p_fail = probs[attempt.min(probs.len() - 1)];
            if rng.gen::<f64>() < p_fail {
                if attempt == 0 {
                    first_failures += 1;
                }
                pending.push_back(attempt + 1);
            } else {
                row.delivered += 1;
                delivered += 1;
            }
        }
        trace.push(row);
    }

    let slots = u64::from(config.n_cycles) * u64::from(cycle_len);
    let suf = delivered as f64 / slots as f64;
    let retransmissions: u64 = trace.iter().map(|r| u64::from(r.retransmissions)).sum();
    Ok(GoodputReport {
        goodput_bps: throughput_bps(suf, config.tbs_bits, config.t_tb_s),
        retransmission_rate: retransmissions as f64 / attempts as f64,
        attempts,
        delivered,
        first_attempt_failures: first_failures,
        cycle_len,
        trace,
    })
}
