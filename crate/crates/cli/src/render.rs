//! Timing diagrams: one row per channel, one column per subframe.

use std::fmt::Write;

use ntn_harq::scheduler::{ActivityKind, ConflictKind, ConflictReport, SubframeTimeline};

const ROWS: [(ActivityKind, &str); 5] = [
    (ActivityKind::RxPdcch, "PDCCH"),
    (ActivityKind::RxPdsch, "PDSCH"),
    (ActivityKind::TxPucch, "PUCCH"),
    (ActivityKind::TxPusch, "PUSCH"),
    (ActivityKind::Switch, "switch"),
];

const LABEL_WIDTH: usize = 9;

fn rows_present(t: &SubframeTimeline) -> Vec<(ActivityKind, &'static str)> {
    ROWS.into_iter().filter(|(k, _)| t.count(*k) > 0).collect()
}

fn overlap_slots(report: &ConflictReport) -> Vec<usize> {
    let mut v: Vec<usize> = report.overlaps().map(|c| c.sf_index).collect();
    v.dedup();
    v
}

fn cell(t: &SubframeTimeline, i: usize, kind: ActivityKind) -> char {
    match t.slots[i].iter().find(|a| a.kind == kind) {
        None => '.',
        Some(_) if kind == ActivityKind::Switch => 'S',
        Some(a) => match a.tb_index {
            Some(j) => std::char::from_digit(j, 36).unwrap_or('+'),
            None => '#',
        },
    }
}

/// Plain-text diagram. Cells show the TB index, `#` for a grant covering the
/// whole cycle, `S` for switching and `X` under subframes claimed twice.
pub fn render_text(t: &SubframeTimeline, report: &ConflictReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {} timeline, {} SF from SF {}",
        t.perspective.to_string().to_uppercase(),
        t.direction,
        t.len(),
        t.start
    );
    let digits: String = (0..t.len())
        .map(|i| {
            let abs = (t.start + i as i64).rem_euclid(10) as u32;
            std::char::from_digit(abs, 10).expect("digit below 10")
        })
        .collect();
    let _ = writeln!(out, "{:<LABEL_WIDTH$}{digits}", "SF");
    for (kind, label) in rows_present(t) {
        let line: String = (0..t.len()).map(|i| cell(t, i, kind)).collect();
        let _ = writeln!(out, "{label:<LABEL_WIDTH$}{line}");
    }
    let clashes = overlap_slots(report);
    if !clashes.is_empty() {
        let line: String = (0..t.len())
            .map(|i| if clashes.contains(&i) { 'X' } else { ' ' })
            .collect();
        let _ = writeln!(out, "{:<LABEL_WIDTH$}{}", "conflict", line.trim_end());
    }
    if !report.is_empty() {
        let _ = writeln!(out, "conflicts:");
        for c in &report.conflicts {
            let _ = writeln!(out, "  {c}");
        }
    }
    out
}

fn colour(kind: ActivityKind) -> &'static str {
    match kind {
        ActivityKind::RxPdcch => "#4c78a8",
        ActivityKind::RxPdsch => "#72b7b2",
        ActivityKind::TxPucch => "#f58518",
        ActivityKind::TxPusch => "#e45756",
        ActivityKind::Switch => "#bab0ac",
        ActivityKind::Idle => "#ffffff",
    }
}

/// SVG diagram with the same layout as the text form.
pub fn render_svg(t: &SubframeTimeline, report: &ConflictReport) -> String {
    const CELL: usize = 16;
    const ROW: usize = 22;
    const LEFT: usize = 64;
    let rows = rows_present(t);
    let width = LEFT + CELL * t.len() + 8;
    let height = ROW * (rows.len() + 2) + 8;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="monospace" font-size="11">"#
    );
    for i in 0..t.len() {
        let x = LEFT + i * CELL;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            x + CELL / 2,
            ROW - 6,
            t.start + i as i64
        );
    }
    for (r, (kind, label)) in rows.iter().enumerate() {
        let y = ROW * (r + 1);
        let _ = writeln!(s, r#"<text x="4" y="{}">{label}</text>"#, y + ROW - 7);
        for i in 0..t.len() {
            let Some(a) = t.slots[i].iter().find(|a| a.kind == *kind) else {
                continue;
            };
            let x = LEFT + i * CELL;
            let _ = writeln!(
                s,
                r##"<rect x="{x}" y="{}" width="{CELL}" height="{}" fill="{}" stroke="#333"/>"##,
                y + 2,
                ROW - 4,
                colour(*kind)
            );
            if let Some(j) = a.tb_index {
                let _ = writeln!(
                    s,
                    r#"<text x="{}" y="{}" text-anchor="middle">{j}</text>"#,
                    x + CELL / 2,
                    y + ROW - 7
                );
            }
        }
    }
    for i in overlap_slots(report) {
        let x = LEFT + i * CELL;
        let _ = writeln!(
            s,
            r##"<rect x="{x}" y="{ROW}" width="{CELL}" height="{}" fill="none" stroke="#d62728" stroke-width="2"/>"##,
            ROW * rows.len()
        );
    }
    let notes: Vec<String> = report
        .conflicts
        .iter()
        .filter(|c| matches!(c.kind, ConflictKind::Overlap { .. }))
        .map(|c| c.to_string())
        .collect();
    if !notes.is_empty() {
        let _ = writeln!(
            s,
            r##"<text x="4" y="{}" fill="#d62728">{}</text>"##,
            ROW * (rows.len() + 2) - 4,
            notes.join("; ")
        );
    }
    s.push_str("</svg>\n");
    s
}
