use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ntn-harq"))
}

fn profile(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "profiles", name]
        .iter()
        .collect()
}

fn ok(out: Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn rows(csv: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut r = csv::Reader::from_reader(csv.as_bytes());
    let header = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            header
                .iter()
                .map(String::from)
                .zip(rec.iter().map(String::from))
                .collect()
        })
        .collect()
}

fn num(row: &std::collections::HashMap<String, String>, key: &str) -> f64 {
    row[key]
        .parse()
        .unwrap_or_else(|_| panic!("{key} = {:?}", row[key]))
}

#[test]
fn run_prints_one_row() {
    let csv = ok(bin()
        .arg("run")
        .arg(profile("lte-m-leo600.toml"))
        .output()
        .unwrap());
    let r = rows(&csv);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0]["n_rep"], "12");
    assert_eq!(r[0]["n_tbphc"], "6");
    assert_eq!(r[0]["gain_pct"], "27.50");
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mc.toml");
    let text = std::fs::read_to_string(profile("nb-iot-leo600.toml")).unwrap()
        + "monte_carlo.bler_per_attempt = [0.2, 0.05, 0.0]\nmonte_carlo.n_cycles = 3000\nmonte_carlo.seed = 11\n";
    std::fs::write(&cfg, text).unwrap();
    let outs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let path = dir.path().join(format!("out{i}.csv"));
            ok(bin()
                .arg("run")
                .arg(&cfg)
                .arg("--out")
                .arg(&path)
                .output()
                .unwrap());
            std::fs::read(path).unwrap()
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
    let r = rows(std::str::from_utf8(&outs[0]).unwrap());
    assert!(num(&r[0], "mc_goodput_bps") < num(&r[0], "throughput_bps"));
}

#[test]
fn altitude_by_mode_sweep() {
    let csv = ok(bin()
        .arg("sweep")
        .arg(profile("lte-m-leo600.toml"))
        .args([
            "--axis",
            "geometry.altitude_km=600,1200",
            "--axis",
            "mode=legacy,proposed",
        ])
        .output()
        .unwrap());
    let r = rows(&csv);
    let modes: Vec<_> = r
        .iter()
        .map(|row| (row["altitude_km"].as_str(), row["mode"].as_str()))
        .collect();
    assert_eq!(
        modes,
        [
            ("600.0", "legacy"),
            ("600.0", "proposed"),
            ("1200.0", "legacy"),
            ("1200.0", "proposed")
        ]
    );
    for pair in r.chunks(2) {
        assert_eq!(pair[0]["n_tbphc"], "1");
        assert!(num(&pair[1], "throughput_bps") > num(&pair[0], "throughput_bps"));
    }
    assert!(num(&r[3], "gain_pct") < num(&r[1], "gain_pct"));
}

#[test]
fn throughput_grows_with_tbs_per_cycle() {
    let csv = ok(bin()
        .arg("sweep")
        .arg(profile("lte-m-leo600.toml"))
        .args([
            "--axis",
            "harq.max_processes=16",
            "--axis",
            "cycle.n_tbphc=1,2,3,4,5,6,7,8",
        ])
        .output()
        .unwrap());
    let thr: Vec<f64> = rows(&csv)
        .iter()
        .map(|r| num(r, "throughput_bps"))
        .collect();
    assert_eq!(thr.len(), 8);
    assert!(thr.windows(2).all(|w| w[1] > w[0]), "{thr:?}");
}

#[test]
fn tbs_per_cycle_beyond_the_harq_limit_is_rejected() {
    let out = bin()
        .arg("sweep")
        .arg(profile("lte-m-leo600.toml"))
        .args(["--axis", "cycle.n_tbphc=6,7"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("HARQ processes"));
}

#[test]
fn infeasible_cells_leave_blank_metrics() {
    let csv = ok(bin()
        .arg("sweep")
        .arg(profile("lte-m-leo1200.toml"))
        .args(["--axis", "geometry.elevation_deg=10,90"])
        .output()
        .unwrap());
    let r = rows(&csv);
    assert_eq!(r[0]["n_rep"], "");
    assert_eq!(r[0]["rtt_ms"], "41.775");
    assert!(!r[1]["suf"].is_empty());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("low.toml");
    let text = std::fs::read_to_string(profile("lte-m-leo1200.toml"))
        .unwrap()
        .replace(
            "geometry.elevation_deg = 30.0",
            "geometry.elevation_deg = 10.0",
        );
    std::fs::write(&cfg, text).unwrap();
    let infeasible = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(infeasible.status.code(), Some(2));

    let missing = bin()
        .args(["run", "/nonexistent/scenario.toml"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(3));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "id = \"x\"\nprotocol = \"lte-m\"\ndirection = \"ul\"\ntbs_bits = 504\ncycle.rep_pdcc = 2\n").unwrap();
    let unknown = bin().arg("run").arg(&bad).output().unwrap();
    assert_eq!(unknown.status.code(), Some(3));
}

#[test]
fn legacy_conflict_timeline() {
    let text = ok(bin()
        .arg("timeline")
        .arg(profile("dl-legacy-conflict.toml"))
        .output()
        .unwrap());
    assert!(
        text.contains("SF 9: TxPUCCH TB1 overlaps RxPDSCH TB2"),
        "{text}"
    );

    let ul = ok(bin()
        .arg("timeline")
        .arg(profile("ul-legacy-r3.toml"))
        .output()
        .unwrap());
    assert!(ul.starts_with("UE UL timeline, 8 SF from SF 0\n"), "{ul}");
    assert!(!ul.contains("conflict"));
}

#[test]
fn base_station_timeline_svg() {
    let svg = ok(bin()
        .arg("timeline")
        .arg(profile("lte-m-leo600.toml"))
        .args(["--perspective", "bs", "--format", "svg"])
        .output()
        .unwrap());
    assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    assert!(!svg.contains("#d62728"));
}

#[test]
fn calibrate_writes_a_copy() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cal.toml");
    let msg = ok(bin()
        .arg("calibrate")
        .arg(profile("nb-iot-leo600.toml"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap());
    assert!(msg.contains("within"), "{msg}");
    let written = std::fs::read_to_string(out).unwrap();
    assert!(written.contains("cycle.rep_pdcch = 5"), "{written}");
    assert!(written.contains("harq.extended = true"));
}
