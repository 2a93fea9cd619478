//! BLER-versus-SNR tables keyed by transport block size and repetition count.
//!
//! Tables are plain text, one `tbs,n_rep,snr_db,bler` record per line, with `#`
//! comments. Lookups interpolate `log10(BLER)` linearly in SNR (dB) between
//! the bracketing points and clamp to the end points outside a curve.

use std::collections::BTreeMap;
use std::path::Path;

use crate::{Error, Result};

/// Reference PUSCH curves for 144- and 504-bit transport blocks over the
/// {1, 2, 4, 8, 12, 16, 24, 32} repetition grid.
pub const REFERENCE_TABLE: &str = include_str!("../data/bler_ntn_tdla.csv");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlerPoint {
    pub snr_db: f64,
    pub bler: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlerCurve {
    pub tbs: u32,
    pub n_rep: u32,
    /// Strictly increasing in SNR, non-increasing in BLER.
    pub points: Vec<BlerPoint>,
}

impl BlerCurve {
    fn bler_at(&self, snr_db: f64) -> f64 {
        let pts = &self.points;
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if snr_db <= first.snr_db {
            return first.bler;
        }
        if snr_db >= last.snr_db {
            return last.bler;
        }
        // partition_point gives the first point strictly above the query
        let hi = pts.partition_point(|p| p.snr_db <= snr_db);
        let (a, b) = (pts[hi - 1], pts[hi]);
        if a.snr_db == snr_db {
            return a.bler;
        }
        let t = (snr_db - a.snr_db) / (b.snr_db - a.snr_db);
        let log_bler = a.bler.log10() + t * (b.bler.log10() - a.bler.log10());
        10f64.powf(log_bler)
    }
}

/// Immutable once built; share it freely between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct BlerTable {
    curves: BTreeMap<(u32, u32), BlerCurve>,
}

impl BlerTable {
    /// The table shipped with the crate.
    pub fn reference() -> Self {
        Self::parse(REFERENCE_TABLE).expect("bundled BLER table is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::TableFormat {
                    line: line_no,
                    msg: format!("expected 4 fields, found {}", fields.len()),
                });
            }
            let bad = |what: &str| Error::TableFormat {
                line: line_no,
                msg: format!("cannot parse {what}"),
            };
            let tbs: u32 = fields[0].parse().map_err(|_| bad("tbs"))?;
            let n_rep: u32 = fields[1].parse().map_err(|_| bad("n_rep"))?;
            let snr_db: f64 = fields[2].parse().map_err(|_| bad("snr_db"))?;
            let bler: f64 = fields[3].parse().map_err(|_| bad("bler"))?;
            records.push((line_no, tbs, n_rep, snr_db, bler));
        }
        Self::build(records)
    }

    /// Builds a table from `(tbs, n_rep, snr_db, bler)` records.
    pub fn from_records(records: impl IntoIterator<Item = (u32, u32, f64, f64)>) -> Result<Self> {
        Self::build(
            records
                .into_iter()
                .enumerate()
                .map(|(i, (t, r, s, b))| (i + 1, t, r, s, b)),
        )
    }

    fn build(records: impl IntoIterator<Item = (usize, u32, u32, f64, f64)>) -> Result<Self> {
        let mut curves: BTreeMap<(u32, u32), BlerCurve> = BTreeMap::new();
        for (line, tbs, n_rep, snr_db, bler) in records {
            let fail = |msg: String| Error::TableFormat { line, msg };
            if tbs == 0 {
                return Err(fail("tbs must be positive".into()));
            }
            if n_rep == 0 {
                return Err(fail("n_rep must be at least 1".into()));
            }
            if !snr_db.is_finite() {
                return Err(fail("snr must be finite".into()));
            }
            if !(bler > 0.0 && bler <= 1.0) {
                return Err(fail(format!("bler {bler} outside (0, 1]")));
            }
            curves
                .entry((tbs, n_rep))
                .or_insert_with(|| BlerCurve {
                    tbs,
                    n_rep,
                    points: Vec::new(),
                })
                .points
                .push(BlerPoint { snr_db, bler });
        }
        if curves.is_empty() {
            return Err(Error::TableFormat {
                line: 0,
                msg: "table has no records".into(),
            });
        }
        for curve in curves.values_mut() {
            curve.points.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
            for w in curve.points.windows(2) {
                if w[0].snr_db == w[1].snr_db {
                    return Err(Error::TableFormat {
                        line: 0,
                        msg: format!(
                            "curve tbs={} n_rep={} repeats snr {}",
                            curve.tbs, curve.n_rep, w[0].snr_db
                        ),
                    });
                }
                if w[1].bler > w[0].bler {
                    return Err(Error::TableFormat {
                        line: 0,
                        msg: format!(
                            "curve tbs={} n_rep={} rises from {} to {} between {} and {} dB",
                            curve.tbs, curve.n_rep, w[0].bler, w[1].bler, w[0].snr_db, w[1].snr_db
                        ),
                    });
                }
            }
        }
        let table = BlerTable { curves };
        table.check_repetition_order()?;
        Ok(table)
    }

    /// More repetitions must never raise the BLER at any tabulated SNR.
    fn check_repetition_order(&self) -> Result<()> {
        for tbs in self.tbs_values() {
            let curves: Vec<&BlerCurve> = self.curves_for(tbs).collect();
            let grid: Vec<f64> = curves
                .iter()
                .flat_map(|c| c.points.iter().map(|p| p.snr_db))
                .collect();
            for pair in curves.windows(2) {
                for &snr in &grid {
                    let fewer = pair[0].bler_at(snr);
                    let more = pair[1].bler_at(snr);
                    if more > fewer * (1.0 + 1e-9) {
                        return Err(Error::TableFormat {
                            line: 0,
                            msg: format!(
                                "tbs {tbs}: {} repetitions give BLER {more} above {fewer} for {} at {snr} dB",
                                pair[1].n_rep, pair[0].n_rep
                            ),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn tbs_values(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.curves.keys().map(|&(t, _)| t).collect();
        v.dedup();
        v
    }

    /// Curves for one TBS in increasing repetition order.
    pub fn curves_for(&self, tbs: u32) -> impl Iterator<Item = &BlerCurve> {
        self.curves
            .range((tbs, 0)..=(tbs, u32::MAX))
            .map(|(_, c)| c)
    }

    pub fn curve(&self, tbs: u32, n_rep: u32) -> Option<&BlerCurve> {
        self.curves.get(&(tbs, n_rep))
    }

    pub fn bler_at(&self, tbs: u32, n_rep: u32, snr_db: f64) -> Result<f64> {
        self.curve(tbs, n_rep)
            .map(|c| c.bler_at(snr_db))
            .ok_or(Error::CurveNotFound { tbs, n_rep })
    }

    /// Smallest tabulated repetition count whose BLER at `snr_db` is at most
    /// `target_bler`.
    pub fn select_repetitions(&self, tbs: u32, snr_db: f64, target_bler: f64) -> Result<u32> {
        let mut curves = self.curves_for(tbs).peekable();
        if curves.peek().is_none() {
            return Err(Error::CurveNotFound { tbs, n_rep: 0 });
        }
        curves
            .find(|c| c.bler_at(snr_db) <= target_bler)
            .map(|c| c.n_rep)
            .ok_or(Error::Infeasible {
                tbs,
                snr_db,
                target: target_bler,
            })
    }
}

/// Bits carried per PRB-subframe when one TB spans one PRB-subframe per repetition.
pub fn spectral_efficiency(tbs: u32, n_rep: u32) -> f64 {
    f64::from(tbs) / f64::from(n_rep.max(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point_table() -> BlerTable {
        BlerTable::from_records([(504, 24, -6.0, 0.2), (504, 24, -4.0, 0.02)]).unwrap()
    }

    #[test]
    fn interpolates_in_log_domain() {
        let t = two_point_table();
        let expected = 10f64.powf((0.2f64.log10() + 0.02f64.log10()) / 2.0);
        let got = t.bler_at(504, 24, -5.0).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 0.0632).abs() < 1e-4);
    }

    #[test]
    fn clamps_outside_range() {
        let t = two_point_table();
        assert_eq!(t.bler_at(504, 24, -30.0).unwrap(), 0.2);
        assert_eq!(t.bler_at(504, 24, 30.0).unwrap(), 0.02);
    }

    #[test]
    fn reference_anchor_is_exact() {
        let t = BlerTable::reference();
        assert_eq!(t.bler_at(504, 24, -5.6).unwrap(), 0.1);
    }

    #[test]
    fn missing_curve() {
        let t = BlerTable::reference();
        assert!(matches!(
            t.bler_at(504, 3, 0.0),
            Err(Error::CurveNotFound { tbs: 504, n_rep: 3 })
        ));
        assert!(matches!(
            t.select_repetitions(1000, 0.0, 0.1),
            Err(Error::CurveNotFound { .. })
        ));
    }

    #[test]
    fn selection_at_operating_points() {
        let t = BlerTable::reference();
        assert_eq!(t.select_repetitions(504, -5.6, 0.1).unwrap(), 24);
        assert_eq!(t.select_repetitions(144, -5.6, 0.1).unwrap(), 12);
        assert_eq!(t.select_repetitions(504, -0.2, 0.1).unwrap(), 12);
    }

    #[test]
    fn selection_infeasible_when_link_too_weak() {
        let t = BlerTable::reference();
        assert!(matches!(
            t.select_repetitions(504, -20.0, 0.1),
            Err(Error::Infeasible { tbs: 504, .. })
        ));
    }

    #[test]
    fn spectral_efficiency_examples() {
        assert_eq!(spectral_efficiency(144, 12), 12.0);
        assert_eq!(spectral_efficiency(504, 24), 21.0);
        assert_eq!(spectral_efficiency(504, 504), 1.0);
    }

    #[test]
    fn larger_tbs_is_more_efficient() {
        let t = BlerTable::reference();
        for snr in [-0.2, -5.6] {
            let small = t.select_repetitions(144, snr, 0.1).unwrap();
            let large = t.select_repetitions(504, snr, 0.1).unwrap();
            assert!(spectral_efficiency(504, large) > spectral_efficiency(144, small));
        }
    }

    #[test]
    fn parser_skips_comments_and_rejects_garbage() {
        let ok = "# header\n144, 1, 0.0, 0.5 # trailing\n\n144,1,1.0,0.1\n";
        let t = BlerTable::parse(ok).unwrap();
        assert_eq!(t.curve(144, 1).unwrap().points.len(), 2);

        let bad_fields = "144,1,0.0\n";
        assert!(matches!(
            BlerTable::parse(bad_fields),
            Err(Error::TableFormat { line: 1, .. })
        ));
        assert!(BlerTable::parse("144,1,0.0,0.0\n").is_err());
        assert!(BlerTable::parse("144,1,0.0,1.5\n").is_err());
        assert!(BlerTable::parse("144,0,0.0,0.5\n").is_err());
        assert!(BlerTable::parse("x,1,0.0,0.5\n").is_err());
        assert!(BlerTable::parse("# nothing\n").is_err());
    }

    #[test]
    fn parser_rejects_invariant_violations() {
        // BLER rising with SNR
        assert!(BlerTable::parse("144,1,0.0,0.1\n144,1,1.0,0.2\n").is_err());
        // duplicate SNR
        assert!(BlerTable::parse("144,1,0.0,0.1\n144,1,0.0,0.05\n").is_err());
        // more repetitions doing worse
        let worse = "144,1,0.0,0.1\n144,1,1.0,0.01\n144,2,0.0,0.5\n144,2,1.0,0.05\n";
        assert!(BlerTable::parse(worse).is_err());
    }

    #[test]
    fn unsorted_records_are_accepted() {
        let t = BlerTable::parse("144,1,1.0,0.01\n144,1,0.0,0.1\n").unwrap();
        assert_eq!(t.bler_at(144, 1, 0.0).unwrap(), 0.1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn selection_monotone_in_target(snr in -12.0f64..12.0, t1 in 1e-4f64..1.0, t2 in 1e-4f64..1.0) {
                let table = BlerTable::reference();
                let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
                for tbs in [144, 504] {
                    if let Ok(strict) = table.select_repetitions(tbs, snr, lo) {
                        let loose = table.select_repetitions(tbs, snr, hi).unwrap();
                        prop_assert!(loose <= strict);
                    }
                }
            }

            #[test]
            fn selection_monotone_in_snr(s1 in -12.0f64..12.0, ds in 0.0f64..5.0, target in 1e-3f64..0.5) {
                let table = BlerTable::reference();
                for tbs in [144, 504] {
                    if let Ok(weak) = table.select_repetitions(tbs, s1, target) {
                        let strong = table.select_repetitions(tbs, s1 + ds, target).unwrap();
                        prop_assert!(strong <= weak);
                    }
                }
            }

            #[test]
            fn interpolation_stays_between_neighbours(snr in -12.0f64..14.0) {
                let table = BlerTable::reference();
                for curve in table.curves_for(504) {
                    let b = curve.bler_at(snr);
                    prop_assert!(b > 0.0 && b <= 1.0);
                }
            }
        }
    }
}
