//! Multiplicative background calibration.
//!
//! Each mobile reading is scaled by (fixed-site daily mean)/(fixed-site
//! hourly value) for its pollutant, date, and hour, removing diurnal
//! background drift while leaving spatial contrast intact.

use crate::geospatial::CellIndex;
use crate::ingest::{MonitoringRecord, ReferenceSeries};
use crate::pollutant::{Pollutant, Readings};
use chrono::{Datelike, NaiveDate, Timelike};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

pub const DEFAULT_FACTOR_CLIP: (f64, f64) = (0.1, 10.0);

/// Per (pollutant, date, hour) multiplicative adjustment factors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdjustmentFactorTable {
    factors: BTreeMap<(Pollutant, NaiveDate, u32), f64>,
    /// Hours whose reference value was ≤ 0 and fell back to factor 1.0.
    pub fallback_hours: usize,
}

impl AdjustmentFactorTable {
    pub fn get(&self, p: Pollutant, date: NaiveDate, hour: u32) -> Option<f64> {
        self.factors.get(&(p, date, hour)).copied()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Pollutant, NaiveDate, u32), &f64)> {
        self.factors.iter()
    }
}

/// Factors from the fixed-site series: daily mean over the available hours
/// divided by the hourly value, clipped to `clip`.
///
/// Hours with a non-positive reference value get factor 1.0 and are counted
/// in `fallback_hours`.
pub fn compute_adjustment_factors(
    reference: &ReferenceSeries,
    clip: (f64, f64),
) -> AdjustmentFactorTable {
    assert!(clip.0 > 0.0 && clip.0 < clip.1, "bad factor clip");
    let mut table = AdjustmentFactorTable::default();
    for p in reference.pollutants().collect::<Vec<_>>() {
        let mut by_date: BTreeMap<NaiveDate, Vec<(u32, f64)>> = BTreeMap::new();
        for (t, v) in reference.series(p) {
            by_date
                .entry(t.date_naive())
                .or_default()
                .push((t.hour(), *v));
        }
        for (date, hours) in by_date {
            let mean = hours.iter().map(|(_, v)| v).sum::<f64>() / hours.len() as f64;
            for (hour, value) in hours {
                let factor = if value > 0.0 {
                    (mean / value).clamp(clip.0, clip.1)
                } else {
                    table.fallback_hours += 1;
                    log::warn!("{p} {date} {hour:02}h: reference value {value} <= 0, factor 1.0");
                    1.0
                };
                table.factors.insert((p, date, hour), factor);
            }
        }
    }
    table
}

#[derive(Debug, Clone)]
pub struct CalibrationOutcome {
    pub records: Vec<MonitoringRecord>,
    /// (record, pollutant) lookups that had no factor and used 1.0.
    pub missing_factor_events: usize,
}

/// Multiply every pollutant reading by its (pollutant, date, hour) factor.
/// Missing factors fall back to 1.0 and are counted.
pub fn apply_calibration(
    records: &[MonitoringRecord],
    factors: &AdjustmentFactorTable,
) -> CalibrationOutcome {
    let mut missing = 0usize;
    let calibrated = records
        .iter()
        .map(|r| {
            let date = r.timestamp.date_naive();
            let hour = r.timestamp.hour();
            let mut out = r.clone();
            for p in Pollutant::ALL {
                let f = match factors.get(p, date, hour) {
                    Some(f) => f,
                    None => {
                        missing += 1;
                        1.0
                    }
                };
                *out.readings.get_mut(p) = r.readings.get(p) * f;
            }
            out
        })
        .collect();
    CalibrationOutcome {
        records: calibrated,
        missing_factor_events: missing,
    }
}

/// Key for one hourly mean of the mobile data.
pub type HourKey = (CellIndex, NaiveDate, u32, Pollutant);

/// Arithmetic means of the mobile readings per (cell, date, hour, pollutant).
pub fn hourly_location_aggregate<'a, I>(assigned: I) -> BTreeMap<HourKey, f64>
where
    I: IntoIterator<Item = (CellIndex, &'a MonitoringRecord)>,
{
    let mut sums: BTreeMap<HourKey, (f64, usize)> = BTreeMap::new();
    for (cell, r) in assigned {
        let date = r.timestamp.date_naive();
        let hour = r.timestamp.hour();
        for p in Pollutant::ALL {
            let e = sums.entry((cell, date, hour, p)).or_insert((0.0, 0));
            e.0 += r.readings.get(p);
            e.1 += 1;
        }
    }
    sums.into_iter()
        .map(|(k, (sum, n))| (k, sum / n as f64))
        .collect()
}

/// Export factors as `pollutant,date,hour,factor` for audit.
pub fn write_factors_csv(path: &Path, table: &AdjustmentFactorTable) -> std::io::Result<()> {
    let mut out = String::from("pollutant,date,hour,factor\n");
    for ((p, date, hour), f) in table.iter() {
        let _ = writeln!(out, "{p},{date},{hour},{f}");
    }
    std::fs::write(path, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{DateTime, TimeZone, Utc};

    fn ts(day: u32, h: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2023, 2, day, h, 0, 0).unwrap()
    }

    fn reference_with(values: &[(u32, f64)]) -> ReferenceSeries {
        let mut s = ReferenceSeries::default();
        for &(h, v) in values {
            s.push(Pollutant::No, ts(1, h), v).unwrap();
        }
        s
    }

    fn rec(h: u32, v: f64) -> MonitoringRecord {
        MonitoringRecord {
            taxi_id: "t".into(),
            timestamp: ts(1, h),
            lon: 113.3,
            lat: 23.1,
            readings: Readings {
                no: v,
                no2: v,
                pm25: v,
                pm10: v,
            },
        }
    }

    #[test]
    fn flat_day_gives_unit_factors() {
        let series = reference_with(&(0..24).map(|h| (h, 10.0)).collect::<Vec<_>>());
        let table = compute_adjustment_factors(&series, DEFAULT_FACTOR_CLIP);
        for h in 0..24 {
            let f = table
                .get(Pollutant::No, ts(1, h).date_naive(), h)
                .unwrap();
            assert!((f - 1.0).abs() < 1e-15);
        }
        assert_eq!(table.fallback_hours, 0);
    }

    #[test]
    fn factor_is_daily_mean_over_hour_value() {
        // Two hours: 5 and 15 -> mean 10; factors 2.0 and 10/15.
        let table = compute_adjustment_factors(
            &reference_with(&[(0, 5.0), (1, 15.0)]),
            DEFAULT_FACTOR_CLIP,
        );
        let d = ts(1, 0).date_naive();
        assert!((table.get(Pollutant::No, d, 0).unwrap() - 2.0).abs() < 1e-15);
        assert!((table.get(Pollutant::No, d, 1).unwrap() - 10.0 / 15.0).abs() < 1e-15);

        // Hand case from the contract: mean 10, hour value 20 -> 0.5.
        let table = compute_adjustment_factors(
            &reference_with(&[(0, 20.0), (1, 0.0)]),
            DEFAULT_FACTOR_CLIP,
        );
        // mean over available hours = (20 + 0)/2 = 10; hour 0 -> 10/20.
        assert!((table.get(Pollutant::No, d, 0).unwrap() - 0.5).abs() < 1e-15);
        // hour 1 has value 0 -> fallback 1.0 with warning.
        assert_eq!(table.get(Pollutant::No, d, 1).unwrap(), 1.0);
        assert_eq!(table.fallback_hours, 1);
    }

    #[test]
    fn raw_factor_above_clip_is_clipped() {
        // Values 19.5 and 0.5: mean 10, hour-1 raw factor 20 -> clip 10.
        let table = compute_adjustment_factors(
            &reference_with(&[(0, 19.5), (1, 0.5)]),
            DEFAULT_FACTOR_CLIP,
        );
        let d = ts(1, 0).date_naive();
        assert_eq!(table.get(Pollutant::No, d, 1).unwrap(), 10.0);
    }

    #[test]
    fn unit_factors_leave_records_unchanged() {
        let series = reference_with(&(0..24).map(|h| (h, 7.0)).collect::<Vec<_>>());
        let table = compute_adjustment_factors(&series, DEFAULT_FACTOR_CLIP);
        let records = vec![rec(3, 8.0), rec(15, 2.5)];
        let out = apply_calibration(&records, &table);
        for (a, b) in records.iter().zip(&out.records) {
            assert!((a.readings.no - b.readings.no).abs() < 1e-12);
        }
        assert_eq!(out.missing_factor_events, 0);
    }

    #[test]
    fn reading_scales_by_factor() {
        let table = compute_adjustment_factors(
            &reference_with(&[(0, 20.0), (1, 0.0)]),
            DEFAULT_FACTOR_CLIP,
        );
        // hour 0 factor = 0.5; reading 8 -> 4 (no only; others share the value
        // but have no factors for their pollutant -> unchanged).
        let out = apply_calibration(&[rec(0, 8.0)], &table);
        assert_eq!(out.records[0].readings.no, 4.0);
        assert_eq!(out.records[0].readings.pm25, 8.0);
    }

    #[test]
    fn missing_factor_hour_counts_warning() {
        let table = compute_adjustment_factors(
            &reference_with(&[(0, 10.0)]),
            DEFAULT_FACTOR_CLIP,
        );
        let out = apply_calibration(&[rec(5, 8.0)], &table);
        assert_eq!(out.records[0].readings.no, 8.0);
        // 4 pollutants x 1 record, only `no` has any table at all, but the
        // (date,hour) key is absent for all four.
        assert_eq!(out.missing_factor_events, 4);
    }

    #[test]
    fn de_diurnalization_flattens_synthetic_data() {
        // Reference follows g(h); mobile = level * g(h). After calibration
        // every hour must agree to 1e-9 relative.
        let g = |h: u32| 10.0 * (1.0 + 0.5 * (2.0 * std::f64::consts::PI * h as f64 / 24.0).sin());
        let series = reference_with(&(0..24).map(|h| (h, g(h))).collect::<Vec<_>>());
        let table = compute_adjustment_factors(&series, DEFAULT_FACTOR_CLIP);
        let level = 3.7;
        let records: Vec<MonitoringRecord> = (0..24).map(|h| rec(h, level * g(h))).collect();
        let out = apply_calibration(&records, &table);
        let first = out.records[0].readings.no;
        for r in &out.records {
            assert!((r.readings.no - first).abs() <= 1e-9 * first.abs());
        }
    }

    #[test]
    fn positivity_preserved() {
        let series = reference_with(&[(0, 5.0), (1, 15.0), (2, 0.1)]);
        let table = compute_adjustment_factors(&series, DEFAULT_FACTOR_CLIP);
        for h in 0..3 {
            let out = apply_calibration(&[rec(h, 4.2)], &table);
            assert!(out.records[0].readings.no >= 0.0);
        }
    }

    #[test]
    fn hourly_aggregate_pools_by_cell_and_hour() {
        let cell = CellIndex { i: 0, j: 0 };
        let other = CellIndex { i: 1, j: 0 };
        let r1 = rec(8, 4.0);
        let r2 = rec(8, 8.0);
        let r3 = rec(9, 100.0);
        let table = hourly_location_aggregate(vec![(cell, &r1), (cell, &r2), (other, &r3)]);
        let d = ts(1, 8).date_naive();
        assert_eq!(table[&(cell, d, 8, Pollutant::No)], 6.0);
        assert_eq!(table[&(other, d, 9, Pollutant::No)], 100.0);
        // Different hours never pool.
        assert!(!table.contains_key(&(cell, d, 9, Pollutant::No)));
    }
}
