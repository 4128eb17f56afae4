//! Parsing and cleaning of monitoring records, fixed-site reference series,
//! and the road network.
//!
//! Row-level problems are collected with line numbers instead of aborting,
//! so large ingests survive stray rows; structurally broken files (missing,
//! wrong header) fail outright.

use crate::geospatial::Projection;
use crate::pollutant::{Pollutant, Readings};
use chrono::{DateTime, Timelike, Utc};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

pub const MONITORING_HEADER: &str = "taxi_id,timestamp,lon,lat,no_ppb,no2_ppb,pm25_ugm3,pm10_ugm3";
pub const REFERENCE_HEADER: &str = "timestamp,pollutant,value";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("unknown header: expected {expected:?}, found {found:?}")]
    UnknownHeader { expected: String, found: String },
    #[error("not a GeoJSON FeatureCollection: {0}")]
    BadGeoJson(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// One problem row, reported by 1-based file line (header is line 1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowError {
    pub line: usize,
    pub message: String,
}

/// Parse outcome: valid rows plus the collected row errors.
#[derive(Debug, Clone)]
pub struct CsvParse<T> {
    pub rows: Vec<T>,
    pub errors: Vec<RowError>,
}

/// One 15-second taxi observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitoringRecord {
    pub taxi_id: String,
    pub timestamp: DateTime<Utc>,
    pub lon: f64,
    pub lat: f64,
    /// NaN marks a missing reading until cleaning drops it.
    pub readings: Readings,
}

/// Parse the monitoring CSV (exact header [`MONITORING_HEADER`]).
///
/// Malformed rows become [`RowError`]s; the file itself only fails when it
/// cannot be read or the header does not match. Empty pollutant fields parse
/// as NaN and are left for [`clean_records`] to drop.
pub fn parse_monitoring_csv(path: &Path) -> Result<CsvParse<MonitoringRecord>, IngestError> {
    let mut reader = open_csv(path)?;
    check_header(&mut reader, MONITORING_HEADER)?;

    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (idx, result) in reader.records().enumerate() {
        let line = idx + 2;
        let record = match result {
            Ok(r) => r,
            Err(e) => {
                errors.push(RowError {
                    line,
                    message: format!("unreadable row: {e}"),
                });
                continue;
            }
        };
        match parse_monitoring_row(&record) {
            Ok(r) => rows.push(r),
            Err(message) => errors.push(RowError { line, message }),
        }
    }
    Ok(CsvParse { rows, errors })
}

fn parse_monitoring_row(record: &csv::StringRecord) -> Result<MonitoringRecord, String> {
    if record.len() != 8 {
        return Err(format!("expected 8 fields, found {}", record.len()));
    }
    let taxi_id = record[0].to_string();
    let timestamp = parse_timestamp(&record[1])?;
    let lon = parse_f64("lon", &record[2])?;
    let lat = parse_f64("lat", &record[3])?;
    if !(-180.0..=180.0).contains(&lon) {
        return Err(format!("lon out of range: {lon}"));
    }
    if !(-90.0..=90.0).contains(&lat) {
        return Err(format!("lat out of range: {lat}"));
    }
    let mut vals = [0.0f64; 4];
    for (slot, (name, field)) in vals.iter_mut().zip([
        ("no_ppb", &record[4]),
        ("no2_ppb", &record[5]),
        ("pm25_ugm3", &record[6]),
        ("pm10_ugm3", &record[7]),
    ]) {
        *slot = if field.is_empty() {
            f64::NAN
        } else {
            parse_f64(name, field)?
        };
    }
    Ok(MonitoringRecord {
        taxi_id,
        timestamp,
        lon,
        lat,
        readings: Readings {
            no: vals[0],
            no2: vals[1],
            pm25: vals[2],
            pm10: vals[3],
        },
    })
}

fn parse_timestamp(s: &str) -> Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| format!("bad timestamp {s:?}: {e}"))
}

fn parse_f64(name: &str, s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .map_err(|_| format!("non-numeric {name}: {s:?}"))
}

/// Write records back out in the documented monitoring schema.
pub fn write_monitoring_csv(path: &Path, records: &[MonitoringRecord]) -> Result<(), IngestError> {
    let mut out = String::new();
    out.push_str(MONITORING_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.taxi_id,
            r.timestamp.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            r.lon,
            r.lat,
            r.readings.no,
            r.readings.no2,
            r.readings.pm25,
            r.readings.pm10
        );
    }
    std::fs::write(path, out).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Inclusive lon/lat bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl BoundingBox {
    pub fn contains(&self, lon: f64, lat: f64) -> bool {
        lon >= self.min_lon && lon <= self.max_lon && lat >= self.min_lat && lat <= self.max_lat
    }
}

/// Cleaning rules; every predicate is configurable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CleaningPolicy {
    /// Plausible value range per pollutant, inclusive.
    pub ranges: BTreeMap<Pollutant, (f64, f64)>,
    pub bbox: Option<BoundingBox>,
    /// Maximum plausible speed between consecutive records of one taxi, m/s.
    pub max_speed_mps: f64,
    /// Drop rows with any missing (NaN) pollutant reading.
    pub drop_missing: bool,
}

impl Default for CleaningPolicy {
    fn default() -> Self {
        let mut ranges = BTreeMap::new();
        for p in Pollutant::ALL {
            ranges.insert(p, (0.0, 2000.0));
        }
        CleaningPolicy {
            ranges,
            bbox: None,
            max_speed_mps: 40.0,
            drop_missing: true,
        }
    }
}

impl CleaningPolicy {
    pub fn validate(&self) -> Result<(), String> {
        for (p, (lo, hi)) in &self.ranges {
            if lo >= hi {
                return Err(format!("range for {p} has min >= max"));
            }
        }
        Ok(())
    }
}

/// A rejected record with every reason that applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedRecord {
    pub record: MonitoringRecord,
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct CleanOutcome {
    pub kept: Vec<MonitoringRecord>,
    pub rejected: Vec<RejectedRecord>,
}

/// Apply the cleaning policy. Total: every input record lands in `kept` or
/// `rejected`, both in input order.
///
/// The speed check runs per taxi in timestamp order against the last *kept*
/// record of that taxi, which makes cleaning idempotent. Pointwise-invalid
/// records never enter the speed chain.
pub fn clean_records(records: &[MonitoringRecord], policy: &CleaningPolicy) -> CleanOutcome {
    // reasons[i] collects why record i is rejected; empty = kept.
    let mut reasons: Vec<Vec<String>> = vec![Vec::new(); records.len()];

    for (i, r) in records.iter().enumerate() {
        for p in Pollutant::ALL {
            let v = r.readings.get(p);
            if v.is_nan() {
                if policy.drop_missing {
                    reasons[i].push(format!("missing:{p}"));
                } else {
                    reasons[i].push(format!("range:{p}"));
                }
                continue;
            }
            if let Some(&(lo, hi)) = policy.ranges.get(&p) {
                if !(v >= lo && v <= hi) {
                    reasons[i].push(format!("range:{p}"));
                }
            }
        }
        if let Some(bbox) = &policy.bbox {
            if !bbox.contains(r.lon, r.lat) {
                reasons[i].push("bbox".to_string());
            }
        }
    }

    // Speed filter over pointwise-valid records, grouped by taxi, ordered by
    // (timestamp, input index).
    let mut by_taxi: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        if reasons[i].is_empty() {
            by_taxi.entry(r.taxi_id.as_str()).or_default().push(i);
        }
    }
    for indices in by_taxi.values_mut() {
        indices.sort_by_key(|&i| (records[i].timestamp, i));
        let mut last_kept: Option<usize> = None;
        for &i in indices.iter() {
            if let Some(prev) = last_kept {
                let a = &records[prev];
                let b = &records[i];
                let dt = (b.timestamp - a.timestamp).num_milliseconds() as f64 / 1000.0;
                let proj = Projection::new(a.lon, a.lat);
                let d = proj.distance_m((a.lon, a.lat), (b.lon, b.lat));
                let speed = if dt > 0.0 { d / dt } else if d > 0.0 { f64::INFINITY } else { 0.0 };
                if speed > policy.max_speed_mps {
                    reasons[i].push("speed".to_string());
                    continue;
                }
            }
            last_kept = Some(i);
        }
    }

    let mut outcome = CleanOutcome::default();
    for (i, r) in records.iter().enumerate() {
        if reasons[i].is_empty() {
            outcome.kept.push(r.clone());
        } else {
            outcome.rejected.push(RejectedRecord {
                record: r.clone(),
                reasons: std::mem::take(&mut reasons[i]),
            });
        }
    }
    outcome
}

/// Hourly fixed-site series, one per pollutant, strictly increasing
/// whole-hour timestamps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSeries {
    series: BTreeMap<Pollutant, Vec<(DateTime<Utc>, f64)>>,
}

impl ReferenceSeries {
    pub fn push(&mut self, p: Pollutant, t: DateTime<Utc>, value: f64) -> Result<(), String> {
        if t.minute() != 0 || t.second() != 0 || t.nanosecond() != 0 {
            return Err(format!("non-hourly timestamp {t}"));
        }
        let entries = self.series.entry(p).or_default();
        if let Some(&(last, _)) = entries.last() {
            if t == last {
                return Err("duplicate timestamp".to_string());
            }
            if t < last {
                return Err("non-monotone".to_string());
            }
        }
        entries.push((t, value));
        Ok(())
    }

    pub fn series(&self, p: Pollutant) -> &[(DateTime<Utc>, f64)] {
        self.series.get(&p).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn pollutants(&self) -> impl Iterator<Item = Pollutant> + '_ {
        self.series.keys().copied()
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceParse {
    pub series: ReferenceSeries,
    pub errors: Vec<RowError>,
}

/// Parse the reference CSV (`timestamp,pollutant,value`), enforcing hourly
/// strictly-monotone timestamps per pollutant. Violating rows are reported
/// and skipped.
pub fn parse_reference_csv(path: &Path) -> Result<ReferenceParse, IngestError> {
    let mut reader = open_csv(path)?;
    check_header(&mut reader, REFERENCE_HEADER)?;

    let mut series = ReferenceSeries::default();
    let mut errors = Vec::new();
    for (idx, result) in reader.records().enumerate() {
        let line = idx + 2;
        let mut report = |message: String| errors.push(RowError { line, message });
        let record = match result {
            Ok(r) => r,
            Err(e) => {
                report(format!("unreadable row: {e}"));
                continue;
            }
        };
        if record.len() != 3 {
            report(format!("expected 3 fields, found {}", record.len()));
            continue;
        }
        let t = match parse_timestamp(&record[0]) {
            Ok(t) => t,
            Err(e) => {
                report(e);
                continue;
            }
        };
        let p = match record[1].parse::<Pollutant>() {
            Ok(p) => p,
            Err(e) => {
                report(e);
                continue;
            }
        };
        let v = match parse_f64("value", &record[2]) {
            Ok(v) if v.is_finite() => v,
            Ok(v) => {
                report(format!("non-finite value: {v}"));
                continue;
            }
            Err(e) => {
                report(e);
                continue;
            }
        };
        if let Err(e) = series.push(p, t, v) {
            report(e);
        }
    }
    Ok(ReferenceParse { series, errors })
}

/// Write a reference series in the documented schema.
pub fn write_reference_csv(path: &Path, series: &ReferenceSeries) -> Result<(), IngestError> {
    let mut out = String::new();
    out.push_str(REFERENCE_HEADER);
    out.push('\n');
    for p in Pollutant::ALL {
        for (t, v) in series.series(p) {
            let _ = writeln!(
                out,
                "{},{},{}",
                t.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                p,
                v
            );
        }
    }
    std::fs::write(path, out).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Coordinate space of a road network file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoordSpace {
    LonLat,
    Meters,
}

/// Road polylines plus their coordinate space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadNetwork {
    pub space: CoordSpace,
    pub polylines: Vec<Vec<(f64, f64)>>,
}

impl RoadNetwork {
    /// Polylines in projected meters, converting from lon/lat if needed.
    pub fn to_meters(&self, projection: &Projection) -> Vec<Vec<(f64, f64)>> {
        match self.space {
            CoordSpace::Meters => self.polylines.clone(),
            CoordSpace::LonLat => self
                .polylines
                .iter()
                .map(|line| {
                    line.iter()
                        .map(|&(lon, lat)| projection.project(lon, lat))
                        .collect()
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NetworkLoad {
    pub network: RoadNetwork,
    pub warnings: Vec<String>,
}

/// Load a GeoJSON FeatureCollection of LineString features.
///
/// The coordinate space comes from a top-level `crs` member or a feature
/// property `crs` ("lonlat" default). Degenerate features (non-lines, under
/// two distinct vertices) are dropped with warnings; repeated consecutive
/// vertices are collapsed.
pub fn load_road_network(path: &Path) -> Result<NetworkLoad, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| IngestError::BadGeoJson("root is not an object".into()))?;
    if obj.get("type").and_then(|t| t.as_str()) != Some("FeatureCollection") {
        return Err(IngestError::BadGeoJson(
            "root type is not FeatureCollection".into(),
        ));
    }
    let features = obj
        .get("features")
        .and_then(|f| f.as_array())
        .ok_or_else(|| IngestError::BadGeoJson("missing features array".into()))?;

    let mut crs: Option<CoordSpace> = parse_crs(obj.get("crs"));
    let mut polylines = Vec::new();
    let mut warnings = Vec::new();

    for (idx, feature) in features.iter().enumerate() {
        if crs.is_none() {
            crs = parse_crs(feature.pointer("/properties/crs"));
        }
        let geometry = feature.pointer("/geometry");
        let gtype = geometry
            .and_then(|g| g.get("type"))
            .and_then(|t| t.as_str())
            .unwrap_or("<none>");
        if gtype != "LineString" {
            warnings.push(format!("feature {idx}: skipped non-LineString ({gtype})"));
            continue;
        }
        let coords = geometry
            .and_then(|g| g.get("coordinates"))
            .and_then(|c| c.as_array());
        let Some(coords) = coords else {
            warnings.push(format!("feature {idx}: missing coordinates"));
            continue;
        };
        let mut line: Vec<(f64, f64)> = Vec::with_capacity(coords.len());
        let mut bad = false;
        for c in coords {
            let pair = c.as_array().and_then(|a| {
                let x = a.first()?.as_f64()?;
                let y = a.get(1)?.as_f64()?;
                Some((x, y))
            });
            match pair {
                Some(p) => {
                    if line.last() == Some(&p) {
                        continue; // collapse repeated consecutive vertex
                    }
                    line.push(p);
                }
                None => {
                    bad = true;
                    break;
                }
            }
        }
        if bad {
            warnings.push(format!("feature {idx}: malformed coordinate"));
            continue;
        }
        if line.len() < 2 {
            warnings.push(format!(
                "feature {idx}: fewer than 2 distinct vertices, dropped"
            ));
            continue;
        }
        polylines.push(line);
    }

    for w in &warnings {
        log::warn!("{}: {w}", path.display());
    }
    Ok(NetworkLoad {
        network: RoadNetwork {
            space: crs.unwrap_or(CoordSpace::LonLat),
            polylines,
        },
        warnings,
    })
}

fn parse_crs(v: Option<&serde_json::Value>) -> Option<CoordSpace> {
    match v?.as_str()? {
        "lonlat" => Some(CoordSpace::LonLat),
        "meters" => Some(CoordSpace::Meters),
        _ => None,
    }
}

/// Write a road network as the GeoJSON layout [`load_road_network`] reads.
pub fn write_road_network_geojson(path: &Path, network: &RoadNetwork) -> Result<(), IngestError> {
    let features: Vec<serde_json::Value> = network
        .polylines
        .iter()
        .map(|line| {
            serde_json::json!({
                "type": "Feature",
                "properties": {},
                "geometry": {
                    "type": "LineString",
                    "coordinates": line.iter().map(|&(x, y)| vec![x, y]).collect::<Vec<_>>(),
                },
            })
        })
        .collect();
    let doc = serde_json::json!({
        "type": "FeatureCollection",
        "crs": match network.space {
            CoordSpace::LonLat => "lonlat",
            CoordSpace::Meters => "meters",
        },
        "features": features,
    });
    std::fs::write(path, serde_json::to_string_pretty(&doc)?).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>, IngestError> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file))
}

fn check_header<R: std::io::Read>(
    reader: &mut csv::Reader<R>,
    expected: &str,
) -> Result<(), IngestError> {
    let mut record = csv::StringRecord::new();
    let got = reader.read_record(&mut record)?;
    let found = if got {
        record.iter().collect::<Vec<_>>().join(",")
    } else {
        String::new()
    };
    if found != expected {
        return Err(IngestError::UnknownHeader {
            expected: expected.to_string(),
            found,
        });
    }
    Ok(())
}
