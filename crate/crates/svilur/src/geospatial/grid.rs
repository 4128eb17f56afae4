//! 200 m grid assignment and per-cell median aggregation.

use super::CellIndex;
use crate::geospatial::Projection;
use crate::ingest::MonitoringRecord;
use crate::pollutant::{Pollutant, Readings};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Square aggregation grid in the projected plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Cell side, meters.
    pub cell_m: f64,
    /// Lower-left origin of cell (0,0).
    pub origin: (f64, f64),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            cell_m: 200.0,
            origin: (0.0, 0.0),
        }
    }
}

impl GridSpec {
    pub fn centroid(&self, cell: CellIndex) -> (f64, f64) {
        (
            self.origin.0 + (cell.i as f64 + 0.5) * self.cell_m,
            self.origin.1 + (cell.j as f64 + 0.5) * self.cell_m,
        )
    }
}

/// Cell index of a projected point; lower/left edges inclusive.
pub fn assign_grid_cell(x: f64, y: f64, spec: &GridSpec) -> CellIndex {
    CellIndex {
        i: ((x - spec.origin.0) / spec.cell_m).floor() as i64,
        j: ((y - spec.origin.1) / spec.cell_m).floor() as i64,
    }
}

/// One aggregation location: a grid cell with at least `min_count` records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationLocation {
    pub cell: CellIndex,
    pub centroid: (f64, f64),
    pub medians: Readings,
    pub count: usize,
    /// Share of this location's images flagged low quality; filled by the
    /// imaging stage.
    pub low_quality_prop: Option<f64>,
}

impl AggregationLocation {
    pub fn id(&self) -> String {
        self.cell.id()
    }
}

/// Median with the even-count midpoint rule (mean of the two middle values).
pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    let n = values.len();
    let (_, mid, upper) = values.select_nth_unstable_by(n / 2, f64::total_cmp);
    let hi = *mid;
    debug_assert!(upper.iter().all(|v| *v >= hi));
    if n % 2 == 1 {
        hi
    } else {
        // Largest element strictly below position n/2.
        let lo = values[..n / 2]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        (lo + hi) / 2.0
    }
}

/// Group calibrated records into grid cells and take per-pollutant medians.
///
/// Cells with fewer than `min_count` records are omitted. Output is sorted by
/// cell index, so it is stable across runs.
pub fn aggregate_to_grid(
    records: &[MonitoringRecord],
    projection: &Projection,
    spec: &GridSpec,
    min_count: usize,
) -> Vec<AggregationLocation> {
    let min_count = min_count.max(1);
    let mut by_cell: BTreeMap<CellIndex, Vec<Readings>> = BTreeMap::new();
    for r in records {
        let (x, y) = projection.project(r.lon, r.lat);
        by_cell
            .entry(assign_grid_cell(x, y, spec))
            .or_default()
            .push(r.readings);
    }
    by_cell
        .into_iter()
        .filter(|(_, v)| v.len() >= min_count)
        .map(|(cell, readings)| {
            let mut medians = Readings {
                no: 0.0,
                no2: 0.0,
                pm25: 0.0,
                pm10: 0.0,
            };
            for p in Pollutant::ALL {
                let mut vals: Vec<f64> = readings.iter().map(|r| r.get(p)).collect();
                *medians.get_mut(p) = median(&mut vals);
            }
            AggregationLocation {
                cell,
                centroid: spec.centroid(cell),
                medians,
                count: readings.len(),
                low_quality_prop: None,
            }
        })
        .collect()
}
