//! Local projection, 200 m grid aggregation, and buffer-constrained road
//! sampling geometry.

mod clip;
mod grid;
mod projection;
mod sampling;

pub use clip::clip_polylines_to_disc;
pub use grid::{aggregate_to_grid, assign_grid_cell, median, AggregationLocation, GridSpec};
pub use projection::Projection;
pub use sampling::{
    build_sampling_plan, generate_sample_points, LocationPlan, PlannedPoint, SamplePoint,
    SamplingPlan,
};

use serde::{Deserialize, Serialize};

/// A point in the local projected plane, meters.
pub type Point = (f64, f64);

/// Grid cell index, row-major floor semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex {
    pub i: i64,
    pub j: i64,
}

impl CellIndex {
    pub fn id(&self) -> String {
        format!("c{}_{}", self.i, self.j)
    }
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    (dx * dx + dy * dy).sqrt()
}
