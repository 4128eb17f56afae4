//! Arc-length sampling of clipped road polylines and per-location sampling
//! plans over nested buffer radii.

use super::{clip_polylines_to_disc, dist, AggregationLocation, CellIndex, Point};
use crate::exec;
use serde::{Deserialize, Serialize};

pub const DEFAULT_SPACING_M: f64 = 25.0;
pub const DEFAULT_DEDUP_M: f64 = 1.0;
pub const DEFAULT_RADII_M: [f64; 5] = [100.0, 200.0, 300.0, 400.0, 500.0];

const ARC_EPS: f64 = 1e-9;

/// A sampled road point before it is tied to a location and radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedPoint {
    /// Index of the clipped polyline this point was walked on.
    pub polyline_idx: usize,
    /// Arc length from the clipped polyline's start, meters.
    pub arc_m: f64,
    pub position: Point,
    /// Road direction, degrees clockwise from north.
    pub bearing_deg: f64,
}

/// A sample point bound to its aggregation location and buffer radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub point_id: String,
    pub cell: CellIndex,
    pub radius_m: f64,
    pub position: Point,
    pub bearing_deg: f64,
}

impl SamplePoint {
    /// The four request headings: road bearing plus 0°, 90°, 180°, 270°.
    pub fn headings(&self) -> [f64; 4] {
        heading_set(self.bearing_deg)
    }
}

pub fn heading_set(bearing_deg: f64) -> [f64; 4] {
    [0.0, 90.0, 180.0, 270.0].map(|off| (bearing_deg + off).rem_euclid(360.0))
}

/// Walk each clipped polyline at fixed arc-length steps from its start.
///
/// The end vertex appears only when the total length is a whole number of
/// steps. A point that lands within `dedup_radius` of a point already kept
/// from a *different* polyline is dropped.
pub fn generate_sample_points(
    clipped: &[Vec<Point>],
    spacing_m: f64,
    dedup_radius_m: f64,
) -> Vec<PlannedPoint> {
    assert!(spacing_m > 0.0, "spacing must be positive");
    let mut kept: Vec<PlannedPoint> = Vec::new();
    for (poly_idx, line) in clipped.iter().enumerate() {
        if line.len() < 2 {
            continue;
        }
        let mut cum = Vec::with_capacity(line.len());
        cum.push(0.0);
        for seg in line.windows(2) {
            let last = *cum.last().unwrap();
            cum.push(last + dist(seg[0], seg[1]));
        }
        let total = *cum.last().unwrap();

        let mut step = 0usize;
        loop {
            let s = step as f64 * spacing_m;
            if s > total + ARC_EPS {
                break;
            }
            let s = s.min(total);
            let (position, bearing_deg) = locate(line, &cum, s);
            let candidate = PlannedPoint {
                polyline_idx: poly_idx,
                arc_m: s,
                position,
                bearing_deg,
            };
            let duplicate = kept.iter().any(|p| {
                p.polyline_idx != poly_idx && dist(p.position, position) <= dedup_radius_m
            });
            if !duplicate {
                kept.push(candidate);
            }
            step += 1;
        }
    }
    kept
}

/// Position and segment bearing at arc length `s` along `line`.
fn locate(line: &[Point], cum: &[f64], s: f64) -> (Point, f64) {
    // Containing segment: cum[k] <= s < cum[k+1]; the final arc position
    // belongs to the last segment.
    let mut k = match cum.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
        Ok(i) => i,
        Err(i) => i - 1,
    };
    k = k.min(line.len() - 2);
    let (p, q) = (line[k], line[k + 1]);
    let seg_len = cum[k + 1] - cum[k];
    let t = if seg_len > 0.0 { (s - cum[k]) / seg_len } else { 0.0 };
    let position = if t <= 0.0 {
        p
    } else if t >= 1.0 {
        q
    } else {
        (p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1))
    };
    (position, bearing(p, q))
}

/// Direction of p→q in degrees clockwise from north (+y).
pub fn bearing(p: Point, q: Point) -> f64 {
    let deg = (q.0 - p.0).atan2(q.1 - p.1).to_degrees();
    deg.rem_euclid(360.0)
}

/// Sampling geometry for one aggregation location.
///
/// Points are walked once over the network clipped at the *largest* radius;
/// smaller radii reuse the same walk filtered by distance to the centroid,
/// which makes the plans nested by construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocationPlan {
    pub cell: CellIndex,
    pub centroid: Point,
    pub max_radius_m: f64,
    pub points: Vec<PlannedPointWithin>,
    /// True when no road lies within the largest radius.
    pub no_road: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedPointWithin {
    pub point_id: String,
    pub point: PlannedPoint,
    /// Distance from the location centroid, meters.
    pub dist_m: f64,
}

impl LocationPlan {
    /// Points inside the closed disc of radius `r` (tolerance 1e-9 m).
    pub fn points_within(&self, r: f64) -> impl Iterator<Item = &PlannedPointWithin> {
        self.points.iter().filter(move |p| p.dist_m <= r + 1e-9)
    }

    pub fn sample_points(&self, r: f64) -> Vec<SamplePoint> {
        self.points_within(r)
            .map(|p| SamplePoint {
                point_id: p.point_id.clone(),
                cell: self.cell,
                radius_m: r,
                position: p.point.position,
                bearing_deg: p.point.bearing_deg,
            })
            .collect()
    }
}

/// The full sampling plan: one [`LocationPlan`] per aggregation location.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub radii_m: Vec<f64>,
    pub spacing_m: f64,
    pub locations: Vec<LocationPlan>,
}

impl SamplingPlan {
    pub fn location(&self, cell: CellIndex) -> Option<&LocationPlan> {
        self.locations.iter().find(|l| l.cell == cell)
    }
}

/// Build per-location sampling plans for every radius in `radii_m`.
///
/// `network_m` must already be in projected meters. Locations are processed
/// independently (in parallel when enabled) and returned in input order.
pub fn build_sampling_plan(
    locations: &[AggregationLocation],
    network_m: &[Vec<Point>],
    radii_m: &[f64],
    spacing_m: f64,
    dedup_radius_m: f64,
) -> SamplingPlan {
    assert!(!radii_m.is_empty(), "at least one radius required");
    assert!(radii_m.iter().all(|r| *r > 0.0));
    let mut radii = radii_m.to_vec();
    radii.sort_by(f64::total_cmp);
    let max_r = *radii.last().unwrap();

    let plans = exec::map_collect(locations, |loc| {
        let nearby = prefilter(network_m, loc.centroid, max_r);
        let clipped = clip_polylines_to_disc(&nearby, loc.centroid, max_r);
        let walked = generate_sample_points(&clipped, spacing_m, dedup_radius_m);
        let points: Vec<PlannedPointWithin> = walked
            .into_iter()
            .enumerate()
            .map(|(k, point)| PlannedPointWithin {
                point_id: format!("{}_p{:04}", loc.cell.id(), k),
                dist_m: dist(point.position, loc.centroid),
                point,
            })
            .collect();
        LocationPlan {
            cell: loc.cell,
            centroid: loc.centroid,
            max_radius_m: max_r,
            no_road: points.is_empty(),
            points,
        }
    });

    SamplingPlan {
        radii_m: radii,
        spacing_m,
        locations: plans,
    }
}

/// Cheap bounding-box rejection before exact clipping. The slack is the
/// line's longest segment, so a line whose vertices all sit outside the box
/// but whose segment crosses the disc still survives.
fn prefilter(network: &[Vec<Point>], center: Point, r: f64) -> Vec<Vec<Point>> {
    network
        .iter()
        .filter(|line| {
            let slack = r + line
                .windows(2)
                .map(|s| dist(s[0], s[1]))
                .fold(0.0, f64::max);
            line.iter()
                .any(|p| (p.0 - center.0).abs() <= slack && (p.1 - center.1).abs() <= slack)
        })
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pollutant::Readings;
    use rand::Rng;

    fn loc_at(x: f64, y: f64) -> AggregationLocation {
        AggregationLocation {
            cell: CellIndex {
                i: (x / 200.0).floor() as i64,
                j: (y / 200.0).floor() as i64,
            },
            centroid: (x, y),
            medians: Readings {
                no: 1.0,
                no2: 1.0,
                pm25: 1.0,
                pm10: 1.0,
            },
            count: 1,
            low_quality_prop: None,
        }
    }

    #[test]
    fn chord_walk_hits_every_quarter_step() {
        let clipped = vec![vec![(-100.0, 0.0), (100.0, 0.0)]];
        let pts = generate_sample_points(&clipped, 25.0, 1.0);
        assert_eq!(pts.len(), 9);
        for (k, p) in pts.iter().enumerate() {
            assert!((p.position.0 - (-100.0 + 25.0 * k as f64)).abs() < 1e-9);
            assert_eq!(p.bearing_deg, 90.0);
        }
    }

    #[test]
    fn short_piece_gets_only_its_start() {
        let clipped = vec![vec![(0.0, 0.0), (10.0, 0.0)]];
        let pts = generate_sample_points(&clipped, 25.0, 1.0);
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].arc_m, 0.0);
    }

    #[test]
    fn north_going_segment_bearing_zero() {
        let pts = generate_sample_points(&[vec![(0.0, 0.0), (0.0, 50.0)]], 25.0, 1.0);
        assert_eq!(pts[0].bearing_deg, 0.0);
        assert_eq!(bearing((0.0, 0.0), (1.0, 0.0)), 90.0);
        assert_eq!(bearing((0.0, 0.0), (0.0, -1.0)), 180.0);
        assert_eq!(bearing((0.0, 0.0), (-1.0, 0.0)), 270.0);
    }

    #[test]
    fn cross_polyline_duplicates_dropped() {
        // Two polylines starting at the same point.
        let clipped = vec![
            vec![(0.0, 0.0), (100.0, 0.0)],
            vec![(0.5, 0.0), (0.5, 100.0)],
        ];
        let pts = generate_sample_points(&clipped, 25.0, 1.0);
        // Second polyline's origin is within 1 m of the first's -> dropped.
        let from_second: Vec<_> = pts.iter().filter(|p| p.polyline_idx == 1).collect();
        assert_eq!(from_second.len(), 4);
        assert!(from_second.iter().all(|p| p.arc_m > 0.0));
    }

    #[test]
    fn same_polyline_points_never_deduplicated() {
        // A hairpin whose return leg passes within 1 m of its outbound leg.
        let clipped = vec![vec![(0.0, 0.0), (50.0, 0.0), (50.0, 0.5), (0.0, 0.5)]];
        let pts = generate_sample_points(&clipped, 25.0, 1.0);
        assert_eq!(pts.len(), 5); // arcs 0, 25, 50, 75, 100 (length 100.5 -> last at 100)
    }

    #[test]
    fn consecutive_arc_spacing_exact() {
        let mut rng = crate::seeding::rng_for(21, &[4]);
        // Random jagged polyline.
        let mut line = vec![(0.0, 0.0)];
        for _ in 0..20 {
            let last = *line.last().unwrap();
            line.push((
                last.0 + rng.random_range(5.0..40.0),
                last.1 + rng.random_range(-30.0..30.0),
            ));
        }
        let pts = generate_sample_points(&[line], 25.0, 1.0);
        for w in pts.windows(2) {
            assert!((w[1].arc_m - w[0].arc_m - 25.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn diameter_road_point_counts_match_radii() {
        let road = vec![vec![(-600.0, 0.0), (600.0, 0.0)]];
        let plan = build_sampling_plan(&[loc_at(0.0, 0.0)], &road, &DEFAULT_RADII_M, 25.0, 1.0);
        let lp = &plan.locations[0];
        let counts: Vec<usize> = DEFAULT_RADII_M
            .iter()
            .map(|r| lp.points_within(*r).count())
            .collect();
        assert_eq!(counts, vec![9, 17, 25, 33, 41]);
    }

    #[test]
    fn plans_are_nested_across_radii() {
        let mut rng = crate::seeding::rng_for(99, &[5]);
        for _ in 0..50 {
            let mut network = Vec::new();
            for _ in 0..rng.random_range(1..6usize) {
                let mut line = vec![(
                    rng.random_range(-600.0..600.0),
                    rng.random_range(-600.0..600.0),
                )];
                for _ in 0..rng.random_range(1..8usize) {
                    let last = *line.last().unwrap();
                    line.push((
                        last.0 + rng.random_range(-300.0..300.0),
                        last.1 + rng.random_range(-300.0..300.0),
                    ));
                }
                network.push(line);
            }
            let plan =
                build_sampling_plan(&[loc_at(0.0, 0.0)], &network, &DEFAULT_RADII_M, 25.0, 1.0);
            let lp = &plan.locations[0];
            for w in DEFAULT_RADII_M.windows(2) {
                let small: Vec<&PlannedPointWithin> = lp.points_within(w[0]).collect();
                let big: Vec<&PlannedPointWithin> = lp.points_within(w[1]).collect();
                for p in &small {
                    assert!(big.iter().any(|q| q.point_id == p.point_id));
                }
                assert!(big.len() >= small.len());
            }
            for p in &lp.points {
                assert!(p.dist_m <= 500.0 + 1e-9);
            }
        }
    }

    #[test]
    fn no_road_location_is_flagged_empty() {
        let road = vec![vec![(10_000.0, 0.0), (11_000.0, 0.0)]];
        let plan = build_sampling_plan(&[loc_at(0.0, 0.0)], &road, &DEFAULT_RADII_M, 25.0, 1.0);
        assert!(plan.locations[0].no_road);
        assert_eq!(plan.locations[0].points.len(), 0);
    }

    #[test]
    fn heading_set_is_bearing_plus_quarters() {
        let h = heading_set(350.0);
        assert_eq!(h, [350.0, 80.0, 170.0, 260.0]);
    }
}
