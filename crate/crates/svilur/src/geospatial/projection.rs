//! Equirectangular local projection.
//!
//! Adequate at city scale (error < 0.1 % over ~50 km extents); not a
//! substitute for real geodesy over larger areas.

use serde::{Deserialize, Serialize};

const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Local equirectangular projection anchored at a reference lon/lat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub lon0: f64,
    pub lat0: f64,
}

impl Projection {
    pub fn new(lon0: f64, lat0: f64) -> Self {
        Projection { lon0, lat0 }
    }

    /// Project degrees to meters east/north of the reference point.
    pub fn project(&self, lon: f64, lat: f64) -> (f64, f64) {
        let k = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
        let x = (lon - self.lon0) * self.lat0.to_radians().cos() * k;
        let y = (lat - self.lat0) * k;
        (x, y)
    }

    /// Inverse of [`project`](Self::project).
    pub fn unproject(&self, x: f64, y: f64) -> (f64, f64) {
        let k = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
        let lon = self.lon0 + x / (self.lat0.to_radians().cos() * k);
        let lat = self.lat0 + y / k;
        (lon, lat)
    }

    /// Great-circle-free local distance between two lon/lat points, meters.
    ///
    /// Uses the projection plane; callers must keep both points in the
    /// working extent.
    pub fn distance_m(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let pa = self.project(a.0, a.1);
        let pb = self.project(b.0, b.1);
        super::dist(pa, pb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn origin_maps_to_zero() {
        let p = Projection::new(113.3, 23.1);
        let (x, y) = p.project(113.3, 23.1);
        assert_eq!((x, y), (0.0, 0.0));
    }

    #[test]
    fn meridian_arc_scale() {
        let p = Projection::new(113.3, 23.1);
        let (_, y) = p.project(113.3, 23.1 + 0.001);
        assert!((y - 111.194_926_644).abs() < 1e-3, "y = {y}");
    }

    #[test]
    fn round_trip_within_nanometers() {
        let p = Projection::new(113.3, 23.1);
        let mut rng = crate::seeding::rng_for(42, &[9]);
        for _ in 0..200 {
            let lon = 113.3 + rng.random_range(-0.3..0.3);
            let lat = 23.1 + rng.random_range(-0.3..0.3);
            let (x, y) = p.project(lon, lat);
            let (lon2, lat2) = p.unproject(x, y);
            let (x2, y2) = p.project(lon2, lat2);
            assert!((x - x2).abs() < 1e-9 && (y - y2).abs() < 1e-9);
        }
    }
}
