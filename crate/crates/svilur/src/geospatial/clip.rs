//! Clipping polylines to a closed disc with exact segment-circle
//! intersections.

use super::Point;

/// Clip every polyline to the closed disc of radius `r` around `center`.
///
/// Each output polyline lies entirely within the disc. A polyline that
/// enters and leaves several times yields several pieces, in traversal
/// order. Vertices of fully-inside spans are passed through unchanged.
pub fn clip_polylines_to_disc(polylines: &[Vec<Point>], center: Point, r: f64) -> Vec<Vec<Point>> {
    assert!(r > 0.0, "clip radius must be positive");
    let mut out = Vec::new();
    for line in polylines {
        clip_one(line, center, r, &mut out);
    }
    out
}

fn clip_one(line: &[Point], center: Point, r: f64, out: &mut Vec<Vec<Point>>) {
    let mut current: Vec<Point> = Vec::new();
    let mut prev_ended_inside = false;

    for seg in line.windows(2) {
        let (p, q) = (seg[0], seg[1]);
        match segment_inside_interval(p, q, center, r) {
            None => {
                flush(&mut current, out);
                prev_ended_inside = false;
            }
            Some((t0, t1)) => {
                if t1 <= t0 {
                    // Tangent touch; a single point is not a polyline piece.
                    flush(&mut current, out);
                    prev_ended_inside = false;
                    continue;
                }
                let enter = point_at(p, q, t0);
                let exit = point_at(p, q, t1);
                if !(t0 == 0.0 && prev_ended_inside) {
                    flush(&mut current, out);
                    current.push(enter);
                }
                current.push(exit);
                if t1 < 1.0 {
                    flush(&mut current, out);
                    prev_ended_inside = false;
                } else {
                    prev_ended_inside = true;
                }
            }
        }
    }
    flush(&mut current, out);
}

fn flush(current: &mut Vec<Point>, out: &mut Vec<Vec<Point>>) {
    if current.len() >= 2 {
        out.push(std::mem::take(current));
    } else {
        current.clear();
    }
}

/// Endpoint-exact interpolation: t = 0 and t = 1 return the original
/// vertices so fully-inside polylines survive bit-for-bit.
fn point_at(p: Point, q: Point, t: f64) -> Point {
    if t == 0.0 {
        p
    } else if t == 1.0 {
        q
    } else {
        (p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1))
    }
}

/// Parameter interval of `p + t(q-p)` inside the closed disc, clamped to
/// [0,1]; `None` when the segment misses the disc.
fn segment_inside_interval(p: Point, q: Point, c: Point, r: f64) -> Option<(f64, f64)> {
    let d = (q.0 - p.0, q.1 - p.1);
    let f = (p.0 - c.0, p.1 - c.1);
    let a = d.0 * d.0 + d.1 * d.1;
    let b = 2.0 * (f.0 * d.0 + f.1 * d.1);
    let e = f.0 * f.0 + f.1 * f.1 - r * r;
    if a == 0.0 {
        // Degenerate zero-length segment: inside iff its point is.
        return if e <= 0.0 { Some((0.0, 1.0)) } else { None };
    }
    let disc = b * b - 4.0 * a * e;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t0 = ((-b - sq) / (2.0 * a)).max(0.0);
    let t1 = ((-b + sq) / (2.0 * a)).min(1.0);
    if t1 < t0 {
        None
    } else {
        Some((t0, t1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diameter_segment_clips_to_chord() {
        let lines = vec![vec![(-500.0, 0.0), (500.0, 0.0)]];
        let clipped = clip_polylines_to_disc(&lines, (0.0, 0.0), 100.0);
        assert_eq!(clipped.len(), 1);
        assert_eq!(clipped[0].len(), 2);
        let (a, b) = (clipped[0][0], clipped[0][1]);
        assert!((a.0 + 100.0).abs() < 1e-9 && a.1 == 0.0);
        assert!((b.0 - 100.0).abs() < 1e-9 && b.1 == 0.0);
    }

    #[test]
    fn fully_outside_is_empty() {
        let lines = vec![vec![(1000.0, 1000.0), (2000.0, 1000.0)]];
        assert!(clip_polylines_to_disc(&lines, (0.0, 0.0), 100.0).is_empty());
    }

    #[test]
    fn fully_inside_is_identity() {
        let line = vec![(-10.0, 0.0), (0.0, 5.0), (10.0, 0.0)];
        let clipped = clip_polylines_to_disc(&[line.clone()], (0.0, 0.0), 100.0);
        assert_eq!(clipped, vec![line]);
    }

    #[test]
    fn reentrant_polyline_splits_into_pieces() {
        // Crosses the disc twice: left chord, far detour, right chord.
        let line = vec![(-300.0, 10.0), (0.0, 610.0), (300.0, 10.0)];
        let clipped = clip_polylines_to_disc(&[line], (0.0, 0.0), 100.0);
        assert_eq!(clipped.len(), 2);
        for piece in &clipped {
            for p in piece {
                assert!(super::super::dist(*p, (0.0, 0.0)) <= 100.0 + 1e-9);
            }
        }
    }

    #[test]
    fn crossing_segment_keeps_both_boundary_points() {
        // One long segment straight through: single piece with 2 points.
        let line = vec![(-300.0, 0.0), (300.0, 0.0)];
        let clipped = clip_polylines_to_disc(&[line], (10.0, 0.0), 50.0);
        assert_eq!(clipped.len(), 1);
        assert!((clipped[0][0].0 - -40.0).abs() < 1e-9);
        assert!((clipped[0][1].0 - 60.0).abs() < 1e-9);
    }

    #[test]
    fn vertex_on_boundary_stays_connected() {
        // Two segments meeting inside; both fully inside -> one piece.
        let line = vec![(-50.0, 0.0), (0.0, 0.0), (0.0, 50.0)];
        let clipped = clip_polylines_to_disc(&[line.clone()], (0.0, 0.0), 60.0);
        assert_eq!(clipped, vec![line]);
    }
}
