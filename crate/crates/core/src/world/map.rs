//! Two-lane merge corridor.
//!
//! Lane 0 runs the full corridor; lane 1 lies to its left and ends at
//! `s_merge`. Positions are arc lengths along lane 0 plus a lateral
//! coordinate measured towards lane 1.

use serde::{Deserialize, Serialize};

pub type LaneId = u8;

pub const CONTINUING_LANE: LaneId = 0;
pub const ENDING_LANE: LaneId = 1;

/// Piecewise-linear curve parameterized by arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<(f64, f64)>,
    cumulative: Vec<f64>,
}

impl Polyline {
    /// Panics on fewer than two points or a zero-length segment.
    pub fn new(points: Vec<(f64, f64)>) -> Self {
        assert!(points.len() >= 2, "polyline needs two points");
        let mut cumulative = vec![0.0];
        for w in points.windows(2) {
            let d = (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1);
            assert!(d > 0.0, "degenerate polyline segment");
            cumulative.push(cumulative.last().unwrap() + d);
        }
        Polyline { points, cumulative }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Point and tangent heading at arc length `s`, extrapolating linearly
    /// past either end.
    pub fn pose_at(&self, s: f64) -> (f64, f64, f64) {
        let i = match self.cumulative.binary_search_by(|c| c.total_cmp(&s)) {
            Ok(i) => i.min(self.points.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.points.len() - 2),
        };
        let (a, b) = (self.points[i], self.points[i + 1]);
        let seg = self.cumulative[i + 1] - self.cumulative[i];
        let u = (s - self.cumulative[i]) / seg;
        let heading = (b.1 - a.1).atan2(b.0 - a.0);
        (a.0 + u * (b.0 - a.0), a.1 + u * (b.1 - a.1), heading)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapParams {
    pub length: f64,
    pub s_merge: f64,
    pub lane_width: f64,
}

impl Default for MapParams {
    fn default() -> Self {
        MapParams {
            length: 220.0,
            s_merge: 140.0,
            lane_width: 3.5,
        }
    }
}

/// Straight merge corridor with explicit centerlines.
#[derive(Debug, Clone, PartialEq)]
pub struct MergingMap {
    pub params: MapParams,
    centerlines: [Polyline; 2],
}

impl MergingMap {
    /// Panics unless `0 < s_merge <= length` and `lane_width > 0`.
    pub fn new(params: MapParams) -> Self {
        let MapParams {
            length,
            s_merge,
            lane_width,
        } = params;
        assert!(
            lane_width > 0.0 && s_merge > 0.0 && s_merge <= length,
            "invalid map parameters {params:?}"
        );
        MergingMap {
            params,
            centerlines: [
                Polyline::new(vec![(0.0, 0.0), (length, 0.0)]),
                Polyline::new(vec![(0.0, lane_width), (s_merge, lane_width)]),
            ],
        }
    }

    pub fn length(&self) -> f64 {
        self.params.length
    }

    pub fn s_merge(&self) -> f64 {
        self.params.s_merge
    }

    pub fn lane_width(&self) -> f64 {
        self.params.lane_width
    }

    pub fn centerline(&self, lane: LaneId) -> &Polyline {
        &self.centerlines[lane as usize]
    }

    pub fn num_lanes(&self) -> usize {
        self.centerlines.len()
    }

    /// Lateral coordinate of a lane centerline.
    pub fn lane_offset(&self, lane: LaneId) -> f64 {
        lane as f64 * self.params.lane_width
    }

    /// Whether `lane` is drivable at arc length `s`.
    pub fn lane_exists_at(&self, lane: LaneId, s: f64) -> bool {
        match lane {
            CONTINUING_LANE => s <= self.params.length,
            ENDING_LANE => s <= self.params.s_merge,
            _ => false,
        }
    }

    /// World coordinates of a corridor position.
    pub fn to_world(&self, s: f64, lateral: f64) -> (f64, f64) {
        let (x, y, h) = self.centerlines[0].pose_at(s);
        (x - lateral * h.sin(), y + lateral * h.cos())
    }
}

impl Default for MergingMap {
    fn default() -> Self {
        MergingMap::new(MapParams::default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polyline_interpolates_and_extrapolates() {
        let p = Polyline::new(vec![(0.0, 0.0), (3.0, 4.0), (3.0, 10.0)]);
        assert_eq!(p.length(), 11.0);
        let (x, y, _) = p.pose_at(2.5);
        assert!((x - 1.5).abs() < 1e-12 && (y - 2.0).abs() < 1e-12);
        let (x, y, h) = p.pose_at(8.0);
        assert!((x - 3.0).abs() < 1e-12 && (y - 7.0).abs() < 1e-12);
        assert!((h - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let (x, _, _) = p.pose_at(-1.0);
        assert!((x + 0.6).abs() < 1e-12);
    }

    #[test]
    fn ending_lane_stops_at_merge_point() {
        let m = MergingMap::default();
        assert!(m.lane_exists_at(ENDING_LANE, 139.9));
        assert!(!m.lane_exists_at(ENDING_LANE, 140.1));
        assert!(m.lane_exists_at(CONTINUING_LANE, 200.0));
        assert_eq!(m.centerline(ENDING_LANE).length(), 140.0);
        assert_eq!(m.to_world(10.0, 3.5), (10.0, 3.5));
    }
}
