//! Oriented-rectangle overlap by the separating axis theorem.

use super::agent::{AgentState, Footprint};
use super::map::MergingMap;

/// Center, heading and footprint of a vehicle in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obb {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub half_length: f64,
    pub half_width: f64,
}

impl Obb {
    pub fn new(x: f64, y: f64, heading: f64, footprint: Footprint) -> Self {
        Obb {
            x,
            y,
            heading,
            half_length: 0.5 * footprint.length,
            half_width: 0.5 * footprint.width,
        }
    }

    pub fn of(agent: &AgentState, map: &MergingMap) -> Self {
        let (x, y) = map.to_world(agent.s, map.lane_offset(agent.lane) + agent.lateral);
        Obb::new(x, y, agent.theta, agent.footprint)
    }

    fn axes(&self) -> [(f64, f64); 2] {
        let (s, c) = self.heading.sin_cos();
        [(c, s), (-s, c)]
    }

    /// Projection radius onto a unit axis.
    fn radius(&self, axis: (f64, f64)) -> f64 {
        let [u, v] = self.axes();
        self.half_length * (u.0 * axis.0 + u.1 * axis.1).abs()
            + self.half_width * (v.0 * axis.0 + v.1 * axis.1).abs()
    }

    pub fn contains(&self, px: f64, py: f64) -> bool {
        let [u, v] = self.axes();
        let (dx, dy) = (px - self.x, py - self.y);
        (dx * u.0 + dy * u.1).abs() <= self.half_length
            && (dx * v.0 + dy * v.1).abs() <= self.half_width
    }

    /// Touching boxes count as overlapping.
    pub fn overlaps(&self, other: &Obb) -> bool {
        let d = (other.x - self.x, other.y - self.y);
        self.axes().into_iter().chain(other.axes()).all(|axis| {
            let dist = (d.0 * axis.0 + d.1 * axis.1).abs();
            dist <= self.radius(axis) + other.radius(axis)
        })
    }
}

pub fn check_collision(a: &AgentState, b: &AgentState, map: &MergingMap) -> bool {
    let (oa, ob) = (Obb::of(a, map), Obb::of(b, map));
    // Cheap reject on the bounding circles.
    let reach = oa.half_length.hypot(oa.half_width) + ob.half_length.hypot(ob.half_width);
    if (oa.x - ob.x).powi(2) + (oa.y - ob.y).powi(2) > reach * reach {
        return false;
    }
    oa.overlaps(&ob)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp() -> Footprint {
        Footprint::default()
    }

    #[test]
    fn identical_pose_overlaps() {
        let a = Obb::new(1.0, 2.0, 0.3, fp());
        assert!(a.overlaps(&a));
    }

    #[test]
    fn separated_along_lane() {
        let a = Obb::new(0.0, 0.0, 0.0, fp());
        assert!(!a.overlaps(&Obb::new(4.6, 0.0, 0.0, fp())));
        assert!(a.overlaps(&Obb::new(4.4, 0.0, 0.0, fp())));
    }

    #[test]
    fn rotated_box_needs_its_own_axes() {
        // Overlap on the first box's axes but separated along the second's.
        let a = Obb::new(
            0.0,
            0.0,
            0.0,
            Footprint {
                length: 4.0,
                width: 4.0,
            },
        );
        let b = Obb::new(
            2.4,
            2.4,
            -std::f64::consts::FRAC_PI_4,
            Footprint {
                length: 4.0,
                width: 1.0,
            },
        );
        assert!(!a.overlaps(&b));
        assert!(!b.overlaps(&a));
    }
}
