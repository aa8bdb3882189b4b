//! Intelligent Driver Model.

use serde::{Deserialize, Serialize};

/// Hard braking limit applied to every IDM output (m/s²).
pub const MAX_BRAKING: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdmParams {
    /// m/s
    pub desired_velocity: f64,
    /// m/s²
    pub max_acceleration: f64,
    /// s
    pub time_headway: f64,
    /// m/s²
    pub comfortable_deceleration: f64,
    /// m
    pub minimum_distance: f64,
    pub exponent: f64,
}

impl Default for IdmParams {
    fn default() -> Self {
        IdmParams {
            desired_velocity: 10.0,
            max_acceleration: 1.7,
            time_headway: 2.5,
            comfortable_deceleration: 2.0,
            minimum_distance: 2.0,
            exponent: 4.0,
        }
    }
}

impl IdmParams {
    pub fn with_desired_velocity(self, v0: f64) -> Self {
        IdmParams {
            desired_velocity: v0,
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("desired_velocity", self.desired_velocity),
            ("max_acceleration", self.max_acceleration),
            ("time_headway", self.time_headway),
            ("comfortable_deceleration", self.comfortable_deceleration),
            ("minimum_distance", self.minimum_distance),
            ("exponent", self.exponent),
        ];
        match fields.iter().find(|(_, x)| !(x.is_finite() && *x > 0.0)) {
            Some((name, x)) => Err(format!("idm.{name} must be positive, got {x}")),
            None => Ok(()),
        }
    }
}

/// Desired dynamic gap `s*`. The dynamic part is floored at zero so that a
/// fast-receding leader cannot shrink it below the standstill distance.
pub fn desired_gap(v: f64, dv: f64, p: &IdmParams) -> f64 {
    let dynamic = v * p.time_headway
        + v * dv / (2.0 * (p.max_acceleration * p.comfortable_deceleration).sqrt());
    p.minimum_distance + dynamic.max(0.0)
}

/// IDM acceleration at speed `v`. `gap` is the bumper-to-bumper distance to
/// the leader, `dv = v - v_leader`; without a leader the interaction term
/// is dropped. The result is clamped to `[-MAX_BRAKING, max_acceleration]`.
pub fn idm_acceleration(v: f64, gap: Option<f64>, dv: f64, p: &IdmParams) -> f64 {
    let free = 1.0 - (v / p.desired_velocity).powf(p.exponent);
    let a = match gap {
        None => p.max_acceleration * free,
        Some(g) if g <= 0.0 => return -MAX_BRAKING,
        Some(g) => {
            let ratio = desired_gap(v, dv, p) / g;
            p.max_acceleration * (free - ratio * ratio)
        }
    };
    a.clamp(-MAX_BRAKING, p.max_acceleration)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_flow_equilibrium_is_zero() {
        let p = IdmParams::default();
        assert_eq!(idm_acceleration(10.0, None, 0.0, &p), 0.0);
    }

    #[test]
    fn non_positive_gap_brakes_fully() {
        let p = IdmParams::default();
        assert_eq!(idm_acceleration(3.0, Some(0.0), 0.0, &p), -MAX_BRAKING);
        assert_eq!(idm_acceleration(3.0, Some(-1.0), 0.0, &p), -MAX_BRAKING);
    }

    #[test]
    fn rejects_non_positive_parameters() {
        let p = IdmParams {
            time_headway: 0.0,
            ..Default::default()
        };
        assert!(p.validate().unwrap_err().contains("time_headway"));
    }
}
