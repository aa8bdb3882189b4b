//! Seeded synthetic merge scenarios.
//!
//! Every scenario puts the ego on the continuing lane at 14 m/s and at least
//! one other agent on the ending lane a short distance ahead of it, close
//! enough that the merger cannot cut in without the ego yielding. The
//! remaining agents (up to five in total) are spread over both lanes at
//! 10 m/s.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::world::{Footprint, Goal, MapParams, CONTINUING_LANE, ENDING_LANE};

use super::scenario::{AgentSpec, Scenario, DEFAULT_DT, DEFAULT_TIME_LIMIT};

pub const EGO_SPEED: f64 = 14.0;
pub const OTHER_SPEED: f64 = 10.0;
pub const EGO_START: f64 = 35.0;

/// Minimum centre spacing between agents on the same lane (m).
const MIN_SPACING: f64 = 10.0;

fn agent(id: u32, lane: u8, s: f64, v: f64) -> AgentSpec {
    let fp = Footprint::default();
    AgentSpec {
        id,
        lane,
        s,
        v,
        length: fp.length,
        width: fp.width,
    }
}

fn round(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

fn free(agents: &[AgentSpec], lane: u8, s: f64) -> bool {
    agents
        .iter()
        .all(|a| a.lane != lane || (a.s - s).abs() >= MIN_SPACING)
}

/// One scenario drawn from `rng`.
pub fn generate_scenario(name: String, seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let map = MapParams::default();
    let total = rng.gen_range(2..=5usize);
    let mut agents = vec![agent(0, CONTINUING_LANE, EGO_START, EGO_SPEED)];
    agents.push(agent(
        1,
        ENDING_LANE,
        round(EGO_START + rng.gen_range(8.0..40.0)),
        OTHER_SPEED,
    ));
    while agents.len() < total {
        let id = agents.len() as u32;
        let (lane, s) = match rng.gen_range(0..3) {
            0 => (CONTINUING_LANE, EGO_START + rng.gen_range(30.0..90.0)),
            1 => (CONTINUING_LANE, EGO_START - rng.gen_range(15.0..30.0)),
            _ => (ENDING_LANE, EGO_START + rng.gen_range(8.0..70.0)),
        };
        let s = round(s);
        if free(&agents, lane, s) {
            agents.push(agent(id, lane, s, OTHER_SPEED));
        }
    }
    Scenario {
        name,
        seed,
        ego: 0,
        time_limit: DEFAULT_TIME_LIMIT,
        dt: DEFAULT_DT,
        unsafe_start: false,
        map,
        goal: Goal {
            s_min: 190.0,
            s_max: 215.0,
        },
        agents,
    }
}

/// `count` scenarios named `merge-00`, `merge-01`, ... whose seeds derive
/// from `seed`.
pub fn generate_suite(seed: u64, count: usize) -> Vec<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| generate_scenario(format!("merge-{i:02}"), u64::from(rng.gen::<u32>())))
        .collect()
}

/// Ego at 14 m/s on the continuing lane, `gap` metres (bumper to bumper)
/// behind a stopped car.
pub fn brake_or_crash(gap: f64) -> Scenario {
    let fp = Footprint::default();
    let ego_s = 40.0;
    Scenario {
        name: "brake-or-crash".into(),
        seed: 0,
        ego: 0,
        time_limit: 15.0,
        dt: DEFAULT_DT,
        unsafe_start: false,
        map: MapParams::default(),
        goal: Goal {
            s_min: 190.0,
            s_max: 215.0,
        },
        agents: vec![
            agent(0, CONTINUING_LANE, ego_s, EGO_SPEED),
            agent(1, CONTINUING_LANE, ego_s + fp.length + gap, 0.0),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_is_valid_and_reproducible() {
        let a = generate_suite(3, 20);
        assert_eq!(a, generate_suite(3, 20));
        for sc in &a {
            let text = sc.to_toml();
            let back = Scenario::from_toml(&text).unwrap();
            assert_eq!(&back, sc);
            assert_eq!(back.to_toml(), text);
            assert!((2..=5).contains(&sc.agents.len()));
            assert!(sc
                .agents
                .iter()
                .any(|a| a.lane == ENDING_LANE && a.s > EGO_START));
        }
    }
}
