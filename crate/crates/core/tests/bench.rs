//! Scenario files, closed-loop episodes, evaluation and reports.

use std::collections::BTreeMap;

use rulemcts::behavior::{Action, BehaviorParams};
use rulemcts::bench::*;
use rulemcts::ltlf::{Atom, LabelSet, RuleSet};
use rulemcts::planner::{PlannerConfig, StepRewards, Variant};
use rulemcts::world::{Goal, MapParams, CONTINUING_LANE};

fn setup() -> EpisodeSetup {
    EpisodeSetup::new(
        PlannerConfig::default(),
        BehaviorParams::default(),
        RuleSet::default_traffic().compile().unwrap(),
    )
}

fn spec(id: u32, lane: u8, s: f64, v: f64) -> AgentSpec {
    AgentSpec {
        id,
        lane,
        s,
        v,
        length: 4.5,
        width: 1.8,
    }
}

fn scenario(name: &str, agents: Vec<AgentSpec>, unsafe_start: bool) -> Scenario {
    Scenario {
        name: name.into(),
        seed: 0,
        ego: 0,
        time_limit: 30.0,
        dt: 0.5,
        unsafe_start,
        map: MapParams::default(),
        goal: Goal {
            s_min: 190.0,
            s_max: 215.0,
        },
        agents,
    }
}

#[test]
fn load_scenario_reports_field_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario(
        "two",
        vec![spec(0, 0, 20.0, 14.0), spec(1, 1, 40.0, 10.0)],
        false,
    );
    let path = dir.path().join("two.toml");
    std::fs::write(&path, sc.to_toml()).unwrap();
    let loaded = load_scenario(&path).unwrap();
    assert_eq!(loaded, sc);
    assert_eq!(loaded.agents[0].lane, CONTINUING_LANE);

    let bad = sc.to_toml().replacen("lane = 1", "lane = 3", 1);
    let line = bad.lines().position(|l| l == "lane = 3").unwrap() + 1;
    std::fs::write(&path, bad).unwrap();
    let err = load_scenario(&path).unwrap_err();
    match &err {
        ScenarioError::Invalid { field, line: l, .. } => {
            assert_eq!(field, "agents[1].lane");
            assert_eq!(*l, line);
        }
        other => panic!("unexpected error {other}"),
    }
    assert!(err.to_string().contains("agents[1].lane"));
    assert!(matches!(
        load_scenario(&dir.path().join("missing.toml")),
        Err(ScenarioError::Io { .. })
    ));
}

#[test]
fn generated_suite_round_trips_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let suite = generate_suite(0, 20);
    assert_eq!(suite.len(), 20);
    for sc in &suite {
        let text = sc.to_toml();
        let path = dir.path().join(format!("{}.toml", sc.name));
        std::fs::write(&path, &text).unwrap();
        let back = load_scenario(&path).unwrap();
        assert_eq!(back.to_toml(), text);
    }
}

#[test]
fn empty_road_near_goal_succeeds_quickly() {
    let sc = scenario("empty", vec![spec(0, 0, 180.0, 14.0)], false);
    let r = run_episode(&sc, &setup(), Variant::SaLexZipSd, 50, 0).unwrap();
    assert_eq!(r.outcome, EpisodeOutcome::Success);
    assert!(r.steps <= 3, "{} steps", r.steps);
    assert!(r.violations.values().all(|&n| n == 0));
    assert!(!r.trace.steps.last().unwrap().labels.alive);
}

#[test]
fn unsafe_start_counts_safe_distance_from_first_step() {
    let sc = scenario(
        "tailgate",
        vec![spec(0, 0, 40.0, 14.0), spec(1, 0, 45.5, 0.0)],
        true,
    );
    let r = run_episode(&sc, &setup(), Variant::SaLexSd, 50, 0).unwrap();
    assert!(r.violated("safe_distance"));
    assert_eq!(r.first_violation["safe_distance"], 0.5);
}

#[test]
fn episodes_are_deterministic_and_monitors_agree() {
    let sc = &generate_suite(0, 2)[1];
    for variant in [Variant::SaLex, Variant::SaLexZipSd] {
        let a = run_episode(sc, &setup(), variant, 60, 3).unwrap();
        let b = run_episode(sc, &setup(), variant, 60, 3).unwrap();
        assert_eq!(a.to_json(), b.to_json());

        let rules = RuleSet::default_traffic().compile().unwrap();
        assert_eq!(evaluate_trace(&a.trace, &rules).unwrap(), a.violations);
        for (rule, n) in &a.planner_violations {
            assert_eq!(a.violations[rule], *n, "{variant} {rule}");
        }
        assert_eq!(a.planner_violations.len(), variant.rules().len());
    }
}

fn sd_step(ok: bool, alive: bool) -> TraceStep {
    let mut labels = LabelSet::new(alive);
    if ok {
        labels.insert(Atom::new("sd_front"));
    }
    TraceStep {
        t: 0.0,
        action: Action::Coast,
        ego: EgoSnapshot {
            s: 0.0,
            lane: 0,
            lateral: 0.0,
            v: 0.0,
            a: 0.0,
        },
        labels,
        departed: Vec::new(),
        rewards: StepRewards::default(),
    }
}

fn sd_trace(pattern: &[bool]) -> Trace {
    Trace {
        others: Vec::new(),
        initial_ego: sd_step(true, true).ego,
        steps: pattern
            .iter()
            .enumerate()
            .map(|(i, &ok)| sd_step(ok, i + 1 < pattern.len()))
            .collect(),
    }
}

#[test]
fn evaluate_trace_counts_violation_segments() {
    let rules = RuleSet::default_traffic().compile().unwrap();
    let clean = evaluate_trace(&sd_trace(&[true; 6]), &rules).unwrap();
    assert!(clean.values().all(|&n| n == 0));
    let three = evaluate_trace(
        &sd_trace(&[true, false, true, true, false, true, false]),
        &rules,
    )
    .unwrap();
    assert_eq!(three["safe_distance"], 3);
    assert_eq!(three["zipper"], 0);
}

fn fake(
    variant: Variant,
    budget: usize,
    outcome: EpisodeOutcome,
    zip: u64,
    sd: u64,
) -> EpisodeResult {
    EpisodeResult {
        scenario: "s".into(),
        variant,
        budget,
        seed: 0,
        outcome,
        steps: 1,
        violations: BTreeMap::from([
            ("zipper".to_string(), zip),
            ("safe_distance".to_string(), sd),
        ]),
        first_violation: BTreeMap::new(),
        planner_violations: BTreeMap::new(),
        invalid_lane_changes: 0,
        trace: sd_trace(&[true]),
    }
}

#[test]
fn aggregate_rates() {
    let mut eps: Vec<EpisodeResult> = (0..19)
        .map(|_| fake(Variant::Sa, 200, EpisodeOutcome::Success, 0, 0))
        .collect();
    eps.push(fake(Variant::Sa, 200, EpisodeOutcome::Collision, 2, 0));
    let report = aggregate(&eps).unwrap();
    let row = report.row(Variant::Sa, 200).unwrap();
    assert_eq!(row.collision_rate, 5.0);
    assert_eq!(row.zip_violation_rate, 5.0);
    assert_eq!(row.success_rate, 95.0);
    assert_eq!(row.episodes, row.successes + row.collisions + row.timeouts);

    let ok: Vec<EpisodeResult> = (0..4)
        .map(|_| fake(Variant::SaLex, 500, EpisodeOutcome::Success, 0, 0))
        .collect();
    let row = aggregate(&ok).unwrap().rows[0].clone();
    assert_eq!(
        (
            row.success_rate,
            row.collision_rate,
            row.zip_violation_rate,
            row.sd_violation_rate
        ),
        (100.0, 0.0, 0.0, 0.0)
    );

    eps.reverse();
    assert_eq!(aggregate(&eps).unwrap(), report);
    assert!(matches!(aggregate(&[]), Err(ReportError::Empty)));
}

#[test]
fn report_files_are_complete_and_stable() {
    let mut eps = Vec::new();
    for (k, variant) in Variant::ALL.into_iter().enumerate() {
        for budget in [200, 500, 1000] {
            let outcome = if k % 2 == 0 {
                EpisodeOutcome::Success
            } else {
                EpisodeOutcome::Timeout
            };
            eps.push(fake(variant, budget, outcome, (k % 3) as u64, 1));
        }
    }
    let report = aggregate(&eps).unwrap();
    assert_eq!(report.rows.len(), 18);

    let dir = tempfile::tempdir().unwrap();
    let first = emit_report(&report, dir.path()).unwrap();
    let contents: Vec<Vec<u8>> = first.iter().map(|p| std::fs::read(p).unwrap()).collect();
    let csv = String::from_utf8(contents[0].clone()).unwrap();
    assert_eq!(csv.lines().count(), 19);
    let again = emit_report(&report, dir.path()).unwrap();
    assert_eq!(first, again);
    for (p, c) in again.iter().zip(&contents) {
        assert_eq!(&std::fs::read(p).unwrap(), c, "{}", p.display());
    }
    let summary: BenchmarkReport =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary, report);
}

#[test]
fn chart_axis_spans_zero_to_hundred() {
    let eps = vec![
        fake(Variant::Sa, 200, EpisodeOutcome::Success, 0, 0),
        fake(Variant::SaLex, 200, EpisodeOutcome::Collision, 0, 0),
    ];
    let report = aggregate(&eps).unwrap();
    let svg = bar_chart(&report, "Success (%)", |r| r.success_rate);
    assert!(svg.contains(">0</text>") && svg.contains(">100</text>"));
    // The 100 % bar reaches the top of the plot area, the 0 % bar has no height.
    assert!(svg.contains(r#"y="30" width="26" height="220""#), "{svg}");
    assert!(svg.contains(r#"width="26" height="0""#));
}
