mod common;

use proptest::prelude::*;
use rust_decimal::Decimal;

use common::*;
use slice_sla::io::parse_scenario;
use slice_sla::lifecycle::EventKind;
use slice_sla::simulator::{
    generate_incidents, generate_trace, monte_carlo, run_once, run_seed, summarize, ClassProfile, Degradation,
    ScenarioConfig,
};
use slice_sla::Money;

fn scenario(name: &str) -> ScenarioConfig {
    parse_scenario(&fixture(&format!("scenarios/{name}.toml"))).unwrap()
}

fn minor_only(rate: f64, hours: f64, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        name: None,
        start: None,
        horizon_hours: hours,
        seed,
        minor: ClassProfile {
            rate_per_hour: rate,
            mean_duration_hours: 0.05,
            degradation: vec![Degradation {
                metric: "latency".into(),
                observed: 20.0,
            }],
        },
        major: ClassProfile::default(),
        critical: ClassProfile::default(),
    }
}

#[test]
fn a_single_run_matches_its_summary() {
    let c = contract("remote_surgery");
    let s = scenario("remote_surgery");
    let one = run_once(&c, &s, 0).unwrap();
    let summary = monte_carlo(&c, &s, 1).unwrap();
    assert_eq!(summary.mean_total_penalty, one.total_penalty);
    assert_eq!(summary.p95_total_penalty, one.total_penalty);
    assert_eq!(summary.mean_net_position, one.net_position);
    assert_eq!(summary.mean_incidents, Decimal::from(one.incidents));
}

#[test]
fn aggregation_ignores_run_order() {
    let c = contract("remote_surgery");
    let s = scenario("remote_surgery");
    let runs: Vec<_> = (0..40).map(|i| run_once(&c, &s, i).unwrap()).collect();
    let mut reversed = runs.clone();
    reversed.reverse();
    assert_eq!(summarize(s.seed, &runs).unwrap(), summarize(s.seed, &reversed).unwrap());
    assert!(summarize(s.seed, &[]).is_err());
}

#[test]
fn p95_is_nearest_rank() {
    let c = contract("remote_surgery");
    let s = scenario("remote_surgery");
    let runs: Vec<_> = (0..20).map(|i| run_once(&c, &s, i).unwrap()).collect();
    let mut totals: Vec<Money> = runs.iter().map(|r| r.total_penalty).collect();
    totals.sort();
    // ceil(0.95 * 20) = 19
    assert_eq!(summarize(s.seed, &runs).unwrap().p95_total_penalty, totals[18]);
}

#[test]
fn doubling_the_breach_price_doubles_the_count_component() {
    let mut c = contract("embb_nonlinear");
    c.lifetime.end = slice_sla::time::add_seconds(c.lifetime.start, 100 * 3600);
    let s = minor_only(0.5, 100.0, 11);
    let base = monte_carlo(&c, &s, 50).unwrap();
    c.penalty.breach_price = c.penalty.breach_price * Decimal::TWO;
    let doubled = monte_carlo(&c, &s, 50).unwrap();
    assert!(base.mean_components.count > Money::ZERO);
    assert_eq!(doubled.mean_components.count, base.mean_components.count * Decimal::TWO);
}

#[test]
fn water_meter_scenario_runs() {
    let c = contract("water_meter");
    let summary = monte_carlo(&c, &scenario("water_meter"), 100).unwrap();
    assert_eq!(summary.runs, 100);
    assert!(summary.mean_availability <= Decimal::ONE);
}

#[test]
fn invalid_scenarios_are_rejected() {
    let mut s = minor_only(1.0, 10.0, 0);
    s.minor.rate_per_hour = -1.0;
    assert!(s.validate().is_err());
    let mut s = minor_only(1.0, 10.0, 0);
    s.horizon_hours = 0.0;
    assert!(s.validate().is_err());
    assert!(monte_carlo(&contract("remote_surgery"), &minor_only(1.0, 10.0, 0), 0).is_err());
}

#[test]
fn run_seeds_differ_by_index() {
    let seeds: std::collections::BTreeSet<u64> = (0..1000).map(|i| run_seed(42, i)).collect();
    assert_eq!(seeds.len(), 1000);
    assert_eq!(run_seed(42, 7), run_seed(42, 7));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn incidents_stay_inside_the_horizon(seed in any::<u64>(), rate in 0.0f64..5.0, hours in 1.0f64..200.0) {
        let s = minor_only(rate, hours, seed);
        let end = slice_sla::time::add_seconds(s.origin(), s.horizon_seconds());
        for i in generate_incidents(&s) {
            prop_assert!(i.start >= s.origin() && i.start < end);
            let closed = i.end.unwrap();
            prop_assert!(closed > i.start && closed <= end);
        }
    }

    #[test]
    fn traces_are_ordered_and_reproducible(seed in any::<u64>()) {
        let s = minor_only(2.0, 48.0, seed);
        let trace = generate_trace(&s);
        prop_assert_eq!(&trace, &generate_trace(&s));
        prop_assert!(trace.windows(2).all(|w| w[0].at <= w[1].at));
        prop_assert!(matches!(trace[0].kind, EventKind::ServiceStart));
        prop_assert!(matches!(trace.last().unwrap().kind, EventKind::LifetimeExpired));
    }
}
