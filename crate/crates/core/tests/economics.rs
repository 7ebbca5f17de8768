mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rust_decimal::Decimal;

use common::*;
use slice_sla::economics::{
    expenditure, map_resources, net_position, penalty_charge, profit, revenue, KpiRequirement, PenaltyBase, Resource,
    ResourceVector, UnitCosts, VnfCatalogEntry,
};
use slice_sla::penalty::{penalty_total, ComponentMask, PenaltyInputs};
use slice_sla::Money;

fn vnf() -> VnfCatalogEntry {
    VnfCatalogEntry {
        id: "v".into(),
        base_resources: ResourceVector(vec![
            Resource::new("spectrum", 100.0, "MHz"),
            Resource::new("cpu", 2.0, "core"),
        ]),
        per_user_resources: ResourceVector(vec![
            Resource::new("spectrum", 1.0, "MHz"),
            Resource::new("cpu", 0.5, "core"),
        ]),
        kpi_multipliers: BTreeMap::from([("user_data_rate".to_string(), 0.5)]),
    }
}

#[test]
fn fixture_economics() {
    let c = contract("embb_nonlinear");
    let e = c.economics.evaluate().unwrap();
    assert_eq!(e.revenue, money("1000"));
    assert_eq!(e.expenditure, money("600"));
    assert_eq!(e.profit, money("400"));
}

#[test]
fn revenue_is_capped_by_the_slice() {
    assert_eq!(revenue(money("10"), 100, 150, 1), money("1000"));
    assert_eq!(revenue(money("10"), 100, 40, 1), money("400"));
    assert_eq!(revenue(money("10"), 100, 150, 3), money("3000"));
    assert_eq!(revenue(money("10"), 0, 150, 1), Money::ZERO);
}

#[test]
fn resources_scale_with_users_and_kpis() {
    let baselines = BTreeMap::from([("user_data_rate".to_string(), 25.0)]);
    let kpis = [KpiRequirement {
        metric: "user_data_rate".into(),
        required: 50.0,
    }];
    let r = map_resources(&kpis, 10, &vnf(), &baselines).unwrap();
    // scale 1 + 0.5 * (50/25 - 1) = 1.5
    assert_eq!(r.0[0].amount, 165.0);
    assert_eq!(r.0[1].amount, 10.5);
    let plain = map_resources(&[], 10, &vnf(), &baselines).unwrap();
    assert_eq!(plain.0[0].amount, 110.0);
}

#[test]
fn missing_baseline_and_cost_are_errors() {
    let kpis = [KpiRequirement {
        metric: "latency".into(),
        required: 5.0,
    }];
    assert!(map_resources(&kpis, 1, &vnf(), &BTreeMap::new()).is_err());
    let costs: UnitCosts = BTreeMap::from([("spectrum".to_string(), money("1"))]);
    assert!(expenditure(&vnf().base_resources, &costs).is_err());
}

#[test]
fn penalty_base_selects_the_charge() {
    let e = contract("embb_nonlinear").economics.evaluate().unwrap();
    let inputs = PenaltyInputs {
        breach_price: money("20"),
        breaches: 3,
        ..PenaltyInputs::zero()
    };
    let formulas = penalty_total(&inputs, &ComponentMask::all());
    let percent = dec("35");
    assert_eq!(
        penalty_charge(&e, percent, &formulas, PenaltyBase::PercentOfRevenue),
        money("350")
    );
    assert_eq!(
        net_position(&e, percent, &formulas, PenaltyBase::PercentOfRevenue),
        money("50")
    );
    assert_eq!(
        penalty_charge(&e, percent, &formulas, PenaltyBase::AbsoluteCurrency),
        money("60")
    );
    assert_eq!(
        net_position(&e, percent, &formulas, PenaltyBase::AbsoluteCurrency),
        money("340")
    );
}

proptest! {
    #[test]
    fn revenue_matches_enumeration(p in 0i64..10_000, s in 0u64..300, c in 0u64..300, periods in 1u32..4) {
        let price = Money::new(Decimal::new(p, 2));
        prop_assert_eq!(revenue(price, s, c, periods).amount(), oracle_revenue(price, s, c, periods));
    }

    #[test]
    fn profit_is_revenue_minus_expenditure(a in -1_000_000i64..1_000_000, b in -1_000_000i64..1_000_000) {
        let (r, e) = (Money::new(Decimal::new(a, 2)), Money::new(Decimal::new(b, 2)));
        prop_assert_eq!(profit(r, e) + e, r);
    }

    #[test]
    fn expenditure_is_additive(
        amounts in prop::collection::vec((0u32..10_000, 0u32..10_000), 1..5),
        costs in prop::collection::vec(0i64..10_000, 5),
    ) {
        let names: Vec<String> = (0..amounts.len()).map(|i| format!("r{i}")).collect();
        let unit_costs: UnitCosts = names.iter().cloned().zip(costs.iter().map(|&c| Money::new(Decimal::new(c, 2)))).collect();
        let a = ResourceVector(names.iter().zip(&amounts).map(|(n, &(x, _))| Resource::new(n.clone(), x as f64, "u")).collect());
        let b = ResourceVector(names.iter().zip(&amounts).map(|(n, &(_, y))| Resource::new(n.clone(), y as f64, "u")).collect());
        let sum = ResourceVector(names.iter().zip(&amounts).map(|(n, &(x, y))| Resource::new(n.clone(), (x + y) as f64, "u")).collect());
        let lhs = expenditure(&sum, &unit_costs).unwrap();
        let rhs = expenditure(&a, &unit_costs).unwrap() + expenditure(&b, &unit_costs).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn more_users_never_lower_expenditure(s in 0u64..1000, extra in 0u64..1000) {
        let costs: UnitCosts = BTreeMap::from([("spectrum".to_string(), money("3")), ("cpu".to_string(), money("10"))]);
        let low = expenditure(&map_resources(&[], s, &vnf(), &BTreeMap::new()).unwrap(), &costs).unwrap();
        let high = expenditure(&map_resources(&[], s + extra, &vnf(), &BTreeMap::new()).unwrap(), &costs).unwrap();
        prop_assert!(high >= low);
    }
}
