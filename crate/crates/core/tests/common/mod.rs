//! Fixtures, generators and brute-force oracles shared by the integration
//! tests. The oracles deliberately use the most literal computation
//! available (loops over units, samples, minutes and users) and share no
//! code with the engine beyond its public data types.

#![allow(dead_code)]

pub mod golden;

use std::path::PathBuf;

use rand::Rng;
use rust_decimal::Decimal;

use slice_sla::contract::SlaContract;
use slice_sla::io::{parse_contract, parse_trace};
use slice_sla::lifecycle::LifecycleEvent;
use slice_sla::penalty::{ImportancePoint, ImportanceProfile};
use slice_sla::Money;

pub fn fixture_path(relative: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(relative)
}

pub fn fixture(relative: &str) -> String {
    std::fs::read_to_string(fixture_path(relative)).unwrap_or_else(|e| panic!("{relative}: {e}"))
}

pub fn contract(name: &str) -> SlaContract {
    parse_contract(&fixture(&format!("contracts/{name}.toml"))).unwrap()
}

pub fn trace(name: &str) -> Vec<LifecycleEvent> {
    parse_trace(&fixture(&format!("traces/{name}.csv"))).unwrap()
}

pub fn dec(s: &str) -> Decimal {
    s.parse().unwrap()
}

pub fn money(s: &str) -> Money {
    Money::new(dec(s))
}

/// `|a - b| <= tol * max(|a|, |b|)`, with exact equality required at zero.
pub fn rel_close(a: Decimal, b: Decimal, tol: f64) -> bool {
    if a == b {
        return true;
    }
    let scale = a.abs().max(b.abs());
    let diff = (a - b).abs();
    let tol = Decimal::try_from(tol).unwrap();
    diff <= tol * scale
}

// ---- generators ----------------------------------------------------------

/// Decimal in `[0, max)` with `dp` decimal places.
pub fn rand_decimal(rng: &mut impl Rng, max: i64, dp: u32) -> Decimal {
    let scale = 10i64.pow(dp);
    Decimal::new(rng.gen_range(0..max * scale), dp)
}

pub fn rand_money(rng: &mut impl Rng) -> Money {
    Money::new(rand_decimal(rng, 1000, 2))
}

/// Profile with up to five change points in `[0, 1500)`.
pub fn rand_profile(rng: &mut impl Rng) -> Vec<(Decimal, Decimal)> {
    let n = rng.gen_range(0..=5);
    let mut ats: Vec<Decimal> = (0..n).map(|_| rand_decimal(rng, 1500, 1)).collect();
    ats.sort();
    ats.dedup();
    ats.into_iter()
        .map(|at| (at, Decimal::new(rng.gen_range(1..=100), 2)))
        .collect()
}

pub fn to_profile(points: &[(Decimal, Decimal)]) -> ImportanceProfile {
    ImportanceProfile::new(
        points
            .iter()
            .map(|&(at, value)| ImportancePoint { at, value })
            .collect(),
    )
    .unwrap()
}

// ---- oracles -------------------------------------------------------------

/// `V * n` by repeated addition.
pub fn oracle_count(price: Money, n: u64) -> Decimal {
    let mut total = Decimal::ZERO;
    for _ in 0..n {
        total += price.amount();
    }
    total
}

/// `w * t` accumulated one whole unit at a time plus the fractional rest.
pub fn oracle_duration(price: Money, units: Decimal) -> Decimal {
    let mut total = Decimal::ZERO;
    let mut left = units;
    while left >= Decimal::ONE {
        total += price.amount();
        left -= Decimal::ONE;
    }
    total + price.amount() * left
}

pub fn oracle_subcontracts(terms: &[(Money, Decimal)]) -> Decimal {
    let mut total = Decimal::ZERO;
    for (price, units) in terms {
        total += oracle_duration(*price, *units);
    }
    total
}

/// Importance by linear scan: the value of the last point at or before
/// `t`, or 1 before the first point.
pub fn oracle_importance_at(points: &[(Decimal, Decimal)], t: Decimal) -> Decimal {
    let mut value = Decimal::ONE;
    for (at, v) in points {
        if *at <= t {
            value = *v;
        }
    }
    value
}

/// Per-sample sum: left endpoints `start + (j-1) * step`, the last step
/// truncated at the outage end, samples after `bound` skipped.
pub fn oracle_importance(
    price: Money,
    start: Decimal,
    length: Decimal,
    step: Decimal,
    points: &[(Decimal, Decimal)],
    bound: Decimal,
) -> Decimal {
    let end = start + length;
    let mut total = Decimal::ZERO;
    let mut t = start;
    while t < end {
        let width = step.min(end - t);
        if t <= bound {
            total += price.amount() * oracle_importance_at(points, t) * width;
        }
        t += step;
    }
    total
}

pub struct SubcontractCase {
    pub price: Money,
    pub start: Decimal,
    pub length: Decimal,
    pub step: Decimal,
    pub points: Vec<(Decimal, Decimal)>,
    pub bound: Decimal,
}

/// Double loop over subcontracts and their samples.
pub fn oracle_importance_multi(cases: &[SubcontractCase]) -> Decimal {
    let mut total = Decimal::ZERO;
    for c in cases {
        let end = c.start + c.length;
        let mut t = c.start;
        while t < end {
            if t <= c.bound {
                total += c.price.amount() * oracle_importance_at(&c.points, t) * c.step.min(end - t);
            }
            t += c.step;
        }
    }
    total
}

/// Up-time fraction on a one-minute grid: a minute is down when its
/// midpoint lies inside any outage `[start, end)` (offsets in seconds).
pub fn oracle_minute_grid(window_minutes: i64, outages: &[(i64, i64)]) -> f64 {
    let mut up = 0;
    for m in 0..window_minutes {
        let mid = m * 60 + 30;
        if !outages.iter().any(|&(s, e)| s <= mid && mid < e) {
            up += 1;
        }
    }
    up as f64 / window_minutes as f64
}

/// Revenue by enumerating requesting users and serving each one while
/// capacity remains.
pub fn oracle_revenue(price: Money, slice_size: u64, customer_size: u64, periods: u32) -> Decimal {
    let mut total = Decimal::ZERO;
    for _ in 0..periods {
        let mut served = 0;
        for _user in 0..customer_size {
            if served < slice_size {
                served += 1;
                total += price.amount();
            }
        }
    }
    total
}
