//! Count, duration, subcontract and importance-weighted penalty formulas.
//!
//! Times and durations are expressed in penalty time units (for example
//! minutes); unit prices are currency per time unit.

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::importance::ImportanceProfile;
use crate::money::Money;

/// Penalty for `breaches` contract breaches at `breach_price` each.
pub fn penalty_count(breach_price: Money, breaches: u64) -> Money {
    breach_price * Decimal::from(breaches)
}

/// Penalty for `units` time units of unavailability.
pub fn penalty_duration(unit_price: Money, units: Decimal) -> Money {
    unit_price * units
}

/// Unit price and failure time of one exceeded subcontract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DurationTerm {
    pub unit_price: Money,
    pub units: Decimal,
}

pub fn penalty_subcontracts(terms: &[DurationTerm]) -> Money {
    terms
        .iter()
        .map(|term| penalty_duration(term.unit_price, term.units))
        .sum()
}

/// A failure period `[start, start + length]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutagePeriod {
    pub start: Decimal,
    pub length: Decimal,
}

impl OutagePeriod {
    pub fn new(start: Decimal, length: Decimal) -> Self {
        Self { start, length }
    }

    pub fn end(&self) -> Decimal {
        self.start + self.length
    }
}

/// Importance-weighted penalty of one outage.
///
/// The outage is sampled at its left endpoints `start + (j-1) * step` for
/// `j = 1 ..= ceil(length / step)`; the last sample covers only the
/// remaining partial step. Samples later than `period_bound` are dropped.
/// The result is exact for piecewise-constant importance: instead of
/// visiting every sample, the samples falling in each constant piece of the
/// profile are counted.
pub fn penalty_importance(
    unit_price: Money,
    outage: OutagePeriod,
    sampling_step: Decimal,
    importance: &ImportanceProfile,
    period_bound: Decimal,
) -> Money {
    assert!(sampling_step > Decimal::ZERO, "sampling step must be positive");
    if outage.length <= Decimal::ZERO || period_bound < outage.start {
        return Money::ZERO;
    }
    let samples = ceil_div(outage.length, sampling_step);
    let reachable = floor_div(period_bound - outage.start, sampling_step) + 1;
    let included = samples.min(reachable);

    let sample_at = |k: i128| outage.start + Decimal::from(k) * sampling_step;
    // Smallest sample index whose time is >= `t`.
    let first_at_or_after = |t: Decimal| -> i128 {
        let mut k = ceil_div(t - outage.start, sampling_step);
        while k > 0 && sample_at(k - 1) >= t {
            k -= 1;
        }
        while sample_at(k) < t {
            k += 1;
        }
        k
    };

    let mut weighted = Decimal::ZERO;
    for (from, until, value) in importance.pieces() {
        let index_of = |t: Decimal| {
            if t <= outage.start {
                0
            } else {
                first_at_or_after(t)
            }
        };
        let lo = from.map_or(0, index_of);
        let hi = until.map_or(included, |t| index_of(t).min(included));
        if hi > lo {
            weighted += value * Decimal::from(hi - lo) * sampling_step;
        }
    }
    if included == samples {
        let last = samples - 1;
        let partial = outage.length - Decimal::from(last) * sampling_step;
        weighted -= importance.value_at(sample_at(last)) * (sampling_step - partial);
    }
    unit_price * weighted
}

/// One subcontract's share of the importance-weighted penalty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubcontractTerm {
    pub id: String,
    pub unit_price: Money,
    pub importance: ImportanceProfile,
    pub outage: OutagePeriod,
    pub sampling_step: Decimal,
    pub period_bound: Decimal,
}

pub fn penalty_importance_multi(terms: &[SubcontractTerm]) -> Money {
    terms
        .iter()
        .map(|term| {
            penalty_importance(
                term.unit_price,
                term.outage,
                term.sampling_step,
                &term.importance,
                term.period_bound,
            )
        })
        .sum()
}

fn floor_div(numerator: Decimal, denominator: Decimal) -> i128 {
    let q = (numerator / denominator).floor();
    let mut k: i128 = q.try_into().unwrap_or(0);
    // Correct for rounding in the decimal division.
    while Decimal::from(k) * denominator > numerator {
        k -= 1;
    }
    while Decimal::from(k + 1) * denominator <= numerator {
        k += 1;
    }
    k
}

fn ceil_div(numerator: Decimal, denominator: Decimal) -> i128 {
    let k = floor_div(numerator, denominator);
    if Decimal::from(k) * denominator == numerator {
        k
    } else {
        k + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penalty::ImportancePoint;
    use rust_decimal_macros::dec;

    fn m(v: Decimal) -> Money {
        Money(v)
    }

    #[test]
    fn count_and_duration() {
        assert_eq!(penalty_count(m(dec!(100)), 0), Money::ZERO);
        assert_eq!(penalty_count(m(dec!(100)), 3), m(dec!(300)));
        assert_eq!(penalty_duration(m(dec!(2)), dec!(0)), Money::ZERO);
        assert_eq!(penalty_duration(m(dec!(2)), dec!(30)), m(dec!(60)));
    }

    #[test]
    fn subcontracts() {
        assert_eq!(penalty_subcontracts(&[]), Money::ZERO);
        let terms = [
            DurationTerm {
                unit_price: m(dec!(2)),
                units: dec!(10),
            },
            DurationTerm {
                unit_price: m(dec!(3)),
                units: dec!(5),
            },
        ];
        assert_eq!(penalty_subcontracts(&terms), m(dec!(35)));
        assert_eq!(
            penalty_subcontracts(&terms[..1]),
            penalty_duration(m(dec!(2)), dec!(10))
        );
    }

    #[test]
    fn importance_reduces_to_duration_for_unit_importance() {
        let p = penalty_importance(
            m(dec!(2)),
            OutagePeriod::new(dec!(0), dec!(30)),
            dec!(1),
            &ImportanceProfile::unit(),
            dec!(100),
        );
        assert_eq!(p, m(dec!(60)));
    }

    #[test]
    fn importance_half_weight() {
        let p = penalty_importance(
            m(dec!(2)),
            OutagePeriod::new(dec!(0), dec!(30)),
            dec!(1),
            &ImportanceProfile::constant(dec!(0.5)).unwrap(),
            dec!(100),
        );
        assert_eq!(p, m(dec!(30)));
    }

    #[test]
    fn partial_final_step() {
        // 10 units sampled every 4: samples at 0, 4, 8 with widths 4, 4, 2.
        let profile = ImportanceProfile::new(vec![ImportancePoint {
            at: dec!(8),
            value: dec!(0.5),
        }])
        .unwrap();
        let p = penalty_importance(
            m(dec!(1)),
            OutagePeriod::new(dec!(0), dec!(10)),
            dec!(4),
            &profile,
            dec!(100),
        );
        assert_eq!(p, m(dec!(9)));
    }

    #[test]
    fn period_bound_drops_late_samples() {
        // samples at 0..=29; bound 9.5 keeps 0..=9
        let p = penalty_importance(
            m(dec!(2)),
            OutagePeriod::new(dec!(0), dec!(30)),
            dec!(1),
            &ImportanceProfile::unit(),
            dec!(9.5),
        );
        assert_eq!(p, m(dec!(20)));
        let none = penalty_importance(
            m(dec!(2)),
            OutagePeriod::new(dec!(5), dec!(30)),
            dec!(1),
            &ImportanceProfile::unit(),
            dec!(4),
        );
        assert_eq!(none, Money::ZERO);
    }

    #[test]
    fn halving_step_keeps_aligned_result() {
        let profile = ImportanceProfile::new(vec![
            ImportancePoint {
                at: dec!(4),
                value: dec!(0.25),
            },
            ImportancePoint {
                at: dec!(12),
                value: dec!(0.75),
            },
        ])
        .unwrap();
        let at = |step| {
            penalty_importance(
                m(dec!(3)),
                OutagePeriod::new(dec!(2), dec!(16)),
                step,
                &profile,
                dec!(1000),
            )
        };
        assert_eq!(at(dec!(2)), at(dec!(1)));
        assert_eq!(at(dec!(1)), at(dec!(0.5)));
    }

    #[test]
    fn multi_single_and_empty() {
        assert_eq!(penalty_importance_multi(&[]), Money::ZERO);
        let term = SubcontractTerm {
            id: "video".into(),
            unit_price: m(dec!(2)),
            importance: ImportanceProfile::unit(),
            outage: OutagePeriod::new(dec!(0), dec!(30)),
            sampling_step: dec!(1),
            period_bound: dec!(30),
        };
        assert_eq!(penalty_importance_multi(std::slice::from_ref(&term)), m(dec!(60)));
    }

    #[test]
    fn division_helpers() {
        assert_eq!(floor_div(dec!(10), dec!(4)), 2);
        assert_eq!(ceil_div(dec!(10), dec!(4)), 3);
        assert_eq!(ceil_div(dec!(8), dec!(4)), 2);
        assert_eq!(floor_div(dec!(-1), dec!(4)), -1);
        assert_eq!(ceil_div(dec!(1), dec!(3)), 1);
        assert_eq!(floor_div(dec!(0.9), dec!(0.3)), 3);
    }
}
