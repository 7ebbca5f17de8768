use std::collections::BTreeSet;
use std::fmt;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::formulas::{
    penalty_count, penalty_duration, penalty_importance, penalty_importance_multi, penalty_subcontracts, DurationTerm,
    OutagePeriod, SubcontractTerm,
};
use super::importance::ImportanceProfile;
use crate::money::Money;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltyComponent {
    /// Per-breach penalty.
    Count,
    /// Per unit of downtime.
    Duration,
    /// Per unit of downtime of each exceeded subcontract.
    Subcontracts,
    /// Importance-weighted downtime.
    Importance,
    /// Importance-weighted downtime of each exceeded subcontract.
    ImportanceMulti,
}

impl PenaltyComponent {
    pub const ALL: [PenaltyComponent; 5] = [
        PenaltyComponent::Count,
        PenaltyComponent::Duration,
        PenaltyComponent::Subcontracts,
        PenaltyComponent::Importance,
        PenaltyComponent::ImportanceMulti,
    ];
}

impl fmt::Display for PenaltyComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            PenaltyComponent::Count => "count",
            PenaltyComponent::Duration => "duration",
            PenaltyComponent::Subcontracts => "subcontracts",
            PenaltyComponent::Importance => "importance",
            PenaltyComponent::ImportanceMulti => "importance-multi",
        };
        f.write_str(name)
    }
}

/// Set of enabled penalty components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComponentMask(BTreeSet<PenaltyComponent>);

impl ComponentMask {
    pub fn all() -> Self {
        Self(PenaltyComponent::ALL.into_iter().collect())
    }

    pub fn none() -> Self {
        Self(BTreeSet::new())
    }

    pub fn only(components: &[PenaltyComponent]) -> Self {
        Self(components.iter().copied().collect())
    }

    pub fn contains(&self, component: PenaltyComponent) -> bool {
        self.0.contains(&component)
    }

    pub fn iter(&self) -> impl Iterator<Item = PenaltyComponent> + '_ {
        self.0.iter().copied()
    }
}

impl Default for ComponentMask {
    fn default() -> Self {
        Self::all()
    }
}

/// Inputs of the single-service importance-weighted term. Several outages
/// are priced independently and summed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImportanceInputs {
    pub unit_price: Money,
    pub outages: Vec<OutagePeriod>,
    pub sampling_step: Decimal,
    pub profile: ImportanceProfile,
    pub period_bound: Decimal,
}

impl ImportanceInputs {
    pub fn empty() -> Self {
        Self {
            unit_price: Money::ZERO,
            outages: Vec::new(),
            sampling_step: Decimal::ONE,
            profile: ImportanceProfile::unit(),
            period_bound: Decimal::ZERO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltyInputs {
    /// V: penalty per breach.
    pub breach_price: Money,
    /// n: number of breaches.
    pub breaches: u64,
    /// w: penalty per time unit of unavailability.
    pub unit_price: Money,
    /// t: unavailable time units.
    pub downtime_units: Decimal,
    pub subcontract_durations: Vec<DurationTerm>,
    pub importance: ImportanceInputs,
    pub subcontract_importance: Vec<SubcontractTerm>,
}

impl PenaltyInputs {
    pub fn zero() -> Self {
        Self {
            breach_price: Money::ZERO,
            breaches: 0,
            unit_price: Money::ZERO,
            downtime_units: Decimal::ZERO,
            subcontract_durations: Vec::new(),
            importance: ImportanceInputs::empty(),
            subcontract_importance: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentValue {
    pub amount: Money,
    pub enabled: bool,
}

impl ComponentValue {
    fn disabled() -> Self {
        Self {
            amount: Money::ZERO,
            enabled: false,
        }
    }
}

/// The five penalty terms and their sum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PenaltyBreakdown {
    pub count: ComponentValue,
    pub duration: ComponentValue,
    pub subcontracts: ComponentValue,
    pub importance: ComponentValue,
    pub importance_multi: ComponentValue,
    pub total: Money,
    pub inputs: PenaltyInputs,
}

impl PenaltyBreakdown {
    pub fn component(&self, component: PenaltyComponent) -> ComponentValue {
        match component {
            PenaltyComponent::Count => self.count,
            PenaltyComponent::Duration => self.duration,
            PenaltyComponent::Subcontracts => self.subcontracts,
            PenaltyComponent::Importance => self.importance,
            PenaltyComponent::ImportanceMulti => self.importance_multi,
        }
    }
}

pub fn penalty_total(inputs: &PenaltyInputs, mask: &ComponentMask) -> PenaltyBreakdown {
    let term = |component: PenaltyComponent, compute: &dyn Fn() -> Money| {
        if mask.contains(component) {
            ComponentValue {
                amount: compute(),
                enabled: true,
            }
        } else {
            ComponentValue::disabled()
        }
    };

    let count = term(PenaltyComponent::Count, &|| {
        penalty_count(inputs.breach_price, inputs.breaches)
    });
    let duration = term(PenaltyComponent::Duration, &|| {
        penalty_duration(inputs.unit_price, inputs.downtime_units)
    });
    let subcontracts = term(PenaltyComponent::Subcontracts, &|| {
        penalty_subcontracts(&inputs.subcontract_durations)
    });
    let importance = term(PenaltyComponent::Importance, &|| {
        let imp = &inputs.importance;
        imp.outages
            .iter()
            .map(|outage| {
                penalty_importance(
                    imp.unit_price,
                    *outage,
                    imp.sampling_step,
                    &imp.profile,
                    imp.period_bound,
                )
            })
            .sum()
    });
    let importance_multi = term(PenaltyComponent::ImportanceMulti, &|| {
        penalty_importance_multi(&inputs.subcontract_importance)
    });

    let total = [count, duration, subcontracts, importance, importance_multi]
        .iter()
        .map(|c| c.amount)
        .sum();

    PenaltyBreakdown {
        count,
        duration,
        subcontracts,
        importance,
        importance_multi,
        total,
        inputs: inputs.clone(),
    }
}
