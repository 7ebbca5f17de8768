use std::fmt;
use std::str::FromStr;

use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::{ContractError, TermSnapshot};
use crate::economics::KpiRequirement;
use crate::money::Money;
use crate::time::Timestamp;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmendmentOrigin {
    /// Usage-driven change of a dynamic SLA.
    #[default]
    Dynamic,
    /// Agreed while renegotiating after a major or critical incident.
    Renegotiation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermChange {
    pub path: String,
    pub value: Decimal,
}

impl TermChange {
    pub fn new(path: impl Into<String>, value: Decimal) -> Self {
        Self {
            path: path.into(),
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Amendment {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub effective: Timestamp,
    #[serde(default)]
    pub origin: AmendmentOrigin,
    #[serde(default)]
    pub changes: Vec<TermChange>,
}

impl Amendment {
    pub fn new(effective: Timestamp, changes: Vec<TermChange>) -> Self {
        Self {
            id: None,
            effective,
            origin: AmendmentOrigin::Dynamic,
            changes,
        }
    }

    pub(crate) fn apply_to(&self, terms: &mut TermSnapshot) -> Result<(), ContractError> {
        for change in &self.changes {
            let field: TermField = change.path.parse()?;
            field.apply(terms, change.value)?;
        }
        Ok(())
    }
}

/// Amendable fields, addressed by dotted paths such as
/// `qos.bandwidth.target` or `economics.customer_size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermField {
    QosTarget(String),
    QosThreshold(String),
    AvailabilityAgreed,
    AvailabilityAccepted,
    AvailabilityTerminated,
    BandHighMin,
    BandAverageMin,
    BreachPrice,
    UnitPrice,
    SamplingStep,
    SubcontractUnitPrice(String),
    PricePerUser,
    SliceSize,
    CustomerSize,
    Periods,
    KpiRequired(String),
    TrackingMax,
    TrackingWindow,
}

impl FromStr for TermField {
    type Err = ContractError;

    fn from_str(path: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = path.split('.').collect();
        let field = match parts.as_slice() {
            ["qos", name, "target"] => TermField::QosTarget(name.to_string()),
            ["qos", name, "violation_threshold"] => TermField::QosThreshold(name.to_string()),
            ["availability", "agreed"] => TermField::AvailabilityAgreed,
            ["availability", "accepted"] => TermField::AvailabilityAccepted,
            ["availability", "terminated"] => TermField::AvailabilityTerminated,
            ["availability", "band_high_min"] => TermField::BandHighMin,
            ["availability", "band_average_min"] => TermField::BandAverageMin,
            ["penalty", "breach_price"] => TermField::BreachPrice,
            ["penalty", "unit_price"] => TermField::UnitPrice,
            ["penalty", "sampling_step"] => TermField::SamplingStep,
            ["penalty", "subcontracts", id, "unit_price"] => TermField::SubcontractUnitPrice(id.to_string()),
            ["economics", "price_per_user"] => TermField::PricePerUser,
            ["economics", "slice_size"] => TermField::SliceSize,
            ["economics", "customer_size"] => TermField::CustomerSize,
            ["economics", "periods"] => TermField::Periods,
            ["economics", "kpi", metric] => TermField::KpiRequired(metric.to_string()),
            ["tracking", "max_major_plus_critical"] => TermField::TrackingMax,
            ["tracking", "window_seconds"] => TermField::TrackingWindow,
            _ => return Err(ContractError::UnknownField(path.to_string())),
        };
        Ok(field)
    }
}

impl fmt::Display for TermField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermField::QosTarget(n) => write!(f, "qos.{n}.target"),
            TermField::QosThreshold(n) => write!(f, "qos.{n}.violation_threshold"),
            TermField::AvailabilityAgreed => f.write_str("availability.agreed"),
            TermField::AvailabilityAccepted => f.write_str("availability.accepted"),
            TermField::AvailabilityTerminated => f.write_str("availability.terminated"),
            TermField::BandHighMin => f.write_str("availability.band_high_min"),
            TermField::BandAverageMin => f.write_str("availability.band_average_min"),
            TermField::BreachPrice => f.write_str("penalty.breach_price"),
            TermField::UnitPrice => f.write_str("penalty.unit_price"),
            TermField::SamplingStep => f.write_str("penalty.sampling_step"),
            TermField::SubcontractUnitPrice(id) => write!(f, "penalty.subcontracts.{id}.unit_price"),
            TermField::PricePerUser => f.write_str("economics.price_per_user"),
            TermField::SliceSize => f.write_str("economics.slice_size"),
            TermField::CustomerSize => f.write_str("economics.customer_size"),
            TermField::Periods => f.write_str("economics.periods"),
            TermField::KpiRequired(m) => write!(f, "economics.kpi.{m}"),
            TermField::TrackingMax => f.write_str("tracking.max_major_plus_critical"),
            TermField::TrackingWindow => f.write_str("tracking.window_seconds"),
        }
    }
}

impl TermField {
    pub fn apply(&self, terms: &mut TermSnapshot, value: Decimal) -> Result<(), ContractError> {
        let invalid = |reason: &str| ContractError::InvalidValue {
            path: self.to_string(),
            value,
            reason: reason.to_string(),
        };
        let as_f64 = || value.to_f64().ok_or_else(|| invalid("not representable"));
        let as_u64 = || {
            if value.fract().is_zero() {
                value.to_u64().ok_or_else(|| invalid("expected a nonnegative integer"))
            } else {
                Err(invalid("expected a nonnegative integer"))
            }
        };
        let nonnegative_money = || {
            if value.is_sign_negative() && !value.is_zero() {
                Err(invalid("must be nonnegative"))
            } else {
                Ok(Money(value))
            }
        };

        match self {
            TermField::QosTarget(name) | TermField::QosThreshold(name) => {
                let v = as_f64()?;
                let spec = terms
                    .qos
                    .iter_mut()
                    .find(|m| &m.name == name)
                    .ok_or_else(|| ContractError::UnknownField(self.to_string()))?;
                if matches!(self, TermField::QosTarget(_)) {
                    spec.target = v;
                } else {
                    spec.violation_threshold = v;
                }
            }
            TermField::AvailabilityAgreed => terms.availability.agreed = value,
            TermField::AvailabilityAccepted => terms.availability.accepted = value,
            TermField::AvailabilityTerminated => terms.availability.terminated = value,
            TermField::BandHighMin => terms.availability.band_high_min = value,
            TermField::BandAverageMin => terms.availability.band_average_min = value,
            TermField::BreachPrice => terms.penalty.breach_price = nonnegative_money()?,
            TermField::UnitPrice => terms.penalty.unit_price = nonnegative_money()?,
            TermField::SamplingStep => {
                if value <= Decimal::ZERO {
                    return Err(invalid("must be positive"));
                }
                terms.penalty.sampling_step = value;
            }
            TermField::SubcontractUnitPrice(id) => {
                let price = nonnegative_money()?;
                let sub = terms
                    .penalty
                    .subcontracts
                    .iter_mut()
                    .find(|s| &s.id == id)
                    .ok_or_else(|| ContractError::UnknownField(self.to_string()))?;
                sub.unit_price = price;
            }
            TermField::PricePerUser => terms.economics.price_per_user = nonnegative_money()?,
            TermField::SliceSize => terms.economics.slice_size = as_u64()?,
            TermField::CustomerSize => terms.economics.customer_size = as_u64()?,
            TermField::Periods => {
                terms.economics.periods = u32::try_from(as_u64()?).map_err(|_| invalid("too large"))?
            }
            TermField::KpiRequired(metric) => {
                let v = as_f64()?;
                match terms.economics.kpis.iter_mut().find(|k| &k.metric == metric) {
                    Some(kpi) => kpi.required = v,
                    None => terms.economics.kpis.push(KpiRequirement {
                        metric: metric.clone(),
                        required: v,
                    }),
                }
            }
            TermField::TrackingMax => {
                terms.tracking.max_major_plus_critical = u32::try_from(as_u64()?).map_err(|_| invalid("too large"))?
            }
            TermField::TrackingWindow => {
                terms.tracking.window_seconds = i64::try_from(as_u64()?).map_err(|_| invalid("too large"))?
            }
        }
        Ok(())
    }
}
