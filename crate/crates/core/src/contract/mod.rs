//! The SLA contract document.
//!
//! A contract carries base terms plus a log of timestamped amendments.
//! Static contracts keep their base terms for the whole lifetime; dynamic
//! contracts resolve to piecewise-constant terms by replaying the
//! amendments in effect at a given instant.

mod amendment;
mod catalog;
mod validate;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use amendment::{Amendment, AmendmentOrigin, TermChange, TermField};
pub use catalog::{BoundKind, CatalogError, QosCatalog, QosCatalogBound};
pub use validate::{validate_contract, ValidationReport, Violation};

use crate::economics::{EconomicsTerms, PenaltyBase};
use crate::lifecycle::IncidentClass;
use crate::money::Money;
use crate::penalty::{
    compile_linear_schedule, reference_nonlinear_schedule, Breakpoint, BreakpointSchedule, ComponentMask,
    ImportanceProfile, LinearScheduleParams, ScheduleError, ScheduleEvaluation,
};
use crate::time::{format_timestamp, Timestamp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContractError {
    #[error("amendments forbidden on static SLA")]
    StaticAmendment,
    #[error("time {} is outside the contract lifetime", format_timestamp(*.0))]
    OutOfLifetime(Timestamp),
    #[error("unknown amendable field `{0}`")]
    UnknownField(String),
    #[error("invalid value {value} for `{path}`: {reason}")]
    InvalidValue {
        path: String,
        value: Decimal,
        reason: String,
    },
    #[error("amendment leaves the contract inconsistent: {}", .0.join("; "))]
    InconsistentTerms(Vec<String>),
    #[error("no contract version {0}")]
    UnknownVersion(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QosMetricSpec {
    pub name: String,
    pub unit: String,
    pub target: f64,
    pub violation_threshold: f64,
    pub direction: Direction,
}

impl QosMetricSpec {
    /// Strictly past the threshold; equality is not a breach.
    pub fn is_breached(&self, observed: f64) -> bool {
        match self.direction {
            Direction::HigherIsBetter => observed < self.violation_threshold,
            Direction::LowerIsBetter => observed > self.violation_threshold,
        }
    }

    pub fn target_meets_threshold(&self) -> bool {
        !self.is_breached(self.target)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AvailabilityTerms {
    pub agreed: Decimal,
    pub accepted: Decimal,
    pub terminated: Decimal,
    #[serde(default = "default_band_high")]
    pub band_high_min: Decimal,
    #[serde(default = "default_band_average")]
    pub band_average_min: Decimal,
    /// Incident classes whose service-affecting time counts as downtime.
    #[serde(default = "all_classes")]
    pub outage_classes: Vec<IncidentClass>,
    /// End the agreement when a billing period closes at or below the
    /// terminated availability.
    #[serde(default = "yes")]
    pub terminate_at_terminated: bool,
}

fn default_band_high() -> Decimal {
    Decimal::ONE
}

fn default_band_average() -> Decimal {
    Decimal::new(99, 2)
}

fn all_classes() -> Vec<IncidentClass> {
    IncidentClass::ALL.to_vec()
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackingLimits {
    pub window_seconds: i64,
    pub max_major_plus_critical: u32,
}

/// Which availability schedule the contract uses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScheduleSpec {
    /// Evenly stepped between the accepted and terminated availability.
    Linear { step: Decimal, increment: Decimal },
    /// The built-in irregular schedule (99.8 % accepted, 98.4 % terminated).
    ReferenceNonlinear,
    /// Explicit breakpoints.
    Table { breakpoints: Vec<Breakpoint> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedImportanceProfile {
    pub id: String,
    pub points: ImportanceProfile,
}

/// A sub-service with its own penalty price, covering a set of metrics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubcontractSpec {
    pub id: String,
    pub metrics: Vec<String>,
    pub unit_price: Money,
    #[serde(default)]
    pub importance_profile: Option<String>,
    #[serde(default = "one")]
    pub sampling_step: Decimal,
}

fn one() -> Decimal {
    Decimal::ONE
}

fn sixty() -> i64 {
    60
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltyTerms {
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub evaluation: ScheduleEvaluation,
    #[serde(default)]
    pub base: PenaltyBase,
    /// Length of one penalty time unit.
    #[serde(default = "sixty")]
    pub time_unit_seconds: i64,
    #[serde(default)]
    pub breach_price: Money,
    #[serde(default)]
    pub unit_price: Money,
    /// Sampling step of the importance-weighted term, in time units.
    #[serde(default = "one")]
    pub sampling_step: Decimal,
    #[serde(default)]
    pub importance_profile: Option<String>,
    #[serde(default)]
    pub components: ComponentMask,
    #[serde(default)]
    pub importance_profiles: Vec<NamedImportanceProfile>,
    #[serde(default)]
    pub subcontracts: Vec<SubcontractSpec>,
}

impl PenaltyTerms {
    pub fn profile(&self, id: Option<&str>) -> Option<ImportanceProfile> {
        match id {
            None => Some(ImportanceProfile::unit()),
            Some(id) => self
                .importance_profiles
                .iter()
                .find(|p| p.id == id)
                .map(|p| p.points.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContractMode {
    Static,
    Dynamic,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Retention {
    #[default]
    Purge,
    Archive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lifetime {
    pub start: Timestamp,
    pub end: Timestamp,
}

impl Lifetime {
    pub fn contains(&self, t: Timestamp) -> bool {
        self.start <= t && t <= self.end
    }

    pub fn clamp(&self, t: Timestamp) -> Timestamp {
        t.clamp(self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlaContract {
    pub id: String,
    pub tenant: String,
    pub provider: String,
    pub mode: ContractMode,
    #[serde(default = "default_currency")]
    pub currency: String,
    #[serde(default)]
    pub retention: Retention,
    pub lifetime: Lifetime,
    #[serde(default)]
    pub qos: Vec<QosMetricSpec>,
    pub availability: AvailabilityTerms,
    pub tracking: TrackingLimits,
    pub penalty: PenaltyTerms,
    pub economics: EconomicsTerms,
    #[serde(default)]
    pub amendments: Vec<Amendment>,
}

fn default_currency() -> String {
    "EUR".to_string()
}

/// The amendable terms of a contract as they stand at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSnapshot {
    pub qos: Vec<QosMetricSpec>,
    pub availability: AvailabilityTerms,
    pub tracking: TrackingLimits,
    pub penalty: PenaltyTerms,
    pub economics: EconomicsTerms,
    pub retention: Retention,
}

impl TermSnapshot {
    pub fn metric(&self, name: &str) -> Option<&QosMetricSpec> {
        self.qos.iter().find(|m| m.name == name)
    }

    pub fn schedule(&self) -> Result<BreakpointSchedule, ScheduleError> {
        let a = &self.availability;
        match &self.penalty.schedule {
            ScheduleSpec::Linear { step, increment } => compile_linear_schedule(&LinearScheduleParams {
                accepted: a.accepted,
                terminated: a.terminated,
                step: *step,
                increment: *increment,
            }),
            ScheduleSpec::ReferenceNonlinear => Ok(reference_nonlinear_schedule()),
            ScheduleSpec::Table { breakpoints } => {
                BreakpointSchedule::new(breakpoints.clone(), a.accepted, a.terminated)
            }
        }
    }

    /// Invariant problems of the terms themselves.
    pub fn problems(&self) -> Vec<String> {
        let mut problems = Vec::new();
        validate::term_problems(self, &mut |_, msg| problems.push(msg));
        problems
    }
}

impl SlaContract {
    pub fn base_terms(&self) -> TermSnapshot {
        TermSnapshot {
            qos: self.qos.clone(),
            availability: self.availability.clone(),
            tracking: self.tracking.clone(),
            penalty: self.penalty.clone(),
            economics: self.economics.clone(),
            retention: self.retention,
        }
    }

    /// Base terms with every amendment effective at or before `t` applied,
    /// in effective-time order (ties keep log order).
    pub fn effective_terms_at(&self, t: Timestamp) -> Result<TermSnapshot, ContractError> {
        if !self.lifetime.contains(t) {
            return Err(ContractError::OutOfLifetime(t));
        }
        let mut terms = self.base_terms();
        for amendment in self.amendments_in_order() {
            if amendment.effective > t {
                break;
            }
            amendment.apply_to(&mut terms)?;
        }
        Ok(terms)
    }

    fn amendments_in_order(&self) -> Vec<&Amendment> {
        let mut ordered: Vec<&Amendment> = self.amendments.iter().collect();
        ordered.sort_by_key(|a| a.effective);
        ordered
    }

    /// New contract version with a dynamic-SLA amendment appended.
    pub fn apply_amendment(&self, amendment: Amendment) -> Result<SlaContract, ContractError> {
        if self.mode == ContractMode::Static {
            return Err(ContractError::StaticAmendment);
        }
        self.append(Amendment {
            origin: AmendmentOrigin::Dynamic,
            ..amendment
        })
    }

    /// New contract version with an amendment agreed in renegotiation.
    /// Renegotiated terms apply to static contracts as well.
    pub fn apply_renegotiation(&self, amendment: Amendment) -> Result<SlaContract, ContractError> {
        self.append(Amendment {
            origin: AmendmentOrigin::Renegotiation,
            ..amendment
        })
    }

    /// Checks that `amendment` could be appended, without appending it.
    pub fn check_amendment(&self, amendment: &Amendment) -> Result<(), ContractError> {
        if !self.lifetime.contains(amendment.effective) {
            return Err(ContractError::OutOfLifetime(amendment.effective));
        }
        let mut probe = self.clone();
        probe.amendments.push(amendment.clone());
        let terms = probe.effective_terms_at(amendment.effective)?;
        let problems = terms.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ContractError::InconsistentTerms(problems))
        }
    }

    fn append(&self, amendment: Amendment) -> Result<SlaContract, ContractError> {
        self.check_amendment(&amendment)?;
        let mut next = self.clone();
        next.amendments.push(amendment);
        Ok(next)
    }

    /// Number of amendments applied so far.
    pub fn version(&self) -> usize {
        self.amendments.len()
    }

    /// The contract as it was after its first `version` amendments.
    pub fn at_version(&self, version: usize) -> Result<SlaContract, ContractError> {
        if version > self.amendments.len() {
            return Err(ContractError::UnknownVersion(version));
        }
        let mut earlier = self.clone();
        earlier.amendments.truncate(version);
        Ok(earlier)
    }

    pub fn original(&self) -> SlaContract {
        let mut base = self.clone();
        base.amendments.clear();
        base
    }
}
