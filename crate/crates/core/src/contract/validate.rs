use std::collections::BTreeSet;
use std::fmt;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::{AmendmentOrigin, ContractMode, QosCatalog, ScheduleSpec, SlaContract, TermField, TermSnapshot};
use crate::penalty::reference_nonlinear_schedule;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            field: field.into(),
            message: message.into(),
        });
    }
}

/// Checks every contract invariant and the QoS targets against `catalog`.
/// Violations are returned as data; the contract itself is untouched.
pub fn validate_contract(contract: &SlaContract, catalog: &QosCatalog) -> ValidationReport {
    let mut report = ValidationReport::default();

    for (field, value) in [
        ("id", &contract.id),
        ("tenant", &contract.tenant),
        ("provider", &contract.provider),
        ("currency", &contract.currency),
    ] {
        if value.trim().is_empty() {
            report.push(field, "must not be empty");
        }
    }
    if contract.lifetime.start >= contract.lifetime.end {
        report.push("lifetime", "start_time < end_time required");
    }

    let terms = contract.base_terms();
    term_problems(&terms, &mut |field, message| report.push(field, message));

    for spec in &contract.qos {
        if let Some(message) = catalog.check(spec) {
            report.push(format!("qos.{}", spec.name), message);
        }
    }

    for (i, amendment) in contract.amendments.iter().enumerate() {
        let field = format!("amendments[{i}]");
        if contract.mode == ContractMode::Static && amendment.origin == AmendmentOrigin::Dynamic {
            report.push(&field, "amendments forbidden on static SLA");
        }
        if !contract.lifetime.contains(amendment.effective) {
            report.push(&field, "effective time outside contract lifetime");
        }
        for change in &amendment.changes {
            if let Err(e) = change.path.parse::<TermField>() {
                report.push(&field, e.to_string());
            }
        }
    }
    // Replay every amendment and check the terms it leaves behind.
    let mut replay = contract.amendments.clone();
    replay.sort_by_key(|a| a.effective);
    for amendment in replay {
        if !contract.lifetime.contains(amendment.effective) {
            continue;
        }
        match contract.effective_terms_at(amendment.effective) {
            Ok(snapshot) => {
                for problem in snapshot.problems() {
                    report.push(
                        format!("amendment at {}", crate::time::format_timestamp(amendment.effective)),
                        problem,
                    );
                }
            }
            Err(e) => report.push("amendments", e.to_string()),
        }
    }

    report
}

/// Invariant problems of a term snapshot, reported through `sink` as
/// `(field, message)`.
pub(crate) fn term_problems(terms: &TermSnapshot, sink: &mut dyn FnMut(String, String)) {
    let mut push = |field: &str, message: String| sink(field.to_string(), message);

    let mut names = BTreeSet::new();
    for spec in &terms.qos {
        let field = format!("qos.{}", spec.name);
        if spec.name.trim().is_empty() {
            push("qos", "metric name must not be empty".into());
        }
        if !names.insert(spec.name.as_str()) {
            push(&field, "duplicate metric name".into());
        }
        if spec.unit.trim().is_empty() {
            push(&field, "unit must not be empty".into());
        }
        if !spec.target.is_finite() || !spec.violation_threshold.is_finite() {
            push(&field, "target and threshold must be finite".into());
        } else if !spec.target_meets_threshold() {
            push(&field, "target must satisfy its own violation threshold".into());
        }
    }

    let a = &terms.availability;
    if a.agreed <= Decimal::ZERO || a.agreed > Decimal::ONE {
        push("availability.agreed", "agreed must lie in (0, 1]".into());
    }
    if a.terminated >= a.accepted {
        push("availability.terminated", "terminated < accepted required".into());
    }
    if a.accepted > a.agreed {
        push("availability.accepted", "accepted <= agreed required".into());
    }
    if a.terminated < Decimal::ZERO {
        push("availability.terminated", "terminated must be nonnegative".into());
    }
    if a.band_average_min >= a.band_high_min {
        push(
            "availability.band_average_min",
            "band_average_min < band_high_min required".into(),
        );
    }
    if a.band_high_min > Decimal::ONE {
        push("availability.band_high_min", "band_high_min <= 1 required".into());
    }

    if terms.tracking.window_seconds <= 0 {
        push("tracking.window_seconds", "window length must be positive".into());
    }

    let p = &terms.penalty;
    if a.terminated < a.accepted {
        if let Err(e) = terms.schedule() {
            push("penalty.schedule", e.to_string());
        }
    }
    if p.schedule == ScheduleSpec::ReferenceNonlinear {
        let builtin = reference_nonlinear_schedule();
        if builtin.accepted() != a.accepted || builtin.terminated() != a.terminated {
            push(
                "penalty.schedule",
                format!(
                    "reference-nonlinear schedule requires accepted {} and terminated {}",
                    builtin.accepted(),
                    builtin.terminated()
                ),
            );
        }
    }
    if p.time_unit_seconds <= 0 {
        push("penalty.time_unit_seconds", "must be positive".into());
    }
    if p.sampling_step <= Decimal::ZERO {
        push("penalty.sampling_step", "must be positive".into());
    }
    if p.breach_price.is_negative() {
        push("penalty.breach_price", "must be nonnegative".into());
    }
    if p.unit_price.is_negative() {
        push("penalty.unit_price", "must be nonnegative".into());
    }
    let mut profile_ids = BTreeSet::new();
    for profile in &p.importance_profiles {
        if !profile_ids.insert(profile.id.as_str()) {
            push(
                "penalty.importance_profiles",
                format!("duplicate profile `{}`", profile.id),
            );
        }
    }
    let dangling = |id: &Option<String>| {
        id.as_ref()
            .filter(|id| !profile_ids.contains(id.as_str()))
            .map(|id| format!("unknown importance profile `{id}`"))
    };
    if let Some(message) = dangling(&p.importance_profile) {
        push("penalty.importance_profile", message);
    }
    let mut sub_ids = BTreeSet::new();
    for sub in &p.subcontracts {
        let field = format!("penalty.subcontracts.{}", sub.id);
        if let Some(message) = dangling(&sub.importance_profile) {
            push(&field, message);
        }
        if !sub_ids.insert(sub.id.as_str()) {
            push(&field, "duplicate subcontract id".into());
        }
        if sub.sampling_step <= Decimal::ZERO {
            push(&field, "sampling_step must be positive".into());
        }
        if sub.unit_price.is_negative() {
            push(&field, "unit_price must be nonnegative".into());
        }
        if sub.metrics.is_empty() {
            push(&field, "must cover at least one metric".into());
        }
        for metric in &sub.metrics {
            if terms.metric(metric).is_none() {
                push(&field, format!("unknown metric `{metric}`"));
            }
        }
    }

    for problem in terms.economics.problems() {
        push("economics", problem);
    }
}
