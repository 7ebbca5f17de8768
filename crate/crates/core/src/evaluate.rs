//! End-to-end evaluation of one contract against one event trace.
//!
//! The trace is replayed through the lifecycle. When the observation
//! window closes, availability is measured and checked against the
//! terminated availability (this is the billing-period boundary). Penalties
//! and economics are then computed from the recorded incidents and the
//! terms in force.

use std::collections::BTreeSet;

use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::availability::{
    compute_availability, normalize_outages_with, AvailabilityResult, BandThresholds, Interval, ObservationWindow,
    OutagePolicy, OutageSet, WindowError,
};
use crate::contract::{ContractError, SlaContract, TermSnapshot};
use crate::economics::{
    net_position, penalty_charge, EconomicsError, EconomicsResult, PenaltyBase, Resource, ResourceVector,
};
use crate::lifecycle::{
    ActionDirective, EventKind, IncidentClass, IncidentRecord, LifecycleError, LifecycleEvent, SlaInstance, SlaState,
    TerminationCause, TerminationReason, TimedDirective,
};
use crate::money::Money;
use crate::penalty::{
    penalty_total, DurationTerm, ImportanceInputs, OutagePeriod, PenaltyBreakdown, PenaltyInputs, ScheduleError,
    ScheduleOutcome, SubcontractTerm,
};
use crate::time::{seconds_between, seconds_to_units, Timestamp};

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error(transparent)]
    Lifecycle(#[from] LifecycleError),
    #[error(transparent)]
    Contract(#[from] ContractError),
    #[error("penalty schedule: {0}")]
    Schedule(#[from] ScheduleError),
    #[error("economics: {0}")]
    Economics(#[from] EconomicsError),
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error("contract is inconsistent: {}", .0.join("; "))]
    InvalidContract(Vec<String>),
    #[error("importance profile `{0}` is not defined")]
    UnknownProfile(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvaluationOptions {
    /// Defaults to the contract lifetime.
    pub window: Option<ObservationWindow>,
    /// End assumed for incidents still open; defaults to the window end.
    pub now: Option<Timestamp>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidentCounts {
    pub minor: u64,
    pub major: u64,
    pub critical: u64,
}

impl IncidentCounts {
    pub fn total(&self) -> u64 {
        self.minor + self.major + self.critical
    }

    fn add(&mut self, class: IncidentClass) {
        match class {
            IncidentClass::Minor => self.minor += 1,
            IncidentClass::Major => self.major += 1,
            IncidentClass::Critical => self.critical += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifecycleOutcome {
    /// State after the window closed and availability was checked.
    pub state_at_window_end: SlaState,
    /// State after the whole trace, including retention.
    pub final_state: SlaState,
    pub directives: Vec<TimedDirective>,
    pub ignored_events: usize,
}

impl LifecycleOutcome {
    pub fn early_termination(&self) -> Option<TerminationReason> {
        match self.state_at_window_end {
            SlaState::EarlyTerminated(reason) => Some(reason),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub contract_id: String,
    pub currency: String,
    pub window: ObservationWindow,
    pub availability: AvailabilityResult,
    pub incident_counts: IncidentCounts,
    /// Incidents that were evaluated for a penalty.
    pub breaches: u64,
    pub penalty: PenaltyBreakdown,
    pub schedule: ScheduleOutcome,
    pub penalty_base: PenaltyBase,
    pub penalty_charge: Money,
    pub economics: EconomicsResult,
    pub net_position: Money,
    pub lifecycle: LifecycleOutcome,
}

impl EvaluationReport {
    /// Internal consistency problems; empty for any report produced by
    /// [`evaluate`].
    pub fn consistency_problems(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let p = &self.penalty;
        let sum: Money = [p.count, p.duration, p.subcontracts, p.importance, p.importance_multi]
            .iter()
            .map(|c| c.amount)
            .sum();
        if sum != p.total {
            problems.push("penalty total differs from the sum of its components".into());
        }
        let e = &self.economics;
        if e.profit != e.revenue - e.expenditure {
            problems.push("profit differs from revenue minus expenditure".into());
        }
        if self.net_position != e.profit - self.penalty_charge {
            problems.push("net position differs from profit minus penalty charge".into());
        }
        if self.lifecycle.early_termination() == Some(TerminationReason::TerminatedAvailability)
            && !self.schedule.termination_flag
        {
            problems.push("terminated for availability without a termination flag".into());
        }
        problems
    }
}

/// Evaluates `contract` against the time-ordered `events`.
pub fn evaluate(
    contract: &SlaContract,
    events: &[LifecycleEvent],
    options: &EvaluationOptions,
) -> Result<EvaluationReport, EvaluationError> {
    let problems = contract.base_terms().problems();
    if !problems.is_empty() {
        return Err(EvaluationError::InvalidContract(problems));
    }
    let mut window = match options.window {
        Some(w) => w,
        None => ObservationWindow::new(contract.lifetime.start, contract.lifetime.end)?,
    };

    let mut instance = SlaInstance::new(contract.clone());
    let mut retention_event = None;
    let mut checkpoint: Option<(AvailabilityResult, ScheduleOutcome, SlaState)> = None;

    for event in events {
        let closes_window = event.at > window.end()
            || (event.at == window.end()
                && matches!(event.kind, EventKind::LifetimeExpired | EventKind::FinalizeRetention));
        if checkpoint.is_none() && closes_window {
            checkpoint = Some(close_window(&mut instance, &window, options)?);
        }
        if event.kind == EventKind::FinalizeRetention {
            retention_event = Some(event.clone());
            continue;
        }
        let was_ended = instance.state().is_ended();
        instance.replay(std::iter::once(event))?;
        // An agreement that ends inside the window is measured up to its end.
        if checkpoint.is_none() && !was_ended && instance.state().is_ended() && event.at > window.start() {
            window = ObservationWindow::new(window.start(), event.at)?;
            checkpoint = Some(close_window(&mut instance, &window, options)?);
        }
    }
    let (availability, schedule, state_at_window_end) = match checkpoint {
        Some(c) => c,
        None => close_window(&mut instance, &window, options)?,
    };

    let terms = instance.terms_at(window.end())?;
    let contract_now = instance.contract().expect("not purged before retention").clone();
    let policy = outage_policy(&terms, options);
    let history = instance.history().to_vec();

    let inputs = penalty_inputs(&contract_now, &terms, &history, instance.directives(), &window, &policy)?;
    let penalty = penalty_total(&inputs, &terms.penalty.components);

    let economics = economics_over_window(&contract_now, &window)?;
    let charge = penalty_charge(&economics, schedule.penalty_percent, &penalty, terms.penalty.base);
    let net = net_position(&economics, schedule.penalty_percent, &penalty, terms.penalty.base);

    let mut incident_counts = IncidentCounts::default();
    for incident in history.iter().filter(|i| overlaps(i, &window, &policy)) {
        incident_counts.add(incident.class);
    }

    if let Some(event) = retention_event {
        instance.apply(&event)?;
    }
    let outcome = instance.outcome();

    Ok(EvaluationReport {
        contract_id: contract.id.clone(),
        currency: contract.currency.clone(),
        window,
        availability,
        incident_counts,
        breaches: inputs.breaches,
        penalty,
        schedule,
        penalty_base: terms.penalty.base,
        penalty_charge: charge,
        economics,
        net_position: net,
        lifecycle: LifecycleOutcome {
            state_at_window_end,
            final_state: outcome.final_state,
            directives: outcome.directives,
            ignored_events: outcome.ignored_events,
        },
    })
}

fn outage_policy(terms: &TermSnapshot, options: &EvaluationOptions) -> OutagePolicy {
    OutagePolicy {
        classes: terms.availability.outage_classes.clone(),
        open_until: options.now,
    }
}

/// Billing-period boundary: measure availability, evaluate the schedule and
/// terminate if the agreement allows it.
fn close_window(
    instance: &mut SlaInstance,
    window: &ObservationWindow,
    options: &EvaluationOptions,
) -> Result<(AvailabilityResult, ScheduleOutcome, SlaState), EvaluationError> {
    let terms = instance.terms_at(window.end())?;
    let policy = outage_policy(&terms, options);
    let outages = normalize_outages_with(instance.history(), window, &policy);
    let bands = BandThresholds {
        high_min: terms.availability.band_high_min,
        average_min: terms.availability.band_average_min,
    };
    let availability = compute_availability(window, &outages, &bands);
    let schedule = terms
        .schedule()?
        .evaluate_with(availability.availability, terms.penalty.evaluation);

    if schedule.termination_flag && terms.availability.terminate_at_terminated && instance.state().is_operating() {
        instance.apply(&LifecycleEvent::new(
            window.end(),
            EventKind::TerminationRequested {
                cause: TerminationCause::TerminatedAvailability,
            },
        ))?;
    }
    Ok((availability, schedule, instance.state()))
}

fn overlaps(incident: &IncidentRecord, window: &ObservationWindow, policy: &OutagePolicy) -> bool {
    let interval = policy.interval_of(incident, window);
    incident.start < window.end() && (interval.end > window.start() || incident.start >= window.start())
}

fn penalty_inputs(
    contract: &SlaContract,
    terms: &TermSnapshot,
    history: &[IncidentRecord],
    directives: &[TimedDirective],
    window: &ObservationWindow,
    policy: &OutagePolicy,
) -> Result<PenaltyInputs, EvaluationError> {
    let unit = terms.penalty.time_unit_seconds;
    let origin = contract.lifetime.start;
    let offset = |t: Timestamp| seconds_to_units(seconds_between(origin, t), unit);
    let periods = |set: &OutageSet| -> Vec<OutagePeriod> {
        set.intervals()
            .iter()
            .map(|i| OutagePeriod::new(offset(i.start), seconds_to_units(i.length_seconds(), unit)))
            .collect()
    };
    let profile = |id: &Option<String>| {
        terms
            .penalty
            .profile(id.as_deref())
            .ok_or_else(|| EvaluationError::UnknownProfile(id.clone().unwrap_or_default()))
    };

    let evaluated: BTreeSet<&str> = directives
        .iter()
        .filter_map(|d| match &d.directive {
            ActionDirective::EvaluatePenalty { incident } => Some(incident.as_str()),
            _ => None,
        })
        .collect();
    let breaches = history
        .iter()
        .filter(|i| evaluated.contains(i.id.as_str()) && overlaps(i, window, policy))
        .count() as u64;

    let outages = normalize_outages_with(history, window, policy);
    let period_bound = offset(window.end());

    let mut subcontract_durations = Vec::new();
    let mut subcontract_importance = Vec::new();
    for sub in &terms.penalty.subcontracts {
        let affected = history
            .iter()
            .filter(|i| policy.counts(i) && i.affected.iter().any(|m| sub.metrics.contains(&m.metric)));
        let set = OutageSet::from_intervals(
            affected
                .map(|i| policy.interval_of(i, window))
                .collect::<Vec<Interval>>(),
            window,
        );
        if set.is_empty() {
            continue;
        }
        subcontract_durations.push(DurationTerm {
            unit_price: sub.unit_price,
            units: seconds_to_units(set.total_seconds(), unit),
        });
        let sub_profile = profile(&sub.importance_profile)?;
        for outage in periods(&set) {
            subcontract_importance.push(SubcontractTerm {
                id: sub.id.clone(),
                unit_price: sub.unit_price,
                importance: sub_profile.clone(),
                outage,
                sampling_step: sub.sampling_step,
                period_bound,
            });
        }
    }

    Ok(PenaltyInputs {
        breach_price: terms.penalty.breach_price,
        breaches,
        unit_price: terms.penalty.unit_price,
        downtime_units: seconds_to_units(outages.total_seconds(), unit),
        subcontract_durations,
        importance: ImportanceInputs {
            unit_price: terms.penalty.unit_price,
            outages: periods(&outages),
            sampling_step: terms.penalty.sampling_step,
            profile: profile(&terms.penalty.importance_profile)?,
            period_bound,
        },
        subcontract_importance,
    })
}

/// Economics over the window, weighting each amendment interval by its
/// share of the window. Static contracts have a single interval.
pub fn economics_over_window(
    contract: &SlaContract,
    window: &ObservationWindow,
) -> Result<EconomicsResult, EvaluationError> {
    let mut cuts: Vec<Timestamp> = vec![window.start()];
    cuts.extend(
        contract
            .amendments
            .iter()
            .map(|a| a.effective)
            .filter(|t| *t > window.start() && *t < window.end()),
    );
    cuts.sort();
    cuts.dedup();
    cuts.push(window.end());

    if cuts.len() == 2 {
        let terms = contract.effective_terms_at(contract.lifetime.clamp(window.start()))?;
        return Ok(terms.economics.evaluate()?);
    }

    let total = Decimal::from(window.length_seconds());
    let mut combined: Option<EconomicsResult> = None;
    for pair in cuts.windows(2) {
        let terms = contract.effective_terms_at(contract.lifetime.clamp(pair[0]))?;
        let part = terms.economics.evaluate()?;
        let weight = Decimal::from(seconds_between(pair[0], pair[1])) / total;
        let weight_f = weight.to_f64().unwrap_or(0.0);
        let weighted_resources = part.resources.scaled(weight_f);
        combined = Some(match combined {
            None => EconomicsResult {
                expenditure: part.expenditure * weight,
                revenue: part.revenue * weight,
                profit: Money::ZERO,
                resources: weighted_resources,
                ..part
            },
            Some(acc) => EconomicsResult {
                expenditure: acc.expenditure + part.expenditure * weight,
                revenue: acc.revenue + part.revenue * weight,
                resources: add_resources(&acc.resources, &weighted_resources),
                // the echoed inputs are those in force at the window end
                ..part
            },
        });
    }
    let mut result = combined.expect("at least one interval");
    result.profit = result.revenue - result.expenditure;
    Ok(result)
}

fn add_resources(a: &ResourceVector, b: &ResourceVector) -> ResourceVector {
    if a.len() != b.len() || a.iter().zip(b.iter()).any(|(x, y)| x.name != y.name) {
        // Different VNF shapes: keep the latest interval's vector.
        return b.clone();
    }
    ResourceVector(
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| Resource {
                amount: x.amount + y.amount,
                ..x.clone()
            })
            .collect(),
    )
}
