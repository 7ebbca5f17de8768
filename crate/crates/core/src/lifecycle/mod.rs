//! Event-driven SLA lifecycle.
//!
//! A contract is created, becomes active when service starts, handles
//! incidents while operating (possibly renegotiating after major or
//! critical ones) and ends either by expiring or by early termination.
//! Ended agreements are finally archived or purged.
//!
//! [`step`] is the pure transition function; [`SlaInstance`] keeps the
//! per-contract bookkeeping (incident history, amendments, retention).

mod instance;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use instance::{ReplayOutcome, SlaInstance, TimedDirective};

use crate::contract::{Amendment, ContractError, Retention, TermSnapshot, TrackingLimits};
use crate::time::{add_seconds, format_timestamp, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IncidentClass {
    Minor,
    Major,
    Critical,
}

impl IncidentClass {
    pub const ALL: [IncidentClass; 3] = [IncidentClass::Minor, IncidentClass::Major, IncidentClass::Critical];

    pub fn is_serious(self) -> bool {
        matches!(self, IncidentClass::Major | IncidentClass::Critical)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            IncidentClass::Minor => "minor",
            IncidentClass::Major => "major",
            IncidentClass::Critical => "critical",
        }
    }
}

impl fmt::Display for IncidentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for IncidentClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "minor" => Ok(IncidentClass::Minor),
            "major" => Ok(IncidentClass::Major),
            "critical" => Ok(IncidentClass::Critical),
            other => Err(format!("unknown incident class `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffectedMetric {
    pub metric: String,
    pub observed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncidentRecord {
    pub id: String,
    pub class: IncidentClass,
    pub start: Timestamp,
    /// `None` while the incident is open.
    pub end: Option<Timestamp>,
    pub affected: Vec<AffectedMetric>,
    #[serde(default)]
    pub resolution_note: String,
}

impl IncidentRecord {
    pub fn new(id: impl Into<String>, class: IncidentClass, start: Timestamp) -> Self {
        Self {
            id: id.into(),
            class,
            start,
            end: None,
            affected: Vec::new(),
            resolution_note: String::new(),
        }
    }

    pub fn with_metric(mut self, metric: impl Into<String>, observed: f64) -> Self {
        self.affected.push(AffectedMetric {
            metric: metric.into(),
            observed,
        });
        self
    }

    pub fn closed_at(mut self, end: Timestamp) -> Self {
        self.end = Some(end);
        self
    }

    /// Service-affecting incidents name at least one affected metric.
    pub fn is_service_affecting(&self) -> bool {
        !self.affected.is_empty()
    }

    /// Whether any affected metric is strictly past its threshold.
    pub fn breaches_threshold(&self, terms: &TermSnapshot) -> bool {
        self.affected
            .iter()
            .any(|m| terms.metric(&m.metric).is_some_and(|spec| spec.is_breached(m.observed)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminationReason {
    TrackingLimit,
    TerminatedAvailability,
    TenantRequest,
}

impl fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TerminationReason::TrackingLimit => "tracking-limit",
            TerminationReason::TerminatedAvailability => "terminated-availability",
            TerminationReason::TenantRequest => "tenant-request",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "state", content = "reason", rename_all = "kebab-case")]
pub enum SlaState {
    Created,
    Active,
    Renegotiating,
    Expired,
    EarlyTerminated(TerminationReason),
    Archived,
    Purged,
}

impl SlaState {
    pub const ALL: [SlaState; 9] = [
        SlaState::Created,
        SlaState::Active,
        SlaState::Renegotiating,
        SlaState::Expired,
        SlaState::EarlyTerminated(TerminationReason::TrackingLimit),
        SlaState::EarlyTerminated(TerminationReason::TerminatedAvailability),
        SlaState::EarlyTerminated(TerminationReason::TenantRequest),
        SlaState::Archived,
        SlaState::Purged,
    ];

    /// Service is running.
    pub fn is_operating(self) -> bool {
        matches!(self, SlaState::Active | SlaState::Renegotiating)
    }

    /// The agreement has ended but is not yet archived or purged.
    pub fn is_ended(self) -> bool {
        matches!(self, SlaState::Expired | SlaState::EarlyTerminated(_))
    }

    pub fn is_final(self) -> bool {
        matches!(self, SlaState::Archived | SlaState::Purged)
    }
}

impl fmt::Display for SlaState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlaState::Created => f.write_str("created"),
            SlaState::Active => f.write_str("active"),
            SlaState::Renegotiating => f.write_str("renegotiating"),
            SlaState::Expired => f.write_str("expired"),
            SlaState::EarlyTerminated(r) => write!(f, "early-terminated({r})"),
            SlaState::Archived => f.write_str("archived"),
            SlaState::Purged => f.write_str("purged"),
        }
    }
}

/// Why a termination was requested from outside the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminationCause {
    /// The tenant no longer needs the service.
    TenantRequest,
    /// A billing period closed at or below the terminated availability.
    TerminatedAvailability,
}

impl From<TerminationCause> for TerminationReason {
    fn from(cause: TerminationCause) -> Self {
        match cause {
            TerminationCause::TenantRequest => TerminationReason::TenantRequest,
            TerminationCause::TerminatedAvailability => TerminationReason::TerminatedAvailability,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EventKind {
    ServiceStart,
    IncidentOpened { incident: IncidentRecord },
    IncidentResolved { id: String },
    RenegotiationProposed,
    RenegotiationAccepted { amendment: Amendment },
    LifetimeExpired,
    TerminationRequested { cause: TerminationCause },
    FinalizeRetention,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::ServiceStart => "service-start",
            EventKind::IncidentOpened { .. } => "incident-opened",
            EventKind::IncidentResolved { .. } => "incident-resolved",
            EventKind::RenegotiationProposed => "renegotiation-proposed",
            EventKind::RenegotiationAccepted { .. } => "renegotiation-accepted",
            EventKind::LifetimeExpired => "lifetime-expired",
            EventKind::TerminationRequested { .. } => "termination-requested",
            EventKind::FinalizeRetention => "finalize-retention",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifecycleEvent {
    pub at: Timestamp,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl LifecycleEvent {
    pub fn new(at: Timestamp, kind: EventKind) -> Self {
        Self { at, kind }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
pub enum ActionDirective {
    EvaluatePenalty { incident: String },
    OpenRenegotiation,
    TriggerEarlyTermination { reason: TerminationReason },
    FinalizeBilling,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LifecycleError {
    #[error("invalid transition: {event} in state {state}")]
    InvalidTransition { state: SlaState, event: &'static str },
    #[error("event at {} precedes the previous event at {}", format_timestamp(*at), format_timestamp(*previous))]
    TimestampRegression { at: Timestamp, previous: Timestamp },
    #[error("unknown incident `{0}`")]
    UnknownIncident(String),
    #[error("incident `{0}` is already open or recorded")]
    DuplicateIncident(String),
    #[error("incident `{0}` is already resolved")]
    AlreadyResolved(String),
    #[error("incident `{id}` names metric `{metric}` that the contract does not define")]
    UnknownMetric { id: String, metric: String },
    #[error("renegotiation requires a prior major or critical incident")]
    NoRenegotiationGrounds,
    #[error("cannot finalize retention in state {0}")]
    NotFinalizable(SlaState),
    #[error("amendment rejected: {0}")]
    Amendment(#[from] ContractError),
    #[error("contract data has been purged")]
    Purged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: SlaState,
    pub actions: Vec<ActionDirective>,
}

impl Transition {
    fn to(state: SlaState) -> Self {
        Self {
            state,
            actions: Vec::new(),
        }
    }

    fn with(state: SlaState, actions: Vec<ActionDirective>) -> Self {
        Self { state, actions }
    }
}

/// True iff the Major and Critical incidents starting within
/// `[now - window, now]` outnumber the allowed maximum.
pub fn tracker_exceeded(history: &[IncidentRecord], limits: &TrackingLimits, now: Timestamp) -> bool {
    let since = add_seconds(now, -limits.window_seconds);
    let serious = history
        .iter()
        .filter(|i| i.class.is_serious() && i.start >= since && i.start <= now)
        .count();
    serious > limits.max_major_plus_critical as usize
}

/// Moves an ended agreement into its retention state.
pub fn finalize(state: SlaState, retention: Retention) -> Result<SlaState, LifecycleError> {
    if !state.is_ended() {
        return Err(LifecycleError::NotFinalizable(state));
    }
    Ok(match retention {
        Retention::Purge => SlaState::Purged,
        Retention::Archive => SlaState::Archived,
    })
}

fn early_termination(reason: TerminationReason) -> Transition {
    Transition::with(
        SlaState::EarlyTerminated(reason),
        vec![
            ActionDirective::TriggerEarlyTermination { reason },
            ActionDirective::FinalizeBilling,
        ],
    )
}

/// Pure transition function.
///
/// `history` holds the incidents recorded before `event`. Invalid events
/// leave the caller's state untouched and come back as errors.
pub fn step(
    state: SlaState,
    terms: &TermSnapshot,
    history: &[IncidentRecord],
    event: &LifecycleEvent,
) -> Result<Transition, LifecycleError> {
    let invalid = || LifecycleError::InvalidTransition {
        state,
        event: event.kind.name(),
    };

    match (&event.kind, state) {
        (EventKind::ServiceStart, SlaState::Created) => Ok(Transition::to(SlaState::Active)),

        (EventKind::TerminationRequested { cause }, s) if s == SlaState::Created || s.is_operating() => {
            Ok(early_termination((*cause).into()))
        }

        (EventKind::IncidentOpened { incident }, s) if s.is_operating() => {
            if history.iter().any(|i| i.id == incident.id) {
                return Err(LifecycleError::DuplicateIncident(incident.id.clone()));
            }
            if let Some(m) = incident.affected.iter().find(|m| terms.metric(&m.metric).is_none()) {
                return Err(LifecycleError::UnknownMetric {
                    id: incident.id.clone(),
                    metric: m.metric.clone(),
                });
            }
            if incident.class.is_serious() {
                let mut with_new = history.to_vec();
                with_new.push(incident.clone());
                if tracker_exceeded(&with_new, &terms.tracking, event.at) {
                    return Ok(early_termination(TerminationReason::TrackingLimit));
                }
            }
            Ok(Transition::to(s))
        }

        (EventKind::IncidentResolved { id }, s) if s.is_operating() => {
            let incident = history
                .iter()
                .find(|i| &i.id == id)
                .ok_or_else(|| LifecycleError::UnknownIncident(id.clone()))?;
            if incident.end.is_some() {
                return Err(LifecycleError::AlreadyResolved(id.clone()));
            }
            let evaluate = ActionDirective::EvaluatePenalty { incident: id.clone() };
            let actions = match incident.class {
                IncidentClass::Minor if incident.breaches_threshold(terms) => vec![evaluate],
                IncidentClass::Minor => vec![],
                IncidentClass::Major | IncidentClass::Critical => {
                    vec![evaluate, ActionDirective::OpenRenegotiation]
                }
            };
            Ok(Transition::with(s, actions))
        }

        (EventKind::RenegotiationProposed, SlaState::Active) => {
            if history.iter().any(|i| i.class.is_serious()) {
                Ok(Transition::to(SlaState::Renegotiating))
            } else {
                Err(LifecycleError::NoRenegotiationGrounds)
            }
        }

        (EventKind::RenegotiationAccepted { .. }, SlaState::Renegotiating) => Ok(Transition::to(SlaState::Active)),

        (EventKind::LifetimeExpired, s) if s.is_operating() => Ok(Transition::with(
            SlaState::Expired,
            vec![ActionDirective::FinalizeBilling],
        )),

        (EventKind::FinalizeRetention, s) if s.is_ended() => Ok(Transition::to(finalize(s, terms.retention)?)),

        _ => Err(invalid()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::tests::{sample_contract, ts};
    use crate::contract::ContractMode;

    fn terms() -> TermSnapshot {
        sample_contract(ContractMode::Static).base_terms()
    }

    fn at(s: &str, kind: EventKind) -> LifecycleEvent {
        LifecycleEvent::new(ts(s), kind)
    }

    #[test]
    fn minor_without_breach_is_free() {
        let minor =
            IncidentRecord::new("i1", IncidentClass::Minor, ts("2026-01-02T00:00:00Z")).with_metric("latency", 9.0);
        let t = step(
            SlaState::Active,
            &terms(),
            &[minor],
            &at("2026-01-02T01:00:00Z", EventKind::IncidentResolved { id: "i1".into() }),
        )
        .unwrap();
        assert_eq!(t, Transition::to(SlaState::Active));
    }

    #[test]
    fn minor_with_breach_is_evaluated() {
        let minor =
            IncidentRecord::new("i1", IncidentClass::Minor, ts("2026-01-02T00:00:00Z")).with_metric("latency", 12.0);
        let t = step(
            SlaState::Active,
            &terms(),
            &[minor],
            &at("2026-01-02T01:00:00Z", EventKind::IncidentResolved { id: "i1".into() }),
        )
        .unwrap();
        assert_eq!(
            t.actions,
            vec![ActionDirective::EvaluatePenalty { incident: "i1".into() }]
        );
    }

    #[test]
    fn lifetime_expired_before_start_is_invalid() {
        let err = step(
            SlaState::Created,
            &terms(),
            &[],
            &at("2026-01-31T00:00:00Z", EventKind::LifetimeExpired),
        )
        .unwrap_err();
        assert!(matches!(err, LifecycleError::InvalidTransition { .. }));
    }

    #[test]
    fn third_critical_in_window_terminates() {
        let history: Vec<_> = (0..2)
            .map(|i| {
                IncidentRecord::new(format!("c{i}"), IncidentClass::Critical, ts("2026-01-02T00:00:00Z"))
                    .closed_at(ts("2026-01-02T01:00:00Z"))
            })
            .collect();
        let third = IncidentRecord::new("c2", IncidentClass::Critical, ts("2026-01-03T00:00:00Z"));
        let t = step(
            SlaState::Active,
            &terms(),
            &history,
            &at("2026-01-03T00:00:00Z", EventKind::IncidentOpened { incident: third }),
        )
        .unwrap();
        assert_eq!(t.state, SlaState::EarlyTerminated(TerminationReason::TrackingLimit));
        assert_eq!(
            t.actions,
            vec![
                ActionDirective::TriggerEarlyTermination {
                    reason: TerminationReason::TrackingLimit
                },
                ActionDirective::FinalizeBilling
            ]
        );
    }

    #[test]
    fn tracker_window_counts() {
        let limits = TrackingLimits {
            window_seconds: 24 * 3600,
            max_major_plus_critical: 2,
        };
        let now = ts("2026-01-10T00:00:00Z");
        assert!(!tracker_exceeded(&[], &limits, now));
        let inside = |h: &str| IncidentRecord::new(h, IncidentClass::Major, ts(h));
        let three_inside = vec![
            inside("2026-01-09T01:00:00Z"),
            inside("2026-01-09T12:00:00Z"),
            inside("2026-01-09T23:00:00Z"),
        ];
        assert!(tracker_exceeded(&three_inside, &limits, now));
        let oldest_outside = vec![
            inside("2026-01-08T23:00:00Z"),
            inside("2026-01-09T12:00:00Z"),
            inside("2026-01-09T23:00:00Z"),
        ];
        assert!(!tracker_exceeded(&oldest_outside, &limits, now));
        let minors: Vec<_> = (0..5)
            .map(|i| IncidentRecord::new(format!("m{i}"), IncidentClass::Minor, now))
            .collect();
        assert!(!tracker_exceeded(&minors, &limits, now));
    }

    #[test]
    fn finalize_requires_ended_state() {
        assert_eq!(finalize(SlaState::Expired, Retention::Purge).unwrap(), SlaState::Purged);
        assert_eq!(
            finalize(
                SlaState::EarlyTerminated(TerminationReason::TenantRequest),
                Retention::Archive
            )
            .unwrap(),
            SlaState::Archived
        );
        assert!(matches!(
            finalize(SlaState::Active, Retention::Archive),
            Err(LifecycleError::NotFinalizable(SlaState::Active))
        ));
    }

    #[test]
    fn renegotiation_needs_serious_incident() {
        let e = at("2026-01-05T00:00:00Z", EventKind::RenegotiationProposed);
        assert_eq!(
            step(SlaState::Active, &terms(), &[], &e).unwrap_err(),
            LifecycleError::NoRenegotiationGrounds
        );
        let major = IncidentRecord::new("m", IncidentClass::Major, ts("2026-01-04T00:00:00Z"))
            .closed_at(ts("2026-01-04T02:00:00Z"));
        assert_eq!(
            step(SlaState::Active, &terms(), &[major], &e).unwrap().state,
            SlaState::Renegotiating
        );
    }

    #[test]
    fn state_serialization() {
        let s = SlaState::EarlyTerminated(TerminationReason::TrackingLimit);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"state":"early-terminated","reason":"tracking-limit"}"#);
        assert_eq!(serde_json::from_str::<SlaState>(&json).unwrap(), s);
    }
}
