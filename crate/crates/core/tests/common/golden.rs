//! Expected lifecycle behaviour as an explicit table over every state and
//! every event kind, plus random trace builders for the lifecycle
//! properties.

use rand::Rng;

use slice_sla::contract::{Amendment, AmendmentOrigin, SlaContract, TermSnapshot};
use slice_sla::lifecycle::{
    step, ActionDirective, EventKind, IncidentClass, IncidentRecord, LifecycleEvent, SlaState, TerminationCause,
    TerminationReason,
};
use slice_sla::time::{add_seconds, Timestamp};

use super::{contract, dec};

pub const EVENTS: [&str; 11] = [
    "service-start",
    "open-minor",
    "open-major",
    "resolve-minor-breach",
    "resolve-major",
    "renegotiation-proposed",
    "renegotiation-accepted",
    "lifetime-expired",
    "terminate-tenant",
    "terminate-availability",
    "finalize-retention",
];

pub struct Context {
    pub contract: SlaContract,
    pub terms: TermSnapshot,
    pub history: Vec<IncidentRecord>,
    pub now: Timestamp,
}

/// Archive retention, tracking limit far from reached, and a history with
/// an open breaching minor incident, an open major incident and a closed
/// major incident.
pub fn context() -> Context {
    let contract = contract("embb_nonlinear");
    let terms = contract.base_terms();
    let t0 = contract.lifetime.start;
    let history = vec![
        IncidentRecord::new("minor-open", IncidentClass::Minor, add_seconds(t0, 3600)).with_metric("latency", 14.0),
        IncidentRecord::new("major-open", IncidentClass::Major, add_seconds(t0, 7200))
            .with_metric("user_data_rate", 35.0),
        IncidentRecord::new("major-done", IncidentClass::Major, add_seconds(t0, 600))
            .with_metric("user_data_rate", 10.0)
            .closed_at(add_seconds(t0, 1200)),
    ];
    Context {
        now: add_seconds(t0, 86_400),
        contract,
        terms,
        history,
    }
}

pub fn event(ctx: &Context, label: &str) -> LifecycleEvent {
    let at = ctx.now;
    let kind = match label {
        "service-start" => EventKind::ServiceStart,
        "open-minor" => EventKind::IncidentOpened {
            incident: IncidentRecord::new("new-minor", IncidentClass::Minor, at).with_metric("latency", 12.0),
        },
        "open-major" => EventKind::IncidentOpened {
            incident: IncidentRecord::new("new-major", IncidentClass::Major, at).with_metric("user_data_rate", 0.0),
        },
        "resolve-minor-breach" => EventKind::IncidentResolved {
            id: "minor-open".into(),
        },
        "resolve-major" => EventKind::IncidentResolved {
            id: "major-open".into(),
        },
        "renegotiation-proposed" => EventKind::RenegotiationProposed,
        "renegotiation-accepted" => EventKind::RenegotiationAccepted {
            amendment: Amendment::new(at, vec![]),
        },
        "lifetime-expired" => EventKind::LifetimeExpired,
        "terminate-tenant" => EventKind::TerminationRequested {
            cause: TerminationCause::TenantRequest,
        },
        "terminate-availability" => EventKind::TerminationRequested {
            cause: TerminationCause::TerminatedAvailability,
        },
        "finalize-retention" => EventKind::FinalizeRetention,
        other => panic!("unknown event label {other}"),
    };
    LifecycleEvent::new(at, kind)
}

type Expected = Option<(SlaState, Vec<ActionDirective>)>;

fn early(reason: TerminationReason) -> Expected {
    Some((
        SlaState::EarlyTerminated(reason),
        vec![
            ActionDirective::TriggerEarlyTermination { reason },
            ActionDirective::FinalizeBilling,
        ],
    ))
}

/// Expected outcome of `label` in `state`; `None` means rejected with the
/// state unchanged.
pub fn expected(state: SlaState, label: &str) -> Expected {
    use SlaState::*;
    let stay = |s: SlaState| Some((s, vec![]));
    match (state, label) {
        (Created, "service-start") => stay(Active),
        (Created | Active | Renegotiating, "terminate-tenant") => early(TerminationReason::TenantRequest),
        (Created | Active | Renegotiating, "terminate-availability") => {
            early(TerminationReason::TerminatedAvailability)
        }
        (Active | Renegotiating, "open-minor" | "open-major") => stay(state),
        (Active | Renegotiating, "resolve-minor-breach") => Some((
            state,
            vec![ActionDirective::EvaluatePenalty {
                incident: "minor-open".into(),
            }],
        )),
        (Active | Renegotiating, "resolve-major") => Some((
            state,
            vec![
                ActionDirective::EvaluatePenalty {
                    incident: "major-open".into(),
                },
                ActionDirective::OpenRenegotiation,
            ],
        )),
        (Active, "renegotiation-proposed") => stay(Renegotiating),
        (Renegotiating, "renegotiation-accepted") => stay(Active),
        (Active | Renegotiating, "lifetime-expired") => Some((Expired, vec![ActionDirective::FinalizeBilling])),
        // the fixture contract archives
        (Expired | EarlyTerminated(_), "finalize-retention") => stay(Archived),
        _ => None,
    }
}

/// Checks every state and event against the table; returns the number of
/// cells checked.
pub fn check_transition_table() -> Result<usize, String> {
    let ctx = context();
    let mut cells = 0;
    for state in SlaState::ALL {
        for label in EVENTS {
            let got = step(state, &ctx.terms, &ctx.history, &event(&ctx, label))
                .ok()
                .map(|t| (t.state, t.actions));
            let want = expected(state, label);
            if got != want {
                return Err(format!("{state} + {label}: expected {want:?}, got {got:?}"));
            }
            cells += 1;
        }
    }
    Ok(cells)
}

/// Random trace: service start, `n` incidents of the allowed classes with
/// short outages spaced at least `gap` seconds apart, then lifetime expiry
/// and retention. Incidents never overlap.
pub fn random_trace(
    rng: &mut impl Rng,
    start: Timestamp,
    classes: &[IncidentClass],
    n: usize,
    gap: i64,
) -> Vec<LifecycleEvent> {
    let mut events = vec![LifecycleEvent::new(start, EventKind::ServiceStart)];
    let mut t = 0;
    for i in 0..n {
        t += gap + rng.gen_range(0..gap.max(1));
        let class = classes[rng.gen_range(0..classes.len())];
        let observed = if rng.gen_bool(0.5) { 14.0 } else { 6.0 };
        let incident =
            IncidentRecord::new(format!("i{i}"), class, add_seconds(start, t)).with_metric("latency", observed);
        events.push(LifecycleEvent::new(
            add_seconds(start, t),
            EventKind::IncidentOpened { incident },
        ));
        let length = rng.gen_range(1..gap.max(2));
        events.push(LifecycleEvent::new(
            add_seconds(start, t + length),
            EventKind::IncidentResolved { id: format!("i{i}") },
        ));
        t += length;
    }
    let end = add_seconds(start, t + gap);
    events.push(LifecycleEvent::new(end, EventKind::LifetimeExpired));
    events.push(LifecycleEvent::new(end, EventKind::FinalizeRetention));
    events
}

/// Random trace that may end early by tenant request, may carry
/// renegotiations after serious incidents and may continue with events
/// after the agreement ended.
pub fn random_mixed_trace(rng: &mut impl Rng, start: Timestamp) -> Vec<LifecycleEvent> {
    let mut events = vec![LifecycleEvent::new(start, EventKind::ServiceStart)];
    let mut t = 0;
    let mut serious_seen = false;
    let n = rng.gen_range(0..12);
    for i in 0..n {
        t += rng.gen_range(60..20_000);
        let class = IncidentClass::ALL[rng.gen_range(0..3)];
        let incident = IncidentRecord::new(format!("i{i}"), class, add_seconds(start, t)).with_metric("latency", 20.0);
        events.push(LifecycleEvent::new(
            add_seconds(start, t),
            EventKind::IncidentOpened { incident },
        ));
        t += rng.gen_range(1..5_000);
        events.push(LifecycleEvent::new(
            add_seconds(start, t),
            EventKind::IncidentResolved { id: format!("i{i}") },
        ));
        serious_seen |= class.is_serious();
        if serious_seen && rng.gen_bool(0.3) {
            t += 10;
            events.push(LifecycleEvent::new(
                add_seconds(start, t),
                EventKind::RenegotiationProposed,
            ));
            t += 10;
            let change = slice_sla::contract::TermChange::new("penalty.breach_price", dec("25"));
            events.push(LifecycleEvent::new(
                add_seconds(start, t),
                EventKind::RenegotiationAccepted {
                    amendment: Amendment {
                        origin: AmendmentOrigin::Renegotiation,
                        ..Amendment::new(add_seconds(start, t), vec![change])
                    },
                },
            ));
        }
    }
    t += 100;
    let ending = if rng.gen_bool(0.5) {
        EventKind::LifetimeExpired
    } else {
        EventKind::TerminationRequested {
            cause: TerminationCause::TenantRequest,
        }
    };
    events.push(LifecycleEvent::new(add_seconds(start, t), ending));
    for _ in 0..rng.gen_range(0..3) {
        t += 100;
        events.push(LifecycleEvent::new(add_seconds(start, t), EventKind::LifetimeExpired));
    }
    events.push(LifecycleEvent::new(
        add_seconds(start, t + 1),
        EventKind::FinalizeRetention,
    ));
    events
}

/// Trace whose serious incidents exceed the tracking limit inside one
/// tracking window; minor incidents are sprinkled in between.
pub fn tracking_limit_trace(rng: &mut impl Rng, ctx_contract: &SlaContract) -> Vec<LifecycleEvent> {
    let start = ctx_contract.lifetime.start;
    let limit = ctx_contract.tracking.max_major_plus_critical as usize;
    let window = ctx_contract.tracking.window_seconds;
    // all serious incidents fit inside the first window
    let spacing = (window / (limit as i64 + 2)).max(2);
    let mut events = vec![LifecycleEvent::new(start, EventKind::ServiceStart)];
    let mut t = 0;
    let mut minors = 0;
    for i in 0..=limit {
        t += rng.gen_range(1..spacing / 2);
        if rng.gen_bool(0.5) {
            let id = format!("m{minors}");
            minors += 1;
            let incident = IncidentRecord::new(id.clone(), IncidentClass::Minor, add_seconds(start, t))
                .with_metric("latency", 14.0);
            events.push(LifecycleEvent::new(
                add_seconds(start, t),
                EventKind::IncidentOpened { incident },
            ));
            events.push(LifecycleEvent::new(
                add_seconds(start, t + 1),
                EventKind::IncidentResolved { id },
            ));
            t += 2;
        }
        let class = if rng.gen_bool(0.5) {
            IncidentClass::Major
        } else {
            IncidentClass::Critical
        };
        let incident =
            IncidentRecord::new(format!("s{i}"), class, add_seconds(start, t)).with_metric("user_data_rate", 0.0);
        events.push(LifecycleEvent::new(
            add_seconds(start, t),
            EventKind::IncidentOpened { incident },
        ));
        t += 1;
        events.push(LifecycleEvent::new(
            add_seconds(start, t),
            EventKind::IncidentResolved { id: format!("s{i}") },
        ));
    }
    events.push(LifecycleEvent::new(
        ctx_contract.lifetime.end,
        EventKind::LifetimeExpired,
    ));
    events
}
