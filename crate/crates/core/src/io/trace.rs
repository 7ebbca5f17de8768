//! Event traces as CSV, one event per line:
//!
//! ```text
//! timestamp,event_kind,incident_id,incident_class,metric_name,observed_value
//! ```
//!
//! An incident touching several metrics spans consecutive
//! `incident_opened` rows with the same timestamp and id. A renegotiated
//! amendment is a run of `renegotiation_accepted` rows, one per changed
//! field, with the field path in `metric_name`, the new value in
//! `observed_value` and the optional amendment id in `incident_id`.

use std::fmt::Write as _;

use rust_decimal::Decimal;

use super::DocumentError;
use crate::contract::{Amendment, AmendmentOrigin, TermChange};
use crate::lifecycle::{EventKind, IncidentClass, IncidentRecord, LifecycleEvent, TerminationCause};
use crate::time::{format_timestamp, parse_timestamp, Timestamp};

pub const TRACE_HEADER: &str = "timestamp,event_kind,incident_id,incident_class,metric_name,observed_value";
const COLUMNS: [&str; 6] = [
    "timestamp",
    "event_kind",
    "incident_id",
    "incident_class",
    "metric_name",
    "observed_value",
];

struct Row {
    line: usize,
    at: Timestamp,
    kind: String,
    id: String,
    class: String,
    metric: String,
    observed: String,
}

pub fn parse_trace(text: &str) -> Result<Vec<LifecycleEvent>, DocumentError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| DocumentError::at_line(1, e.to_string()))?
        .clone();
    if headers.iter().ne(COLUMNS.iter().copied()) {
        return Err(DocumentError::at_line(1, format!("header must be `{TRACE_HEADER}`")));
    }

    let mut rows = Vec::new();
    let mut previous: Option<Timestamp> = None;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            DocumentError::at_line(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let field = |i: usize| record.get(i).unwrap_or("").to_string();
        let at = parse_timestamp(&field(0))
            .map_err(|e| DocumentError::at_line(line, format!("bad timestamp `{}`: {e}", field(0))))?;
        if let Some(p) = previous {
            if at < p {
                return Err(DocumentError::at_line(
                    line,
                    format!("timestamp {} precedes {}", format_timestamp(at), format_timestamp(p)),
                ));
            }
        }
        previous = Some(at);
        rows.push(Row {
            line,
            at,
            kind: field(1),
            id: field(2),
            class: field(3),
            metric: field(4),
            observed: field(5),
        });
    }

    let mut events = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let row = &rows[i];
        let group_end = rows[i..]
            .iter()
            .position(|r| r.at != row.at || r.kind != row.kind || r.id != row.id)
            .map_or(rows.len(), |n| i + n);
        let (event, consumed) = event_from_rows(&rows[i..group_end])?;
        events.push(event);
        i += consumed;
    }
    Ok(events)
}

/// Builds one event from the head of `group` (rows sharing timestamp,
/// kind and id) and returns how many rows it used.
fn event_from_rows(group: &[Row]) -> Result<(LifecycleEvent, usize), DocumentError> {
    let row = &group[0];
    let err = |message: String| DocumentError::at_line(row.line, message);
    let require_id = || {
        if row.id.is_empty() {
            Err(err(format!("{} requires incident_id", row.kind)))
        } else {
            Ok(row.id.clone())
        }
    };
    let single = |kind: EventKind| Ok((LifecycleEvent::new(row.at, kind), 1));

    match row.kind.as_str() {
        "service_start" => single(EventKind::ServiceStart),
        "incident_resolved" => single(EventKind::IncidentResolved { id: require_id()? }),
        "renegotiation_proposed" => single(EventKind::RenegotiationProposed),
        "lifetime_expired" => single(EventKind::LifetimeExpired),
        "termination_requested" => single(EventKind::TerminationRequested {
            cause: TerminationCause::TenantRequest,
        }),
        "availability_terminated" => single(EventKind::TerminationRequested {
            cause: TerminationCause::TerminatedAvailability,
        }),
        "finalize_retention" => single(EventKind::FinalizeRetention),
        "incident_opened" => {
            let id = require_id()?;
            let class: IncidentClass = row.class.parse().map_err(err)?;
            let mut incident = IncidentRecord::new(id, class, row.at);
            for r in group {
                if r.class != row.class {
                    return Err(DocumentError::at_line(
                        r.line,
                        "incident class differs from the first row",
                    ));
                }
                if r.metric.is_empty() {
                    continue;
                }
                let observed: f64 = r
                    .observed
                    .parse()
                    .map_err(|_| DocumentError::at_line(r.line, format!("bad observed_value `{}`", r.observed)))?;
                incident = incident.with_metric(r.metric.clone(), observed);
            }
            Ok((
                LifecycleEvent::new(row.at, EventKind::IncidentOpened { incident }),
                group.len(),
            ))
        }
        "renegotiation_accepted" => {
            let mut changes = Vec::new();
            for r in group {
                if r.metric.is_empty() {
                    continue;
                }
                let value: Decimal = r
                    .observed
                    .parse()
                    .map_err(|_| DocumentError::at_line(r.line, format!("bad observed_value `{}`", r.observed)))?;
                changes.push(TermChange::new(r.metric.clone(), value));
            }
            let amendment = Amendment {
                id: (!row.id.is_empty()).then(|| row.id.clone()),
                effective: row.at,
                origin: AmendmentOrigin::Renegotiation,
                changes,
            };
            Ok((
                LifecycleEvent::new(row.at, EventKind::RenegotiationAccepted { amendment }),
                group.len(),
            ))
        }
        other => Err(err(format!("unknown event_kind `{other}`"))),
    }
}

pub fn write_trace(events: &[LifecycleEvent]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    let mut row = |at: Timestamp, kind: &str, id: &str, class: &str, metric: &str, observed: &str| {
        let _ = writeln!(out, "{},{kind},{id},{class},{metric},{observed}", format_timestamp(at));
    };
    for event in events {
        let at = event.at;
        match &event.kind {
            EventKind::ServiceStart => row(at, "service_start", "", "", "", ""),
            EventKind::IncidentOpened { incident } => {
                if incident.affected.is_empty() {
                    row(at, "incident_opened", &incident.id, incident.class.as_str(), "", "");
                }
                for m in &incident.affected {
                    row(
                        at,
                        "incident_opened",
                        &incident.id,
                        incident.class.as_str(),
                        &m.metric,
                        &m.observed.to_string(),
                    );
                }
            }
            EventKind::IncidentResolved { id } => row(at, "incident_resolved", id, "", "", ""),
            EventKind::RenegotiationProposed => row(at, "renegotiation_proposed", "", "", "", ""),
            EventKind::RenegotiationAccepted { amendment } => {
                let id = amendment.id.as_deref().unwrap_or("");
                if amendment.changes.is_empty() {
                    row(at, "renegotiation_accepted", id, "", "", "");
                }
                for c in &amendment.changes {
                    row(at, "renegotiation_accepted", id, "", &c.path, &c.value.to_string());
                }
            }
            EventKind::LifetimeExpired => row(at, "lifetime_expired", "", "", "", ""),
            EventKind::TerminationRequested { cause } => match cause {
                TerminationCause::TenantRequest => row(at, "termination_requested", "", "", "", ""),
                TerminationCause::TerminatedAvailability => row(at, "availability_terminated", "", "", "", ""),
            },
            EventKind::FinalizeRetention => row(at, "finalize_retention", "", "", "", ""),
        }
    }
    out
}
