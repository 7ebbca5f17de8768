//! Timestamp helpers. All times are UTC; durations are whole seconds.

use chrono::{DateTime, SecondsFormat, Utc};
use rust_decimal::Decimal;

pub type Timestamp = DateTime<Utc>;

/// Signed number of seconds from `from` to `to`.
pub fn seconds_between(from: Timestamp, to: Timestamp) -> i64 {
    (to - from).num_seconds()
}

pub fn add_seconds(at: Timestamp, seconds: i64) -> Timestamp {
    at + chrono::Duration::seconds(seconds)
}

/// Converts a number of seconds into penalty time units.
pub fn seconds_to_units(seconds: i64, unit_seconds: i64) -> Decimal {
    Decimal::from(seconds) / Decimal::from(unit_seconds)
}

pub fn format_timestamp(at: Timestamp) -> String {
    at.to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub fn parse_timestamp(text: &str) -> Result<Timestamp, chrono::ParseError> {
    DateTime::parse_from_rfc3339(text.trim()).map(|t| t.with_timezone(&Utc))
}

pub fn hours(seconds: i64) -> f64 {
    seconds as f64 / 3600.0
}
