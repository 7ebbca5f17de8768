//! Service availability over an observation window.
//!
//! Availability is `(T_h - T_u) / T_h` where `T_h` is the window length and
//! `T_u` the length of the union of outage intervals inside it. Results are
//! classified into high, average and low bands.

use std::fmt;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lifecycle::{IncidentClass, IncidentRecord};
use crate::time::{format_timestamp, seconds_between, Timestamp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WindowError {
    #[error("window end {} must be after its start {}", format_timestamp(*end), format_timestamp(*start))]
    Empty { start: Timestamp, end: Timestamp },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawWindow")]
pub struct ObservationWindow {
    start: Timestamp,
    end: Timestamp,
}

#[derive(Deserialize)]
struct RawWindow {
    start: Timestamp,
    end: Timestamp,
}

impl TryFrom<RawWindow> for ObservationWindow {
    type Error = WindowError;
    fn try_from(raw: RawWindow) -> Result<Self, Self::Error> {
        ObservationWindow::new(raw.start, raw.end)
    }
}

impl ObservationWindow {
    pub fn new(start: Timestamp, end: Timestamp) -> Result<Self, WindowError> {
        if end <= start {
            return Err(WindowError::Empty { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> Timestamp {
        self.start
    }

    pub fn end(&self) -> Timestamp {
        self.end
    }

    /// `T_h` in seconds.
    pub fn length_seconds(&self) -> i64 {
        seconds_between(self.start, self.end)
    }

    pub fn clip(&self, interval: Interval) -> Option<Interval> {
        let start = interval.start.max(self.start);
        let end = interval.end.min(self.end);
        (start < end).then_some(Interval { start, end })
    }
}

/// Half-open interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval {
    pub start: Timestamp,
    pub end: Timestamp,
}

impl Interval {
    pub fn length_seconds(&self) -> i64 {
        seconds_between(self.start, self.end)
    }
}

/// Sorted, pairwise-disjoint outage intervals inside a window.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutageSet {
    intervals: Vec<Interval>,
}

impl OutageSet {
    /// Union of `intervals` intersected with `window`.
    pub fn from_intervals(intervals: impl IntoIterator<Item = Interval>, window: &ObservationWindow) -> Self {
        let mut clipped: Vec<Interval> = intervals.into_iter().filter_map(|i| window.clip(i)).collect();
        clipped.sort();
        let mut merged: Vec<Interval> = Vec::with_capacity(clipped.len());
        for interval in clipped {
            match merged.last_mut() {
                Some(last) if interval.start <= last.end => last.end = last.end.max(interval.end),
                _ => merged.push(interval),
            }
        }
        Self { intervals: merged }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// `T_u` in seconds.
    pub fn total_seconds(&self) -> i64 {
        self.intervals.iter().map(Interval::length_seconds).sum()
    }
}

/// Which incidents count as downtime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutagePolicy {
    pub classes: Vec<IncidentClass>,
    /// End assumed for incidents that are still open; defaults to the
    /// window end.
    pub open_until: Option<Timestamp>,
}

impl Default for OutagePolicy {
    fn default() -> Self {
        Self {
            classes: IncidentClass::ALL.to_vec(),
            open_until: None,
        }
    }
}

impl OutagePolicy {
    pub fn counts(&self, incident: &IncidentRecord) -> bool {
        incident.is_service_affecting() && self.classes.contains(&incident.class)
    }

    pub fn interval_of(&self, incident: &IncidentRecord, window: &ObservationWindow) -> Interval {
        let end = incident.end.unwrap_or_else(|| self.open_until.unwrap_or(window.end()));
        Interval {
            start: incident.start,
            end,
        }
    }
}

/// Outages from service-affecting incidents of any class; open incidents
/// run to the window end.
pub fn normalize_outages(incidents: &[IncidentRecord], window: &ObservationWindow) -> OutageSet {
    normalize_outages_with(incidents, window, &OutagePolicy::default())
}

pub fn normalize_outages_with(
    incidents: &[IncidentRecord],
    window: &ObservationWindow,
    policy: &OutagePolicy,
) -> OutageSet {
    OutageSet::from_intervals(
        incidents
            .iter()
            .filter(|i| policy.counts(i))
            .map(|i| policy.interval_of(i, window)),
        window,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AvailabilityBand {
    High,
    Average,
    Low,
}

impl fmt::Display for AvailabilityBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AvailabilityBand::High => "high",
            AvailabilityBand::Average => "average",
            AvailabilityBand::Low => "low",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandThresholds {
    pub high_min: Decimal,
    pub average_min: Decimal,
}

impl Default for BandThresholds {
    fn default() -> Self {
        Self {
            high_min: Decimal::ONE,
            average_min: Decimal::new(99, 2),
        }
    }
}

impl BandThresholds {
    pub fn classify(&self, availability: Decimal) -> AvailabilityBand {
        if availability >= self.high_min {
            AvailabilityBand::High
        } else if availability >= self.average_min {
            AvailabilityBand::Average
        } else {
            AvailabilityBand::Low
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvailabilityResult {
    /// `T_a` as a fraction.
    pub availability: Decimal,
    pub band: AvailabilityBand,
    pub window_seconds: i64,
    pub downtime_seconds: i64,
}

pub fn compute_availability(
    window: &ObservationWindow,
    outages: &OutageSet,
    bands: &BandThresholds,
) -> AvailabilityResult {
    let total = window.length_seconds();
    let down = outages.total_seconds().min(total);
    let availability = (Decimal::from(total - down) / Decimal::from(total)).normalize();
    AvailabilityResult {
        availability,
        band: bands.classify(availability),
        window_seconds: total,
        downtime_seconds: down,
    }
}
