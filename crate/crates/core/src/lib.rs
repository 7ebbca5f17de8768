//! Service level agreement engine for network slices.
//!
//! The crate covers the full agreement life: a machine-readable contract
//! with static or dynamic terms, an event-driven lifecycle, availability
//! measurement, availability-schedule and formula-based penalties, slice
//! economics, and a seeded incident simulator for exposure studies.
//!
//! Everything here is a pure function over immutable values. The CLI crate
//! wires these pieces to files.

pub mod availability;
pub mod contract;
pub mod economics;
pub mod evaluate;
pub mod io;
pub mod lifecycle;
pub mod money;
pub mod penalty;
pub mod simulator;
pub mod time;

pub use availability::{AvailabilityBand, AvailabilityResult, ObservationWindow, OutageSet};
pub use contract::{SlaContract, TermSnapshot};
pub use evaluate::{evaluate, EvaluationError, EvaluationOptions, EvaluationReport};
pub use lifecycle::{IncidentClass, IncidentRecord, LifecycleEvent, SlaState};
pub use money::Money;
pub use penalty::{BreakpointSchedule, PenaltyBreakdown};
