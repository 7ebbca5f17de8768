//! Penalty evaluation.
//!
//! Two families live here. Availability schedules map a measured
//! availability onto a penalty percentage (linear or irregular steps between
//! the accepted and terminated availability). The formula family prices
//! breaches by count, by downtime, per subcontract, and weighted by how
//! important the service was at the moment of failure; [`penalty_total`]
//! sums the enabled formulas.

mod breakdown;
mod formulas;
mod importance;
mod schedule;

pub use breakdown::{
    penalty_total, ComponentMask, ComponentValue, ImportanceInputs, PenaltyBreakdown, PenaltyComponent, PenaltyInputs,
};
pub use formulas::{
    penalty_count, penalty_duration, penalty_importance, penalty_importance_multi, penalty_subcontracts, DurationTerm,
    OutagePeriod, SubcontractTerm,
};
pub use importance::{ImportanceError, ImportancePoint, ImportanceProfile};
pub use schedule::{
    compile_linear_schedule, reference_nonlinear_schedule, Breakpoint, BreakpointSchedule, LinearScheduleParams,
    ScheduleError, ScheduleEvaluation, ScheduleOutcome,
};
