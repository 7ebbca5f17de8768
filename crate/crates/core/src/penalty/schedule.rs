//! Availability-to-penalty step schedules.

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("terminated availability {terminated} must be below accepted availability {accepted}")]
    TerminatedNotBelowAccepted { accepted: Decimal, terminated: Decimal },
    #[error("availability {0} is outside (0, 1]")]
    AvailabilityOutOfRange(Decimal),
    #[error("step must be positive, got {0}")]
    NonPositiveStep(Decimal),
    #[error("increment must be positive, got {0}")]
    NonPositiveIncrement(Decimal),
    #[error("step {step} is wider than the span between accepted and terminated availability")]
    StepWiderThanSpan { step: Decimal },
    #[error("schedule has no breakpoints")]
    Empty,
    #[error("breakpoint threshold {0} lies outside [terminated, accepted)")]
    ThresholdOutOfRange(Decimal),
    #[error("breakpoint thresholds must be strictly decreasing (at {0})")]
    ThresholdsNotDecreasing(Decimal),
    #[error("penalties must strictly increase as availability decreases (at {0})")]
    PenaltiesNotIncreasing(Decimal),
    #[error("penalty percent must be nonnegative (at {0})")]
    NegativePenalty(Decimal),
}

/// One step of a schedule: at or below `threshold` availability the
/// penalty is at least `penalty_percent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Breakpoint {
    /// Availability as a fraction, e.g. 0.996.
    pub threshold: Decimal,
    /// Penalty in percent, e.g. 5 for 5 %.
    pub penalty_percent: Decimal,
}

impl Breakpoint {
    pub fn new(threshold: Decimal, penalty_percent: Decimal) -> Self {
        Self {
            threshold,
            penalty_percent,
        }
    }
}

/// How availabilities between two breakpoints are priced.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleEvaluation {
    /// Penalty of the lowest threshold at or above the availability.
    #[default]
    Step,
    /// Linear interpolation between neighbouring breakpoints, starting from
    /// zero penalty at the accepted availability.
    Interpolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleOutcome {
    pub penalty_percent: Decimal,
    /// Availability is at or below the terminated availability.
    pub termination_flag: bool,
}

/// Ordered availability thresholds (strictly decreasing) with strictly
/// increasing penalties, bounded by the accepted and terminated
/// availability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BreakpointSchedule {
    breakpoints: Vec<Breakpoint>,
    accepted: Decimal,
    terminated: Decimal,
}

impl BreakpointSchedule {
    pub fn new(breakpoints: Vec<Breakpoint>, accepted: Decimal, terminated: Decimal) -> Result<Self, ScheduleError> {
        check_bounds(accepted, terminated)?;
        if breakpoints.is_empty() {
            return Err(ScheduleError::Empty);
        }
        let mut previous: Option<&Breakpoint> = None;
        for bp in &breakpoints {
            if bp.threshold < terminated || bp.threshold >= accepted {
                return Err(ScheduleError::ThresholdOutOfRange(bp.threshold));
            }
            if bp.penalty_percent.is_sign_negative() && !bp.penalty_percent.is_zero() {
                return Err(ScheduleError::NegativePenalty(bp.threshold));
            }
            if let Some(prev) = previous {
                if bp.threshold >= prev.threshold {
                    return Err(ScheduleError::ThresholdsNotDecreasing(bp.threshold));
                }
                if bp.penalty_percent <= prev.penalty_percent {
                    return Err(ScheduleError::PenaltiesNotIncreasing(bp.threshold));
                }
            }
            previous = Some(bp);
        }
        Ok(Self {
            breakpoints,
            accepted,
            terminated,
        })
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breakpoints
    }

    pub fn accepted(&self) -> Decimal {
        self.accepted
    }

    pub fn terminated(&self) -> Decimal {
        self.terminated
    }

    /// Step evaluation: the penalty of the lowest threshold that is still at
    /// or above `availability`, zero above every threshold.
    pub fn evaluate(&self, availability: Decimal) -> ScheduleOutcome {
        // Thresholds are decreasing, so the ones >= availability form a prefix.
        let covering = self.breakpoints.partition_point(|bp| bp.threshold >= availability);
        let penalty_percent = match covering {
            0 => Decimal::ZERO,
            n => self.breakpoints[n - 1].penalty_percent,
        };
        ScheduleOutcome {
            penalty_percent,
            termination_flag: availability <= self.terminated,
        }
    }

    pub fn evaluate_interpolated(&self, availability: Decimal) -> ScheduleOutcome {
        let termination_flag = availability <= self.terminated;
        if availability >= self.accepted {
            return ScheduleOutcome {
                penalty_percent: Decimal::ZERO,
                termination_flag,
            };
        }
        let mut upper = (self.accepted, Decimal::ZERO);
        for bp in &self.breakpoints {
            if availability >= bp.threshold {
                let (hi_a, hi_p) = upper;
                let span = hi_a - bp.threshold;
                let fraction = (hi_a - availability) / span;
                return ScheduleOutcome {
                    penalty_percent: hi_p + (bp.penalty_percent - hi_p) * fraction,
                    termination_flag,
                };
            }
            upper = (bp.threshold, bp.penalty_percent);
        }
        ScheduleOutcome {
            penalty_percent: upper.1,
            termination_flag,
        }
    }

    pub fn evaluate_with(&self, availability: Decimal, mode: ScheduleEvaluation) -> ScheduleOutcome {
        match mode {
            ScheduleEvaluation::Step => self.evaluate(availability),
            ScheduleEvaluation::Interpolated => self.evaluate_interpolated(availability),
        }
    }
}

/// Parameters of an evenly stepped schedule: every `step` of shortfall
/// below `accepted` adds `increment` percent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearScheduleParams {
    pub accepted: Decimal,
    pub terminated: Decimal,
    pub step: Decimal,
    pub increment: Decimal,
}

impl LinearScheduleParams {
    /// Accepted 99.8 %, terminated 98.4 %, 5 % per 0.2 % of shortfall.
    pub fn reference() -> Self {
        Self {
            accepted: Decimal::new(998, 3),
            terminated: Decimal::new(984, 3),
            step: Decimal::new(2, 3),
            increment: Decimal::from(5),
        }
    }
}

/// Breakpoints at `accepted - m * step` with penalty `m * increment` for
/// `m = 1 ..= floor((accepted - terminated) / step)`.
pub fn compile_linear_schedule(params: &LinearScheduleParams) -> Result<BreakpointSchedule, ScheduleError> {
    check_bounds(params.accepted, params.terminated)?;
    if params.step <= Decimal::ZERO {
        return Err(ScheduleError::NonPositiveStep(params.step));
    }
    if params.increment <= Decimal::ZERO {
        return Err(ScheduleError::NonPositiveIncrement(params.increment));
    }
    let span = params.accepted - params.terminated;
    let count = (span / params.step).floor();
    if count.is_zero() {
        return Err(ScheduleError::StepWiderThanSpan { step: params.step });
    }
    let count: u64 = count.try_into().unwrap_or(u64::MAX);
    let breakpoints = (1..=count)
        .map(|m| {
            let m = Decimal::from(m);
            Breakpoint::new(
                (params.accepted - m * params.step).normalize(),
                (m * params.increment).normalize(),
            )
        })
        .collect();
    BreakpointSchedule::new(breakpoints, params.accepted, params.terminated)
}

/// The irregular schedule between 99.8 % accepted and 98.4 % terminated:
/// 5 % at 0.2 % below accepted, +2 % per further 0.1 % down to 99.1 %, a
/// single +10 % jump to 99.0 %, then +5 % per 0.1 % down to 98.4 %.
pub fn reference_nonlinear_schedule() -> BreakpointSchedule {
    let tenth = Decimal::new(1, 3);
    let accepted = Decimal::new(998, 3);
    let terminated = Decimal::new(984, 3);

    let mut breakpoints = Vec::new();
    let mut threshold = accepted - Decimal::new(2, 3);
    let mut penalty = Decimal::from(5);
    breakpoints.push(Breakpoint::new(threshold, penalty));

    let mut extend_until = |floor: Decimal, extra: Decimal, bps: &mut Vec<Breakpoint>| {
        while threshold - tenth >= floor {
            threshold -= tenth;
            penalty += extra;
            bps.push(Breakpoint::new(threshold.normalize(), penalty));
        }
    };
    extend_until(Decimal::new(991, 3), Decimal::from(2), &mut breakpoints);
    extend_until(Decimal::new(990, 3), Decimal::from(10), &mut breakpoints);
    extend_until(terminated, Decimal::from(5), &mut breakpoints);

    BreakpointSchedule::new(breakpoints, accepted, terminated).expect("built-in schedule satisfies schedule invariants")
}

fn check_bounds(accepted: Decimal, terminated: Decimal) -> Result<(), ScheduleError> {
    for value in [accepted, terminated] {
        if value <= Decimal::ZERO || value > Decimal::ONE {
            return Err(ScheduleError::AvailabilityOutOfRange(value));
        }
    }
    if terminated >= accepted {
        return Err(ScheduleError::TerminatedNotBelowAccepted { accepted, terminated });
    }
    Ok(())
}
