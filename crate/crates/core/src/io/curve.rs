//! Penalty curves as CSV: `availability_percent,penalty_percent`.

use std::fmt::Write as _;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::DocumentError;
use crate::penalty::{BreakpointSchedule, ScheduleEvaluation};

pub const CURVE_HEADER: &str = "availability_percent,penalty_percent";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CurveError {
    #[error("resolution must be positive, got {0}")]
    InvalidResolution(Decimal),
    #[error("agreed availability {agreed}% is below terminated {terminated}%")]
    InvalidSpan { agreed: Decimal, terminated: Decimal },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub availability_percent: Decimal,
    pub penalty_percent: Decimal,
}

/// Samples `schedule` from `agreed` down to the terminated availability in
/// steps of `resolution` percentage points. Both endpoints are included.
pub fn sample_curve(
    schedule: &BreakpointSchedule,
    agreed: Decimal,
    resolution_percent: Decimal,
    mode: ScheduleEvaluation,
) -> Result<Vec<CurvePoint>, CurveError> {
    if resolution_percent <= Decimal::ZERO {
        return Err(CurveError::InvalidResolution(resolution_percent));
    }
    let hundred = Decimal::ONE_HUNDRED;
    let top = (agreed * hundred).normalize();
    let bottom = (schedule.terminated() * hundred).normalize();
    if top < bottom {
        return Err(CurveError::InvalidSpan {
            agreed: top,
            terminated: bottom,
        });
    }
    let point = |percent: Decimal| CurvePoint {
        availability_percent: percent.normalize(),
        penalty_percent: schedule
            .evaluate_with(percent / hundred, mode)
            .penalty_percent
            .normalize(),
    };
    let mut points = Vec::new();
    let mut k = Decimal::ZERO;
    loop {
        let a = top - k * resolution_percent;
        if a <= bottom {
            break;
        }
        points.push(point(a));
        k += Decimal::ONE;
    }
    points.push(point(bottom));
    Ok(points)
}

pub fn write_curve(points: &[CurvePoint]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(out, "{},{}", p.availability_percent, p.penalty_percent);
    }
    out
}

pub fn parse_curve(text: &str) -> Result<Vec<CurvePoint>, DocumentError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == CURVE_HEADER => {}
        _ => return Err(DocumentError::at_line(1, format!("header must be `{CURVE_HEADER}`"))),
    }
    let mut points = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || DocumentError::at_line(i + 1, format!("expected two decimals, got `{line}`"));
        let (a, p) = line.split_once(',').ok_or_else(bad)?;
        points.push(CurvePoint {
            availability_percent: a.trim().parse().map_err(|_| bad())?,
            penalty_percent: p.trim().parse().map_err(|_| bad())?,
        });
    }
    Ok(points)
}
