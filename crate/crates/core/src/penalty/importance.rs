use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImportanceError {
    #[error("importance value {value} at {at} is outside (0, 1]")]
    ValueOutOfRange { at: Decimal, value: Decimal },
    #[error("importance breakpoints must have strictly increasing times (at {0})")]
    TimesNotIncreasing(Decimal),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImportancePoint {
    /// Offset in penalty time units from which `value` applies.
    pub at: Decimal,
    pub value: Decimal,
}

/// Piecewise-constant service importance over time.
///
/// Each point's value holds from its time until the next point. Before the
/// first point the importance is 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ImportancePoint>", into = "Vec<ImportancePoint>")]
pub struct ImportanceProfile {
    points: Vec<ImportancePoint>,
}

impl ImportanceProfile {
    pub fn new(points: Vec<ImportancePoint>) -> Result<Self, ImportanceError> {
        for (i, p) in points.iter().enumerate() {
            if p.value <= Decimal::ZERO || p.value > Decimal::ONE {
                return Err(ImportanceError::ValueOutOfRange {
                    at: p.at,
                    value: p.value,
                });
            }
            if i > 0 && p.at <= points[i - 1].at {
                return Err(ImportanceError::TimesNotIncreasing(p.at));
            }
        }
        Ok(Self { points })
    }

    /// Importance 1 everywhere.
    pub fn unit() -> Self {
        Self::default()
    }

    pub fn constant(value: Decimal) -> Result<Self, ImportanceError> {
        Self::new(vec![ImportancePoint {
            at: Decimal::MIN,
            value,
        }])
    }

    pub fn points(&self) -> &[ImportancePoint] {
        &self.points
    }

    pub fn value_at(&self, t: Decimal) -> Decimal {
        let idx = self.points.partition_point(|p| p.at <= t);
        match idx {
            0 => Decimal::ONE,
            n => self.points[n - 1].value,
        }
    }

    /// Constant pieces as `(from, until, value)`; `None` bounds are open.
    pub(crate) fn pieces(&self) -> Vec<(Option<Decimal>, Option<Decimal>, Decimal)> {
        let mut pieces = Vec::with_capacity(self.points.len() + 1);
        let first = self.points.first().map(|p| p.at);
        pieces.push((None, first, Decimal::ONE));
        for (i, p) in self.points.iter().enumerate() {
            let until = self.points.get(i + 1).map(|n| n.at);
            pieces.push((Some(p.at), until, p.value));
        }
        pieces
    }
}

impl TryFrom<Vec<ImportancePoint>> for ImportanceProfile {
    type Error = ImportanceError;
    fn try_from(points: Vec<ImportancePoint>) -> Result<Self, Self::Error> {
        Self::new(points)
    }
}

impl From<ImportanceProfile> for Vec<ImportancePoint> {
    fn from(profile: ImportanceProfile) -> Self {
        profile.points
    }
}
