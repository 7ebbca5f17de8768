//! Reference bounds for standardized QoS metrics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::QosMetricSpec;

const REFERENCE_CATALOG: &str = include_str!("../../data/qos_catalog.toml");

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("invalid QoS catalog: {0}")]
    Parse(#[from] toml::de::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QosCatalogBound {
    pub metric: String,
    pub bound: f64,
    pub unit: String,
    pub kind: BoundKind,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QosCatalog {
    #[serde(rename = "bound", default)]
    pub bounds: Vec<QosCatalogBound>,
}

impl QosCatalog {
    /// The bundled reference catalog.
    pub fn reference() -> Self {
        Self::from_toml_str(REFERENCE_CATALOG).expect("bundled catalog parses")
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CatalogError> {
        Ok(toml::from_str(text)?)
    }

    pub fn bound_for(&self, metric: &str) -> Option<&QosCatalogBound> {
        self.bounds.iter().find(|b| b.metric == metric)
    }

    /// A message describing how `spec` violates its catalog bound, if it does.
    pub fn check(&self, spec: &QosMetricSpec) -> Option<String> {
        let bound = self.bound_for(&spec.name)?;
        let Some(target) = convert(spec.target, &spec.unit, &bound.unit) else {
            return Some(format!(
                "unit `{}` is not comparable with catalog unit `{}`",
                spec.unit, bound.unit
            ));
        };
        // Relative slack absorbs unit-conversion rounding.
        let slack = 1e-9 * bound.bound.abs().max(1.0);
        match bound.kind {
            BoundKind::Max if target > bound.bound + slack => Some(format!(
                "target {} {} exceeds catalog maximum {} {}",
                spec.target, spec.unit, bound.bound, bound.unit
            )),
            BoundKind::Min if target < bound.bound - slack => Some(format!(
                "target {} {} is below catalog minimum {} {}",
                spec.target, spec.unit, bound.bound, bound.unit
            )),
            _ => None,
        }
    }
}

fn unit_scale(unit: &str) -> Option<(&'static str, f64)> {
    let scale = match unit {
        "bps" => ("rate", 1.0),
        "kbps" => ("rate", 1e3),
        "Mbps" => ("rate", 1e6),
        "Gbps" => ("rate", 1e9),
        "Tbps" => ("rate", 1e12),
        "ns" => ("time", 1e-9),
        "us" | "µs" => ("time", 1e-6),
        "ms" => ("time", 1e-3),
        "s" => ("time", 1.0),
        "km/h" => ("speed", 1.0 / 3.6),
        "m/s" => ("speed", 1.0),
        "%" => ("ratio", 1.0),
        "fraction" => ("ratio", 100.0),
        _ => return None,
    };
    Some(scale)
}

/// Converts `value` from unit `from` to unit `to`.
fn convert(value: f64, from: &str, to: &str) -> Option<f64> {
    if from == to {
        return Some(value);
    }
    let (dim_from, scale_from) = unit_scale(from)?;
    let (dim_to, scale_to) = unit_scale(to)?;
    (dim_from == dim_to).then(|| value * scale_from / scale_to)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::Direction;

    fn spec(name: &str, unit: &str, target: f64, direction: Direction) -> QosMetricSpec {
        QosMetricSpec {
            name: name.into(),
            unit: unit.into(),
            target,
            violation_threshold: target,
            direction,
        }
    }

    #[test]
    fn reference_catalog_loads() {
        let catalog = QosCatalog::reference();
        assert_eq!(catalog.bound_for("peak_data_rate").unwrap().bound, 10.0);
        assert_eq!(catalog.bound_for("latency").unwrap().kind, BoundKind::Min);
    }

    #[test]
    fn bounds_are_inclusive() {
        let catalog = QosCatalog::reference();
        assert_eq!(
            catalog.check(&spec("peak_data_rate", "Gbps", 10.0, Direction::HigherIsBetter)),
            None
        );
        assert_eq!(
            catalog.check(&spec("peak_data_rate", "Mbps", 10_000.0, Direction::HigherIsBetter)),
            None
        );
        assert!(catalog
            .check(&spec("peak_data_rate", "Gbps", 12.0, Direction::HigherIsBetter))
            .is_some());
        assert!(catalog
            .check(&spec("latency", "ms", 0.5, Direction::LowerIsBetter))
            .is_some());
        assert!(catalog
            .check(&spec("latency", "us", 500.0, Direction::LowerIsBetter))
            .is_some());
        assert_eq!(
            catalog.check(&spec("jitter", "ms", 0.1, Direction::LowerIsBetter)),
            None
        );
    }

    #[test]
    fn incomparable_units_are_reported() {
        let catalog = QosCatalog::reference();
        let msg = catalog
            .check(&spec("latency", "Mbps", 5.0, Direction::LowerIsBetter))
            .unwrap();
        assert!(msg.contains("not comparable"));
    }
}
