//! Seeded incident generator and Monte Carlo penalty exposure.
//!
//! Each incident class arrives as a Poisson process with exponential outage
//! durations. Traces are driven by ChaCha8 seeded from a 64-bit seed; run
//! `i` of a study uses `run_seed(seed, i)` (SplitMix64 over the pair), so
//! runs are independent and can be evaluated in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::availability::ObservationWindow;
use crate::contract::SlaContract;
use crate::evaluate::{evaluate, EvaluationError, EvaluationOptions, EvaluationReport};
use crate::lifecycle::{EventKind, IncidentClass, IncidentRecord, LifecycleEvent};
use crate::money::Money;
use crate::time::{add_seconds, Timestamp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("runs must be at least 1")]
    NoRuns,
}

/// Observed value reported for a metric while an incident lasts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Degradation {
    pub metric: String,
    pub observed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassProfile {
    /// Arrivals per hour.
    #[serde(default)]
    pub rate_per_hour: f64,
    #[serde(default = "one_hour")]
    pub mean_duration_hours: f64,
    /// Incidents without degradations are informational and cause no
    /// downtime.
    #[serde(default)]
    pub degradation: Vec<Degradation>,
}

fn one_hour() -> f64 {
    1.0
}

impl Default for ClassProfile {
    fn default() -> Self {
        Self {
            rate_per_hour: 0.0,
            mean_duration_hours: 1.0,
            degradation: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Trace origin; defaults to the contract lifetime start.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Timestamp>,
    pub horizon_hours: f64,
    pub seed: u64,
    #[serde(default)]
    pub minor: ClassProfile,
    #[serde(default)]
    pub major: ClassProfile,
    #[serde(default)]
    pub critical: ClassProfile,
}

impl ScenarioConfig {
    pub fn class(&self, class: IncidentClass) -> &ClassProfile {
        match class {
            IncidentClass::Minor => &self.minor,
            IncidentClass::Major => &self.major,
            IncidentClass::Critical => &self.critical,
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |field: String, message: &str| ScenarioError::Invalid {
            field,
            message: message.to_string(),
        };
        if !(self.horizon_hours.is_finite() && self.horizon_seconds() > 0) {
            return Err(invalid("horizon_hours".into(), "must be positive"));
        }
        for class in IncidentClass::ALL {
            let profile = self.class(class);
            if !(profile.rate_per_hour.is_finite() && profile.rate_per_hour >= 0.0) {
                return Err(invalid(format!("{class}.rate_per_hour"), "must be nonnegative"));
            }
            if !(profile.mean_duration_hours.is_finite() && profile.mean_duration_hours > 0.0) {
                return Err(invalid(format!("{class}.mean_duration_hours"), "must be positive"));
            }
            if profile.degradation.iter().any(|d| !d.observed.is_finite()) {
                return Err(invalid(
                    format!("{class}.degradation"),
                    "observed values must be finite",
                ));
            }
        }
        Ok(())
    }

    pub fn horizon_seconds(&self) -> i64 {
        (self.horizon_hours * 3600.0).round() as i64
    }

    pub fn origin(&self) -> Timestamp {
        self.start.unwrap_or_default()
    }

    pub fn window(&self) -> ObservationWindow {
        let start = self.origin();
        ObservationWindow::new(start, add_seconds(start, self.horizon_seconds().max(1))).expect("positive horizon")
    }

    /// The same scenario with `start` filled in from `contract` if unset.
    pub fn anchored(&self, contract: &SlaContract) -> ScenarioConfig {
        ScenarioConfig {
            start: Some(self.start.unwrap_or(contract.lifetime.start)),
            ..self.clone()
        }
    }

    pub fn with_seed(&self, seed: u64) -> ScenarioConfig {
        ScenarioConfig { seed, ..self.clone() }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of run `index` in a study seeded with `seed`.
pub fn run_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Incidents of one trace, in generation order. Times are whole seconds
/// from the origin and every incident lies in `[0, horizon]`.
pub fn generate_incidents(config: &ScenarioConfig) -> Vec<IncidentRecord> {
    let origin = config.origin();
    let horizon = config.horizon_seconds();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut incidents = Vec::new();
    for class in IncidentClass::ALL {
        let profile = config.class(class);
        if profile.rate_per_hour <= 0.0 || horizon <= 0 {
            continue;
        }
        let arrivals = Exp::new(profile.rate_per_hour / 3600.0).expect("positive rate");
        let durations = Exp::new(1.0 / (profile.mean_duration_hours * 3600.0)).expect("positive mean");
        let mut t = 0.0_f64;
        let mut n = 0usize;
        loop {
            t += arrivals.sample(&mut rng);
            if t >= horizon as f64 {
                break;
            }
            let length = durations.sample(&mut rng);
            let start = (t.floor() as i64).min(horizon - 1);
            let end = (start + (length.round() as i64).max(1)).min(horizon);
            n += 1;
            let mut incident = IncidentRecord::new(format!("{class}-{n:05}"), class, add_seconds(origin, start))
                .closed_at(add_seconds(origin, end));
            for d in &profile.degradation {
                incident = incident.with_metric(d.metric.clone(), d.observed);
            }
            incidents.push(incident);
        }
    }
    incidents
}

/// A full trace: service start, every incident opened and resolved, and
/// lifetime expiry at the horizon. Events at the same instant are ordered
/// start, resolutions, openings, expiry.
pub fn generate_trace(config: &ScenarioConfig) -> Vec<LifecycleEvent> {
    let origin = config.origin();
    let horizon_end = add_seconds(origin, config.horizon_seconds());
    let mut keyed: Vec<(Timestamp, u8, usize, LifecycleEvent)> = Vec::new();
    keyed.push((origin, 0, 0, LifecycleEvent::new(origin, EventKind::ServiceStart)));
    for (i, incident) in generate_incidents(config).into_iter().enumerate() {
        let end = incident.end.expect("generated incidents are closed");
        let opened = LifecycleEvent::new(
            incident.start,
            EventKind::IncidentOpened {
                incident: IncidentRecord {
                    end: None,
                    ..incident.clone()
                },
            },
        );
        keyed.push((incident.start, 2, i, opened));
        keyed.push((
            end,
            1,
            i,
            LifecycleEvent::new(end, EventKind::IncidentResolved { id: incident.id }),
        ));
    }
    keyed.push((
        horizon_end,
        3,
        0,
        LifecycleEvent::new(horizon_end, EventKind::LifetimeExpired),
    ));
    keyed.sort_by_key(|k| (k.0, k.1, k.2));
    keyed.into_iter().map(|(_, _, _, e)| e).collect()
}

/// What one simulated run contributed to a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub incidents: u64,
    pub availability: Decimal,
    pub total_penalty: Money,
    pub penalty_charge: Money,
    pub components: ComponentTotals,
    pub early_terminated: bool,
    pub net_position: Money,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentTotals {
    pub count: Money,
    pub duration: Money,
    pub subcontracts: Money,
    pub importance: Money,
    pub importance_multi: Money,
}

impl ComponentTotals {
    fn add(self, other: ComponentTotals) -> ComponentTotals {
        ComponentTotals {
            count: self.count + other.count,
            duration: self.duration + other.duration,
            subcontracts: self.subcontracts + other.subcontracts,
            importance: self.importance + other.importance,
            importance_multi: self.importance_multi + other.importance_multi,
        }
    }

    fn divided(self, n: Decimal) -> ComponentTotals {
        let d = |m: Money| Money::new(m.amount() / n);
        ComponentTotals {
            count: d(self.count),
            duration: d(self.duration),
            subcontracts: d(self.subcontracts),
            importance: d(self.importance),
            importance_multi: d(self.importance_multi),
        }
    }
}

impl RunResult {
    pub fn from_report(seed: u64, report: &EvaluationReport) -> Self {
        let p = &report.penalty;
        Self {
            seed,
            incidents: report.incident_counts.total(),
            availability: report.availability.availability,
            total_penalty: p.total,
            penalty_charge: report.penalty_charge,
            components: ComponentTotals {
                count: p.count.amount,
                duration: p.duration.amount,
                subcontracts: p.subcontracts.amount,
                importance: p.importance.amount,
                importance_multi: p.importance_multi.amount,
            },
            early_terminated: report.lifecycle.early_termination().is_some(),
            net_position: report.net_position,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposureSummary {
    pub runs: u64,
    pub seed: u64,
    pub mean_total_penalty: Money,
    /// Nearest-rank 95th percentile.
    pub p95_total_penalty: Money,
    pub mean_penalty_charge: Money,
    pub p95_penalty_charge: Money,
    pub early_termination_frequency: Decimal,
    pub mean_components: ComponentTotals,
    pub mean_availability: Decimal,
    pub mean_net_position: Money,
    pub mean_incidents: Decimal,
}

/// Generates and evaluates run `index` of a study.
pub fn run_once(contract: &SlaContract, config: &ScenarioConfig, index: u64) -> Result<RunResult, EvaluationError> {
    let anchored = config.anchored(contract);
    let seed = run_seed(config.seed, index);
    let run_config = anchored.with_seed(seed);
    let trace = generate_trace(&run_config);
    let options = EvaluationOptions {
        window: Some(run_config.window()),
        now: None,
    };
    let report = evaluate(contract, &trace, &options)?;
    Ok(RunResult::from_report(seed, &report))
}

fn nearest_rank_p95(mut values: Vec<Money>) -> Money {
    values.sort();
    let rank = (values.len() * 95).div_ceil(100).max(1);
    values[rank - 1]
}

/// Aggregates run results. The result does not depend on their order.
pub fn summarize(seed: u64, results: &[RunResult]) -> Result<ExposureSummary, ScenarioError> {
    if results.is_empty() {
        return Err(ScenarioError::NoRuns);
    }
    // Decimal sums round at 28 digits, so add in a canonical order.
    let mut sorted: Vec<&RunResult> = results.iter().collect();
    sorted.sort_by_key(|r| {
        let c = &r.components;
        (
            r.seed,
            r.total_penalty,
            r.penalty_charge,
            r.net_position,
            r.availability,
            r.incidents,
            (c.count, c.duration, c.subcontracts, c.importance, c.importance_multi),
        )
    });
    let results = sorted;
    let n = Decimal::from(results.len() as u64);
    let mean = |f: &dyn Fn(&RunResult) -> Money| Money::new(results.iter().map(|r| f(r)).sum::<Money>().amount() / n);
    let terminated = results.iter().filter(|r| r.early_terminated).count() as u64;
    Ok(ExposureSummary {
        runs: results.len() as u64,
        seed,
        mean_total_penalty: mean(&|r| r.total_penalty),
        p95_total_penalty: nearest_rank_p95(results.iter().map(|r| r.total_penalty).collect()),
        mean_penalty_charge: mean(&|r| r.penalty_charge),
        p95_penalty_charge: nearest_rank_p95(results.iter().map(|r| r.penalty_charge).collect()),
        early_termination_frequency: Decimal::from(terminated) / n,
        mean_components: results
            .iter()
            .fold(ComponentTotals::default(), |acc, r| acc.add(r.components))
            .divided(n),
        mean_availability: results.iter().map(|r| r.availability).sum::<Decimal>() / n,
        mean_net_position: mean(&|r| r.net_position),
        mean_incidents: Decimal::from(results.iter().map(|r| r.incidents).sum::<u64>()) / n,
    })
}

/// Runs `runs` independent simulations in parallel and aggregates them.
pub fn monte_carlo(
    contract: &SlaContract,
    config: &ScenarioConfig,
    runs: u64,
) -> Result<ExposureSummary, SimulationError> {
    config.validate()?;
    if runs == 0 {
        return Err(ScenarioError::NoRuns.into());
    }
    let results = (0..runs)
        .into_par_iter()
        .map(|i| run_once(contract, config, i))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(summarize(config.seed, &results)?)
}

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("scenario: {0}")]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
}
