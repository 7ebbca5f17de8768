//! Slice cost, revenue and profit.
//!
//! KPI requirements are mapped to a resource vector through a VNF catalog
//! entry, resources are priced into an expenditure, and revenue is earned
//! per served user. The KPI-to-resource mapping and the revenue model sit
//! behind traits so operators can plug in their own.

use std::collections::{BTreeMap, BTreeSet};

use rust_decimal::prelude::FromPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::money::Money;
use crate::penalty::PenaltyBreakdown;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EconomicsError {
    #[error("no baseline value for KPI `{0}`")]
    MissingBaseline(String),
    #[error("baseline for KPI `{0}` must be positive")]
    NonPositiveBaseline(String),
    #[error("resource vectors differ in shape: `{0}`")]
    DimensionMismatch(String),
    #[error("no unit cost for resource `{0}`")]
    MissingUnitCost(String),
    #[error("resource `{name}` has invalid amount {amount}")]
    InvalidAmount { name: String, amount: f64 },
    #[error("unknown VNF implementation `{0}`")]
    UnknownVnf(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resource {
    pub name: String,
    pub amount: f64,
    #[serde(default)]
    pub unit: String,
}

impl Resource {
    pub fn new(name: impl Into<String>, amount: f64, unit: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            amount,
            unit: unit.into(),
        }
    }
}

/// Required amount of each resource type (spectrum, power, staff, ...).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResourceVector(pub Vec<Resource>);

impl ResourceVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Resource> {
        self.0.iter()
    }

    pub fn scaled(&self, factor: f64) -> ResourceVector {
        ResourceVector(
            self.0
                .iter()
                .map(|r| Resource {
                    amount: r.amount * factor,
                    ..r.clone()
                })
                .collect(),
        )
    }

    fn check_shape(&self, other: &ResourceVector) -> Result<(), EconomicsError> {
        if self.len() != other.len() {
            return Err(EconomicsError::DimensionMismatch(format!(
                "{} vs {} resources",
                self.len(),
                other.len()
            )));
        }
        for (a, b) in self.0.iter().zip(&other.0) {
            if a.name != b.name {
                return Err(EconomicsError::DimensionMismatch(format!("{} vs {}", a.name, b.name)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KpiRequirement {
    pub metric: String,
    pub required: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VnfCatalogEntry {
    pub id: String,
    pub base_resources: ResourceVector,
    pub per_user_resources: ResourceVector,
    /// Sensitivity of every resource to each KPI's normalized demand.
    #[serde(default)]
    pub kpi_multipliers: BTreeMap<String, f64>,
}

/// Currency per unit, keyed by resource name.
pub type UnitCosts = BTreeMap<String, Money>;

pub trait ResourceModel {
    fn map_resources(
        &self,
        kpis: &[KpiRequirement],
        slice_size: u64,
        vnf: &VnfCatalogEntry,
    ) -> Result<ResourceVector, EconomicsError>;
}

/// Affine per-user resources scaled by KPI demand relative to baselines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TableResourceModel {
    pub baselines: BTreeMap<String, f64>,
}

impl ResourceModel for TableResourceModel {
    fn map_resources(
        &self,
        kpis: &[KpiRequirement],
        slice_size: u64,
        vnf: &VnfCatalogEntry,
    ) -> Result<ResourceVector, EconomicsError> {
        map_resources(kpis, slice_size, vnf, &self.baselines)
    }
}

/// `(base + s * per_user) * prod_k (1 + m_k * (required_k / baseline_k - 1))`,
/// componentwise. A scale factor below zero is clamped to zero.
pub fn map_resources(
    kpis: &[KpiRequirement],
    slice_size: u64,
    vnf: &VnfCatalogEntry,
    baselines: &BTreeMap<String, f64>,
) -> Result<ResourceVector, EconomicsError> {
    vnf.base_resources.check_shape(&vnf.per_user_resources)?;

    let mut scale = 1.0;
    for kpi in kpis {
        let baseline = *baselines
            .get(&kpi.metric)
            .ok_or_else(|| EconomicsError::MissingBaseline(kpi.metric.clone()))?;
        if baseline <= 0.0 || !baseline.is_finite() {
            return Err(EconomicsError::NonPositiveBaseline(kpi.metric.clone()));
        }
        let multiplier = vnf.kpi_multipliers.get(&kpi.metric).copied().unwrap_or(0.0);
        scale *= 1.0 + multiplier * (kpi.required / baseline - 1.0);
    }
    let scale = scale.max(0.0);

    let users = slice_size as f64;
    let resources = vnf
        .base_resources
        .iter()
        .zip(vnf.per_user_resources.iter())
        .map(|(base, per_user)| Resource {
            name: base.name.clone(),
            amount: (base.amount + users * per_user.amount) * scale,
            unit: base.unit.clone(),
        })
        .collect();
    Ok(ResourceVector(resources))
}

/// Sum of amount times unit cost over all resources.
pub fn expenditure(resources: &ResourceVector, costs: &UnitCosts) -> Result<Money, EconomicsError> {
    let mut total = Money::ZERO;
    for r in resources.iter() {
        let cost = costs
            .get(&r.name)
            .ok_or_else(|| EconomicsError::MissingUnitCost(r.name.clone()))?;
        let amount = amount_to_decimal(r)?;
        total += *cost * amount;
    }
    Ok(total)
}

fn amount_to_decimal(r: &Resource) -> Result<Decimal, EconomicsError> {
    if !r.amount.is_finite() || r.amount < 0.0 {
        return Err(EconomicsError::InvalidAmount {
            name: r.name.clone(),
            amount: r.amount,
        });
    }
    Decimal::from_f64(r.amount).ok_or_else(|| EconomicsError::InvalidAmount {
        name: r.name.clone(),
        amount: r.amount,
    })
}

pub trait RevenueModel {
    fn revenue(&self, price_per_user: Money, slice_size: u64, customer_size: u64, periods: u32) -> Money;
}

/// Each requesting user up to the slice size pays the price every period.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CappedLinearRevenue;

impl RevenueModel for CappedLinearRevenue {
    fn revenue(&self, price_per_user: Money, slice_size: u64, customer_size: u64, periods: u32) -> Money {
        revenue(price_per_user, slice_size, customer_size, periods)
    }
}

pub fn revenue(price_per_user: Money, slice_size: u64, customer_size: u64, periods: u32) -> Money {
    let served = customer_size.min(slice_size);
    price_per_user * Decimal::from(served) * Decimal::from(periods)
}

pub fn profit(revenue: Money, expenditure: Money) -> Money {
    revenue - expenditure
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomicsResult {
    pub expenditure: Money,
    pub revenue: Money,
    pub profit: Money,
    pub price_per_user: Money,
    pub slice_size: u64,
    pub customer_size: u64,
    pub periods: u32,
    pub resources: ResourceVector,
}

/// What a schedule penalty percentage is a percentage of, or whether the
/// formula total is charged as an absolute amount.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltyBase {
    #[default]
    PercentOfRevenue,
    AbsoluteCurrency,
}

/// Penalty amount charged against the slice under `base`.
pub fn penalty_charge(
    econ: &EconomicsResult,
    schedule_percent: Decimal,
    penalties: &PenaltyBreakdown,
    base: PenaltyBase,
) -> Money {
    match base {
        PenaltyBase::PercentOfRevenue => econ.revenue * (schedule_percent / Decimal::ONE_HUNDRED),
        PenaltyBase::AbsoluteCurrency => penalties.total,
    }
}

/// Profit after the penalty charge.
pub fn net_position(
    econ: &EconomicsResult,
    schedule_percent: Decimal,
    penalties: &PenaltyBreakdown,
    base: PenaltyBase,
) -> Money {
    econ.profit - penalty_charge(econ, schedule_percent, penalties, base)
}

/// Inputs needed to evaluate a slice's economics in one go.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomicsTerms {
    pub price_per_user: Money,
    pub slice_size: u64,
    pub customer_size: u64,
    #[serde(default = "one_period")]
    pub periods: u32,
    pub vnf: String,
    #[serde(default)]
    pub kpis: Vec<KpiRequirement>,
    #[serde(default)]
    pub baselines: BTreeMap<String, f64>,
    #[serde(default)]
    pub unit_costs: UnitCosts,
    #[serde(default)]
    pub vnf_catalog: Vec<VnfCatalogEntry>,
}

fn one_period() -> u32 {
    1
}

impl EconomicsTerms {
    pub fn vnf_entry(&self) -> Result<&VnfCatalogEntry, EconomicsError> {
        self.vnf_catalog
            .iter()
            .find(|entry| entry.id == self.vnf)
            .ok_or_else(|| EconomicsError::UnknownVnf(self.vnf.clone()))
    }

    pub fn evaluate(&self) -> Result<EconomicsResult, EconomicsError> {
        let model = TableResourceModel {
            baselines: self.baselines.clone(),
        };
        self.evaluate_with(&model, &CappedLinearRevenue)
    }

    pub fn evaluate_with(
        &self,
        resource_model: &dyn ResourceModel,
        revenue_model: &dyn RevenueModel,
    ) -> Result<EconomicsResult, EconomicsError> {
        let resources = resource_model.map_resources(&self.kpis, self.slice_size, self.vnf_entry()?)?;
        let exp = expenditure(&resources, &self.unit_costs)?;
        let rev = revenue_model.revenue(self.price_per_user, self.slice_size, self.customer_size, self.periods);
        Ok(EconomicsResult {
            expenditure: exp,
            revenue: rev,
            profit: profit(rev, exp),
            price_per_user: self.price_per_user,
            slice_size: self.slice_size,
            customer_size: self.customer_size,
            periods: self.periods,
            resources,
        })
    }

    /// Problems with the terms, as messages; empty when consistent.
    pub fn problems(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if self.price_per_user.is_negative() {
            problems.push("price_per_user must be nonnegative".to_string());
        }
        if self.periods == 0 {
            problems.push("periods must be at least 1".to_string());
        }
        let mut seen = BTreeSet::new();
        for kpi in &self.kpis {
            if !seen.insert(kpi.metric.as_str()) {
                problems.push(format!("duplicate KPI `{}`", kpi.metric));
            }
            if kpi.required <= 0.0 || !kpi.required.is_finite() {
                problems.push(format!("KPI `{}` requirement must be positive", kpi.metric));
            }
            match self.baselines.get(&kpi.metric) {
                None => problems.push(format!("no baseline value for KPI `{}`", kpi.metric)),
                Some(b) if *b <= 0.0 || !b.is_finite() => {
                    problems.push(format!("baseline for KPI `{}` must be positive", kpi.metric))
                }
                Some(_) => {}
            }
        }
        let mut ids = BTreeSet::new();
        for entry in &self.vnf_catalog {
            if !ids.insert(entry.id.as_str()) {
                problems.push(format!("duplicate VNF catalog entry `{}`", entry.id));
            }
            if let Err(e) = entry.base_resources.check_shape(&entry.per_user_resources) {
                problems.push(format!("VNF `{}`: {e}", entry.id));
            }
            let mut names = BTreeSet::new();
            for r in entry.base_resources.iter().chain(entry.per_user_resources.iter()) {
                if r.amount < 0.0 || !r.amount.is_finite() {
                    problems.push(format!(
                        "VNF `{}`: resource `{}` amount must be nonnegative",
                        entry.id, r.name
                    ));
                }
                names.insert(r.name.as_str());
                if !self.unit_costs.contains_key(&r.name) {
                    problems.push(format!("no unit cost for resource `{}`", r.name));
                }
            }
            if names.len() != entry.base_resources.len() {
                problems.push(format!("VNF `{}`: resource names must be unique", entry.id));
            }
            for (metric, m) in &entry.kpi_multipliers {
                if *m < 0.0 || !m.is_finite() {
                    problems.push(format!(
                        "VNF `{}`: multiplier for `{metric}` must be nonnegative",
                        entry.id
                    ));
                }
            }
        }
        if let Err(e) = self.vnf_entry() {
            problems.push(e.to_string());
        }
        for (name, cost) in &self.unit_costs {
            if cost.is_negative() {
                problems.push(format!("unit cost for `{name}` must be nonnegative"));
            }
        }
        problems.dedup();
        problems
    }
}
