use std::fmt::Write as _;

use rust_decimal::Decimal;

use super::DocumentError;
use crate::evaluate::EvaluationReport;
use crate::time::{format_timestamp, hours};

pub fn write_report(report: &EvaluationReport) -> String {
    let mut json = serde_json::to_string_pretty(report).expect("reports serialize");
    json.push('\n');
    json
}

pub fn parse_report(text: &str) -> Result<EvaluationReport, DocumentError> {
    serde_json::from_str(text).map_err(|e| DocumentError {
        line: Some(e.line()),
        field: None,
        message: e.to_string(),
    })
}

/// Human-readable summary. Money is shown to four decimal places.
pub fn render_report(report: &EvaluationReport) -> String {
    let mut out = String::new();
    let cur = &report.currency;
    let a = &report.availability;
    let p = &report.penalty;
    let e = &report.economics;
    let pct = |d: Decimal| (d * Decimal::ONE_HUNDRED).round_dp(6).normalize();

    let _ = writeln!(out, "contract      {}", report.contract_id);
    let _ = writeln!(
        out,
        "window        {} .. {}",
        format_timestamp(report.window.start()),
        format_timestamp(report.window.end())
    );
    let _ = writeln!(
        out,
        "availability  {}% ({}; T_h {:.4} h, T_u {:.4} h)",
        pct(a.availability),
        a.band,
        hours(a.window_seconds),
        hours(a.downtime_seconds)
    );
    let c = &report.incident_counts;
    let _ = writeln!(
        out,
        "incidents     minor {}, major {}, critical {}; {} evaluated for penalty",
        c.minor, c.major, c.critical, report.breaches
    );
    let _ = writeln!(
        out,
        "schedule      {}% penalty{}",
        report.schedule.penalty_percent.normalize(),
        if report.schedule.termination_flag {
            ", termination threshold reached"
        } else {
            ""
        }
    );
    let _ = writeln!(out, "penalties");
    for (name, v) in [
        ("count", p.count),
        ("duration", p.duration),
        ("subcontracts", p.subcontracts),
        ("importance", p.importance),
        ("importance-multi", p.importance_multi),
    ] {
        if v.enabled {
            let _ = writeln!(out, "  {name:<17}{} {cur}", v.amount);
        } else {
            let _ = writeln!(out, "  {name:<17}disabled");
        }
    }
    let _ = writeln!(out, "  {:<17}{} {cur}", "total", p.total);
    let _ = writeln!(out, "economics");
    let _ = writeln!(out, "  revenue          {} {cur}", e.revenue);
    let _ = writeln!(out, "  expenditure      {} {cur}", e.expenditure);
    let _ = writeln!(out, "  profit           {} {cur}", e.profit);
    let base = match report.penalty_base {
        crate::economics::PenaltyBase::PercentOfRevenue => "percent of revenue",
        crate::economics::PenaltyBase::AbsoluteCurrency => "formula total",
    };
    let _ = writeln!(out, "  penalty charge   {} {cur} ({base})", report.penalty_charge);
    let _ = writeln!(out, "  net position     {} {cur}", report.net_position);
    let l = &report.lifecycle;
    let _ = writeln!(
        out,
        "lifecycle     {} at window end, {} final",
        l.state_at_window_end, l.final_state
    );
    if l.ignored_events > 0 {
        let _ = writeln!(
            out,
            "              {} events after the agreement ended were ignored",
            l.ignored_events
        );
    }
    out
}
