//! Text and machine renderings of a [`CheckReport`].
//!
//! The machine form is one JSON object per report:
//!
//! ```text
//! {"config_id":"…","outcome":"fail","check_duration_s":0.001,
//!  "counts":{"LiftFailure":1},
//!  "diagnostics":[{"kind":"LiftFailure","field":"…","constraint_id":"lift","message":"…"}]}
//! ```
//!
//! Field names and their meaning are stable; new keys may be added.

use serde::Serialize;

use super::CheckReport;
use crate::model::Diagnostic;

fn seconds_ms(d: std::time::Duration) -> f64 {
    (d.as_secs_f64() * 1000.0).round() / 1000.0
}

/// One tab-separated line per diagnostic (kind, field or constraint id,
/// message) followed by a summary line.
pub fn render_text(report: &CheckReport) -> String {
    let mut out = String::new();
    for d in &report.diagnostics {
        out.push_str(&d.to_string());
        out.push('\n');
    }
    let verdict = if report.passed() { "PASS" } else { "FAIL" };
    out.push_str(&format!(
        "{verdict}\t{}\t{} error(s), {} warning(s), checked in {:.3} s\n",
        report.config_id,
        report.hard_count(),
        report.warning_count(),
        seconds_ms(report.check_duration),
    ));
    out
}

#[derive(Serialize)]
struct MachineReport<'a> {
    config_id: &'a str,
    outcome: &'static str,
    check_duration_s: f64,
    counts: std::collections::BTreeMap<&'static str, usize>,
    diagnostics: &'a [Diagnostic],
}

pub fn render_machine(report: &CheckReport) -> String {
    let m = MachineReport {
        config_id: &report.config_id,
        outcome: if report.passed() { "pass" } else { "fail" },
        check_duration_s: seconds_ms(report.check_duration),
        counts: report.counts.iter().map(|(k, v)| (k.name(), *v)).collect(),
        diagnostics: &report.diagnostics,
    };
    serde_json::to_string(&m).expect("report serializes") + "\n"
}
