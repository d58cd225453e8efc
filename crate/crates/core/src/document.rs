//! Text and JSON renderings of device assignments and verification reports.
//!
//! The text form of an assignment list has one line per entry with four
//! tab-separated fields: device, interface, direction and rule. Lines
//! starting with `#` are comments.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::PathSet;
use crate::mapper::{DeviceAssignment, VerificationReport};
use crate::pipeline::WhatIfDiff;
use crate::policy::parse_rule;

pub const MAP_FORMAT: &str = "zcmap/map/1";
pub const VERIFY_FORMAT: &str = "zcmap/verify/1";
pub const WHATIF_FORMAT: &str = "zcmap/whatif/1";
pub const PATHS_FORMAT: &str = "zcmap/paths/1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocumentError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("unsupported document format {0:?}")]
    Format(String),
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("assignment {index}: {message}")]
    Entry { index: usize, message: String },
}

#[derive(Serialize, Deserialize)]
struct RawAssignment {
    device: String,
    interface: String,
    direction: String,
    rule: String,
}

#[derive(Deserialize)]
struct RawMap {
    format: Option<String>,
    assignments: Vec<RawAssignment>,
}

fn raw(a: &DeviceAssignment) -> RawAssignment {
    RawAssignment {
        device: a.device.clone(),
        interface: a.interface.clone(),
        direction: a.direction.to_string(),
        rule: a.rule.to_string(),
    }
}

fn cook(r: RawAssignment) -> Result<DeviceAssignment, String> {
    Ok(DeviceAssignment {
        device: r.device,
        interface: r.interface,
        direction: r.direction.parse()?,
        rule: parse_rule(&r.rule)?,
    })
}

/// JSON map document: a device → interface → direction → rules tree plus the
/// flat assignment list it was built from.
pub fn map_to_json(assignments: &[DeviceAssignment], notes: &[String]) -> String {
    let mut tree: BTreeMap<&str, BTreeMap<&str, BTreeMap<&str, Vec<String>>>> = BTreeMap::new();
    for a in assignments {
        tree.entry(&a.device)
            .or_default()
            .entry(&a.interface)
            .or_default()
            .entry(a.direction.as_str())
            .or_default()
            .push(a.rule.to_string());
    }
    let doc = json!({
        "format": MAP_FORMAT,
        "devices": tree,
        "assignments": assignments.iter().map(raw).collect::<Vec<_>>(),
        "notes": notes,
    });
    serde_json::to_string_pretty(&doc).expect("map document serializes") + "\n"
}

pub fn map_to_text(assignments: &[DeviceAssignment], notes: &[String]) -> String {
    let mut out = String::from("# device\tinterface\tdirection\trule\n");
    for a in assignments {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            a.device, a.interface, a.direction, a.rule
        );
    }
    for note in notes {
        let _ = writeln!(out, "# note: {note}");
    }
    out
}

/// Reads an assignment list in either the JSON or the text form.
pub fn parse_assignments(text: &str) -> Result<Vec<DeviceAssignment>, DocumentError> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_text(text)
    }
}

fn parse_json(text: &str) -> Result<Vec<DeviceAssignment>, DocumentError> {
    let doc: RawMap = serde_json::from_str(text).map_err(|e| DocumentError::Json(e.to_string()))?;
    if let Some(format) = doc.format.filter(|f| f != MAP_FORMAT) {
        return Err(DocumentError::Format(format));
    }
    doc.assignments
        .into_iter()
        .enumerate()
        .map(|(index, r)| cook(r).map_err(|message| DocumentError::Entry { index, message }))
        .collect()
}

fn parse_text(text: &str) -> Result<Vec<DeviceAssignment>, DocumentError> {
    let mut out = Vec::new();
    for (index, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fail = |message: String| DocumentError::Line {
            line: index + 1,
            message,
        };
        let fields: Vec<&str> = line.splitn(4, '\t').collect();
        let [device, interface, direction, rule] = fields[..] else {
            return Err(fail("expected 4 tab-separated fields".into()));
        };
        let entry = RawAssignment {
            device: device.trim().to_string(),
            interface: interface.trim().to_string(),
            direction: direction.trim().to_string(),
            rule: rule.trim().to_string(),
        };
        out.push(cook(entry).map_err(fail)?);
    }
    Ok(out)
}

fn report_json(report: &VerificationReport) -> Value {
    let c = &report.counts;
    json!({
        "context": report.context.keyword(),
        "counts": {
            "incorrect-firewall": c.incorrect_firewall,
            "incorrect-interface": c.incorrect_interface,
            "incorrect-direction": c.incorrect_direction,
            "correct": c.correct,
        },
        "assignments": report.audited.iter().map(|a| {
            let mut v = serde_json::to_value(raw(&a.assignment)).expect("assignment serializes");
            v["class"] = json!(a.class.as_str());
            v
        }).collect::<Vec<_>>(),
        "deltas": report.deltas.iter().map(|d| json!({
            "src": d.src,
            "dst": d.dst,
            "intended": d.intended.body(),
            "derived": d.derived.body(),
        })).collect::<Vec<_>>(),
    })
}

pub fn verify_to_json(reports: &[VerificationReport]) -> String {
    let errors: usize = reports.iter().map(|r| r.counts.errors()).sum();
    let deltas: usize = reports.iter().map(|r| r.deltas.len()).sum();
    let doc = json!({
        "format": VERIFY_FORMAT,
        "contexts": reports.iter().map(report_json).collect::<Vec<_>>(),
        "totals": { "misallocations": errors, "deltas": deltas },
    });
    serde_json::to_string_pretty(&doc).expect("verify document serializes") + "\n"
}

pub fn verify_to_text(reports: &[VerificationReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let c = &r.counts;
        let _ = writeln!(
            out,
            "[{}] incorrect-firewall={} incorrect-interface={} incorrect-direction={} correct={}",
            r.context.keyword(),
            c.incorrect_firewall,
            c.incorrect_interface,
            c.incorrect_direction,
            c.correct
        );
        for a in r
            .audited
            .iter()
            .filter(|a| a.class != crate::mapper::Classification::Correct)
        {
            let _ = writeln!(out, "  {}: {}", a.class, a.assignment);
        }
        for d in &r.deltas {
            let _ = writeln!(
                out,
                "  delta {} -> {}: intended {}; derived {}",
                d.src,
                d.dst,
                d.intended.body(),
                d.derived.body()
            );
        }
    }
    out
}

pub fn whatif_to_json(diff: &WhatIfDiff) -> String {
    let rules =
        |rs: &[crate::policy::PolicyRule]| rs.iter().map(|r| r.to_string()).collect::<Vec<_>>();
    let doc = json!({
        "format": WHATIF_FORMAT,
        "removed": diff.removed.iter().map(raw).collect::<Vec<_>>(),
        "added": diff.added.iter().map(raw).collect::<Vec<_>>(),
        "newly_unreachable": rules(&diff.newly_unreachable),
        "resolved": rules(&diff.resolved),
    });
    serde_json::to_string_pretty(&doc).expect("what-if document serializes") + "\n"
}

/// `-`/`+` lines for assignments, `!` for rules that lost every path and `~`
/// for rules that gained one.
pub fn whatif_to_text(diff: &WhatIfDiff) -> String {
    let mut out = String::new();
    for a in &diff.removed {
        let _ = writeln!(
            out,
            "- {}\t{}\t{}\t{}",
            a.device, a.interface, a.direction, a.rule
        );
    }
    for a in &diff.added {
        let _ = writeln!(
            out,
            "+ {}\t{}\t{}\t{}",
            a.device, a.interface, a.direction, a.rule
        );
    }
    for r in &diff.newly_unreachable {
        let _ = writeln!(out, "! unreachable: {r}");
    }
    for r in &diff.resolved {
        let _ = writeln!(out, "~ reachable again: {r}");
    }
    out
}

pub fn paths_to_json(src: &str, dst: &str, paths: &PathSet) -> String {
    let doc = json!({
        "format": PATHS_FORMAT,
        "src": src,
        "dst": dst,
        "paths": paths.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
    });
    serde_json::to_string_pretty(&doc).expect("paths document serializes") + "\n"
}
