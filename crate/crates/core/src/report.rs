//! JSON and plain-text renderings of decompositions and reports.
//!
//! JSON objects use sorted keys and cells appear in canonical order, so
//! identical inputs always give byte-identical output.

use std::fmt::Write;

use serde_json::{json, Value as Json};

use crate::compare::{ComparisonReport, ObligationCheck, Witness};
use crate::ingest::simple_rule_to_json;
use crate::model::{DefaultSemantics, Policy, ValidityReport};
use crate::normalize::Decomposition;
use crate::oracle::{CrossCheck, OracleRelation};

/// Which part of a policy a rule came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Section {
    Permission,
    Prohibition,
}

impl Section {
    pub fn as_str(self) -> &'static str {
        match self {
            Section::Permission => "permission",
            Section::Prohibition => "prohibition",
        }
    }
}

/// A rule's decomposition tagged with its position in the policy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleDecomposition {
    pub section: Section,
    pub index: usize,
    pub decomposition: Decomposition,
}

/// Applies `f` to every permission, then every prohibition. Obligations are
/// left alone.
pub fn decompose_policy(
    policy: &Policy,
    mut f: impl FnMut(&crate::model::Rule) -> Decomposition,
) -> Vec<RuleDecomposition> {
    let sections = [
        (Section::Permission, &policy.permissions),
        (Section::Prohibition, &policy.prohibitions),
    ];
    sections
        .into_iter()
        .flat_map(|(section, rules)| {
            rules
                .iter()
                .enumerate()
                .map(move |(index, r)| (section, index, r))
        })
        .map(|(section, index, r)| RuleDecomposition {
            section,
            index,
            decomposition: f(r),
        })
        .collect()
}

pub fn decompositions_to_json(items: &[RuleDecomposition]) -> Json {
    Json::Array(
        items
            .iter()
            .map(|d| {
                json!({
                    "section": d.section.as_str(),
                    "index": d.index,
                    "label": d.decomposition.origin,
                    "cells": d.decomposition.iter().map(simple_rule_to_json).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

pub fn decompositions_to_text(items: &[RuleDecomposition]) -> String {
    let mut out = String::new();
    for d in items {
        let name = d.decomposition.origin.as_deref().unwrap_or("");
        let _ = writeln!(
            out,
            "{} #{} {}: {} cell(s)",
            d.section.as_str(),
            d.index,
            name,
            d.decomposition.len()
        );
        for cell in d.decomposition.iter() {
            let _ = writeln!(out, "  {cell}");
        }
    }
    out
}

fn witness_to_json(w: &Witness) -> Json {
    json!({
        "total": w.total,
        "truncated": w.is_truncated(),
        "cells": w.cells.iter().map(simple_rule_to_json).collect::<Vec<_>>(),
    })
}

fn obligations_to_json(o: ObligationCheck) -> Json {
    match o {
        ObligationCheck::None => Json::Null,
        ObligationCheck::Syntactic { equal } => json!({
            "mode": "syntactic",
            "equal": equal,
            "note": "verdicts hold modulo obligations",
        }),
    }
}

pub fn comparison_to_json(r: &ComparisonReport) -> Json {
    json!({
        "overlap": r.overlap,
        "left_in_right": r.left_in_right,
        "right_in_left": r.right_in_left,
        "equivalent": r.equivalent,
        "shared": witness_to_json(&r.shared),
        "left_only": witness_to_json(&r.left_only),
        "right_only": witness_to_json(&r.right_only),
        "obligations": obligations_to_json(r.obligations),
    })
}

pub fn comparison_to_text(r: &ComparisonReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "overlap: {}", r.overlap);
    let _ = writeln!(out, "left in right: {}", r.left_in_right);
    let _ = writeln!(out, "right in left: {}", r.right_in_left);
    let _ = writeln!(out, "equivalent: {}", r.equivalent);
    for (name, w) in [
        ("shared", &r.shared),
        ("left only", &r.left_only),
        ("right only", &r.right_only),
    ] {
        let _ = writeln!(out, "{name}: {} cell(s)", w.total);
        for cell in &w.cells {
            let _ = writeln!(out, "  {cell}");
        }
        if w.is_truncated() {
            let _ = writeln!(out, "  ... {} more", w.total - w.cells.len());
        }
    }
    if let ObligationCheck::Syntactic { equal } = r.obligations {
        let _ = writeln!(out, "obligations equal (syntactic): {equal}");
    }
    out
}

fn semantics_str(s: DefaultSemantics) -> &'static str {
    match s {
        DefaultSemantics::Prohibit => "prohibit",
        DefaultSemantics::Permit => "permit",
    }
}

pub fn validity_to_json(r: &ValidityReport) -> Json {
    json!({
        "valid": r.is_valid(),
        "default": semantics_str(r.semantics),
        "events_permitted": r.events_permitted,
        "unpermitted_event": r.unpermitted_event,
        "no_event_prohibited": r.no_event_prohibited,
        "prohibited": r.prohibited.map(|(event, rule)| json!({"event": event, "prohibition": rule})),
        "obligations_met": r.obligations_met,
        "unmet_obligation": r.unmet_obligation,
    })
}

pub fn validity_to_text(r: &ValidityReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} (default: {})",
        if r.is_valid() { "valid" } else { "invalid" },
        semantics_str(r.semantics)
    );
    if let Some(e) = r.unpermitted_event {
        let _ = writeln!(out, "event {e} is not permitted");
    }
    if let Some((e, f)) = r.prohibited {
        let _ = writeln!(out, "event {e} matches prohibition {f}");
    }
    if let Some(o) = r.unmet_obligation {
        let _ = writeln!(out, "obligation {o} is not met");
    }
    out
}

fn relation_to_json(r: &OracleRelation) -> Json {
    json!({
        "overlap": r.overlap,
        "left_in_right": r.a_in_b,
        "right_in_left": r.b_in_a,
        "equivalent": r.equivalent,
        "events": r.events,
    })
}

pub fn cross_check_to_json(c: &CrossCheck) -> Json {
    json!({
        "agree": c.agree,
        "oracle": relation_to_json(&c.oracle),
        "cells": {
            "overlap": c.report.overlap,
            "left_in_right": c.report.left_in_right,
            "right_in_left": c.report.right_in_left,
            "equivalent": c.report.equivalent,
        },
    })
}

pub fn cross_check_to_text(c: &CrossCheck) -> String {
    let o = &c.oracle;
    let r = &c.report;
    format!(
        "{} over {} events\n\
         overlap: cells {} oracle {}\n\
         left in right: cells {} oracle {}\n\
         right in left: cells {} oracle {}\n\
         equivalent: cells {} oracle {}\n",
        if c.agree { "agree" } else { "DISAGREE" },
        o.events,
        r.overlap,
        o.overlap,
        r.left_in_right,
        o.a_in_b,
        r.right_in_left,
        o.b_in_a,
        r.equivalent,
        o.equivalent,
    )
}
