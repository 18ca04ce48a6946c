//! Plain-text reports over a complex.
//!
//! The report is deterministic: census and tables are ordered by entity
//! id, audit lines by a fixed battery order, and the machine-readable
//! block repeats the headline numbers as `key=value` lines.  A complex
//! with no steps renders as a census only.

use std::fmt::Write as _;

use crate::complex::Complex;
use crate::dualgraph::{audit_circular_chains, build_dual_graph};
use crate::index::{
    check_dicritical_restriction, check_line_sums, check_corner_reciprocity,
    check_trace_transition, check_triple_relations,
};
use crate::nodal::{
    audit_nodal_transitions, detect_scenarios, nodal_components, persistency_audit,
    consistency_verdict, ScenarioKind, Verdict,
};
use crate::report::Report;
use crate::separatrix::{audit_completeness, partial_separatrices};

/// Which audit families the report runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditSelection {
    All,
    Index,
    Separatrix,
    Nodal,
}

impl AuditSelection {
    fn index(self) -> bool {
        matches!(self, AuditSelection::All | AuditSelection::Index)
    }

    fn separatrix(self) -> bool {
        matches!(self, AuditSelection::All | AuditSelection::Separatrix)
    }

    fn nodal(self) -> bool {
        matches!(self, AuditSelection::All | AuditSelection::Nodal)
    }
}

/// Walk budget and seed for the chain audit; fixed so reports are stable.
const CHAIN_BUDGET: usize = 50;
const CHAIN_SEED: u64 = 0;

fn scenario_label(kind: ScenarioKind) -> &'static str {
    match kind {
        ScenarioKind::IncompleteTrace => "A incomplete-trace",
        ScenarioKind::IncompleteCorner => "B incomplete-corner",
        ScenarioKind::SaturatedComponent => "C saturated-component",
    }
}

fn push_audit(out: &mut String, machine: &mut String, name: &str, rep: &Report) {
    if rep.passed() {
        let _ = writeln!(out, "  {}: ok ({} checks)", name, rep.checks_run);
    } else {
        let _ = writeln!(
            out,
            "  {}: FAIL ({} of {} checks failed)",
            name,
            rep.findings.len(),
            rep.checks_run
        );
        for f in &rep.findings {
            let _ = writeln!(out, "    {}", f);
        }
    }
    let _ = writeln!(
        machine,
        "audit.{}={}",
        name.replace(' ', "_"),
        if rep.passed() { "ok" } else { "fail" }
    );
}

pub fn render_report(cx: &Complex, audits: AuditSelection) -> String {
    let n = cx.levels();
    let mut out = String::new();
    let mut machine = String::new();

    let comps = cx.comp_ids().count();
    let curves = cx.curve_ids().count();
    let points = cx.point_ids().filter(|&p| !cx.point(p).retracted).count();
    let _ = writeln!(
        out,
        "complex: {} levels, {} components, {} curves, {} points",
        n, comps, curves, points
    );
    let _ = writeln!(machine, "levels={}", n);
    let _ = writeln!(machine, "components={}", comps);
    let _ = writeln!(machine, "curves={}", curves);
    let _ = writeln!(machine, "points={}", points);

    let _ = writeln!(out, "census:");
    for k in 0..=n {
        let ck = cx.comp_ids().filter(|&e| cx.comp(e).birth_step <= k).count();
        let uk = cx.curve_ids().filter(|&c| cx.curve_alive_at(c, k)).count();
        let pk = cx.point_ids().filter(|&p| cx.point_alive_at(p, k)).count();
        let _ = writeln!(
            out,
            "  level {}: {} components, {} curves, {} points",
            k, ck, uk, pk
        );
    }

    if n == 0 {
        out.push_str("machine:\n");
        out.push_str(&machine);
        return out;
    }

    let seps = partial_separatrices(cx);
    let incomplete = seps.iter().filter(|s| s.incomplete).count();
    let _ = writeln!(
        out,
        "separatrices: {} (incomplete: {})",
        seps.len(),
        incomplete
    );
    for sep in &seps {
        let status = if sep.incomplete { "incomplete" } else { "complete" };
        let compact = if sep.compact_members.is_empty() {
            match sep.compact_point {
                Some(p) => format!("point {}", cx.point(p).name),
                None => "none".to_string(),
            }
        } else {
            let names: Vec<&str> = sep
                .compact_members
                .iter()
                .map(|&c| cx.curve(c).name.as_str())
                .collect();
            format!("curves {}", names.join(" "))
        };
        let _ = writeln!(
            out,
            "  {}: size {}, {}, compact part {}",
            sep.name,
            sep.members.len(),
            status,
            compact
        );
    }
    let _ = writeln!(machine, "separatrices={}", seps.len());
    let _ = writeln!(machine, "separatrices.incomplete={}", incomplete);

    let nodal = nodal_components(cx);
    let complete = nodal.iter().filter(|c| c.complete()).count();
    let _ = writeln!(out, "nodal components: {} (complete: {})", nodal.len(), complete);
    for comp in &nodal {
        let status = if comp.complete() { "complete" } else { "incomplete" };
        let flow = if comp.uninterrupted {
            "uninterrupted"
        } else {
            "interrupted"
        };
        let birth = match comp.birth {
            Some(b) => b.to_string(),
            None => "-".to_string(),
        };
        let _ = writeln!(
            out,
            "  {}: size {}, {}, {}, birth {}",
            comp.name,
            comp.members.len(),
            status,
            flow,
            birth
        );
    }
    let _ = writeln!(machine, "nodal.components={}", nodal.len());
    let _ = writeln!(machine, "nodal.complete={}", complete);

    if nodal.iter().any(|c| c.complete() && c.uninterrupted) {
        let _ = writeln!(out, "scenario hits:");
        for k in 0..=n {
            let hits = detect_scenarios(cx, k).unwrap_or_default();
            if hits.is_empty() {
                continue;
            }
            for h in &hits {
                let _ = writeln!(
                    out,
                    "  level {}: {} on {} at {}",
                    k,
                    scenario_label(h.kind),
                    cx.curve(h.curve).name,
                    cx.point(h.point).name
                );
            }
        }
    }

    let mut all_pass = true;
    let _ = writeln!(out, "audits:");
    {
        let rep = cx.validate_sequence();
        all_pass &= rep.passed();
        push_audit(&mut out, &mut machine, "validity", &rep);
    }
    if audits.index() {
        for (name, rep) in [
            ("corner reciprocity", check_corner_reciprocity(cx)),
            ("triple relations", check_triple_relations(cx)),
            ("line sums", check_line_sums(cx)),
            ("dicritical restriction", check_dicritical_restriction(cx)),
            ("trace transition", check_trace_transition(cx)),
        ] {
            all_pass &= rep.passed();
            push_audit(&mut out, &mut machine, name, &rep);
        }
    }
    if audits.separatrix() {
        let rep = audit_completeness(cx);
        all_pass &= rep.passed();
        push_audit(&mut out, &mut machine, "completeness", &rep);
        match build_dual_graph(cx, n) {
            Ok(g) => {
                let rep = audit_circular_chains(&g, CHAIN_BUDGET, CHAIN_SEED);
                all_pass &= rep.passed();
                push_audit(&mut out, &mut machine, "circular chains", &rep);
            }
            Err(e) => {
                all_pass = false;
                let _ = writeln!(out, "  circular chains: FAIL (no dual graph: {})", e);
                let _ = writeln!(machine, "audit.circular_chains=fail");
            }
        }
    }
    if audits.nodal() {
        for (name, rep) in [
            ("nodal transitions", audit_nodal_transitions(cx)),
            ("persistency", persistency_audit(cx)),
        ] {
            all_pass &= rep.passed();
            push_audit(&mut out, &mut machine, name, &rep);
        }
        match consistency_verdict(cx) {
            Verdict::Consistent => {
                let _ = writeln!(out, "  verdict: CONSISTENT");
                let _ = writeln!(machine, "verdict=consistent");
            }
            Verdict::Contradictory {
                component,
                breaking_level,
            } => {
                let _ = writeln!(
                    out,
                    "  verdict: CONTRADICTORY ({} breaks at level {})",
                    component, breaking_level
                );
                let _ = writeln!(machine, "verdict=contradictory");
                let _ = writeln!(machine, "verdict.component={}", component);
                let _ = writeln!(machine, "verdict.breaking_level={}", breaking_level);
            }
        }
    }
    let _ = writeln!(
        machine,
        "report={}",
        if all_pass { "pass" } else { "fail" }
    );

    out.push_str("machine:\n");
    out.push_str(&machine);
    out
}
