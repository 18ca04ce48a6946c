//! Nodal components and the situation detectors feeding the persistency
//! audit.
//!
//! A nodal component is a connected union of singular curves of nodal
//! index class at the final level, connected through shared tracked
//! points.  Its closure adds every curve the members blow down onto, so
//! the level-`k` projection contains exactly the closure curves alive at
//! `k` plus the points the remaining members collapse to.  A component is
//! uninterrupted when exactly two member curves pass through each of its
//! dimensional-type-3 points, and complete when no live point of a member
//! lies on a compact dicritical component.

use std::collections::{BTreeMap, BTreeSet};

use crate::complex::{
    BornOf, Center, Complex, ComponentId, CurveId, CurveKind, EntityRef, Image, Nature, PointId,
    QueryError,
};
use crate::index::corner_between;
use crate::par;
use crate::report::Report;
use crate::scalar::IndexClass;
use crate::separatrix::{ancestors, is_complete_at, partial_separatrices, PartialSeparatrix};

#[derive(Debug, Clone)]
pub struct NodalComponent {
    pub name: String,
    /// Nodal curves at the final level, sorted.
    pub members: Vec<CurveId>,
    /// Members together with every curve they blow down onto.
    pub closure: BTreeSet<CurveId>,
    /// Exactly two members pass through every dimensional-type-3 point of
    /// the component.
    pub uninterrupted: bool,
    /// True when a live point of a member lies on a compact dicritical
    /// component.
    pub incomplete: bool,
    /// Level of the earliest compact member; absent when every member is a
    /// germ side.
    pub birth: Option<u32>,
}

impl NodalComponent {
    pub fn complete(&self) -> bool {
        !self.incomplete
    }

    /// Curves of the level-`k` projection.
    pub fn curves_at(&self, cx: &Complex, k: u32) -> Vec<CurveId> {
        self.closure
            .iter()
            .copied()
            .filter(|&c| cx.curve_alive_at(c, k))
            .collect()
    }

    /// Whether the level-`k` projection contains the curve.
    pub fn contains_at(&self, cx: &Complex, k: u32, c: CurveId) -> bool {
        self.closure.contains(&c) && cx.curve_alive_at(c, k)
    }
}

/// Index class of a singular curve, requiring every assigned side to agree.
pub fn classify_curve(cx: &Complex, c: CurveId) -> Result<IndexClass, QueryError> {
    let rec = cx.curve(c);
    let mut found: Option<IndexClass> = None;
    for (&side, value) in &rec.index_by_side {
        let class = value.classify().ok_or_else(|| {
            QueryError(format!(
                "index {} of {} on the {} side is zero or a nonnegative rational",
                value.render(),
                rec.name,
                cx.comp(side).name
            ))
        })?;
        match found {
            None => found = Some(class),
            Some(prev) if prev == class => {}
            Some(prev) => {
                return Err(QueryError(format!(
                    "{} classifies as {} on one side and {} on another",
                    rec.name, prev, class
                )))
            }
        }
    }
    found.ok_or_else(|| QueryError(format!("{} carries no side index", rec.name)))
}

/// Successors of each curve under blow-up: the curves continuing it at the
/// next level, one per housing component plus the declarations over its
/// blow-up step.
pub(crate) fn successor_map(cx: &Complex) -> BTreeMap<CurveId, Vec<CurveId>> {
    let mut map: BTreeMap<CurveId, Vec<CurveId>> = BTreeMap::new();
    for c in cx.curve_ids() {
        match cx.curve(c).born_of {
            BornOf::Section { continued } | BornOf::DeclaredOverCurve { continued } => {
                map.entry(continued).or_default().push(c)
            }
            _ => continue,
        };
    }
    map
}

/// Index class of a curve, read through unique continuations while the
/// curve itself carries no side index.  The generic index is constant
/// along a continuation chain, so a sole successor speaks for its
/// ancestor; a branched continuation stays unclassified.
pub(crate) fn effective_class(
    cx: &Complex,
    succ: &BTreeMap<CurveId, Vec<CurveId>>,
    mut c: CurveId,
) -> Option<IndexClass> {
    loop {
        if let Some(class) = cx.curve_class(c) {
            return Some(class);
        }
        match succ.get(&c).map(Vec::as_slice) {
            Some([next]) => c = *next,
            _ => return None,
        }
    }
}

/// All nodal components, ordered by smallest member curve.
pub fn nodal_components(cx: &Complex) -> Vec<NodalComponent> {
    let n = cx.levels();
    let members: Vec<CurveId> = cx
        .curve_ids()
        .filter(|&c| {
            cx.curve_alive_at(c, n)
                && cx.curve(c).singular
                && cx.curve_class(c) == Some(IndexClass::Nodal)
        })
        .collect();
    let index_of: BTreeMap<CurveId, usize> =
        members.iter().enumerate().map(|(i, &c)| (c, i)).collect();

    let mut dsu: Vec<usize> = (0..members.len()).collect();
    fn find(dsu: &mut Vec<usize>, i: usize) -> usize {
        if dsu[i] != i {
            let r = find(dsu, dsu[i]);
            dsu[i] = r;
        }
        dsu[i]
    }
    for p in cx.point_ids() {
        if !cx.point_alive_at(p, n) {
            continue;
        }
        let here: Vec<usize> = cx
            .point(p)
            .curves
            .iter()
            .filter_map(|c| index_of.get(c).copied())
            .collect();
        for w in here.windows(2) {
            let a = find(&mut dsu, w[0]);
            let b = find(&mut dsu, w[1]);
            dsu[a] = b;
        }
    }

    let mut groups: BTreeMap<usize, Vec<CurveId>> = BTreeMap::new();
    for (i, &c) in members.iter().enumerate() {
        groups.entry(find(&mut dsu, i)).or_default().push(c);
    }
    let mut sorted_groups: Vec<Vec<CurveId>> = groups.into_values().collect();
    sorted_groups.sort_by_key(|g| g[0]);

    sorted_groups
        .into_iter()
        .enumerate()
        .map(|(i, mut members)| {
            members.sort();
            let mut closure = BTreeSet::new();
            for &m in &members {
                closure.extend(ancestors(cx, m));
            }
            let mut uninterrupted = true;
            let mut incomplete = false;
            for q in cx.point_ids() {
                if !cx.point_alive_at(q, n) {
                    continue;
                }
                let through = cx
                    .point(q)
                    .curves
                    .iter()
                    .filter(|c| members.binary_search(c).is_ok())
                    .count();
                if through == 0 {
                    continue;
                }
                if cx.singular_curves_through(q).len() >= 2 && through != 2 {
                    uninterrupted = false;
                }
                if cx.point(q).comps.iter().any(|&e| {
                    cx.comp(e).compact && cx.comp(e).nature == Nature::Dicritical
                }) {
                    incomplete = true;
                }
            }
            let birth = members
                .iter()
                .filter(|&&m| cx.curve(m).compact)
                .map(|&m| cx.curve(m).birth_level)
                .min();
            NodalComponent {
                name: format!("N{}", i + 1),
                members,
                closure,
                uninterrupted,
                incomplete,
                birth,
            }
        })
        .collect()
}

/// Step at which the compact part of the component appears.  For a
/// complete component that step must be a non-dicritical point blow-up
/// centered on the compact core; anything else is an error.
pub fn birth_date(cx: &Complex, n: &NodalComponent) -> Result<Option<u32>, QueryError> {
    let Some(b) = n.birth else { return Ok(None) };
    if n.incomplete {
        return Ok(Some(b));
    }
    match cx.step(b).center {
        Center::Curve(y) => Err(QueryError(format!(
            "{} is complete yet its compact part is born by the blow-up of {}",
            n.name,
            cx.curve(y).name
        ))),
        Center::Point(p) => {
            if cx.step(b).dicritical {
                Err(QueryError(format!(
                    "{} is complete yet step {} is dicritical",
                    n.name, b
                )))
            } else if cx.point(p).comps.iter().any(|&e| !cx.comp(e).compact) {
                Err(QueryError(format!(
                    "{} is complete yet the step-{} center {} lies on a non-compact component",
                    n.name,
                    b,
                    cx.point(p).name
                )))
            } else {
                Ok(Some(b))
            }
        }
    }
}

/// Points where the level-`k` projection of the component meets the
/// compact core, together with whether a compact curve already lives in
/// the projection (making the intersection one-dimensional).
fn core_intersection(cx: &Complex, n: &NodalComponent, k: u32) -> (BTreeSet<PointId>, bool) {
    let on_core = |q: PointId| {
        if k == 0 {
            q == cx.origin()
        } else {
            cx.point(q).comps.iter().any(|&e| cx.comp(e).compact)
        }
    };
    let mut pts = BTreeSet::new();
    let mut compact_curve = false;
    for &g in &n.closure {
        if !cx.curve_alive_at(g, k) {
            continue;
        }
        if cx.curve(g).compact {
            compact_curve = true;
            continue;
        }
        for q in cx.point_ids() {
            if cx.point_alive_at(q, k) && cx.point(q).curves.contains(&g) && on_core(q) {
                pts.insert(q);
            }
        }
    }
    for &m in &n.members {
        if let Ok(Image::Point(q)) = cx.image_at(k, EntityRef::Curve(m)) {
            if on_core(q) {
                pts.insert(q);
            }
        }
    }
    (pts, compact_curve)
}

/// Transition relations around nodal components.
///
/// Four families, each evaluated once per point at the point's birth level
/// since incidence, separatrix membership and completeness there are
/// constant over a point's lifetime:
///
/// * per separatrix and compact component, the member curves inside one
///   complete uninterrupted nodal component are all or none of the branch
///   curves of the separatrix in that component;
/// * at a point on three compact components, a corner of a complete
///   component forces all three invariant and exactly one of the two
///   flanking corners into the component;
/// * at a complete point of a separatrix with a branch inside a complete
///   uninterrupted component, the corner towards any other compact
///   component either lies in the component while every opposite branch
///   is a real saddle, or is a real saddle while every opposite branch
///   lies in the component;
/// * a point where some separatrix is incomplete sees, on every compact
///   invariant component through it, a compact singular curve that is not
///   a real saddle.
pub fn audit_nodal_transitions(cx: &Complex) -> Report {
    let comps = nodal_components(cx);
    let seps = partial_separatrices(cx);
    let succ = successor_map(cx);
    let complete: Vec<&NodalComponent> = comps.iter().filter(|n| n.complete()).collect();
    let designated: Vec<&NodalComponent> =
        complete.iter().copied().filter(|n| n.uninterrupted).collect();

    let mut rep = Report::new();
    membership_uniform(cx, &designated, &seps, &mut rep);
    let points: Vec<PointId> =
        cx.point_ids().filter(|&p| !cx.point(p).retracted).collect();
    let partials = par::map_collect(&points, |&p| {
        let mut sub = Report::new();
        triple_alternation_at(cx, &complete, p, &mut sub);
        corner_alternative_at(cx, &designated, &seps, &succ, p, &mut sub);
        incomplete_sees_at(cx, &seps, &succ, p, &mut sub);
        sub
    });
    for sub in partials {
        rep.merge(sub);
    }
    rep.sorted()
}

fn membership_uniform(
    cx: &Complex,
    designated: &[&NodalComponent],
    seps: &[PartialSeparatrix],
    rep: &mut Report,
) {
    for n in designated {
        for sep in seps {
            let mut by_comp: BTreeMap<ComponentId, (usize, usize)> = BTreeMap::new();
            for &m in &sep.members {
                let side = cx.curve(m).housing[0];
                if !cx.comp(side).compact {
                    continue;
                }
                let entry = by_comp.entry(side).or_default();
                entry.0 += 1;
                if n.members.binary_search(&m).is_ok() {
                    entry.1 += 1;
                }
            }
            for (side, (total, inside)) in by_comp {
                if inside == 0 || inside == total {
                    rep.check_ok();
                } else {
                    rep.fail(
                        "nodal_membership_uniform",
                        format!("{} / {} / {}", n.name, sep.name, cx.comp(side).name),
                        format!("{} of {} branch curves lie in the component", inside, total),
                    );
                }
            }
        }
    }
}

fn triple_alternation_at(
    cx: &Complex,
    complete: &[&NodalComponent],
    p: PointId,
    rep: &mut Report,
) {
    let rec = cx.point(p);
    if rec.comps.len() != 3 || !rec.comps.iter().all(|&e| cx.comp(e).compact) {
        return;
    }
    let (i, j, l) = (rec.comps[0], rec.comps[1], rec.comps[2]);
    let roles = [(i, j, l), (i, l, j), (j, l, i)];
    for n in complete {
        for &(a, b, other) in &roles {
            let Some(hyp) = corner_between(cx, p, a, b) else { continue };
            if !n.closure.contains(&hyp) {
                continue;
            }
            let subject = format!("{} / {}", n.name, rec.name);
            if let Some(&bad) = rec.comps.iter().find(|&&e| !cx.is_invariant(e)) {
                rep.fail(
                    "nodal_triple_alternation",
                    subject,
                    format!(
                        "{} lies in the component while {} is dicritical",
                        cx.curve(hyp).name,
                        cx.comp(bad).name
                    ),
                );
                continue;
            }
            match (corner_between(cx, p, a, other), corner_between(cx, p, b, other)) {
                (Some(x), Some(y)) => {
                    let inx = n.closure.contains(&x);
                    let iny = n.closure.contains(&y);
                    if inx != iny {
                        rep.check_ok();
                    } else {
                        rep.fail(
                            "nodal_triple_alternation",
                            subject,
                            format!(
                                "{} lies in the component and the flanking corners {} and {} are both {} it",
                                cx.curve(hyp).name,
                                cx.curve(x).name,
                                cx.curve(y).name,
                                if inx { "in" } else { "outside" }
                            ),
                        );
                    }
                }
                _ => rep.fail(
                    "nodal_triple_alternation",
                    subject,
                    format!(
                        "a singular corner flanking {} is missing",
                        cx.curve(hyp).name
                    ),
                ),
            }
        }
    }
}

fn corner_alternative_at(
    cx: &Complex,
    designated: &[&NodalComponent],
    seps: &[PartialSeparatrix],
    succ: &BTreeMap<CurveId, Vec<CurveId>>,
    p: PointId,
    rep: &mut Report,
) {
    let rec = cx.point(p);
    let k = rec.birth_level;
    let compact: Vec<ComponentId> =
        rec.comps.iter().copied().filter(|&e| cx.comp(e).compact).collect();
    if compact.len() < 2 {
        return;
    }
    for n in designated {
        for sep in seps {
            for &i in &compact {
                if !cx.is_invariant(i) {
                    continue;
                }
                let nodal_branch = separatrix_branches(cx, sep, p, i)
                    .iter()
                    .any(|c| n.closure.contains(c));
                if !nodal_branch || is_complete_at(cx, sep, k, p) != Ok(true) {
                    continue;
                }
                for &j in &compact {
                    if j == i {
                        continue;
                    }
                    let subject = format!("{} / {} / {}", n.name, rec.name, cx.comp(j).name);
                    if !cx.is_invariant(j) {
                        rep.fail(
                            "nodal_corner_alternative",
                            subject,
                            format!(
                                "{} is dicritical beside a branch of {} in the component",
                                cx.comp(j).name,
                                sep.name
                            ),
                        );
                        continue;
                    }
                    let Some(corner) = corner_between(cx, p, i, j) else {
                        rep.fail(
                            "nodal_corner_alternative",
                            subject,
                            "no singular corner joins the two components",
                        );
                        continue;
                    };
                    let opposite = separatrix_branches(cx, sep, p, j);
                    let all_saddle = opposite
                        .iter()
                        .all(|&c| effective_class(cx, succ, c) == Some(IndexClass::RealSaddle));
                    let all_inside = opposite.iter().all(|c| n.closure.contains(c));
                    let corner_inside = n.closure.contains(&corner);
                    let corner_saddle =
                        effective_class(cx, succ, corner) == Some(IndexClass::RealSaddle);
                    if (corner_inside && all_saddle) != (corner_saddle && all_inside) {
                        rep.check_ok();
                    } else {
                        rep.fail(
                            "nodal_corner_alternative",
                            subject,
                            format!(
                                "corner {}: in component {}, real saddle {}; opposite branches of {}: all in {}, all saddles {}",
                                cx.curve(corner).name,
                                corner_inside,
                                corner_saddle,
                                sep.name,
                                all_inside,
                                all_saddle
                            ),
                        );
                    }
                }
            }
        }
    }
}

/// Branch curves of the separatrix projection at `p` on `side`.
fn separatrix_branches(
    cx: &Complex,
    sep: &PartialSeparatrix,
    p: PointId,
    side: ComponentId,
) -> Vec<CurveId> {
    cx.branch_set(p, side)
        .into_iter()
        .filter(|c| sep.closure.contains(c))
        .collect()
}

fn incomplete_sees_at(
    cx: &Complex,
    seps: &[PartialSeparatrix],
    succ: &BTreeMap<CurveId, Vec<CurveId>>,
    p: PointId,
    rep: &mut Report,
) {
    let rec = cx.point(p);
    let k = rec.birth_level;
    let incomplete = seps
        .iter()
        .any(|sep| sep.meets(cx, k, p) && is_complete_at(cx, sep, k, p) == Ok(false));
    if !incomplete {
        return;
    }
    for &e in &rec.comps {
        if !cx.comp(e).compact || !cx.is_invariant(e) {
            continue;
        }
        let witness = cx.curve_ids().any(|c| {
            let curve = cx.curve(c);
            curve.singular
                && curve.compact
                && curve.housing.contains(&e)
                && cx.curve_alive_at(c, k)
                && effective_class(cx, succ, c) != Some(IndexClass::RealSaddle)
        });
        if witness {
            rep.check_ok();
        } else {
            rep.fail(
                "incomplete_sees_non_saddle",
                format!("{} / {}", rec.name, cx.comp(e).name),
                "every compact singular curve of the component is a real saddle",
            );
        }
    }
}

/// The three situations whose presence propagates level by level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ScenarioKind {
    /// A compact trace curve of the component carrying a point where its
    /// separatrix is incomplete.
    IncompleteTrace,
    /// A compact corner of two invariant compact components inside the
    /// component, carrying an incomplete point.
    IncompleteCorner,
    /// A compact curve of the component inside a compact invariant
    /// component where every branch through an incomplete point is either
    /// in the component or a real saddle.
    SaturatedComponent,
}

/// Evidence attached to a hit, matching its kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Separatrix(String),
    Corner(ComponentId, ComponentId),
    Saturated(ComponentId, Vec<CurveId>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioHit {
    pub kind: ScenarioKind,
    pub level: u32,
    pub curve: CurveId,
    pub point: PointId,
    pub witness: Witness,
}

/// Situation hits of every complete uninterrupted nodal component at level
/// `k`.  Errors when no such component exists.  At the final level the
/// result is always empty, since every point is complete there.
pub fn detect_scenarios(cx: &Complex, k: u32) -> Result<Vec<ScenarioHit>, QueryError> {
    if k > cx.levels() {
        return Err(QueryError(format!(
            "level {} exceeds the sequence length {}",
            k,
            cx.levels()
        )));
    }
    let comps = nodal_components(cx);
    let designated: Vec<&NodalComponent> = comps
        .iter()
        .filter(|n| n.uninterrupted && n.complete())
        .collect();
    if designated.is_empty() {
        return Err(QueryError(
            "no complete uninterrupted nodal component to examine".to_string(),
        ));
    }
    let seps = partial_separatrices(cx);
    let succ = successor_map(cx);
    let mut hits = Vec::new();
    for n in designated {
        hits.extend(detect_for(cx, &seps, &succ, n, k));
    }
    hits.sort_by_key(|h| (h.kind, h.curve, h.point));
    Ok(hits)
}

fn detect_for(
    cx: &Complex,
    seps: &[PartialSeparatrix],
    succ: &BTreeMap<CurveId, Vec<CurveId>>,
    n: &NodalComponent,
    k: u32,
) -> Vec<ScenarioHit> {
    let incomplete_at = |q: PointId| {
        seps.iter()
            .any(|sep| sep.meets(cx, k, q) && is_complete_at(cx, sep, k, q) == Ok(false))
    };
    let mut hits = Vec::new();
    for &g in &n.closure {
        if !cx.curve_alive_at(g, k) || !cx.curve(g).compact {
            continue;
        }
        let live_points: Vec<PointId> = cx
            .point_ids()
            .filter(|&q| cx.point_alive_at(q, k) && cx.point(q).curves.contains(&g))
            .collect();
        if cx.curve_kind(g) == CurveKind::Trace {
            for sep in seps.iter().filter(|s| s.closure.contains(&g)) {
                for &q in &live_points {
                    if sep.meets(cx, k, q) && is_complete_at(cx, sep, k, q) == Ok(false) {
                        hits.push(ScenarioHit {
                            kind: ScenarioKind::IncompleteTrace,
                            level: k,
                            curve: g,
                            point: q,
                            witness: Witness::Separatrix(sep.name.clone()),
                        });
                    }
                }
            }
        }
        let housing = cx.curve(g).housing.clone();
        if let [a, b] = housing.as_slice() {
            if [*a, *b].iter().all(|&e| cx.comp(e).compact && cx.is_invariant(e)) {
                for &q in &live_points {
                    if incomplete_at(q) {
                        hits.push(ScenarioHit {
                            kind: ScenarioKind::IncompleteCorner,
                            level: k,
                            curve: g,
                            point: q,
                            witness: Witness::Corner(*a, *b),
                        });
                    }
                }
            }
        }
        for &e in &housing {
            if !cx.comp(e).compact || !cx.is_invariant(e) {
                continue;
            }
            for &q in &live_points {
                if !incomplete_at(q) {
                    continue;
                }
                let branches = cx.branch_set(q, e);
                let saturated = branches.iter().all(|&t| {
                    n.closure.contains(&t)
                        || effective_class(cx, succ, t) == Some(IndexClass::RealSaddle)
                });
                if saturated {
                    hits.push(ScenarioHit {
                        kind: ScenarioKind::SaturatedComponent,
                        level: k,
                        curve: g,
                        point: q,
                        witness: Witness::Saturated(e, branches),
                    });
                }
            }
        }
    }
    hits.sort_by_key(|h| (h.kind, h.curve, h.point));
    hits
}

/// Outcome of confronting the incomplete-separatrices flag with the nodal
/// components of the final level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    /// A complete uninterrupted nodal component coexists with the flag.
    /// Situation hits must then reach the final level, where no point is
    /// incomplete; the level where the chain stops is the evidence.
    Contradictory { component: String, breaking_level: u32 },
}

pub fn consistency_verdict(cx: &Complex) -> Verdict {
    let comps = nodal_components(cx);
    let seps = partial_separatrices(cx);
    let succ = successor_map(cx);
    verdict_with(cx, &comps, &seps, &succ)
}

fn verdict_with(
    cx: &Complex,
    comps: &[NodalComponent],
    seps: &[PartialSeparatrix],
    succ: &BTreeMap<CurveId, Vec<CurveId>>,
) -> Verdict {
    if !cx.all_separatrices_incomplete() {
        return Verdict::Consistent;
    }
    let Some(n) = comps.iter().find(|n| n.uninterrupted && n.complete()) else {
        return Verdict::Consistent;
    };
    let breaking_level = (0..=cx.levels())
        .rev()
        .find(|&k| !detect_for(cx, seps, succ, n, k).is_empty())
        .unwrap_or_else(|| n.birth.unwrap_or(0));
    Verdict::Contradictory { component: n.name.clone(), breaking_level }
}

/// Level-by-level persistency of situation hits for every complete
/// uninterrupted nodal component, together with the birth-step conditions
/// and the verdict against the incomplete-separatrices flag.
pub fn persistency_audit(cx: &Complex) -> Report {
    let mut rep = Report::new();
    let comps = nodal_components(cx);
    let seps = partial_separatrices(cx);
    let succ = successor_map(cx);
    let levels = cx.levels();
    for n in comps.iter().filter(|n| n.uninterrupted && n.complete()) {
        let b = match birth_date(cx, n) {
            Err(e) => {
                rep.fail("nodal_birth_step", &n.name, e.0);
                continue;
            }
            Ok(None) => {
                rep.fail(
                    "nodal_birth_step",
                    &n.name,
                    "a complete component must contain a compact curve",
                );
                continue;
            }
            Ok(Some(b)) => {
                rep.check_ok();
                b
            }
        };
        for k in 0..b {
            let (pts, compact) = core_intersection(cx, n, k);
            let subject = format!("{} / level {}", n.name, k);
            if compact {
                rep.fail(
                    "nodal_single_point_core",
                    subject,
                    "a compact curve appears before the birth level",
                );
            } else if pts.len() == 1 {
                rep.check_ok();
            } else {
                rep.fail(
                    "nodal_single_point_core",
                    subject,
                    format!("{} core points, expected one", pts.len()),
                );
            }
        }
        let per: Vec<usize> = (0..=levels)
            .map(|k| detect_for(cx, &seps, &succ, n, k).len())
            .collect();
        for k in b..levels {
            let (now, next) = (per[k as usize], per[k as usize + 1]);
            if now > 0 && next == 0 {
                rep.fail(
                    "scenario_persistency",
                    format!("{} / level {}", n.name, k),
                    format!("{} situation hits at level {}, none at level {}", now, k, k + 1),
                );
            } else {
                rep.check_ok();
            }
        }
    }
    match verdict_with(cx, &comps, &seps, &succ) {
        Verdict::Consistent => rep.check_ok(),
        Verdict::Contradictory { component, breaking_level } => rep.fail(
            "consistency_verdict",
            component,
            format!(
                "CONTRADICTORY: a complete uninterrupted nodal component under the incomplete-separatrices flag; the situation chain breaks at level {}",
                breaking_level
            ),
        ),
    }
    rep.sorted()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::PSpec;
    use crate::scalar::Scalar;

    fn comp(cx: &Complex, name: &str) -> ComponentId {
        match cx.lookup(name).unwrap() {
            EntityRef::Component(e) => e,
            _ => unreachable!(),
        }
    }

    fn curve(cx: &Complex, name: &str) -> CurveId {
        match cx.lookup(name).unwrap() {
            EntityRef::Curve(c) => c,
            _ => unreachable!(),
        }
    }

    fn named(cx: &Complex, p: PointId) -> PSpec {
        PSpec::Named(cx.point(p).name.clone())
    }

    /// One plane, a nodal trace continued by a nodal corner through the
    /// trace's landing point, with a real-saddle trace on the far side.
    fn corner_chain_fixture() -> Complex {
        let mut cx = Complex::new_ambient("T");
        cx.mark_singular(EntityRef::Point(cx.origin())).unwrap();
        cx.blow_up_point(cx.origin(), false).unwrap();
        let e1 = comp(&cx, "E1");
        let z = cx.declare_point(PSpec::Inside("E1".to_string())).unwrap();
        let t1 = cx.declare_trace("T1", e1, None, vec![named(&cx, z)]).unwrap();
        cx.assign_index(t1, e1, Scalar::sqrt2()).unwrap();
        cx.mark_singular(EntityRef::Point(z)).unwrap();
        cx.blow_up_point(z, false).unwrap();
        let e2 = comp(&cx, "E2");
        let l21 = curve(&cx, "L(2,1)");
        cx.assign_index(l21, e1, Scalar::sqrt2()).unwrap();
        let q2 = cx
            .point_ids()
            .find(|&p| cx.point_alive_at(p, 2) && cx.point(p).curves.contains(&t1))
            .unwrap();
        let t2 = cx.declare_trace("T2", e2, None, vec![named(&cx, q2)]).unwrap();
        cx.assign_index(t2, e2, Scalar::from_integer(-1)).unwrap();
        cx
    }

    #[test]
    fn corner_chain_is_one_complete_uninterrupted_component() {
        let cx = corner_chain_fixture();
        let comps = nodal_components(&cx);
        assert_eq!(comps.len(), 1);
        let n = &comps[0];
        assert_eq!(n.name, "N1");
        assert_eq!(n.members, vec![curve(&cx, "T1"), curve(&cx, "L(2,1)")]);
        assert!(n.uninterrupted);
        assert!(n.complete());
        assert_eq!(birth_date(&cx, n).unwrap(), Some(1));
        assert_eq!(n.curves_at(&cx, 1), vec![curve(&cx, "T1")]);

        assert!(audit_nodal_transitions(&cx).passed());
        assert!(persistency_audit(&cx).passed());
        assert_eq!(consistency_verdict(&cx), Verdict::Consistent);
        assert_eq!(detect_scenarios(&cx, 2).unwrap(), vec![]);
        assert!(detect_scenarios(&cx, 3).is_err());
    }

    #[test]
    fn classification_requires_agreeing_nonzero_sides() {
        let mut cx = corner_chain_fixture();
        let (t1, t2, l21) = (curve(&cx, "T1"), curve(&cx, "T2"), curve(&cx, "L(2,1)"));
        assert_eq!(classify_curve(&cx, t1), Ok(IndexClass::Nodal));
        assert_eq!(classify_curve(&cx, t2), Ok(IndexClass::RealSaddle));
        // The corner carries the assigned index plus its derived
        // reciprocal; both sides agree on the class.
        assert_eq!(cx.curve(l21).index_by_side.len(), 2);
        assert_eq!(classify_curve(&cx, l21), Ok(IndexClass::Nodal));

        let e2 = comp(&cx, "E2");
        let u = cx.declare_point(PSpec::Inside("E2".to_string())).unwrap();
        let spec = named(&cx, u);
        let t3 = cx.declare_trace("T3", e2, None, vec![spec]).unwrap();
        assert!(classify_curve(&cx, t3).is_err());
        cx.assign_index(t3, e2, Scalar::rational(2, 3)).unwrap();
        assert!(classify_curve(&cx, t3).is_err());

        let e1 = comp(&cx, "E1");
        cx.curves[l21.0 as usize]
            .index_by_side
            .insert(e1, Scalar::from_integer(-1));
        assert!(classify_curve(&cx, l21).is_err());
    }

    #[test]
    fn class_reads_through_unique_continuations() {
        let mut cx = Complex::new_ambient("T");
        cx.mark_singular(EntityRef::Point(cx.origin())).unwrap();
        cx.blow_up_point(cx.origin(), false).unwrap();
        let z = cx.declare_point(PSpec::Inside("E1".to_string())).unwrap();
        let spec = named(&cx, z);
        let y = cx.declare_germ("Y", spec).unwrap();
        cx.mark_singular(EntityRef::Curve(y)).unwrap();
        cx.blow_up_curve(y).unwrap();
        let e2 = comp(&cx, "E2");
        let u1 = cx.declare_point(PSpec::OnCurve("F(2)".to_string())).unwrap();
        let spec = named(&cx, u1);
        let s1 = cx.declare_trace("S1", e2, None, vec![spec]).unwrap();
        cx.assign_index(s1, e2, Scalar::sqrt2()).unwrap();

        let succ = successor_map(&cx);
        assert_eq!(effective_class(&cx, &succ, y), Some(IndexClass::Nodal));

        let u2 = cx.declare_point(PSpec::OnCurve("F(2)".to_string())).unwrap();
        let spec = named(&cx, u2);
        let s2 = cx.declare_trace("S2", e2, None, vec![spec]).unwrap();
        cx.assign_index(s2, e2, Scalar::from_integer(-1)).unwrap();
        let succ = successor_map(&cx);
        assert_eq!(effective_class(&cx, &succ, y), None);
    }

    /// Three plane blow-ups meeting in a live triple point whose corners
    /// carry the given classes.
    fn triple_corner_fixture(third_nodal: bool) -> Complex {
        let mut cx = Complex::new_ambient("T");
        cx.mark_singular(EntityRef::Point(cx.origin())).unwrap();
        cx.blow_up_point(cx.origin(), false).unwrap();
        let z = cx.declare_point(PSpec::Inside("E1".to_string())).unwrap();
        cx.mark_singular(EntityRef::Point(z)).unwrap();
        cx.blow_up_point(z, false).unwrap();
        let q = cx.declare_point(PSpec::OnCurve("L(2,1)".to_string())).unwrap();
        cx.mark_singular(EntityRef::Point(q)).unwrap();
        cx.blow_up_point(q, false).unwrap();
        let (e1, e2) = (comp(&cx, "E1"), comp(&cx, "E2"));
        let l21 = curve(&cx, "L(2,1)");
        let l31 = curve(&cx, "L(3,1)");
        let l32 = curve(&cx, "L(3,2)");
        cx.assign_index(l21, e1, Scalar::sqrt2()).unwrap();
        cx.assign_index(l31, e1, Scalar::sqrt2()).unwrap();
        let third = if third_nodal { Scalar::sqrt2() } else { Scalar::from_integer(-1) };
        cx.assign_index(l32, e2, third).unwrap();
        cx
    }

    #[test]
    fn corner_pair_through_a_triple_point_passes_alternation() {
        let cx = triple_corner_fixture(false);
        let comps = nodal_components(&cx);
        assert_eq!(comps.len(), 1);
        assert!(comps[0].uninterrupted);
        assert_eq!(
            comps[0].members,
            vec![curve(&cx, "L(2,1)"), curve(&cx, "L(3,1)")]
        );
        assert!(audit_nodal_transitions(&cx).passed());
    }

    #[test]
    fn three_nodal_corners_interrupt_and_fail_alternation() {
        let cx = triple_corner_fixture(true);
        let comps = nodal_components(&cx);
        assert_eq!(comps.len(), 1);
        assert!(!comps[0].uninterrupted);
        let rep = audit_nodal_transitions(&cx);
        assert!(!rep.passed());
        assert!(rep.findings.iter().all(|f| f.check == "nodal_triple_alternation"));
        assert!(detect_scenarios(&cx, 3).is_err());
    }

    /// A nodal trace through a point blown up dicritically.  The witness
    /// index decides whether an incomplete point still sees a curve that
    /// is not a real saddle.
    fn dicritical_contact_fixture(saddle: bool) -> Complex {
        let mut cx = Complex::new_ambient("T");
        cx.mark_singular(EntityRef::Point(cx.origin())).unwrap();
        cx.blow_up_point(cx.origin(), false).unwrap();
        let e1 = comp(&cx, "E1");
        let z = cx.declare_point(PSpec::Inside("E1".to_string())).unwrap();
        let spec = named(&cx, z);
        let t1 = cx.declare_trace("T1", e1, None, vec![spec]).unwrap();
        let value = if saddle { Scalar::from_integer(-1) } else { Scalar::sqrt2() };
        cx.assign_index(t1, e1, value).unwrap();
        cx.mark_singular(EntityRef::Point(z)).unwrap();
        cx.blow_up_point(z, true).unwrap();
        cx
    }

    #[test]
    fn incomplete_point_needs_a_witness_that_is_not_a_saddle() {
        let passing = dicritical_contact_fixture(false);
        assert!(audit_nodal_transitions(&passing).passed());
        let comps = nodal_components(&passing);
        assert_eq!(comps.len(), 1);
        assert!(comps[0].incomplete);
        assert!(comps[0].uninterrupted);
        assert!(detect_scenarios(&passing, 1).is_err());

        let failing = dicritical_contact_fixture(true);
        let rep = audit_nodal_transitions(&failing);
        assert_eq!(rep.findings.len(), 1);
        assert_eq!(rep.findings[0].check, "incomplete_sees_non_saddle");
    }

    /// A nodal corner whose declared point is blown up dicritically.  The
    /// crossing of the corner with the new component is untracked
    /// afterwards, leaving the component complete while its corner carried
    /// an incomplete point.
    fn tampered_corner_fixture() -> Complex {
        let mut cx = Complex::new_ambient("T");
        cx.mark_singular(EntityRef::Point(cx.origin())).unwrap();
        cx.blow_up_point(cx.origin(), false).unwrap();
        let z = cx.declare_point(PSpec::Inside("E1".to_string())).unwrap();
        cx.mark_singular(EntityRef::Point(z)).unwrap();
        cx.blow_up_point(z, false).unwrap();
        let (e1, e2) = (comp(&cx, "E1"), comp(&cx, "E2"));
        let l21 = curve(&cx, "L(2,1)");
        cx.assign_index(l21, e1, Scalar::sqrt2()).unwrap();
        let r = cx.declare_point(PSpec::OnCurve("L(2,1)".to_string())).unwrap();
        let spec = named(&cx, r);
        let tr = cx.declare_trace("TR", e2, None, vec![spec]).unwrap();
        cx.assign_index(tr, e2, Scalar::from_integer(-1)).unwrap();
        cx.mark_singular(EntityRef::Point(r)).unwrap();
        cx.blow_up_point(r, true).unwrap();
        let e3 = comp(&cx, "E3");
        let crossing = cx
            .point_ids()
            .find(|&p| cx.point_alive_at(p, 3) && cx.point(p).curves.contains(&l21))
            .unwrap();
        cx.points[crossing.0 as usize].comps.retain(|&e| e != e3);
        cx
    }

    #[test]
    fn corner_and_saturation_hits_at_an_incomplete_point() {
        let cx = tampered_corner_fixture();
        let comps = nodal_components(&cx);
        assert_eq!(comps.len(), 1);
        assert!(comps[0].complete() && comps[0].uninterrupted);

        let hits = detect_scenarios(&cx, 2).unwrap();
        let (e1, e2) = (comp(&cx, "E1"), comp(&cx, "E2"));
        let l21 = curve(&cx, "L(2,1)");
        let tr = curve(&cx, "TR");
        let kinds: Vec<ScenarioKind> = hits.iter().map(|h| h.kind).collect();
        assert_eq!(
            kinds,
            vec![
                ScenarioKind::IncompleteCorner,
                ScenarioKind::SaturatedComponent,
                ScenarioKind::SaturatedComponent,
            ]
        );
        assert!(hits.iter().all(|h| h.curve == l21));
        assert_eq!(hits[0].witness, Witness::Corner(e1, e2));
        assert_eq!(hits[1].witness, Witness::Saturated(e1, vec![l21]));
        assert_eq!(hits[2].witness, Witness::Saturated(e2, vec![l21, tr]));
        assert_eq!(detect_scenarios(&cx, 3).unwrap(), vec![]);
    }

    /// A complete uninterrupted component beside an incomplete separatrix:
    /// the situation chain starts at level 1 and dies at level 2, so the
    /// flag makes the complex contradictory.
    fn contradictory_fixture() -> Complex {
        let mut cx = Complex::new_ambient("T");
        cx.set_flag(true).unwrap();
        cx.mark_singular(EntityRef::Point(cx.origin())).unwrap();
        cx.blow_up_point(cx.origin(), false).unwrap();
        let e1 = comp(&cx, "E1");
        let v = cx.declare_point(PSpec::Inside("E1".to_string())).unwrap();
        let spec = named(&cx, v);
        let g1 = cx.declare_trace("G1", e1, None, vec![spec]).unwrap();
        cx.assign_index(g1, e1, Scalar::sqrt2()).unwrap();
        cx.mark_singular(EntityRef::Point(v)).unwrap();
        cx.blow_up_point(v, false).unwrap();
        let e2 = comp(&cx, "E2");
        let l21 = curve(&cx, "L(2,1)");
        cx.assign_index(l21, e1, Scalar::sqrt2()).unwrap();
        let q2 = cx
            .point_ids()
            .find(|&p| cx.point_alive_at(p, 2) && cx.point(p).curves.contains(&g1))
            .unwrap();
        let w = cx.declare_point(PSpec::Inside("E2".to_string())).unwrap();
        let at = vec![named(&cx, q2), named(&cx, w)];
        let h = cx.declare_trace("H", e2, None, at).unwrap();
        cx.assign_index(h, e2, Scalar::from_integer(-1)).unwrap();
        cx.mark_singular(EntityRef::Point(w)).unwrap();
        cx.blow_up_point(w, true).unwrap();
        cx
    }

    #[test]
    fn broken_situation_chain_under_the_flag_is_contradictory() {
        let cx = contradictory_fixture();
        assert!(audit_nodal_transitions(&cx).passed());

        let hits = detect_scenarios(&cx, 1).unwrap();
        let g1 = curve(&cx, "G1");
        let kinds: Vec<ScenarioKind> = hits.iter().map(|h| h.kind).collect();
        assert_eq!(
            kinds,
            vec![ScenarioKind::IncompleteTrace, ScenarioKind::SaturatedComponent]
        );
        assert!(hits.iter().all(|h| h.curve == g1));
        assert_eq!(hits[0].witness, Witness::Separatrix("C1".to_string()));
        assert_eq!(hits[1].witness, Witness::Saturated(comp(&cx, "E1"), vec![g1]));
        assert_eq!(detect_scenarios(&cx, 2).unwrap(), vec![]);

        assert_eq!(
            consistency_verdict(&cx),
            Verdict::Contradictory { component: "N1".to_string(), breaking_level: 1 }
        );
        let rep = persistency_audit(&cx);
        assert!(!rep.passed());
        let checks: BTreeSet<&str> =
            rep.findings.iter().map(|f| f.check.as_str()).collect();
        assert!(checks.contains("scenario_persistency"));
        assert!(checks.contains("consistency_verdict"));
    }

    #[test]
    fn fiber_born_component_fails_the_birth_audit() {
        let mut cx = Complex::new_ambient("T");
        cx.mark_singular(EntityRef::Point(cx.origin())).unwrap();
        cx.blow_up_point(cx.origin(), false).unwrap();
        let z = cx.declare_point(PSpec::Inside("E1".to_string())).unwrap();
        let spec = named(&cx, z);
        let y = cx.declare_germ("Y", spec).unwrap();
        cx.mark_singular(EntityRef::Curve(y)).unwrap();
        cx.blow_up_curve(y).unwrap();
        let e2 = comp(&cx, "E2");
        let f2 = curve(&cx, "F(2)");
        cx.assign_index(f2, e2, Scalar::sqrt2()).unwrap();

        let comps = nodal_components(&cx);
        assert_eq!(comps.len(), 1);
        assert!(comps[0].complete() && comps[0].uninterrupted);
        assert_eq!(comps[0].birth, Some(2));
        assert!(birth_date(&cx, &comps[0]).is_err());
        let rep = persistency_audit(&cx);
        assert!(!rep.passed());
        assert_eq!(rep.findings[0].check, "nodal_birth_step");
    }
}
