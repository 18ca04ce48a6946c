//! Partial separatrices and completeness.
//!
//! A partial separatrix is a connected component of the union of the trace
//! curves at the final level, connected through shared tracked points.  Its
//! projection to level `k` is taken along the blow-down images of its
//! member curves.  Completeness at a point asks that no dicritical
//! component collapsing onto that point meets the separatrix; a separatrix
//! is incomplete exactly when it touches a compact dicritical component at
//! the final level.

use std::collections::{BTreeMap, BTreeSet};

use crate::complex::{
    BornOf, Center, Complex, ComponentId, CurveId, CurveKind, Nature, PointId, QueryError,
};
use crate::par;
use crate::report::Report;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct PartialSeparatrix {
    pub name: String,
    /// Trace curves at the final level, sorted.
    pub members: Vec<CurveId>,
    /// True when the separatrix meets a compact dicritical component.
    pub incomplete: bool,
    /// Compact member curves; the compact part of the separatrix when
    /// nonempty.
    pub compact_members: Vec<CurveId>,
    /// The single point forming the compact part when there are no compact
    /// members.
    pub compact_point: Option<PointId>,
    /// Members together with every curve they blow down onto.  The level-k
    /// projection contains exactly the closure curves alive at `k`, plus
    /// collapsed points.
    pub closure: BTreeSet<CurveId>,
    /// Compact dicritical components met at the final level.
    pub dicritical_contacts: BTreeSet<ComponentId>,
}

impl PartialSeparatrix {
    /// Whether the level-`k` projection passes through the live point `p`.
    pub fn meets(&self, cx: &Complex, k: u32, p: PointId) -> bool {
        self.members.iter().any(|&m| cx.curve_image_meets(m, k, p))
    }

    /// Member curves of the level-`k` projection housed in `comp` through
    /// `p`: the branch set of the separatrix there.
    pub fn branch_filter(&self) -> &BTreeSet<CurveId> {
        &self.closure
    }
}

/// Ancestor closure of a curve under blow-down: the curve itself and every
/// curve it maps onto at earlier levels.
pub(crate) fn ancestors(cx: &Complex, mut c: CurveId) -> Vec<CurveId> {
    let mut out = vec![c];
    loop {
        match cx.curve(c).born_of {
            BornOf::Section { continued } | BornOf::DeclaredOverCurve { continued } => {
                c = continued;
                out.push(c);
            }
            _ => return out,
        }
    }
}

/// All partial separatrices, ordered by smallest member curve.
pub fn partial_separatrices(cx: &Complex) -> Vec<PartialSeparatrix> {
    let n = cx.levels();
    let members: Vec<CurveId> = cx
        .curve_ids()
        .filter(|&c| cx.curve_alive_at(c, n) && cx.curve_kind(c) == CurveKind::Trace)
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
            let mut dicritical_contacts = BTreeSet::new();
            let mut points = BTreeSet::new();
            for q in cx.point_ids() {
                if !cx.point_alive_at(q, n) {
                    continue;
                }
                if cx.point(q).curves.iter().any(|c| members.binary_search(c).is_ok()) {
                    points.insert(q);
                    for &e in &cx.point(q).comps {
                        if cx.comp(e).compact && cx.comp(e).nature == Nature::Dicritical {
                            dicritical_contacts.insert(e);
                        }
                    }
                }
            }
            let compact_members: Vec<CurveId> =
                members.iter().copied().filter(|&m| cx.curve(m).compact).collect();
            let compact_point = if compact_members.is_empty() {
                points.iter().next().copied()
            } else {
                None
            };
            PartialSeparatrix {
                name: format!("C{}", i + 1),
                members,
                incomplete: !dicritical_contacts.is_empty(),
                compact_members,
                compact_point,
                closure,
                dicritical_contacts,
            }
        })
        .collect()
}

/// Whether `sep` is complete at the live point `p` of level `k`: no
/// dicritical component collapsing onto `p` meets the separatrix.
pub fn is_complete_at(
    cx: &Complex,
    sep: &PartialSeparatrix,
    k: u32,
    p: PointId,
) -> Result<bool, QueryError> {
    if !sep.meets(cx, k, p) {
        return Err(QueryError(format!(
            "the projection of {} at level {} does not pass through {}",
            sep.name,
            k,
            cx.point(p).name
        )));
    }
    Ok(cx
        .preimage_components(k, p)
        .into_iter()
        .filter(|&e| cx.comp(e).nature == Nature::Dicritical)
        .all(|e| !sep.dicritical_contacts.contains(&e)))
}

/// All pairs of a live point and a separatrix running through it where the
/// separatrix is incomplete at the point.  Indices refer to `seps`.
pub fn incomplete_points_with(
    cx: &Complex,
    seps: &[PartialSeparatrix],
    k: u32,
) -> Vec<(PointId, usize)> {
    let mut out = Vec::new();
    for p in cx.point_ids() {
        if !cx.point_alive_at(p, k) {
            continue;
        }
        for (i, sep) in seps.iter().enumerate() {
            if sep.meets(cx, k, p) && is_complete_at(cx, sep, k, p) == Ok(false) {
                out.push((p, i));
            }
        }
    }
    out
}

pub fn incomplete_points(cx: &Complex, k: u32) -> Vec<(PointId, usize)> {
    incomplete_points_with(cx, &partial_separatrices(cx), k)
}

/// The shared index of the separatrix inside a compact invariant component:
/// zero when no member curve lies there, otherwise the common side index of
/// all of them, which must agree.
pub fn separatrix_index(
    cx: &Complex,
    sep: &PartialSeparatrix,
    comp: ComponentId,
) -> Result<Scalar, QueryError> {
    let mut value: Option<(CurveId, Scalar)> = None;
    for &m in &sep.members {
        if !cx.curve(m).housing.contains(&comp) {
            continue;
        }
        let idx = cx.curve_index(m, comp).cloned().ok_or_else(|| {
            QueryError(format!("member {} has no index on {}", cx.curve(m).name, cx.comp(comp).name))
        })?;
        match &value {
            None => value = Some((m, idx)),
            Some((first, v)) => {
                if *v != idx {
                    return Err(QueryError(format!(
                        "members {} and {} of {} carry different indices {} and {} in {}",
                        cx.curve(*first).name,
                        cx.curve(m).name,
                        sep.name,
                        v.render(),
                        idx.render(),
                        cx.comp(comp).name
                    )));
                }
            }
        }
    }
    Ok(value.map(|(_, v)| v).unwrap_or_else(Scalar::zero))
}

/// Completeness audits over every separatrix and level.
pub fn audit_completeness(cx: &Complex) -> Report {
    let seps = partial_separatrices(cx);
    let mut rep = Report::new();
    check_flag(cx, &seps, &mut rep);
    check_compact_parts(cx, &seps, &mut rep);
    check_dicritical_centers(cx, &seps, &mut rep);
    check_complete_points(cx, &seps, &mut rep);
    check_incomplete_witnesses(cx, &seps, &mut rep);
    check_monotonicity(cx, &seps, &mut rep);
    rep.sorted()
}

fn check_flag(cx: &Complex, seps: &[PartialSeparatrix], rep: &mut Report) {
    if !cx.all_separatrices_incomplete() {
        return;
    }
    for sep in seps {
        if sep.incomplete {
            rep.check_ok();
        } else {
            rep.fail(
                "flag_incomplete",
                &sep.name,
                "declared to have no invariant surface, yet this separatrix is complete",
            );
        }
    }
}

fn check_compact_parts(cx: &Complex, seps: &[PartialSeparatrix], rep: &mut Report) {
    let n = cx.levels();
    for sep in seps {
        // Points of the compact part connect only through compact members.
        let mut points: BTreeSet<PointId> = BTreeSet::new();
        for &m in &sep.members {
            for q in cx.point_ids() {
                if cx.point_alive_at(q, n) && cx.point(q).curves.contains(&m) {
                    points.insert(q);
                }
            }
        }
        if points.is_empty() {
            rep.fail("compact_part", &sep.name, "no tracked point on the compact core");
            continue;
        }
        let points: Vec<PointId> = points.into_iter().collect();
        let mut dsu: Vec<usize> = (0..points.len()).collect();
        fn find(dsu: &mut Vec<usize>, i: usize) -> usize {
            if dsu[i] != i {
                let r = find(dsu, dsu[i]);
                dsu[i] = r;
            }
            dsu[i]
        }
        for &m in &sep.compact_members {
            let on: Vec<usize> = points
                .iter()
                .enumerate()
                .filter(|(_, q)| cx.point(**q).curves.contains(&m))
                .map(|(i, _)| i)
                .collect();
            for w in on.windows(2) {
                let a = find(&mut dsu, w[0]);
                let b = find(&mut dsu, w[1]);
                dsu[a] = b;
            }
        }
        let mut roots = BTreeSet::new();
        for i in 0..points.len() {
            roots.insert(find(&mut dsu, i));
        }
        if roots.len() == 1 {
            rep.check_ok();
        } else {
            rep.fail(
                "compact_part",
                &sep.name,
                format!("compact part splits into {} pieces", roots.len()),
            );
        }
    }
}

/// A dicritical point blow-up never happens where a separatrix is complete.
fn check_dicritical_centers(cx: &Complex, seps: &[PartialSeparatrix], rep: &mut Report) {
    for s in 1..=cx.levels() {
        let step = cx.step(s);
        let p = match step.center {
            Center::Point(p) if step.dicritical => p,
            _ => continue,
        };
        let k = s - 1;
        for sep in seps {
            if !sep.meets(cx, k, p) {
                continue;
            }
            if is_complete_at(cx, sep, k, p) == Ok(true) {
                rep.fail(
                    "dicritical_at_complete_point",
                    format!("step {}", s),
                    format!("{} is complete at the center {}", sep.name, cx.point(p).name),
                );
            } else {
                rep.check_ok();
            }
        }
    }
}

/// Consequences of completeness at a point: a compact trace of the
/// separatrix inside each compact invariant component through it, and final
/// contact with each compact dicritical component through it.
fn check_complete_points(cx: &Complex, seps: &[PartialSeparatrix], rep: &mut Report) {
    let n = cx.levels();
    let points: Vec<PointId> =
        cx.point_ids().filter(|&p| !cx.point(p).retracted).collect();
    let sub_reports = par::map_collect(&points, |&p| {
        let mut rep = Report::new();
        let k = cx.point(p).birth_level;
        for sep in seps {
            if !sep.meets(cx, k, p) || is_complete_at(cx, sep, k, p) != Ok(true) {
                continue;
            }
            for &e in &cx.point(p).comps {
                let rec = cx.comp(e);
                if !rec.compact {
                    continue;
                }
                match rec.nature {
                    Nature::Invariant => {
                        let found = cx.point(p).curves.iter().any(|&g| {
                            cx.curve(g).compact
                                && cx.curve(g).singular
                                && cx.curve(g).housing.contains(&e)
                                && sep.closure.contains(&g)
                        });
                        if found {
                            rep.check_ok();
                        } else {
                            rep.fail(
                                "complete_needs_trace",
                                format!("point {} / {}", cx.point(p).name, sep.name),
                                format!("no compact trace of the separatrix inside {}", rec.name),
                            );
                        }
                    }
                    Nature::Dicritical => {
                        let met = sep.dicritical_contacts.contains(&e)
                            || cx.point_ids().any(|q| {
                                cx.point_alive_at(q, n)
                                    && cx.point(q).comps.contains(&e)
                                    && cx
                                        .point(q)
                                        .curves
                                        .iter()
                                        .any(|c| sep.members.contains(c))
                            });
                        if met {
                            rep.check_ok();
                        } else {
                            rep.fail(
                                "complete_needs_final_contact",
                                format!("point {} / {}", cx.point(p).name, sep.name),
                                format!("the separatrix never reaches the final form of {}", rec.name),
                            );
                        }
                    }
                }
            }
        }
        rep
    });
    for sub in sub_reports {
        rep.merge(sub);
    }
}

/// An incomplete separatrix shows, at every level, either an incomplete
/// point or contact with a compact dicritical component.
fn check_incomplete_witnesses(cx: &Complex, seps: &[PartialSeparatrix], rep: &mut Report) {
    for sep in seps.iter().filter(|s| s.incomplete) {
        for k in 0..=cx.levels() {
            let mut witnessed = false;
            for p in cx.point_ids() {
                if !cx.point_alive_at(p, k) || !sep.meets(cx, k, p) {
                    continue;
                }
                if is_complete_at(cx, sep, k, p) == Ok(false) {
                    witnessed = true;
                    break;
                }
                if cx.point(p).comps.iter().any(|&e| {
                    cx.comp(e).compact && cx.comp(e).nature == Nature::Dicritical
                }) {
                    witnessed = true;
                    break;
                }
            }
            if witnessed {
                rep.check_ok();
            } else {
                rep.fail(
                    "incompleteness_witness",
                    format!("{} / level {}", sep.name, k),
                    "incomplete separatrix with neither an incomplete point nor dicritical contact",
                );
            }
        }
    }
}

/// Completeness propagates to the points over `p` when `p` dies, and back
/// down when the killing step has a curve center or is non-dicritical.
fn check_monotonicity(cx: &Complex, seps: &[PartialSeparatrix], rep: &mut Report) {
    for p in cx.point_ids() {
        let rec = cx.point(p);
        if rec.retracted {
            continue;
        }
        let s = match rec.death_step {
            Some(s) => s,
            None => continue,
        };
        let k = s - 1;
        let children: Vec<PointId> = cx
            .point_ids()
            .filter(|&q| {
                !cx.point(q).retracted
                    && cx.point(q).birth_level == s
                    && cx.point(q).created_over == Some(p)
            })
            .collect();
        let downward_applies = match cx.step(s).center {
            Center::Curve(_) => true,
            Center::Point(_) => !cx.step(s).dicritical,
        };
        for sep in seps {
            if !sep.meets(cx, k, p) {
                continue;
            }
            let at_p = is_complete_at(cx, sep, k, p) == Ok(true);
            let over: Vec<bool> = children
                .iter()
                .filter(|&&q| sep.meets(cx, s, q))
                .map(|&q| is_complete_at(cx, sep, s, q) == Ok(true))
                .collect();
            if at_p && !over.iter().all(|&b| b) {
                rep.fail(
                    "completeness_upward",
                    format!("point {} / {}", rec.name, sep.name),
                    "complete below, incomplete above",
                );
            } else {
                rep.check_ok();
            }
            if downward_applies && !at_p && over.iter().all(|&b| b) && !over.is_empty() {
                rep.fail(
                    "completeness_downward",
                    format!("point {} / {}", rec.name, sep.name),
                    "complete at every point above, incomplete below",
                );
            } else {
                rep.check_ok();
            }
        }
    }
}
