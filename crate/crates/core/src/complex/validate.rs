//! Structural validation of a finished sequence.
//!
//! The builder already rejects malformed records; this pass re-verifies the
//! sequence-level rules from scratch so a complex assembled by any front
//! end is checked the same way.

use super::*;
use crate::report::Report;

pub(super) fn run(cx: &Complex) -> Report {
    let mut rep = Report::new();
    check_steps(cx, &mut rep);
    check_markers(cx, &mut rep);
    check_pairwise_curves(cx, &mut rep);
    check_unique_pair_curve(cx, &mut rep);
    check_final_simplicity(cx, &mut rep);
    check_indices(cx, &mut rep);
    rep.sorted()
}

fn check_steps(cx: &Complex, rep: &mut Report) {
    let n = cx.levels();
    for s in 1..=n {
        let step = cx.step(s);
        let subject = format!("step {}", s);
        if s == 1 {
            if step.center == Center::Point(cx.origin()) {
                rep.check_ok();
            } else {
                rep.fail("first_center", &subject, "the first center must be the origin point");
            }
        }
        let center_ref = match step.center {
            Center::Point(p) => EntityRef::Point(p),
            Center::Curve(c) => EntityRef::Curve(c),
        };
        if cx.is_marked(s - 1, center_ref) {
            rep.check_ok();
        } else {
            rep.fail(
                "center_marked",
                &subject,
                format!("center {} is not in the marked singular set of level {}", cx.entity_name(center_ref), s - 1),
            );
        }
        match step.center {
            Center::Point(p) => {
                if cx.point(p).lineage.is_none() {
                    rep.check_ok();
                } else {
                    rep.fail(
                        "equireduction",
                        &subject,
                        format!("point blow-up at {} over a curve-center lineage", cx.point(p).name),
                    );
                }
            }
            Center::Curve(y) => {
                let rec = cx.curve(y);
                if !rec.compact {
                    rep.check_ok();
                } else {
                    rep.fail("curve_center_compact", &subject, format!("{} is compact", rec.name));
                }
                let base = cx.point(step.base_point);
                let outside = base
                    .comps
                    .iter()
                    .filter(|c| !rec.housing.contains(c))
                    .count();
                if outside <= 1 {
                    rep.check_ok();
                } else {
                    rep.fail(
                        "curve_center_crossings",
                        &subject,
                        format!("{} misses {} components through its base point", rec.name, outside),
                    );
                }
                let compact = base.comps.iter().filter(|&&c| cx.comp(c).compact).count();
                if compact <= 1 {
                    rep.check_ok();
                } else {
                    rep.fail(
                        "curve_center_base",
                        &subject,
                        format!("base point {} lies on {} compact components", base.name, compact),
                    );
                }
            }
        }
    }
}

fn check_markers(cx: &Complex, rep: &mut Report) {
    let n = cx.levels();
    let leftover: Vec<&(u32, EntityRef)> =
        cx.singstar.iter().filter(|(level, _)| *level == n).collect();
    if leftover.is_empty() {
        rep.check_ok();
    } else {
        for (_, e) in leftover {
            rep.fail(
                "final_markers",
                format!("level {}", n),
                format!("{} is still marked singular at the final level", cx.entity_name(*e)),
            );
        }
    }
    for (level, e) in &cx.singstar {
        let alive = match e {
            EntityRef::Point(p) => cx.point_alive_at(*p, *level),
            EntityRef::Curve(c) => cx.curve_alive_at(*c, *level),
            EntityRef::Component(_) => false,
        };
        if alive {
            rep.check_ok();
        } else {
            rep.fail(
                "marker_alive",
                format!("level {}", level),
                format!("marked entity {} is not alive there", cx.entity_name(*e)),
            );
        }
    }
}

/// Every pair of components through a point shares exactly one tracked
/// curve through that point.  Incidence is frozen, so each point is
/// checked once.
fn check_pairwise_curves(cx: &Complex, rep: &mut Report) {
    for p in cx.point_ids() {
        let rec = cx.point(p);
        if rec.retracted {
            continue;
        }
        for (a, &ci) in rec.comps.iter().enumerate() {
            for &cj in rec.comps.iter().skip(a + 1) {
                let shared = rec
                    .curves
                    .iter()
                    .filter(|&&x| cx.curve(x).housing == vec![ci, cj])
                    .count();
                if shared == 1 {
                    rep.check_ok();
                } else {
                    rep.fail(
                        "pairwise_curve",
                        format!("point {}", rec.name),
                        format!(
                            "{} curves housed by {} and {} pass through it, expected one",
                            shared,
                            cx.comp(ci).name,
                            cx.comp(cj).name
                        ),
                    );
                }
            }
        }
    }
}

/// Two compact invariant components meet in at most one curve.
fn check_unique_pair_curve(cx: &Complex, rep: &mut Report) {
    let mut seen: BTreeMap<(ComponentId, ComponentId), CurveId> = BTreeMap::new();
    let mut ok = true;
    for c in cx.curve_ids() {
        let rec = cx.curve(c);
        if let [a, b] = rec.housing.as_slice() {
            let compact_invariant = |id: ComponentId| cx.comp(id).compact && cx.is_invariant(id);
            if compact_invariant(*a) && compact_invariant(*b) {
                if let Some(prev) = seen.insert((*a, *b), c) {
                    ok = false;
                    rep.fail(
                        "unique_intersection",
                        format!("components {} and {}", cx.comp(*a).name, cx.comp(*b).name),
                        format!("met along both {} and {}", cx.curve(prev).name, rec.name),
                    );
                }
            }
        }
    }
    if ok {
        rep.check_ok();
    }
}

fn check_final_simplicity(cx: &Complex, rep: &mut Report) {
    let n = cx.levels();
    for p in cx.point_ids() {
        if !cx.point_alive_at(p, n) {
            continue;
        }
        let rec = cx.point(p);
        let subject = format!("point {}", rec.name);
        let branches = cx.singular_curves_through(p);
        match branches.len() {
            0 => rep.check_ok(),
            1 => {
                let curve = cx.curve(branches[0]);
                let invariant: Vec<ComponentId> = rec
                    .comps
                    .iter()
                    .copied()
                    .filter(|&c| cx.is_invariant(c))
                    .collect();
                if curve.housing == invariant {
                    rep.check_ok();
                } else {
                    rep.fail(
                        "final_simplicity",
                        &subject,
                        format!(
                            "{} does not fill the invariant components through the point",
                            curve.name
                        ),
                    );
                }
            }
            3 => check_three_branch_point(cx, rep, p, &branches, &subject),
            k => rep.fail(
                "final_simplicity",
                &subject,
                format!("{} singular curves meet at the final level, expected 0, 1 or 3", k),
            ),
        }
    }
}

fn check_three_branch_point(
    cx: &Complex,
    rep: &mut Report,
    p: PointId,
    branches: &[CurveId],
    subject: &str,
) {
    let rec = cx.point(p);
    if rec.comps.iter().any(|&c| !cx.is_invariant(c)) {
        rep.fail(
            "final_simplicity",
            subject,
            "three singular curves meet on a dicritical component".to_string(),
        );
        return;
    }
    let housings: Vec<&[ComponentId]> =
        branches.iter().map(|&b| cx.curve(b).housing.as_slice()).collect();
    let ok = match rec.comps.as_slice() {
        [i, j, l] => {
            // Three corners, one per pair of components.
            let mut pairs: Vec<Vec<ComponentId>> =
                vec![vec![*i, *j], vec![*i, *l], vec![*j, *l]];
            for h in &housings {
                if let Some(pos) = pairs.iter().position(|q| q.as_slice() == *h) {
                    pairs.remove(pos);
                }
            }
            pairs.is_empty()
        }
        [i, j] => {
            // The corner plus one trace on each side.
            let mut wanted: Vec<Vec<ComponentId>> = vec![vec![*i, *j], vec![*i], vec![*j]];
            for h in &housings {
                if let Some(pos) = wanted.iter().position(|q| q.as_slice() == *h) {
                    wanted.remove(pos);
                }
            }
            wanted.is_empty()
        }
        _ => false,
    };
    if ok {
        rep.check_ok();
    } else {
        rep.fail(
            "final_simplicity",
            subject,
            "three singular curves without the corner configuration".to_string(),
        );
    }
}

fn check_indices(cx: &Complex, rep: &mut Report) {
    let n = cx.levels();
    for c in cx.curve_ids() {
        let rec = cx.curve(c);
        if !rec.singular {
            continue;
        }
        let subject = format!("curve {}", rec.name);
        if cx.curve_alive_at(c, n) && rec.housing.is_empty() {
            rep.fail(
                "final_housing",
                &subject,
                "a singular curve at the final level must lie in an invariant component",
            );
            continue;
        }
        for &side in &rec.housing {
            if !cx.is_invariant(side) {
                continue;
            }
            match rec.index_by_side.get(&side) {
                None => rep.fail(
                    "index_assigned",
                    &subject,
                    format!("no index on the {} side", cx.comp(side).name),
                ),
                Some(v) => {
                    if !cx.curve_alive_at(c, n) || v.classify().is_some() {
                        rep.check_ok();
                    } else {
                        rep.fail(
                            "index_class",
                            &subject,
                            format!(
                                "index {} on the {} side is zero or a nonnegative rational at the final level",
                                v.render(),
                                cx.comp(side).name
                            ),
                        );
                    }
                }
            }
        }
        if let [a, b] = rec.housing.as_slice() {
            if cx.is_invariant(*a) && cx.is_invariant(*b) {
                if let (Some(x), Some(y)) =
                    (rec.index_by_side.get(a), rec.index_by_side.get(b))
                {
                    if (x * y).is_one() {
                        rep.check_ok();
                    } else {
                        rep.fail(
                            "corner_reciprocity",
                            &subject,
                            format!(
                                "side indices {} and {} do not multiply to one",
                                x.render(),
                                y.render()
                            ),
                        );
                    }
                }
            }
        }
    }
}
