//! Index algebra along the divisor.
//!
//! Every singular curve carries one index per invariant side, constant
//! along strict transforms.  Intersection multiplicities between two
//! curves at a dead point are aggregated from the final level down by the
//! Noether rule: the product of the masses on the exceptional curve plus
//! the contributions of the surviving crossings.  On top of these two
//! ingredients sit the audit families: corner reciprocity, the triple
//! relation at three-component points, restricted-foliation values on
//! dicritical contacts, the line and plane sum rules at every point
//! blow-up, and the transition relation across corners that are complete
//! for a separatrix.

use std::collections::{BTreeMap, BTreeSet};

use crate::complex::{
    BornOf, BuildError, Center, Complex, ComponentId, CurveId, Nature, PointId, QueryError,
};
use crate::par;
use crate::report::Report;
use crate::scalar::{IndexClass, Scalar};
use crate::separatrix::{is_complete_at, partial_separatrices, PartialSeparatrix};

/// Branches of the singular locus inside one component at one point,
/// optionally cut down to the branches of a single separatrix.
#[derive(Debug, Clone)]
pub struct BranchSet {
    pub point: PointId,
    pub comp: ComponentId,
    pub members: Vec<CurveId>,
}

#[derive(Debug, Clone)]
pub struct WeightedTerm {
    pub curve: CurveId,
    pub multiplicity: u64,
    pub index: Scalar,
}

#[derive(Debug, Clone)]
pub struct WeightedIndexSum {
    pub value: Scalar,
    pub terms: Vec<WeightedTerm>,
}

impl WeightedIndexSum {
    fn from_terms(terms: Vec<WeightedTerm>) -> WeightedIndexSum {
        let mut value = Scalar::zero();
        for t in &terms {
            value = &value + &(&Scalar::from_integer(t.multiplicity as i64) * &t.index);
        }
        WeightedIndexSum { value, terms }
    }
}

/// Branches inside `comp` at `p`, excluding `toward` and anything outside
/// the optional separatrix closure.
pub fn branch_set_at(
    cx: &Complex,
    p: PointId,
    comp: ComponentId,
    toward: CurveId,
    restrict: Option<&PartialSeparatrix>,
) -> BranchSet {
    let members = cx
        .branch_set(p, comp)
        .into_iter()
        .filter(|&g| g != toward)
        .filter(|g| restrict.map_or(true, |sep| sep.branch_filter().contains(g)))
        .collect();
    BranchSet { point: p, comp, members }
}

/// Intersection multiplicity of two distinct curves at a tracked point,
/// inside their common housing component.  Curves without a common
/// component cross transversally: multiplicity one.
pub fn noether_multiplicity(
    cx: &Complex,
    a: CurveId,
    b: CurveId,
    p: PointId,
) -> Result<u64, QueryError> {
    if a == b {
        return Err(QueryError(format!(
            "self-intersection of {} is governed by the line sum rules",
            cx.curve(a).name
        )));
    }
    let rec = cx.point(p);
    if !rec.curves.contains(&a) || !rec.curves.contains(&b) {
        return Err(QueryError(format!(
            "curves {} and {} do not meet at {}",
            cx.curve(a).name,
            cx.curve(b).name,
            rec.name
        )));
    }
    let shared: Vec<ComponentId> = cx
        .curve(a)
        .housing
        .iter()
        .filter(|h| cx.curve(b).housing.contains(h))
        .copied()
        .collect();
    match shared.first() {
        None => Ok(1),
        Some(&e) => Ok(mult_in_surface(cx, a, b, p, e)),
    }
}

/// Multiplicity of `a`·`b` at `p` inside the surface `e`, by recursion on
/// the step that kills `p`.
fn mult_in_surface(cx: &Complex, a: CurveId, b: CurveId, p: PointId, e: ComponentId) -> u64 {
    let s = match cx.point(p).death_step {
        None => return 1,
        Some(s) => s,
    };
    match cx.step(s).center {
        Center::Point(_) => {
            let exc = line_of_step(cx, s, e);
            blowup_masses(cx, a, b, p, e, exc, s)
        }
        Center::Curve(y) => {
            if cx.curve(y).housing.contains(&e) {
                // The step restricts to an isomorphism on `e`; the section
                // continues the center there.
                let section = cx
                    .curve_ids()
                    .find(|&c| {
                        cx.curve(c).birth_level == s
                            && cx.curve(c).born_of == BornOf::Section { continued: y }
                            && cx.curve(c).housing.contains(&e)
                    })
                    .expect("curve step leaves a section on each housing component");
                let lift = |c: CurveId| if c == y { section } else { c };
                let ptilde = cx
                    .point_ids()
                    .find(|&q| {
                        cx.point(q).birth_level == s
                            && cx.point(q).created_over == Some(p)
                            && cx.point(q).curves.contains(&section)
                    })
                    .expect("section point over the base");
                mult_in_surface(cx, lift(a), lift(b), ptilde, e)
            } else {
                let exc = cx
                    .curve_ids()
                    .find(|&c| {
                        cx.curve(c).birth_level == s
                            && matches!(cx.curve(c).born_of, BornOf::Fiber { .. })
                    })
                    .expect("curve step leaves a fiber");
                blowup_masses(cx, a, b, p, e, exc, s)
            }
        }
    }
}

/// The intersection line of step `s` lying in the older component `e`.
fn line_of_step(cx: &Complex, s: u32, e: ComponentId) -> CurveId {
    cx.curve_ids()
        .find(|&c| {
            cx.curve(c).birth_level == s
                && matches!(cx.curve(c).born_of, BornOf::Line { .. })
                && cx.curve(c).housing.contains(&e)
        })
        .expect("point step leaves a line in every older component through its center")
}

fn blowup_masses(
    cx: &Complex,
    a: CurveId,
    b: CurveId,
    p: PointId,
    e: ComponentId,
    exc: CurveId,
    s: u32,
) -> u64 {
    let children: Vec<PointId> = cx
        .point_ids()
        .filter(|&q| {
            let rec = cx.point(q);
            !rec.retracted
                && rec.birth_level == s
                && rec.created_over == Some(p)
                && rec.comps.contains(&e)
        })
        .collect();
    let mass = |c: CurveId| -> u64 {
        children
            .iter()
            .filter(|&&q| cx.point(q).curves.contains(&c) && cx.point(q).curves.contains(&exc))
            .map(|&q| mult_in_surface(cx, c, exc, q, e))
            .sum()
    };
    let surviving: u64 = children
        .iter()
        .filter(|&&q| cx.point(q).curves.contains(&a) && cx.point(q).curves.contains(&b))
        .map(|&q| mult_in_surface(cx, a, b, q, e))
        .sum();
    mass(a) * mass(b) + surviving
}

/// Weighted sum of branch indices inside `side` at `p`, with
/// multiplicities taken toward `toward`.
pub fn weighted_index_sum(
    cx: &Complex,
    k: u32,
    p: PointId,
    side: ComponentId,
    toward: CurveId,
    restrict: Option<&PartialSeparatrix>,
) -> Result<WeightedIndexSum, QueryError> {
    if !cx.point_alive_at(p, k) {
        return Err(QueryError(format!(
            "{} is not on the level-{} complex",
            cx.point(p).name,
            k
        )));
    }
    if !cx.is_invariant(side) {
        return Err(QueryError(format!("{} is not invariant", cx.comp(side).name)));
    }
    if !cx.point(p).curves.contains(&toward) {
        return Err(QueryError(format!(
            "{} does not pass through {}",
            cx.curve(toward).name,
            cx.point(p).name
        )));
    }
    let branches = branch_set_at(cx, p, side, toward, restrict);
    let mut terms = Vec::new();
    for g in branches.members {
        let multiplicity = noether_multiplicity(cx, g, toward, p)?;
        let index = cx.curve_index(g, side).cloned().ok_or_else(|| {
            QueryError(format!(
                "{} carries no index on the {} side",
                cx.curve(g).name,
                cx.comp(side).name
            ))
        })?;
        terms.push(WeightedTerm { curve: g, multiplicity, index });
    }
    Ok(WeightedIndexSum::from_terms(terms))
}

/// Applies a batch of index assignments, then rejects any assigned curve
/// that survives to the final level with an index outside the admissible
/// classes.
pub fn assign_indices(
    cx: &mut Complex,
    assignments: &BTreeMap<(CurveId, ComponentId), Scalar>,
) -> Result<(), BuildError> {
    for (&(curve, side), value) in assignments {
        cx.assign_index(curve, side, value.clone())?;
    }
    let n = cx.levels();
    for &(curve, _) in assignments.keys() {
        if cx.curve_alive_at(curve, n) && cx.curve_class(curve).is_none() {
            return Err(BuildError(format!(
                "{} survives to the final level with a nonnegative rational index",
                cx.curve(curve).name
            )));
        }
    }
    Ok(())
}

/// The two side indices of every corner curve multiply to exactly one.
pub fn check_corner_reciprocity(cx: &Complex) -> Report {
    let mut rep = Report::new();
    for c in cx.curve_ids() {
        let rec = cx.curve(c);
        if !rec.singular || rec.housing.len() != 2 {
            continue;
        }
        let vals: Vec<&Scalar> =
            rec.housing.iter().filter_map(|&h| cx.curve_index(c, h)).collect();
        if vals.len() != 2 {
            continue;
        }
        if (vals[0] * vals[1]).is_one() {
            rep.check_ok();
        } else {
            rep.fail(
                "corner_reciprocity",
                &rec.name,
                format!(
                    "side indices {} and {} multiply to {}",
                    vals[0].render(),
                    vals[1].render(),
                    (vals[0] * vals[1]).render()
                ),
            );
        }
    }
    rep.sorted()
}

/// Enumerates the index-class patterns realizable at a point with three
/// singular curves whose indices satisfy the product relation, over
/// representative scalars of each class.
pub fn enumerate_triple_cases() -> BTreeSet<u8> {
    let reps = [
        Scalar::sqrt2(),
        &Scalar::one() + &Scalar::sqrt2(),
        Scalar::from_integer(-1),
        -&Scalar::sqrt2(),
        Scalar::i(),
        &Scalar::one() + &Scalar::i(),
        &Scalar::one() - &Scalar::i(),
        -&Scalar::i(),
        &Scalar::sqrt2() * &Scalar::i(),
    ];
    let mut seen = BTreeSet::new();
    for alpha in &reps {
        for rho in &reps {
            let beta = -&(alpha * rho);
            let classes = [alpha.classify(), rho.classify(), beta.classify()];
            if classes.iter().any(|c| c.is_none()) {
                continue;
            }
            let classes: Vec<IndexClass> = classes.into_iter().map(Option::unwrap).collect();
            let case = crate::complex::triple_case(&classes)
                .expect("the product relation only realizes the five case patterns");
            seen.insert(case);
        }
    }
    seen
}

/// The product relation among the three corner indices at every point on
/// three compact invariant components, the same relation at two-component
/// points of dimensional type three at the final level, and the five-case
/// classification.
pub fn check_triple_relations(cx: &Complex) -> Report {
    let mut rep = Report::new();
    let points: Vec<PointId> = cx.point_ids().filter(|&p| !cx.point(p).retracted).collect();
    let subs = par::map_collect(&points, |&p| {
        let mut rep = Report::new();
        triple_at_three_components(cx, p, &mut rep);
        triple_at_final_type_three(cx, p, &mut rep);
        five_case_at(cx, p, &mut rep);
        rep
    });
    for sub in subs {
        rep.merge(sub);
    }
    if enumerate_triple_cases() == (1..=5).collect::<BTreeSet<u8>>() {
        rep.check_ok();
    } else {
        rep.fail(
            "five_case_exhaustive",
            "trichotomy",
            "class enumeration under the product relation does not yield the five cases",
        );
    }
    rep.sorted()
}

pub(crate) fn corner_between(
    cx: &Complex,
    p: PointId,
    i: ComponentId,
    j: ComponentId,
) -> Option<CurveId> {
    cx.point(p).curves.iter().copied().find(|&c| {
        let rec = cx.curve(c);
        rec.singular && rec.housing == [i.min(j), i.max(j)]
    })
}

fn triple_at_three_components(cx: &Complex, p: PointId, rep: &mut Report) {
    let comps = &cx.point(p).comps;
    if comps.len() != 3
        || !comps.iter().all(|&e| cx.comp(e).compact && cx.is_invariant(e))
    {
        return;
    }
    for &i in comps {
        for &j in comps {
            if i == j {
                continue;
            }
            let &l = comps.iter().find(|&&e| e != i && e != j).unwrap();
            let gamma_l = corner_between(cx, p, i, j);
            let gamma_j = corner_between(cx, p, i, l);
            let gamma_i = corner_between(cx, p, j, l);
            let (gamma_l, gamma_j, gamma_i) = match (gamma_l, gamma_j, gamma_i) {
                (Some(a), Some(b), Some(c)) => (a, b, c),
                _ => {
                    rep.fail(
                        "triple_relation",
                        &cx.point(p).name,
                        "missing a corner curve between two of the three components",
                    );
                    return;
                }
            };
            let alpha = cx.curve_index(gamma_l, i);
            let beta = cx.curve_index(gamma_j, i);
            let rho = cx.curve_index(gamma_i, j);
            match (alpha, beta, rho) {
                (Some(alpha), Some(beta), Some(rho)) => {
                    if *beta == -&(alpha * rho) {
                        rep.check_ok();
                    } else {
                        rep.fail(
                            "triple_relation",
                            &cx.point(p).name,
                            format!(
                                "sides ({}, {}): expected {}, stored {}",
                                cx.comp(i).name,
                                cx.comp(j).name,
                                (-&(alpha * rho)).render(),
                                beta.render()
                            ),
                        );
                    }
                }
                _ => rep.fail(
                    "triple_relation",
                    &cx.point(p).name,
                    "a corner through this point has no stored side index",
                ),
            }
        }
    }
}

fn triple_at_final_type_three(cx: &Complex, p: PointId, rep: &mut Report) {
    let n = cx.levels();
    if !cx.point_alive_at(p, n) {
        return;
    }
    let comps = &cx.point(p).comps;
    if comps.len() != 2 || !comps.iter().all(|&e| cx.is_invariant(e)) {
        return;
    }
    let singular = cx.singular_curves_through(p);
    if singular.len() != 3 {
        return;
    }
    let (i, j) = (comps[0], comps[1]);
    let corner = corner_between(cx, p, i, j);
    let trace_of = |e: ComponentId, other: ComponentId| {
        singular.iter().copied().find(|&c| {
            cx.curve(c).housing.contains(&e) && !cx.curve(c).housing.contains(&other)
        })
    };
    let (corner, trace_i, trace_j) = match (corner, trace_of(i, j), trace_of(j, i)) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return,
    };
    match (
        cx.curve_index(corner, i),
        cx.curve_index(trace_i, i),
        cx.curve_index(trace_j, j),
    ) {
        (Some(alpha), Some(beta), Some(rho)) => {
            if *beta == -&(alpha * rho) {
                rep.check_ok();
            } else {
                rep.fail(
                    "triple_relation",
                    &cx.point(p).name,
                    format!(
                        "trace indices across {}: expected {}, stored {}",
                        cx.curve(corner).name,
                        (-&(alpha * rho)).render(),
                        beta.render()
                    ),
                );
            }
        }
        _ => rep.fail(
            "triple_relation",
            &cx.point(p).name,
            "a curve through this final point has no stored side index",
        ),
    }
}

fn five_case_at(cx: &Complex, p: PointId, rep: &mut Report) {
    if !cx.point_alive_at(p, cx.levels()) {
        return;
    }
    let classes: Vec<IndexClass> = cx
        .singular_curves_through(p)
        .iter()
        .filter_map(|&c| cx.curve_class(c))
        .collect();
    if classes.len() != 3 {
        return;
    }
    if crate::complex::triple_case(&classes).is_some() {
        rep.check_ok();
    } else {
        rep.fail(
            "five_case",
            &cx.point(p).name,
            "curve classes at this final point match none of the five cases",
        );
    }
}

/// Every stored restricted-foliation value on a dicritical contact curve
/// equals the weighted branch sum on the invariant side, and points
/// without a stored value have branch sum zero.
pub fn check_dicritical_restriction(cx: &Complex) -> Report {
    let mut rep = Report::new();
    let curves: Vec<CurveId> = cx
        .curve_ids()
        .filter(|&c| {
            let rec = cx.curve(c);
            rec.housing.len() == 2
                && rec.housing.iter().any(|&h| cx.is_invariant(h))
                && rec.housing.iter().any(|&h| cx.comp(h).nature == Nature::Dicritical)
        })
        .collect();
    let subs = par::map_collect(&curves, |&c| {
        let mut rep = Report::new();
        let inv = cx
            .curve(c)
            .housing
            .iter()
            .copied()
            .find(|&h| cx.is_invariant(h))
            .unwrap();
        for q in cx.point_ids() {
            if cx.point(q).retracted || !cx.point(q).curves.contains(&c) {
                continue;
            }
            let k = cx.point(q).birth_level;
            let computed = match weighted_index_sum(cx, k, q, inv, c, None) {
                Ok(s) => s.value,
                Err(e) => {
                    rep.fail("dicritical_restriction", &cx.point(q).name, e.to_string());
                    continue;
                }
            };
            match cx.restricted_index(c, q) {
                Some(stored) if *stored == computed => rep.check_ok(),
                Some(stored) => rep.fail(
                    "dicritical_restriction",
                    format!("{} at {}", cx.curve(c).name, cx.point(q).name),
                    format!("stored {}, branch sum {}", stored.render(), computed.render()),
                ),
                None if computed.is_zero() => rep.check_ok(),
                None => rep.fail(
                    "dicritical_restriction",
                    format!("{} at {}", cx.curve(c).name, cx.point(q).name),
                    format!("no stored value for nonzero branch sum {}", computed.render()),
                ),
            }
        }
        rep
    });
    for sub in subs {
        rep.merge(sub);
    }
    rep.sorted()
}

/// Tracked points born at step `s`, all of which sit over its base point.
fn step_children(cx: &Complex, s: u32) -> Vec<PointId> {
    cx.point_ids()
        .filter(|&q| {
            let rec = cx.point(q);
            !rec.retracted && rec.birth_level == s
        })
        .collect()
}

/// Sum rules created by each point blow-up: +1 along the lines of a new
/// dicritical plane, -1 along the lines inside older dicritical planes,
/// and the degree-weighted plane sum -1 with Bezout degree validation on
/// non-dicritical steps.
pub fn check_line_sums(cx: &Complex) -> Report {
    let mut rep = Report::new();
    let steps: Vec<u32> = (1..=cx.levels())
        .filter(|&s| matches!(cx.step(s).center, Center::Point(_)))
        .collect();
    let subs = par::map_collect(&steps, |&s| {
        let mut rep = Report::new();
        let step = cx.step(s);
        let children = step_children(cx, s);
        let lines: Vec<CurveId> = cx
            .curve_ids()
            .filter(|&c| {
                cx.curve(c).birth_level == s
                    && matches!(cx.curve(c).born_of, BornOf::Line { .. })
            })
            .collect();
        let old_side = |line: CurveId| {
            cx.curve(line)
                .housing
                .iter()
                .copied()
                .find(|&h| h != step.component)
                .unwrap()
        };
        if step.dicritical {
            for &line in &lines {
                let e = old_side(line);
                if !cx.is_invariant(e) {
                    continue;
                }
                line_sum_check(cx, &children, line, e, Scalar::one(), "line_sum_new_plane", &mut rep);
            }
        } else {
            for &line in &lines {
                let e = old_side(line);
                if cx.comp(e).nature != Nature::Dicritical {
                    continue;
                }
                line_sum_check(
                    cx,
                    &children,
                    line,
                    step.component,
                    Scalar::from_integer(-1),
                    "line_sum_strict_side",
                    &mut rep,
                );
            }
            plane_sum_check(cx, s, &children, &lines, &mut rep);
        }
        rep
    });
    for sub in subs {
        rep.merge(sub);
    }
    rep.sorted()
}

/// Branch sums toward `line` on the `side` component, totaled over the
/// points of the line born with it.
fn line_sum_check(
    cx: &Complex,
    children: &[PointId],
    line: CurveId,
    side: ComponentId,
    expected: Scalar,
    check: &str,
    rep: &mut Report,
) {
    let mut total = Scalar::zero();
    for &q in children {
        if !cx.point(q).curves.contains(&line) {
            continue;
        }
        match weighted_index_sum(cx, cx.point(q).birth_level, q, side, line, None) {
            Ok(sum) => total = &total + &sum.value,
            Err(e) => {
                rep.fail(check, &cx.curve(line).name, e.to_string());
                return;
            }
        }
    }
    if total == expected {
        rep.check_ok();
    } else {
        rep.fail(
            check,
            &cx.curve(line).name,
            format!("sums to {} instead of {}", total.render(), expected.render()),
        );
    }
}

fn plane_sum_check(
    cx: &Complex,
    s: u32,
    children: &[PointId],
    lines: &[CurveId],
    rep: &mut Report,
) {
    let plane = cx.step(s).component;
    let in_plane: Vec<CurveId> = cx
        .curve_ids()
        .filter(|&c| cx.curve(c).birth_level == s && cx.curve(c).housing.contains(&plane))
        .collect();
    let mut total = Scalar::zero();
    let mut complete = true;
    for &c in in_plane.iter().filter(|&&c| cx.curve(c).singular) {
        let degree = match cx.curve(c).degree {
            Some(d) => d,
            None => {
                rep.fail("plane_sum", &cx.curve(c).name, "no stored degree");
                complete = false;
                continue;
            }
        };
        match cx.curve_index(c, plane) {
            Some(idx) => {
                total = &total + &(&Scalar::from_integer(degree as i64) * idx);
            }
            None => {
                rep.fail("plane_sum", &cx.curve(c).name, "no stored plane-side index");
                complete = false;
            }
        }
    }
    if complete {
        if total == Scalar::from_integer(-1) {
            rep.check_ok();
        } else {
            rep.fail(
                "plane_sum",
                &cx.comp(plane).name,
                format!("degree-weighted sum is {} instead of -1", total.render()),
            );
        }
    }
    // Bezout: inside the plane, a curve of degree d meets every line in d
    // points counted with multiplicity.
    for &c in &in_plane {
        let degree = match cx.curve(c).degree {
            Some(d) => d as u64,
            None => continue,
        };
        for &line in lines {
            if line == c {
                continue;
            }
            let mut count = 0u64;
            for &q in children {
                let rec = cx.point(q);
                if rec.curves.contains(&c) && rec.curves.contains(&line) {
                    count += noether_multiplicity(cx, c, line, q).unwrap_or(0);
                }
            }
            if count == degree {
                rep.check_ok();
            } else {
                rep.fail(
                    "bezout_degree",
                    &cx.curve(c).name,
                    format!(
                        "meets {} with total multiplicity {} against degree {}",
                        cx.curve(line).name,
                        count,
                        degree
                    ),
                );
            }
        }
    }
}

/// At every corner of two compact invariant components that is complete
/// for a separatrix, the separatrix branch sums on the two sides are
/// proportional by the negated corner index.
pub fn check_trace_transition(cx: &Complex) -> Report {
    let mut rep = Report::new();
    let seps = partial_separatrices(cx);
    let points: Vec<PointId> = cx.point_ids().filter(|&p| !cx.point(p).retracted).collect();
    let subs = par::map_collect(&points, |&p| {
        let mut rep = Report::new();
        let corners: Vec<CurveId> = cx
            .point(p)
            .curves
            .iter()
            .copied()
            .filter(|&c| {
                let rec = cx.curve(c);
                rec.singular
                    && rec.housing.len() == 2
                    && rec.housing.iter().all(|&h| cx.comp(h).compact && cx.is_invariant(h))
            })
            .collect();
        if corners.is_empty() {
            return rep;
        }
        let k = cx.point(p).birth_level;
        for &corner in &corners {
            let (i, j) = (cx.curve(corner).housing[0], cx.curve(corner).housing[1]);
            for sep in &seps {
                if !sep.meets(cx, k, p) || is_complete_at(cx, sep, k, p) != Ok(true) {
                    continue;
                }
                let alpha = match cx.curve_index(corner, i) {
                    Some(v) => v.clone(),
                    None => {
                        rep.fail(
                            "trace_transition",
                            &cx.curve(corner).name,
                            "corner has no stored side index",
                        );
                        continue;
                    }
                };
                let sums = (
                    weighted_index_sum(cx, k, p, i, corner, Some(sep)),
                    weighted_index_sum(cx, k, p, j, corner, Some(sep)),
                );
                match sums {
                    (Ok(si), Ok(sj)) => {
                        if si.value == -&(&alpha * &sj.value) {
                            rep.check_ok();
                        } else {
                            rep.fail(
                                "trace_transition",
                                format!("{} at {} for {}", cx.curve(corner).name, cx.point(p).name, sep.name),
                                format!(
                                    "side sums {} and {} break the transition by {}",
                                    si.value.render(),
                                    sj.value.render(),
                                    alpha.render()
                                ),
                            );
                        }
                    }
                    (Err(e), _) | (_, Err(e)) => {
                        rep.fail(
                            "trace_transition",
                            format!("{} at {}", cx.curve(corner).name, cx.point(p).name),
                            e.to_string(),
                        );
                    }
                }
            }
        }
        rep
    });
    for sub in subs {
        rep.merge(sub);
    }
    rep.sorted()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{EntityRef, PSpec};

    /// Two plane traces over a blown-up point: one separated from the
    /// reference trace, one still meeting it once upstairs.
    fn two_level_fixture() -> (Complex, CurveId, CurveId, CurveId, PointId, ComponentId) {
        let mut cx = Complex::new_ambient("T");
        cx.mark_singular(EntityRef::Point(cx.origin())).unwrap();
        cx.blow_up_point(cx.origin(), false).unwrap();
        let e1 = match cx.lookup("E1").unwrap() {
            EntityRef::Component(e) => e,
            _ => unreachable!(),
        };
        let z = cx.declare_point(PSpec::Inside("E1".to_string())).unwrap();
        let zname = cx.point(z).name.clone();
        let g = cx
            .declare_trace("G", e1, Some(1), vec![PSpec::Named(zname.clone())])
            .unwrap();
        let a = cx
            .declare_trace("A", e1, Some(1), vec![PSpec::Named(zname.clone())])
            .unwrap();
        let b = cx.declare_trace("B", e1, Some(1), vec![PSpec::Named(zname)]).unwrap();
        cx.mark_singular(EntityRef::Point(z)).unwrap();
        cx.blow_up_point(z, false).unwrap();
        cx.land_together(b, g).unwrap();
        (cx, g, a, b, z, e1)
    }

    #[test]
    fn noether_separated_and_surviving_crossings() {
        let (cx, g, a, b, z, _) = two_level_fixture();
        assert_eq!(noether_multiplicity(&cx, a, g, z).unwrap(), 1);
        assert_eq!(noether_multiplicity(&cx, b, g, z).unwrap(), 2);
        assert_eq!(noether_multiplicity(&cx, a, b, z).unwrap(), 1);
    }

    #[test]
    fn noether_rejects_self_and_disjoint_queries() {
        let (cx, g, a, b, z, _) = two_level_fixture();
        assert!(noether_multiplicity(&cx, g, g, z).is_err());
        let qa = cx
            .point_ids()
            .find(|&q| cx.point(q).birth_level == 2 && cx.point(q).curves.contains(&a))
            .unwrap();
        assert!(noether_multiplicity(&cx, b, g, qa).is_err());
    }

    #[test]
    fn weighted_sum_aggregates_multiplicities() {
        let (mut cx, g, a, b, z, e1) = two_level_fixture();
        cx.assign_index(a, e1, Scalar::from_integer(-2)).unwrap();
        cx.assign_index(b, e1, Scalar::from_integer(-3)).unwrap();
        let sum = weighted_index_sum(&cx, 1, z, e1, g, None).unwrap();
        assert_eq!(sum.value, Scalar::from_integer(-8));
        assert_eq!(sum.terms.len(), 2);

        let qa = cx
            .point_ids()
            .find(|&q| cx.point(q).birth_level == 2 && cx.point(q).curves.contains(&a))
            .unwrap();
        let line = cx
            .point(qa)
            .curves
            .iter()
            .copied()
            .find(|&c| matches!(cx.curve(c).born_of, BornOf::Line { .. }))
            .unwrap();
        let single = weighted_index_sum(&cx, 2, qa, e1, line, None).unwrap();
        assert_eq!(single.value, Scalar::from_integer(-2));
    }

    #[test]
    fn noether_is_depth_independent_under_further_blowup() {
        let (mut cx, g, _, b, z, _) = two_level_fixture();
        // Blow up the surviving crossing of B and G; the multiplicity at
        // the old point is unchanged by deeper resolution.
        let q = cx
            .point_ids()
            .find(|&q| {
                cx.point(q).birth_level == 2
                    && cx.point(q).curves.contains(&b)
                    && cx.point(q).curves.contains(&g)
            })
            .unwrap();
        cx.mark_singular(EntityRef::Point(q)).unwrap();
        cx.blow_up_point(q, false).unwrap();
        assert_eq!(noether_multiplicity(&cx, b, g, z).unwrap(), 2);
    }

    #[test]
    fn corner_reciprocity_from_derived_side() {
        let (mut cx, _, a, _, _, e1) = two_level_fixture();
        let qa = cx
            .point_ids()
            .find(|&q| cx.point(q).birth_level == 2 && cx.point(q).curves.contains(&a))
            .unwrap();
        cx.mark_singular(EntityRef::Point(qa)).unwrap();
        cx.blow_up_point(qa, false).unwrap();
        let l21 = match cx.lookup("L(2,1)").unwrap() {
            EntityRef::Curve(c) => c,
            _ => unreachable!(),
        };
        let e2 = match cx.lookup("E2").unwrap() {
            EntityRef::Component(e) => e,
            _ => unreachable!(),
        };
        cx.assign_index(l21, e1, Scalar::i()).unwrap();
        assert_eq!(cx.curve_index(l21, e2), Some(&-&Scalar::i()));
        assert!(check_corner_reciprocity(&cx).passed());
        // A conflicting explicit value for the derived slot is rejected.
        assert!(cx.assign_index(l21, e2, Scalar::i()).is_err());
    }

    #[test]
    fn triple_case_enumeration_is_exhaustive() {
        assert_eq!(enumerate_triple_cases(), (1..=5).collect::<BTreeSet<u8>>());
    }

    #[test]
    fn batch_assignment_rejects_invalid_final_class() {
        let (mut cx, _, a, _, _, e1) = two_level_fixture();
        let mut good = BTreeMap::new();
        good.insert((a, e1), Scalar::from_integer(-2));
        assign_indices(&mut cx, &good).unwrap();

        let (mut cx2, _, a2, _, _, e12) = two_level_fixture();
        let mut bad = BTreeMap::new();
        bad.insert((a2, e12), Scalar::from_integer(3));
        assert!(assign_indices(&mut cx2, &bad).is_err());
    }
}
