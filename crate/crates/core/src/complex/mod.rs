//! Exceptional-divisor complexes.
//!
//! A complex is the combinatorial record of a finite sequence of blow-ups
//! over a three-dimensional ambient germ.  Level `0` is the germ with its
//! single tracked point, the origin.  Step `k` (numbered from `1`) blows up
//! a center chosen at level `k-1` and produces level `k`.  The entities are
//!
//! * components: the irreducible divisor pieces, one per step, which never
//!   die once created;
//! * curves: tracked one-dimensional loci (intersection curves of two
//!   components, declared singular curves, fibers of curve blow-ups), which
//!   die exactly when they are used as a center;
//! * points: tracked crossings and declared attachment points, which die
//!   when a center passes through them.
//!
//! All construction goes through [`Record`] values applied in order; the
//! record log is the canonical serialized form of the complex.  Entity
//! tables are append-only: applying a record never changes how an already
//! closed level looks through the query API.

mod build;
mod validate;

use std::collections::{BTreeMap, BTreeSet};

use crate::scalar::{IndexClass, Scalar};

pub use build::{BuildError, PSpec, Record};

/// Identifier of a divisor component, indexing into the component table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ComponentId(pub u32);

/// Identifier of a tracked curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CurveId(pub u32);

/// Identifier of a tracked point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointId(pub u32);

/// A reference to any entity of the complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityRef {
    Component(ComponentId),
    Curve(CurveId),
    Point(PointId),
}

/// Whether a component is generically transverse to the foliation or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nature {
    Invariant,
    Dicritical,
}

/// Structural role of a curve, derived from its housing and whether it was
/// declared singular.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    /// Intersection of two invariant components.
    Corner,
    /// Singular curve inside exactly one invariant component.
    Trace,
    /// Singular curve contained in no component.
    Germ,
    /// Not part of the singular locus.
    NonSingular,
}

/// What created a component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Center {
    Point(PointId),
    Curve(CurveId),
}

/// What a curve collapses to one level below its birth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BornOf {
    /// Intersection line of a new plane with an older component.
    Line { center: PointId },
    /// Fiber of a curve blow-up over the base point of the center.
    Fiber { base: PointId },
    /// Section curve mapping isomorphically onto a blown-up curve.
    Section { continued: CurveId },
    /// Declared at a level created by a point blow-up.
    DeclaredOverPoint { base: PointId },
    /// Declared at a level created by a curve blow-up; such curves follow
    /// the center under blow-down.
    DeclaredOverCurve { continued: CurveId },
    /// Declared at level zero.
    Root,
}

#[derive(Debug, Clone)]
pub struct ComponentRec {
    pub name: String,
    /// Step that created the component; also the first level where it exists.
    pub birth_step: u32,
    pub compact: bool,
    pub nature: Nature,
    /// True when the component is a projective plane from a point blow-up.
    pub plane: bool,
    pub center: Center,
}

#[derive(Debug, Clone)]
pub struct CurveRec {
    pub name: String,
    pub birth_level: u32,
    /// Step that used the curve as a center, if any.
    pub death_step: Option<u32>,
    /// Components containing the curve, sorted, at most two.
    pub housing: Vec<ComponentId>,
    pub compact: bool,
    pub singular: bool,
    pub born_of: BornOf,
    /// Projective degree inside `plane`, for curves lying in a plane.
    pub degree: Option<u32>,
    pub plane: Option<ComponentId>,
    /// Index of the foliation along the curve, relative to each invariant
    /// housing component.  Constant across levels: the value is computed at
    /// a generic point of the curve and strict transforms preserve it.
    pub index_by_side: BTreeMap<ComponentId, Scalar>,
    /// Root curve of the equireduction lineage this curve sits over.
    pub lineage: Option<CurveId>,
}

#[derive(Debug, Clone)]
pub struct PointRec {
    pub name: String,
    pub birth_level: u32,
    pub death_step: Option<u32>,
    /// Components through the point, sorted.  Frozen at the birth level.
    pub comps: Vec<ComponentId>,
    /// Tracked curves through the point, sorted.  Frozen at the birth level.
    pub curves: Vec<CurveId>,
    /// Base point of the step that created this point's level.
    pub created_over: Option<PointId>,
    pub lineage: Option<CurveId>,
    /// Curve whose automatic landing created this point, while the point is
    /// still mergeable at its birth level.
    pub auto_landing_of: Option<CurveId>,
    /// True when the point was merged away at its birth level.
    pub retracted: bool,
}

#[derive(Debug, Clone)]
pub struct Step {
    pub center: Center,
    pub dicritical: bool,
    pub component: ComponentId,
    /// The center itself for point steps, the single point where the center
    /// meets the compact core for curve steps.
    pub base_point: PointId,
}

/// Dimensional type of the singular locus at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimensionalType {
    Regular,
    Two,
    Three,
}

/// Incidence data of a point at a level.
#[derive(Debug, Clone)]
pub struct Locus {
    pub comps: Vec<(ComponentId, Nature)>,
    pub singular_curves: Vec<CurveId>,
    pub dimensional_type: DimensionalType,
    /// Classification by the multiset of curve classes when exactly three
    /// singular curves meet and all carry a class.
    pub case: Option<u8>,
}

/// Image of an entity under blow-down to an earlier level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Image {
    Point(PointId),
    Curve(CurveId),
    Component(ComponentId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryError(pub String);

impl std::fmt::Display for QueryError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for QueryError {}

#[derive(Debug, Clone)]
pub struct Complex {
    pub(crate) name: String,
    pub(crate) all_separatrices_incomplete: bool,
    pub(crate) comps: Vec<ComponentRec>,
    pub(crate) curves: Vec<CurveRec>,
    pub(crate) points: Vec<PointRec>,
    pub(crate) steps: Vec<Step>,
    pub(crate) singstar: BTreeSet<(u32, EntityRef)>,
    pub(crate) restricted: BTreeMap<(CurveId, PointId), Scalar>,
    pub(crate) by_name: BTreeMap<String, EntityRef>,
    pub(crate) records: Vec<Record>,
    pub(crate) name_ordinals: BTreeMap<String, u32>,
    pub(crate) derived_indices: BTreeSet<(CurveId, ComponentId)>,
    pub(crate) flag_set: bool,
}

impl Complex {
    /// Level zero of a named ambient germ: one tracked point, the origin.
    pub fn new_ambient(name: &str) -> Complex {
        let mut cx = Complex {
            name: name.to_string(),
            all_separatrices_incomplete: false,
            comps: Vec::new(),
            curves: Vec::new(),
            points: Vec::new(),
            steps: Vec::new(),
            singstar: BTreeSet::new(),
            restricted: BTreeMap::new(),
            by_name: BTreeMap::new(),
            records: Vec::new(),
            name_ordinals: BTreeMap::new(),
            derived_indices: BTreeSet::new(),
            flag_set: false,
        };
        cx.records.push(Record::Ambient { name: name.to_string() });
        let origin = PointRec {
            name: "O".to_string(),
            birth_level: 0,
            death_step: None,
            comps: Vec::new(),
            curves: Vec::new(),
            created_over: None,
            lineage: None,
            auto_landing_of: None,
            retracted: false,
        };
        cx.by_name.insert("O".to_string(), EntityRef::Point(PointId(0)));
        cx.points.push(origin);
        cx
    }

    pub fn ambient_name(&self) -> &str {
        &self.name
    }

    /// Number of blow-up steps; levels run from `0` to this value.
    pub fn levels(&self) -> u32 {
        self.steps.len() as u32
    }

    pub fn all_separatrices_incomplete(&self) -> bool {
        self.all_separatrices_incomplete
    }

    pub fn comp(&self, id: ComponentId) -> &ComponentRec {
        &self.comps[id.0 as usize]
    }

    pub fn curve(&self, id: CurveId) -> &CurveRec {
        &self.curves[id.0 as usize]
    }

    pub fn point(&self, id: PointId) -> &PointRec {
        &self.points[id.0 as usize]
    }

    /// Step `s`, numbered from 1.
    pub fn step(&self, s: u32) -> &Step {
        &self.steps[(s - 1) as usize]
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn lookup(&self, name: &str) -> Option<EntityRef> {
        self.by_name.get(name).copied()
    }

    pub fn origin(&self) -> PointId {
        PointId(0)
    }

    pub fn entity_name(&self, e: EntityRef) -> &str {
        match e {
            EntityRef::Component(id) => &self.comp(id).name,
            EntityRef::Curve(id) => &self.curve(id).name,
            EntityRef::Point(id) => &self.point(id).name,
        }
    }

    pub fn comp_ids(&self) -> impl Iterator<Item = ComponentId> {
        (0..self.comps.len() as u32).map(ComponentId)
    }

    pub fn curve_ids(&self) -> impl Iterator<Item = CurveId> {
        (0..self.curves.len() as u32).map(CurveId)
    }

    pub fn point_ids(&self) -> impl Iterator<Item = PointId> {
        (0..self.points.len() as u32).map(PointId)
    }

    pub fn comp_alive_at(&self, id: ComponentId, k: u32) -> bool {
        self.comp(id).birth_step <= k
    }

    pub fn curve_alive_at(&self, id: CurveId, k: u32) -> bool {
        let c = self.curve(id);
        c.birth_level <= k && c.death_step.map_or(true, |d| d > k)
    }

    pub fn point_alive_at(&self, id: PointId, k: u32) -> bool {
        let p = self.point(id);
        !p.retracted && p.birth_level <= k && p.death_step.map_or(true, |d| d > k)
    }

    pub fn comps_at(&self, k: u32) -> Vec<ComponentId> {
        self.comp_ids().filter(|&c| self.comp_alive_at(c, k)).collect()
    }

    pub fn curves_at(&self, k: u32) -> Vec<CurveId> {
        self.curve_ids().filter(|&c| self.curve_alive_at(c, k)).collect()
    }

    pub fn points_at(&self, k: u32) -> Vec<PointId> {
        self.point_ids().filter(|&p| self.point_alive_at(p, k)).collect()
    }

    pub fn is_invariant(&self, id: ComponentId) -> bool {
        self.comp(id).nature == Nature::Invariant
    }

    /// Derived structural role of a curve.
    pub fn curve_kind(&self, id: CurveId) -> CurveKind {
        let c = self.curve(id);
        let inv_sides = c.housing.iter().filter(|&&h| self.is_invariant(h)).count();
        match (c.housing.len(), inv_sides, c.singular) {
            (2, 2, _) => CurveKind::Corner,
            (1, 1, true) => CurveKind::Trace,
            (0, 0, true) => CurveKind::Germ,
            _ => CurveKind::NonSingular,
        }
    }

    /// Class of a singular curve, read off any assigned side index.
    /// Reciprocals share a class, so the choice of side does not matter for
    /// a consistent complex.
    pub fn curve_class(&self, id: CurveId) -> Option<IndexClass> {
        let c = self.curve(id);
        c.index_by_side.values().next().and_then(|v| v.classify())
    }

    pub fn curve_index(&self, id: CurveId, side: ComponentId) -> Option<&Scalar> {
        self.curve(id).index_by_side.get(&side)
    }

    pub fn restricted_index(&self, curve: CurveId, point: PointId) -> Option<&Scalar> {
        self.restricted.get(&(curve, point))
    }

    pub fn restricted_entries(&self) -> impl Iterator<Item = (&(CurveId, PointId), &Scalar)> {
        self.restricted.iter()
    }

    pub fn singstar_at(&self, k: u32) -> Vec<EntityRef> {
        self.singstar
            .iter()
            .filter(|(level, _)| *level == k)
            .map(|(_, e)| *e)
            .collect()
    }

    pub fn is_marked(&self, k: u32, e: EntityRef) -> bool {
        self.singstar.contains(&(k, e))
    }

    /// Singular curves through a point.  Incidence is frozen at the point's
    /// birth level and every incident curve outlives the point, so no level
    /// argument is needed.
    pub fn singular_curves_through(&self, p: PointId) -> Vec<CurveId> {
        self.point(p)
            .curves
            .iter()
            .copied()
            .filter(|&c| self.curve(c).singular)
            .collect()
    }

    /// Singular curves housed in `comp` through `p`: the branch set of the
    /// point on that component.
    pub fn branch_set(&self, p: PointId, comp: ComponentId) -> Vec<CurveId> {
        self.point(p)
            .curves
            .iter()
            .copied()
            .filter(|&c| self.curve(c).singular && self.curve(c).housing.contains(&comp))
            .collect()
    }

    /// Incidence data of a live point at level `k`.
    pub fn locus_at(&self, k: u32, p: PointId) -> Result<Locus, QueryError> {
        if !self.point_alive_at(p, k) {
            return Err(QueryError(format!(
                "point {} is not alive at level {}",
                self.point(p).name,
                k
            )));
        }
        let comps: Vec<(ComponentId, Nature)> = self
            .point(p)
            .comps
            .iter()
            .map(|&c| (c, self.comp(c).nature))
            .collect();
        let singular_curves = self.singular_curves_through(p);
        let dimensional_type = match singular_curves.len() {
            0 => DimensionalType::Regular,
            1 => DimensionalType::Two,
            _ => DimensionalType::Three,
        };
        let case = if singular_curves.len() == 3 {
            let classes: Option<Vec<IndexClass>> =
                singular_curves.iter().map(|&c| self.curve_class(c)).collect();
            classes.and_then(|cl| triple_case(&cl))
        } else {
            None
        };
        Ok(Locus { comps, singular_curves, dimensional_type, case })
    }

    /// Blow-down image of an entity at level `k`.  Strict transforms keep
    /// their identity; entities born later collapse through the centers
    /// that created them.
    pub fn image_at(&self, k: u32, e: EntityRef) -> Result<Image, QueryError> {
        match e {
            EntityRef::Point(p) => Ok(Image::Point(self.point_image_at(k, p)?)),
            EntityRef::Curve(c) => self.curve_image_at(k, c),
            EntityRef::Component(id) => {
                let comp = self.comp(id);
                if comp.birth_step <= k {
                    return Ok(Image::Component(id));
                }
                match comp.center {
                    Center::Point(p) => Ok(Image::Point(self.point_image_at(k, p)?)),
                    Center::Curve(c) => self.curve_image_at(k, c),
                }
            }
        }
    }

    pub fn point_image_at(&self, k: u32, mut p: PointId) -> Result<PointId, QueryError> {
        while self.point(p).birth_level > k {
            match self.point(p).created_over {
                Some(q) => p = q,
                None => {
                    return Err(QueryError(format!(
                        "point {} has no image at level {}",
                        self.point(p).name,
                        k
                    )))
                }
            }
        }
        Ok(p)
    }

    fn curve_image_at(&self, k: u32, mut c: CurveId) -> Result<Image, QueryError> {
        loop {
            if self.curve(c).birth_level <= k {
                return Ok(Image::Curve(c));
            }
            match self.curve(c).born_of {
                BornOf::Line { center } => return Ok(Image::Point(self.point_image_at(k, center)?)),
                BornOf::Fiber { base } | BornOf::DeclaredOverPoint { base } => {
                    return Ok(Image::Point(self.point_image_at(k, base)?))
                }
                BornOf::Section { continued } | BornOf::DeclaredOverCurve { continued } => {
                    c = continued
                }
                BornOf::Root => {
                    return Err(QueryError(format!(
                        "curve {} has no image at level {}",
                        self.curve(c).name,
                        k
                    )))
                }
            }
        }
    }

    /// Components whose full blow-down image at level `k` is the single
    /// point `p`.  Components born over curve centers project onto curves
    /// and never qualify.
    pub fn preimage_components(&self, k: u32, p: PointId) -> Vec<ComponentId> {
        self.comp_ids()
            .filter(|&id| {
                let comp = self.comp(id);
                if comp.birth_step <= k {
                    return false;
                }
                match comp.center {
                    Center::Point(q) => self.point_image_at(k, q) == Ok(p),
                    Center::Curve(_) => false,
                }
            })
            .collect()
    }

    /// Whether the blow-down image of `c` at level `k` passes through the
    /// live point `p`.  Collapsed curves pass exactly through the point
    /// they collapse onto.
    pub fn curve_image_meets(&self, c: CurveId, k: u32, p: PointId) -> bool {
        match self.curve_image_at(k, c) {
            Ok(Image::Curve(g)) => self.point(p).curves.contains(&g),
            Ok(Image::Point(q)) => q == p,
            _ => false,
        }
    }

    /// The live curve at level `k` that `c` maps onto, when the image is a
    /// curve rather than a collapsed point.
    pub fn curve_image_curve(&self, c: CurveId, k: u32) -> Option<CurveId> {
        match self.curve_image_at(k, c) {
            Ok(Image::Curve(g)) => Some(g),
            _ => None,
        }
    }

    /// Validates the whole sequence; see the module tests for the rules.
    pub fn validate_sequence(&self) -> crate::report::Report {
        validate::run(self)
    }
}

/// Case number for a triple of curve classes meeting at a point.  `None`
/// for the combinations that cannot occur at a valid final-level point.
pub fn triple_case(classes: &[IndexClass]) -> Option<u8> {
    use IndexClass::*;
    let mut n = 0;
    let mut rs = 0;
    let mut cs = 0;
    for c in classes {
        match c {
            Nodal => n += 1,
            RealSaddle => rs += 1,
            ComplexSaddle => cs += 1,
        }
    }
    match (n, rs, cs) {
        (2, 1, 0) => Some(1),
        (1, 0, 2) => Some(2),
        (0, 3, 0) => Some(3),
        (0, 1, 2) => Some(4),
        (0, 0, 3) => Some(5),
        _ => None,
    }
}

pub(crate) fn sorted_comps(mut v: Vec<ComponentId>) -> Vec<ComponentId> {
    v.sort();
    v.dedup();
    v
}

pub(crate) fn sorted_curves(mut v: Vec<CurveId>) -> Vec<CurveId> {
    v.sort();
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ambient_has_only_the_origin() {
        let cx = Complex::new_ambient("a");
        assert_eq!(cx.levels(), 0);
        assert_eq!(cx.points_at(0), vec![PointId(0)]);
        assert!(cx.comps_at(0).is_empty());
        assert_eq!(cx.entity_name(EntityRef::Point(cx.origin())), "O");
    }

    #[test]
    fn triple_cases_cover_exactly_five_combinations() {
        use IndexClass::*;
        let all = [Nodal, RealSaddle, ComplexSaddle];
        let mut seen = std::collections::BTreeSet::new();
        let mut none = 0;
        for a in all {
            for b in all {
                for c in all {
                    match triple_case(&[a, b, c]) {
                        Some(n) => {
                            seen.insert(n);
                        }
                        None => none += 1,
                    }
                }
            }
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
        // The five cases cover 11 of the 27 ordered triples; the other 16
        // combinations do not occur at a valid final-level point.
        assert_eq!(none, 16);
    }
}
