//! Record application: the single construction engine behind the builder
//! API, the scenario parser and the generator.
//!
//! Aftermath of a point blow-up at `p`:
//! * a new compact plane component;
//! * one intersection line per component through `p`, of degree one;
//! * for each pair of components through `p`, the crossing of their two
//!   lines together with the strict transform of the unique curve housed by
//!   that pair;
//! * every other curve through `p` lands at its own fresh point, on the
//!   line of its housing component or in the plane's interior for germs.
//!
//! Aftermath of a curve blow-up along `Y` with base point `p = Y cap F`:
//! * a new non-compact invariant component;
//! * the compact fiber over `p`, housed together with the component of
//!   `p.comps` not containing `Y` when there is one;
//! * for each housing component of `Y`, a section curve mapping onto `Y`
//!   and its section point on the fiber, through which every curve of that
//!   component through `p` continues;
//! * all remaining curves through `p` land at fresh fiber points.

use super::*;
use crate::scalar::Scalar;

/// How a declaration picks a point: an existing point of the current level,
/// a fresh point on a curve born at the current level, or a fresh interior
/// point of a component born at the current level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PSpec {
    Named(String),
    OnCurve(String),
    Inside(String),
}

/// One line of a scenario: the unit of construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Record {
    Ambient { name: String },
    Flag { all_separatrices_incomplete: bool },
    StepPoint { level: u32, point: String, dicritical: bool },
    StepCurve { level: u32, curve: String },
    Germ { id: String, at: PSpec },
    Trace { id: String, comp: String, degree: Option<u32>, at: Vec<PSpec> },
    FreshPoint { spec: PSpec },
    Land { curve: String, with: String },
    Index { curve: String, side: String, value: Scalar },
    Restricted { curve: String, point: String, value: Scalar },
    SingStar { level: u32, entity: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildError(pub String);

impl std::fmt::Display for BuildError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BuildError {}

fn err<T>(msg: String) -> Result<T, BuildError> {
    Err(BuildError(msg))
}

impl Complex {
    /// Applies one record, growing the current level or closing it with a
    /// step.  All builder methods funnel through here.  A failed record
    /// leaves the complex exactly as it was.
    pub fn apply(&mut self, record: Record) -> Result<(), BuildError> {
        let mut next = self.clone();
        next.apply_inner(record)?;
        *self = next;
        Ok(())
    }

    /// Rebuilds a complex from scratch by replaying a record log.
    pub fn replay(records: &[Record]) -> Result<Complex, BuildError> {
        let mut iter = records.iter();
        let mut cx = match iter.next() {
            Some(Record::Ambient { name }) => Complex::new_ambient(name),
            _ => return err("a record log opens with the ambient record".to_string()),
        };
        for r in iter {
            cx.apply(r.clone())?;
        }
        Ok(cx)
    }

    fn apply_inner(&mut self, record: Record) -> Result<(), BuildError> {
        match record.clone() {
            Record::Ambient { .. } => {
                return err("ambient is fixed at construction".to_string());
            }
            Record::Flag { all_separatrices_incomplete } => {
                if self.flag_set {
                    return err("flag declared twice".to_string());
                }
                self.flag_set = true;
                self.all_separatrices_incomplete = all_separatrices_incomplete;
            }
            Record::StepPoint { level, point, dicritical } => {
                self.apply_step_point(level, &point, dicritical)?;
            }
            Record::StepCurve { level, curve } => {
                self.apply_step_curve(level, &curve)?;
            }
            Record::Germ { id, at } => {
                self.apply_germ(&id, &at)?;
            }
            Record::Trace { id, comp, degree, at } => {
                self.apply_trace(&id, &comp, degree, &at)?;
            }
            Record::FreshPoint { spec } => {
                self.resolve_pspec(&spec, true)?;
            }
            Record::Land { curve, with } => {
                self.apply_land(&curve, &with)?;
            }
            Record::Index { curve, side, value } => {
                self.apply_index(&curve, &side, value)?;
            }
            Record::Restricted { curve, point, value } => {
                self.apply_restricted(&curve, &point, value)?;
            }
            Record::SingStar { level, entity } => {
                self.apply_singstar(level, &entity)?;
            }
        }
        self.records.push(record);
        Ok(())
    }

    /// Closes the current level by blowing up the point `p`.
    pub fn blow_up_point(&mut self, p: PointId, dicritical: bool) -> Result<(), BuildError> {
        let level = self.levels() + 1;
        let point = self.point(p).name.clone();
        self.apply(Record::StepPoint { level, point, dicritical })
    }

    /// Closes the current level by blowing up the curve `y`.
    pub fn blow_up_curve(&mut self, y: CurveId) -> Result<(), BuildError> {
        let level = self.levels() + 1;
        let curve = self.curve(y).name.clone();
        self.apply(Record::StepCurve { level, curve })
    }

    pub fn declare_germ(&mut self, id: &str, at: PSpec) -> Result<CurveId, BuildError> {
        self.apply(Record::Germ { id: id.to_string(), at })?;
        Ok(CurveId(self.curves.len() as u32 - 1))
    }

    pub fn declare_trace(
        &mut self,
        id: &str,
        comp: ComponentId,
        degree: Option<u32>,
        at: Vec<PSpec>,
    ) -> Result<CurveId, BuildError> {
        let comp = self.comp(comp).name.clone();
        self.apply(Record::Trace { id: id.to_string(), comp, degree, at })?;
        Ok(CurveId(self.curves.len() as u32 - 1))
    }

    pub fn declare_point(&mut self, spec: PSpec) -> Result<PointId, BuildError> {
        self.apply(Record::FreshPoint { spec })?;
        Ok(PointId(self.points.len() as u32 - 1))
    }

    pub fn land_together(&mut self, curve: CurveId, with: CurveId) -> Result<(), BuildError> {
        let curve = self.curve(curve).name.clone();
        let with = self.curve(with).name.clone();
        self.apply(Record::Land { curve, with })
    }

    pub fn assign_index(
        &mut self,
        curve: CurveId,
        side: ComponentId,
        value: Scalar,
    ) -> Result<(), BuildError> {
        let curve = self.curve(curve).name.clone();
        let side = self.comp(side).name.clone();
        self.apply(Record::Index { curve, side, value })
    }

    pub fn assign_restricted(
        &mut self,
        curve: CurveId,
        point: PointId,
        value: Scalar,
    ) -> Result<(), BuildError> {
        let curve = self.curve(curve).name.clone();
        let point = self.point(point).name.clone();
        self.apply(Record::Restricted { curve, point, value })
    }

    pub fn mark_singular(&mut self, entity: EntityRef) -> Result<(), BuildError> {
        let level = self.levels();
        let entity = self.entity_name(entity).to_string();
        self.apply(Record::SingStar { level, entity })
    }

    pub fn set_flag(&mut self, all_separatrices_incomplete: bool) -> Result<(), BuildError> {
        self.apply(Record::Flag { all_separatrices_incomplete })
    }

    fn lookup_point(&self, name: &str) -> Result<PointId, BuildError> {
        match self.lookup(name) {
            Some(EntityRef::Point(p)) => Ok(p),
            Some(_) => err(format!("{} is not a point", name)),
            None => err(format!("unknown point {}", name)),
        }
    }

    fn lookup_curve(&self, name: &str) -> Result<CurveId, BuildError> {
        match self.lookup(name) {
            Some(EntityRef::Curve(c)) => Ok(c),
            Some(_) => err(format!("{} is not a curve", name)),
            None => err(format!("unknown curve {}", name)),
        }
    }

    fn lookup_comp(&self, name: &str) -> Result<ComponentId, BuildError> {
        match self.lookup(name) {
            Some(EntityRef::Component(c)) => Ok(c),
            Some(_) => err(format!("{} is not a component", name)),
            None => err(format!("unknown component {}", name)),
        }
    }

    /// Registers a name, appending an ordinal when the base form is taken.
    fn alloc_name(&mut self, base: String, entity: EntityRef) -> String {
        let n = self.name_ordinals.entry(base.clone()).or_insert(0);
        *n += 1;
        let name = if *n == 1 { base } else { format!("{}:{}", base, *n) };
        self.by_name.insert(name.clone(), entity);
        name
    }

    fn push_point(&mut self, base_name: String, mut rec: PointRec) -> PointId {
        let id = PointId(self.points.len() as u32);
        rec.name = self.alloc_name(base_name, EntityRef::Point(id));
        rec.comps = sorted_comps(std::mem::take(&mut rec.comps));
        rec.curves = sorted_curves(std::mem::take(&mut rec.curves));
        self.points.push(rec);
        id
    }

    fn push_curve(&mut self, name: String, mut rec: CurveRec) -> Result<CurveId, BuildError> {
        if self.by_name.contains_key(&name) {
            return err(format!("duplicate id {}", name));
        }
        let id = CurveId(self.curves.len() as u32);
        rec.name = name.clone();
        rec.housing = sorted_comps(std::mem::take(&mut rec.housing));
        self.by_name.insert(name, EntityRef::Curve(id));
        self.curves.push(rec);
        Ok(id)
    }

    fn point_base_name(&self, curves: &[CurveId], comps: &[ComponentId]) -> String {
        let mut parts: Vec<&str> = if curves.is_empty() {
            comps.iter().map(|&c| self.comp(c).name.as_str()).collect()
        } else {
            curves.iter().map(|&c| self.curve(c).name.as_str()).collect()
        };
        parts.sort_unstable();
        format!("P({})", parts.join(","))
    }

    /// The base point of the step that created the current top level; every
    /// point born at that level blows down to it.
    fn current_base(&self) -> Option<PointId> {
        self.steps.last().map(|s| s.base_point)
    }

    fn resolve_pspec(&mut self, spec: &PSpec, _standalone: bool) -> Result<PointId, BuildError> {
        let level = self.levels();
        match spec {
            PSpec::Named(name) => {
                let p = self.lookup_point(name)?;
                if !self.point_alive_at(p, level) {
                    return err(format!("point {} is not alive at level {}", name, level));
                }
                if self.point(p).birth_level != level {
                    return err(format!(
                        "point {} was born at level {}; declarations only join points of the current level",
                        name,
                        self.point(p).birth_level
                    ));
                }
                Ok(p)
            }
            PSpec::OnCurve(name) => {
                let c = self.lookup_curve(name)?;
                if self.curve(c).birth_level != level {
                    return err(format!("curve {} was not born at the current level", name));
                }
                if !self.curve(c).compact {
                    return err(format!("fresh points must sit on compact curves, {} is not", name));
                }
                let comps = self.curve(c).housing.clone();
                let lineage = self.curve(c).lineage;
                let base = self.point_base_name(&[c], &comps);
                let id = self.push_point(
                    base,
                    PointRec {
                        name: String::new(),
                        birth_level: level,
                        death_step: None,
                        comps,
                        curves: vec![c],
                        created_over: self.current_base(),
                        lineage,
                        auto_landing_of: None,
                        retracted: false,
                    },
                );
                Ok(id)
            }
            PSpec::Inside(name) => {
                let e = self.lookup_comp(name)?;
                if self.comp(e).birth_step != level {
                    return err(format!("component {} was not born at the current level", name));
                }
                if !self.comp(e).compact {
                    return err(format!(
                        "fresh interior points need a compact component, {} is not",
                        name
                    ));
                }
                let base = self.point_base_name(&[], &[e]);
                let id = self.push_point(
                    base,
                    PointRec {
                        name: String::new(),
                        birth_level: level,
                        death_step: None,
                        comps: vec![e],
                        curves: Vec::new(),
                        created_over: self.current_base(),
                        lineage: None,
                        auto_landing_of: None,
                        retracted: false,
                    },
                );
                Ok(id)
            }
        }
    }

    fn apply_step_point(&mut self, level: u32, point: &str, dicritical: bool) -> Result<(), BuildError> {
        let s = self.levels() + 1;
        if level != s {
            return err(format!("step {} out of order, expected {}", level, s));
        }
        let p = self.lookup_point(point)?;
        if !self.point_alive_at(p, s - 1) {
            return err(format!("center {} is already dead", point));
        }
        if !self.is_marked(s - 1, EntityRef::Point(p)) {
            return err(format!("center {} is not in the marked singular set", point));
        }
        if self.point(p).lineage.is_some() {
            return err(format!(
                "center {} lies over a curve-center lineage; equireduction forbids point blow-ups there",
                point
            ));
        }
        let comps = self.point(p).comps.clone();
        let curves = self.point(p).curves.clone();

        // The unique curve housed by each pair of components through p.
        let mut pair_curves: Vec<(ComponentId, ComponentId, CurveId)> = Vec::new();
        for (a, &ci) in comps.iter().enumerate() {
            for &cj in comps.iter().skip(a + 1) {
                let shared: Vec<CurveId> = curves
                    .iter()
                    .copied()
                    .filter(|&x| self.curve(x).housing == vec![ci, cj])
                    .collect();
                if shared.len() != 1 {
                    return err(format!(
                        "expected exactly one curve housed by {} and {} through {}, found {}",
                        self.comp(ci).name,
                        self.comp(cj).name,
                        point,
                        shared.len()
                    ));
                }
                pair_curves.push((ci, cj, shared[0]));
            }
        }

        let new_comp = ComponentId(self.comps.len() as u32);
        let comp_name = format!("E{}", s);
        self.by_name.insert(comp_name.clone(), EntityRef::Component(new_comp));
        self.comps.push(ComponentRec {
            name: comp_name,
            birth_step: s,
            compact: true,
            nature: if dicritical { Nature::Dicritical } else { Nature::Invariant },
            plane: true,
            center: Center::Point(p),
        });

        let mut line_of: BTreeMap<ComponentId, CurveId> = BTreeMap::new();
        for &ci in &comps {
            let name = format!("L({},{})", s, self.comp(ci).birth_step);
            let singular = !dicritical && self.is_invariant(ci);
            let id = self.push_curve(
                name,
                CurveRec {
                    name: String::new(),
                    birth_level: s,
                    death_step: None,
                    housing: vec![ci, new_comp],
                    compact: true,
                    singular,
                    born_of: BornOf::Line { center: p },
                    degree: Some(1),
                    plane: Some(new_comp),
                    index_by_side: BTreeMap::new(),
                    lineage: None,
                },
            )?;
            line_of.insert(ci, id);
        }

        // Crossings of two lines carry the strict transform of the pair
        // curve; every remaining curve lands alone at a fresh point.
        let mut landed: BTreeSet<CurveId> = BTreeSet::new();
        for &(ci, cj, w) in &pair_curves {
            landed.insert(w);
            let li = line_of[&ci];
            let lj = line_of[&cj];
            let curves = vec![li, lj, w];
            let base = self.point_base_name(&curves, &[]);
            self.push_point(
                base,
                PointRec {
                    name: String::new(),
                    birth_level: s,
                    death_step: None,
                    comps: vec![ci, cj, new_comp],
                    curves,
                    created_over: Some(p),
                    lineage: None,
                    auto_landing_of: None,
                    retracted: false,
                },
            );
        }
        for &x in &curves {
            if landed.contains(&x) {
                continue;
            }
            let housed_here: Vec<ComponentId> = self
                .curve(x)
                .housing
                .iter()
                .copied()
                .filter(|h| comps.contains(h))
                .collect();
            let (pcomps, pcurves) = match housed_here.as_slice() {
                [ci] => (vec![*ci, new_comp], vec![line_of[ci], x]),
                [] => (vec![new_comp], vec![x]),
                _ => unreachable!("curves housed by two components through p are pair curves"),
            };
            let base = self.point_base_name(&pcurves, &[]);
            self.push_point(
                base,
                PointRec {
                    name: String::new(),
                    birth_level: s,
                    death_step: None,
                    comps: pcomps,
                    curves: pcurves,
                    created_over: Some(p),
                    lineage: None,
                    auto_landing_of: Some(x),
                    retracted: false,
                },
            );
        }

        self.points[p.0 as usize].death_step = Some(s);
        self.steps.push(Step {
            center: Center::Point(p),
            dicritical,
            component: new_comp,
            base_point: p,
        });
        Ok(())
    }

    fn apply_step_curve(&mut self, level: u32, curve: &str) -> Result<(), BuildError> {
        let s = self.levels() + 1;
        if level != s {
            return err(format!("step {} out of order, expected {}", level, s));
        }
        let y = self.lookup_curve(curve)?;
        if !self.curve_alive_at(y, s - 1) {
            return err(format!("center {} is already dead", curve));
        }
        if !self.is_marked(s - 1, EntityRef::Curve(y)) {
            return err(format!("center {} is not in the marked singular set", curve));
        }
        if self.curve(y).compact {
            return err(format!("center {} is compact; curve centers must be germs", curve));
        }
        let base: Vec<PointId> = self
            .point_ids()
            .filter(|&q| self.point_alive_at(q, s - 1) && self.point(q).curves.contains(&y))
            .collect();
        if base.len() != 1 {
            return err(format!(
                "center {} meets the compact core in {} points, expected one",
                curve,
                base.len()
            ));
        }
        let p = base[0];
        let s_comps = self.point(p).comps.clone();
        let housing = self.curve(y).housing.clone();
        let transversal: Vec<ComponentId> =
            s_comps.iter().copied().filter(|c| !housing.contains(c)).collect();
        if transversal.len() > 1 {
            return err(format!(
                "center {} violates normal crossings: two components through its base point do not contain it",
                curve
            ));
        }
        let compact_comps = s_comps.iter().filter(|&&c| self.comp(c).compact).count();
        if compact_comps > 1 {
            return err(format!(
                "base point of {} lies on two compact components; such points only admit point blow-ups",
                curve
            ));
        }
        let lineage = Some(self.curve(y).lineage.unwrap_or(y));

        let new_comp = ComponentId(self.comps.len() as u32);
        let comp_name = format!("E{}", s);
        self.by_name.insert(comp_name.clone(), EntityRef::Component(new_comp));
        self.comps.push(ComponentRec {
            name: comp_name,
            birth_step: s,
            compact: false,
            nature: Nature::Invariant,
            plane: false,
            center: Center::Curve(y),
        });

        let mut fiber_housing = vec![new_comp];
        fiber_housing.extend(transversal.iter().copied());
        let fiber_singular = transversal.iter().any(|&t| self.is_invariant(t));
        let fiber = self.push_curve(
            format!("F({})", s),
            CurveRec {
                name: String::new(),
                birth_level: s,
                death_step: None,
                housing: fiber_housing.clone(),
                compact: true,
                singular: fiber_singular,
                born_of: BornOf::Fiber { base: p },
                degree: None,
                plane: None,
                index_by_side: BTreeMap::new(),
                lineage,
            },
        )?;

        let old_curves = self.point(p).curves.clone();
        for &h in &housing {
            let section = self.push_curve(
                format!("X({},{})", self.comp(h).birth_step, s),
                CurveRec {
                    name: String::new(),
                    birth_level: s,
                    death_step: None,
                    housing: vec![h, new_comp],
                    compact: false,
                    singular: self.is_invariant(h),
                    born_of: BornOf::Section { continued: y },
                    degree: None,
                    plane: None,
                    index_by_side: BTreeMap::new(),
                    lineage,
                },
            )?;
            let mut pcurves = vec![section, fiber];
            for &x in &old_curves {
                if x != y && self.curve(x).housing.contains(&h) {
                    pcurves.push(x);
                }
            }
            let mut pcomps = vec![h, new_comp];
            pcomps.extend(transversal.iter().copied());
            let base_name = self.point_base_name(&pcurves, &[]);
            self.push_point(
                base_name,
                PointRec {
                    name: String::new(),
                    birth_level: s,
                    death_step: None,
                    comps: pcomps,
                    curves: pcurves,
                    created_over: Some(p),
                    lineage,
                    auto_landing_of: None,
                    retracted: false,
                },
            );
        }
        for &x in &old_curves {
            if x == y || self.curve(x).housing.iter().any(|h| housing.contains(h)) {
                continue;
            }
            let pcurves = vec![fiber, x];
            let base_name = self.point_base_name(&pcurves, &[]);
            self.push_point(
                base_name,
                PointRec {
                    name: String::new(),
                    birth_level: s,
                    death_step: None,
                    comps: fiber_housing.clone(),
                    curves: pcurves,
                    created_over: Some(p),
                    lineage,
                    auto_landing_of: Some(x),
                    retracted: false,
                },
            );
        }

        self.points[p.0 as usize].death_step = Some(s);
        self.curves[y.0 as usize].death_step = Some(s);
        self.steps.push(Step {
            center: Center::Curve(y),
            dicritical: false,
            component: new_comp,
            base_point: p,
        });
        Ok(())
    }

    fn declared_born_of(&self) -> BornOf {
        match self.steps.last() {
            None => BornOf::Root,
            Some(step) => match step.center {
                Center::Point(_) => BornOf::DeclaredOverPoint { base: step.base_point },
                Center::Curve(y) => BornOf::DeclaredOverCurve { continued: y },
            },
        }
    }

    fn apply_germ(&mut self, id: &str, at: &PSpec) -> Result<(), BuildError> {
        let level = self.levels();
        let q = self.resolve_pspec(at, false)?;
        let born_of = self.declared_born_of();
        let lineage = self.point(q).lineage;
        let c = self.push_curve(
            id.to_string(),
            CurveRec {
                name: String::new(),
                birth_level: level,
                death_step: None,
                housing: Vec::new(),
                compact: false,
                singular: true,
                born_of,
                degree: None,
                plane: None,
                index_by_side: BTreeMap::new(),
                lineage,
            },
        )?;
        let rec = &mut self.points[q.0 as usize];
        rec.curves.push(c);
        rec.curves = sorted_curves(std::mem::take(&mut rec.curves));
        Ok(())
    }

    fn apply_trace(
        &mut self,
        id: &str,
        comp: &str,
        degree: Option<u32>,
        at: &[PSpec],
    ) -> Result<(), BuildError> {
        let level = self.levels();
        let e = self.lookup_comp(comp)?;
        if self.comp(e).birth_step != level {
            return err(format!(
                "trace {} declared at level {}, but {} was born at level {}",
                id,
                level,
                comp,
                self.comp(e).birth_step
            ));
        }
        if !self.is_invariant(e) {
            return err(format!(
                "trace {} housed only in the dicritical component {}",
                id, comp
            ));
        }
        let plane = self.comp(e).plane;
        let degree = match (plane, degree) {
            (true, d) => {
                let d = d.unwrap_or(1);
                if d == 0 {
                    return err(format!("trace {} has degree zero", id));
                }
                Some(d)
            }
            (false, None) => None,
            (false, Some(_)) => {
                return err(format!(
                    "trace {} carries a degree but {} is not a plane",
                    id, comp
                ))
            }
        };
        if at.is_empty() {
            return err(format!("trace {} needs at least one point", id));
        }
        let mut pts = Vec::new();
        for spec in at {
            let q = self.resolve_pspec(spec, false)?;
            if !self.point(q).comps.contains(&e) {
                return err(format!(
                    "trace {} passes through {}, which is not on {}",
                    id,
                    self.point(q).name,
                    comp
                ));
            }
            if pts.contains(&q) {
                return err(format!("trace {} lists a point twice", id));
            }
            pts.push(q);
        }
        let born_of = self.declared_born_of();
        let lineage = pts.iter().find_map(|&q| self.point(q).lineage);
        let c = self.push_curve(
            id.to_string(),
            CurveRec {
                name: String::new(),
                birth_level: level,
                death_step: None,
                housing: vec![e],
                compact: plane,
                singular: true,
                born_of,
                degree,
                plane: plane.then_some(e),
                index_by_side: BTreeMap::new(),
                lineage,
            },
        )?;
        for q in pts {
            let rec = &mut self.points[q.0 as usize];
            rec.curves.push(c);
            rec.curves = sorted_curves(std::mem::take(&mut rec.curves));
        }
        Ok(())
    }

    fn apply_land(&mut self, curve: &str, with: &str) -> Result<(), BuildError> {
        let level = self.levels();
        let a = self.lookup_curve(curve)?;
        let b = self.lookup_curve(with)?;
        if a == b {
            return err(format!("cannot land {} with itself", curve));
        }
        let landing_of = |cx: &Complex, c: CurveId| -> Option<PointId> {
            cx.point_ids().find(|&q| {
                let rec = cx.point(q);
                !rec.retracted && rec.birth_level == level && rec.auto_landing_of == Some(c)
            })
        };
        let qa = landing_of(self, a)
            .ok_or_else(|| BuildError(format!("{} has no fresh landing at this level", curve)))?;
        let qb = landing_of(self, b)
            .ok_or_else(|| BuildError(format!("{} has no fresh landing at this level", with)))?;
        let host = |cx: &Complex, q: PointId, c: CurveId| -> CurveId {
            *cx.point(q).curves.iter().find(|&&x| x != c).expect("landing points carry their host")
        };
        if host(self, qa, a) != host(self, qb, b) {
            return err(format!("{} and {} landed on different curves", curve, with));
        }
        self.points[qa.0 as usize].retracted = true;
        self.points[qa.0 as usize].auto_landing_of = None;
        let rec = &mut self.points[qb.0 as usize];
        rec.curves.push(a);
        rec.curves = sorted_curves(std::mem::take(&mut rec.curves));
        Ok(())
    }

    fn apply_index(&mut self, curve: &str, side: &str, value: Scalar) -> Result<(), BuildError> {
        let c = self.lookup_curve(curve)?;
        let e = self.lookup_comp(side)?;
        if !self.curve(c).singular {
            return err(format!("index on the non-singular curve {}", curve));
        }
        if !self.curve(c).housing.contains(&e) {
            return err(format!("{} does not house {}", side, curve));
        }
        if !self.is_invariant(e) {
            return err(format!("index side {} is dicritical", side));
        }
        if value.is_zero() {
            return err(format!("zero index on {}", curve));
        }
        let derived = self.derived_indices.contains(&(c, e));
        if let Some(old) = self.curve(c).index_by_side.get(&e) {
            if derived {
                if *old != value {
                    return err(format!(
                        "reciprocity conflict on {}: side {} must be {}",
                        curve,
                        side,
                        old.render()
                    ));
                }
                self.derived_indices.remove(&(c, e));
                return Ok(());
            }
            return err(format!("duplicate index assignment on {} side {}", curve, side));
        }
        self.curves[c.0 as usize].index_by_side.insert(e, value.clone());
        // Corner sides are reciprocal; filling the other side keeps every
        // later query total.
        let other: Vec<ComponentId> = self
            .curve(c)
            .housing
            .iter()
            .copied()
            .filter(|&h| h != e && self.is_invariant(h))
            .collect();
        if let [o] = other.as_slice() {
            let o = *o;
            let recip = value.inverse().expect("nonzero scalars invert");
            match self.curve(c).index_by_side.get(&o) {
                None => {
                    self.curves[c.0 as usize].index_by_side.insert(o, recip);
                    self.derived_indices.insert((c, o));
                }
                Some(existing) => {
                    if *existing != recip {
                        return err(format!(
                            "reciprocity conflict on {}: sides multiply to {}",
                            curve,
                            (existing * &value).render()
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn apply_restricted(&mut self, curve: &str, point: &str, value: Scalar) -> Result<(), BuildError> {
        let c = self.lookup_curve(curve)?;
        let q = self.lookup_point(point)?;
        let housing = &self.curve(c).housing;
        let split = housing.len() == 2
            && housing.iter().filter(|&&h| self.is_invariant(h)).count() == 1;
        if !split {
            return err(format!(
                "restricted index on {}, which is not the intersection of an invariant and a dicritical component",
                curve
            ));
        }
        if !self.point(q).curves.contains(&c) {
            return err(format!("{} does not lie on {}", point, curve));
        }
        if self.restricted.contains_key(&(c, q)) {
            return err(format!("duplicate restricted index on {} at {}", curve, point));
        }
        self.restricted.insert((c, q), value);
        Ok(())
    }

    fn apply_singstar(&mut self, level: u32, entity: &str) -> Result<(), BuildError> {
        if level != self.levels() {
            return err(format!(
                "singular marking for level {} while constructing level {}",
                level,
                self.levels()
            ));
        }
        let e = match self.lookup(entity) {
            Some(EntityRef::Point(p)) => {
                if !self.point_alive_at(p, level) {
                    return err(format!("marked point {} is not alive", entity));
                }
                EntityRef::Point(p)
            }
            Some(EntityRef::Curve(c)) => {
                if !self.curve_alive_at(c, level) {
                    return err(format!("marked curve {} is not alive", entity));
                }
                if !self.curve(c).singular {
                    return err(format!("marked curve {} is not singular", entity));
                }
                EntityRef::Curve(c)
            }
            Some(EntityRef::Component(_)) => {
                return err(format!("components cannot be marked singular: {}", entity))
            }
            None => return err(format!("unknown entity {}", entity)),
        };
        self.singstar.insert((level, e));
        Ok(())
    }
}
