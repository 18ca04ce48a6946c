//! Seeded random blow-up scenarios.
//!
//! The generator plays a small move calculus.  Every move blows up one
//! center whose forced index data is solved exactly before the step is
//! applied, so the result passes validation and the whole index audit
//! battery by construction; a move whose forced values degenerate (zero,
//! or a positive rational, which carries no class) is rejected and the
//! step is re-sampled.  Rejection sampling is capped per step.
//!
//! Scenario skeletons come in two families.  An invariant skeleton opens
//! with a non-dicritical blow-up of the origin and plants traces whose
//! degree-weighted indices sum to -1 in the first plane.  A dicritical
//! skeleton opens with a dicritical blow-up, optionally after declaring
//! germs at the origin; germs become obligations that are later resolved
//! by curve blow-ups carrying a pair of fiber traces.  Every separatrix
//! of a dicritical skeleton stays incomplete, so moves played on one keep
//! a live non-saddle compact curve in each compact invariant component
//! that houses a separatrix point.
//!
//! Available moves, with their forced solutions:
//!
//! * blow up a bare interior point of an invariant plane: the new line
//!   gets index -1;
//! * blow up an interior point of the dicritical plane: the line over the
//!   dicritical side stays non-singular and two fresh traces with indices
//!   summing to -1 land on it;
//! * blow up a point on traces with indices `x_i`: the line gets
//!   `b = sum(x_i) - 1` and each trace is repaired by a fresh trace with
//!   index `-x_i/b` at its landing;
//! * blow up a bare point of a corner with sides `(A, B)` and index `w`
//!   on the `A` side: the two lines get `w - 1` and `(1 - w)/w`;
//! * blow up a three-component crossing: with `v` and `t` the indices of
//!   the corners flanking the third component, the line in that component
//!   gets `g = 1/v + 1/t - 1` and the other two get `-v*g` and `-t*g`.
//!
//! Corner and crossing moves are only played on corners whose class is
//! real; this keeps every three-component crossing real-indexed, which
//! pins the corner triples to the two real class patterns and keeps the
//! nodal alternation checks satisfied.  Centers are declared at the birth
//! level of their housing, ahead of the step that consumes them; unspent
//! reservations are legal final points.

use std::error::Error;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::complex::{
    BornOf, BuildError, Complex, ComponentId, CurveId, EntityRef, Nature, PSpec, PointId,
};
use crate::index::weighted_index_sum;
use crate::scalar::{IndexClass, Scalar};
use crate::separatrix::partial_separatrices;

/// Shape of the generated scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Any skeleton; the incompleteness flag records the computed truth.
    Free,
    /// Dicritical skeleton, so every partial separatrix is incomplete and
    /// the flag is set.
    AllIncomplete,
    /// Like `AllIncomplete`, but the first two moves are scripted to grow
    /// an uninterrupted nodal chain of a trace and a corner.
    ForceNodalChain,
}

#[derive(Debug, Clone)]
pub struct GeneratorParams {
    pub seed: u64,
    /// Inclusive bounds on the number of blow-ups.
    pub min_steps: u32,
    pub max_steps: u32,
    /// Chance that a free-mode scenario opens with a dicritical blow-up.
    pub dicritical_probability: f64,
    /// Chance of resolving a pending germ over playing a point move.
    pub curve_step_probability: f64,
    /// Bound on the integer coordinates of pool indices.
    pub index_pool_bound: u32,
    pub mode: Mode,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            seed: 0,
            min_steps: 3,
            max_steps: 8,
            dicritical_probability: 0.4,
            curve_step_probability: 0.35,
            index_pool_bound: 2,
            mode: Mode::Free,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenError(pub String);

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Error for GenError {}

impl From<BuildError> for GenError {
    fn from(e: BuildError) -> GenError {
        GenError(format!("construction rejected a generated move: {}", e.0))
    }
}

const ATTEMPT_CAP: usize = 10_000;

/// A reserved center, declared at the birth level of its housing.
/// Unspent reservations are legal final points, so targets may be left
/// unplayed.  Pair and germ targets are obligations: a pair point has two
/// branches and a germ has no housing, so both must be consumed.
#[derive(Debug, Clone)]
enum Target {
    Bare(PointId),
    OnTrace(PointId, CurveId),
    TracePair(PointId, CurveId, CurveId),
    OnCorner(PointId, CurveId),
    Crossing(PointId),
    GermCenter(CurveId),
}

impl Target {
    fn obligatory(&self) -> bool {
        matches!(self, Target::TracePair(..) | Target::GermCenter(..))
    }
}

fn admissible(v: &Scalar) -> bool {
    !v.is_zero() && v.classify().is_some()
}

fn non_saddle(v: &Scalar) -> bool {
    matches!(
        v.classify(),
        Some(IndexClass::Nodal) | Some(IndexClass::ComplexSaddle)
    )
}

fn real_class(v: &Scalar) -> bool {
    matches!(
        v.classify(),
        Some(IndexClass::Nodal) | Some(IndexClass::RealSaddle)
    )
}

/// Classifiable index values with coordinates bounded by the pool bound.
fn index_pool(bound: u32) -> Vec<Scalar> {
    let b = bound.max(1) as i64;
    let mut pool = Vec::new();
    for n in 1..=b {
        pool.push(Scalar::from_coords(0, n, 0, 0));
        pool.push(Scalar::from_integer(-n));
        pool.push(Scalar::rational(-1, n));
        pool.push(Scalar::from_coords(0, 0, n, 0));
        pool.push(Scalar::from_coords(-n, 1, 0, 0));
        pool.push(Scalar::from_coords(n, 0, 1, 0));
    }
    pool
}

struct Gen {
    cx: Complex,
    rng: ChaCha8Rng,
    pool: Vec<Scalar>,
    targets: Vec<Target>,
    /// True for dicritical skeletons: separatrices are incomplete, so
    /// every move must leave a non-saddle witness where they meet the
    /// divisor.
    dicritical: bool,
    /// False while forcing a nodal chain, to keep pad moves away from it.
    corner_targets: bool,
    curve_step_probability: f64,
    trace_n: usize,
    germ_n: usize,
}

impl Gen {
    fn new(rng: ChaCha8Rng, params: &GeneratorParams) -> Gen {
        Gen {
            cx: Complex::new_ambient("S"),
            rng,
            pool: index_pool(params.index_pool_bound),
            targets: Vec::new(),
            dicritical: false,
            corner_targets: params.mode != Mode::ForceNodalChain,
            curve_step_probability: params.curve_step_probability,
            trace_n: 0,
            germ_n: 0,
        }
    }

    fn pick_pool(&mut self) -> Scalar {
        self.pool[self.rng.gen_range(0..self.pool.len())].clone()
    }

    fn pick_non_saddle(&mut self) -> Scalar {
        loop {
            let v = self.pick_pool();
            if non_saddle(&v) {
                return v;
            }
        }
    }

    fn trace_name(&mut self) -> String {
        self.trace_n += 1;
        format!("T{}", self.trace_n)
    }

    fn germ_name(&mut self) -> String {
        self.germ_n += 1;
        format!("G{}", self.germ_n)
    }

    fn comp_named(&self, name: &str) -> ComponentId {
        self.cx
            .comp_ids()
            .find(|&e| self.cx.comp(e).name == name)
            .expect("generated component exists")
    }

    fn curve_named(&self, name: &str) -> CurveId {
        self.cx
            .curve_ids()
            .find(|&c| self.cx.curve(c).name == name)
            .expect("generated curve exists")
    }

    /// The intersection line of step `s` lying in `side`.
    fn line_in(&self, s: u32, side: ComponentId) -> CurveId {
        self.cx
            .curve_ids()
            .find(|&c| {
                let rec = self.cx.curve(c);
                rec.birth_level == s
                    && matches!(rec.born_of, BornOf::Line { .. })
                    && rec.housing.contains(&side)
            })
            .expect("point blow-up produced a line in each old component")
    }

    /// The automatic landing of `c` created by step `s`.
    fn landing_of(&self, s: u32, c: CurveId) -> PointId {
        self.cx
            .point_ids()
            .find(|&q| {
                let rec = self.cx.point(q);
                rec.birth_level == s && !rec.retracted && rec.curves.contains(&c)
            })
            .expect("blown-up curve landed on the new plane")
    }

    fn mark_and_blow_point(&mut self, z: PointId, dicritical: bool) -> Result<u32, BuildError> {
        self.cx.mark_singular(EntityRef::Point(z))?;
        self.cx.blow_up_point(z, dicritical)?;
        Ok(self.cx.levels())
    }

    /// Declares a fresh interior point of `plane` and reserves it.
    fn reserve_bare(&mut self, plane: ComponentId) -> Result<(), BuildError> {
        let name = self.cx.comp(plane).name.clone();
        let z = self.cx.declare_point(PSpec::Inside(name))?;
        self.targets.push(Target::Bare(z));
        Ok(())
    }

    fn reserve_on_trace(&mut self, t: CurveId) -> Result<(), BuildError> {
        let name = self.cx.curve(t).name.clone();
        let z = self.cx.declare_point(PSpec::OnCurve(name))?;
        self.targets.push(Target::OnTrace(z, t));
        Ok(())
    }

    fn reserve_on_corner(&mut self, w: CurveId) -> Result<(), BuildError> {
        let name = self.cx.curve(w).name.clone();
        let z = self.cx.declare_point(PSpec::OnCurve(name))?;
        self.targets.push(Target::OnCorner(z, w));
        Ok(())
    }

    /// Declares a trace in `plane` at `spec` with the given index.
    fn plant_trace(
        &mut self,
        plane: ComponentId,
        spec: PSpec,
        value: Scalar,
    ) -> Result<CurveId, BuildError> {
        let name = self.trace_name();
        let t = self.cx.declare_trace(&name, plane, None, vec![spec])?;
        self.cx.assign_index(t, plane, value)?;
        Ok(t)
    }

    /// Non-dicritical opening: traces in the first plane sum to -1.  At
    /// least one planted index is non-saddle, so a sum-bound record that
    /// stays admissible after adding one always exists.
    fn seed_invariant(&mut self, target: u32) -> Result<(), GenError> {
        self.mark_and_blow_point(PointId(0), false)?;
        let e1 = self.comp_named("E1");
        let plane_name = self.cx.comp(e1).name.clone();

        let lead = self.pick_non_saddle();
        let coal: Scalar = -(&Scalar::one() + &lead);
        debug_assert!(admissible(&coal));

        let with_pair = target >= 2 && self.rng.gen_bool(0.3);
        if with_pair {
            // One double point carrying the summing pair; singles, when
            // present, cancel each other.
            let z = self.cx.declare_point(PSpec::Inside(plane_name.clone()))?;
            let zn = self.cx.point(z).name.clone();
            let a = self.plant_trace(e1, PSpec::Named(zn.clone()), lead)?;
            let b = self.plant_trace(e1, PSpec::Named(zn), coal)?;
            self.targets.push(Target::TracePair(z, a, b));
            if self.rng.gen_bool(0.4) {
                let x = self.pick_non_saddle();
                let y = -&x;
                let s1 =
                    self.plant_trace(e1, PSpec::Inside(plane_name.clone()), x)?;
                let s2 = self.plant_trace(e1, PSpec::Inside(plane_name.clone()), y)?;
                for t in [s1, s2] {
                    if self.rng.gen_bool(0.5) {
                        self.reserve_on_trace(t)?;
                    }
                }
            }
        } else {
            let s1 = self.plant_trace(e1, PSpec::Inside(plane_name.clone()), lead)?;
            let s2 = self.plant_trace(e1, PSpec::Inside(plane_name.clone()), coal)?;
            for t in [s1, s2] {
                if self.rng.gen_bool(0.7) {
                    self.reserve_on_trace(t)?;
                }
            }
        }
        self.reserve_bare(e1)?;
        self.reserve_bare(e1)?;
        Ok(())
    }

    /// Dicritical opening, with `germs` germs waiting at the origin.
    fn seed_dicritical(&mut self, target: u32, germs: u32) -> Result<(), GenError> {
        self.dicritical = true;
        for _ in 0..germs {
            let name = self.germ_name();
            let g = self.cx.declare_germ(&name, PSpec::Named("O".into()))?;
            self.targets.push(Target::GermCenter(g));
        }
        self.mark_and_blow_point(PointId(0), true)?;
        let e1 = self.comp_named("E1");
        // Interior points of the dicritical plane can only be declared
        // now, so reserve enough for every remaining step.
        for _ in 1..target {
            self.reserve_bare(e1)?;
        }
        Ok(())
    }

    /// Bare interior point of an invariant plane.  The new plane carries
    /// only the line, whose index is pinned to -1 by the degree sum.
    fn move_bare(&mut self, z: PointId) -> Result<bool, GenError> {
        let plane = self.cx.point(z).comps[0];
        let s = self.mark_and_blow_point(z, false)?;
        let line = self.line_in(s, plane);
        self.cx
            .assign_index(line, plane, -&Scalar::one())?;
        let e_new = self.comp_named(&format!("E{}", s));
        self.reserve_bare(e_new)?;
        if self.corner_targets && self.rng.gen_bool(0.5) {
            self.reserve_on_corner(line)?;
        }
        Ok(true)
    }

    /// Interior point of the dicritical plane.  The line over the
    /// dicritical side stays non-singular; two traces land on it and
    /// their indices sum to -1, with a non-saddle member witnessing the
    /// incomplete separatrices on both sides of each landing.
    fn move_split(&mut self, z: PointId) -> Result<bool, GenError> {
        let forced = self.split_pair();
        let (lead, coal) = match forced {
            Some(pair) => pair,
            None => return Ok(false),
        };
        let s = self.mark_and_blow_point(z, false)?;
        let e_new = self.comp_named(&format!("E{}", s));
        let d_plane = self
            .cx
            .comp_ids()
            .find(|&e| self.cx.comp(e).nature == Nature::Dicritical)
            .expect("dicritical skeleton has a dicritical plane");
        let line = self.line_in(s, d_plane);
        let line_name = self.cx.curve(line).name.clone();
        for value in [lead, coal] {
            let keep = non_saddle(&value) && self.rng.gen_bool(0.7);
            let t = self.plant_trace(e_new, PSpec::OnCurve(line_name.clone()), value)?;
            if keep {
                self.reserve_on_trace(t)?;
            }
        }
        self.reserve_bare(e_new)?;
        Ok(true)
    }

    fn split_pair(&mut self) -> Option<(Scalar, Scalar)> {
        for _ in 0..ATTEMPT_CAP {
            let lead = self.pick_pool();
            let coal: Scalar = -(&Scalar::one() + &lead);
            if admissible(&coal) && (non_saddle(&lead) || non_saddle(&coal)) {
                return Some((lead, coal));
            }
        }
        None
    }

    /// Point on one or two traces inside a plane.  The line absorbs the
    /// trace indices and each trace continues as a repair trace at its
    /// landing.
    fn move_extend(&mut self, z: PointId, traces: &[CurveId]) -> Result<bool, GenError> {
        let plane = self.cx.point(z).comps[0];
        let values: Vec<Scalar> = traces
            .iter()
            .map(|&t| {
                self.cx
                    .curve_index(t, plane)
                    .expect("planted trace carries its index")
                    .clone()
            })
            .collect();
        let mut beta = -&Scalar::one();
        for v in &values {
            beta = &beta + v;
        }
        if !admissible(&beta) {
            return Ok(false);
        }
        let repairs: Vec<Scalar> = values.iter().map(|v| &(-v) / &beta).collect();
        if repairs.iter().any(|r| !admissible(r)) {
            return Ok(false);
        }
        if self.dicritical && !non_saddle(&beta) && !repairs.iter().any(non_saddle) {
            return Ok(false);
        }
        let s = self.mark_and_blow_point(z, false)?;
        let line = self.line_in(s, plane);
        self.cx.assign_index(line, plane, beta.clone())?;
        let e_new = self.comp_named(&format!("E{}", s));
        for (&t, r) in traces.iter().zip(repairs) {
            let q = self.landing_of(s, t);
            let qn = self.cx.point(q).name.clone();
            let keep =
                (!self.dicritical || non_saddle(&r)) && self.rng.gen_bool(0.5);
            let repair = self.plant_trace(e_new, PSpec::Named(qn), r)?;
            if keep {
                self.reserve_on_trace(repair)?;
            }
        }
        self.reserve_bare(e_new)?;
        if self.corner_targets && real_class(&beta) && self.rng.gen_bool(0.5) {
            self.reserve_on_corner(line)?;
        }
        Ok(true)
    }

    /// Bare point of a corner between two invariant components.  The two
    /// lines solve the triple relation of the new crossing together with
    /// the degree sum of the new plane.
    fn move_corner(&mut self, z: PointId, w: CurveId) -> Result<bool, GenError> {
        let a_comp = self.cx.curve(w).housing[0];
        let b_comp = self.cx.curve(w).housing[1];
        let w_a = self
            .cx
            .curve_index(w, a_comp)
            .expect("corner carries indices on both sides")
            .clone();
        if !real_class(&w_a) {
            return Ok(false);
        }
        let one = Scalar::one();
        let a_val = &w_a - &one;
        let b_val = &(&one - &w_a) / &w_a;
        if !admissible(&a_val) || !admissible(&b_val) {
            return Ok(false);
        }
        let s = self.mark_and_blow_point(z, false)?;
        let la = self.line_in(s, a_comp);
        let lb = self.line_in(s, b_comp);
        self.cx.assign_index(la, a_comp, a_val)?;
        self.cx.assign_index(lb, b_comp, b_val)?;
        let e_new = self.comp_named(&format!("E{}", s));
        self.reserve_bare(e_new)?;
        if self.corner_targets {
            let crossing = self
                .cx
                .point_ids()
                .find(|&q| {
                    let rec = self.cx.point(q);
                    rec.birth_level == s && rec.curves.contains(&w)
                })
                .expect("corner center produced a crossing with the old corner");
            if self.rng.gen_bool(0.5) {
                self.targets.push(Target::Crossing(crossing));
            }
            for line in [la, lb] {
                if self.rng.gen_bool(0.4) {
                    self.reserve_on_corner(line)?;
                }
            }
        }
        Ok(true)
    }

    /// Crossing of three invariant components.  The three new lines are
    /// forced by the triple relations at the three new crossings and the
    /// degree sum of the new plane; the relation already satisfied at the
    /// center makes the system consistent.
    fn move_crossing(&mut self, z: PointId) -> Result<bool, GenError> {
        let comps = self.cx.point(z).comps.clone();
        if comps.len() != 3
            || comps.iter().any(|&c| self.cx.comp(c).nature != Nature::Invariant)
        {
            return Ok(false);
        }
        let (a, b, e) = (comps[0], comps[1], comps[2]);
        let v = match crate::index::corner_between(&self.cx, z, a, e) {
            Some(c) => c,
            None => return Ok(false),
        };
        let t = match crate::index::corner_between(&self.cx, z, b, e) {
            Some(c) => c,
            None => return Ok(false),
        };
        let u = match crate::index::corner_between(&self.cx, z, a, b) {
            Some(c) => c,
            None => return Ok(false),
        };
        let v_a = self.cx.curve_index(v, a).expect("indexed corner").clone();
        let t_b = self.cx.curve_index(t, b).expect("indexed corner").clone();
        let u_a = self.cx.curve_index(u, a).expect("indexed corner").clone();
        if ![&v_a, &t_b, &u_a].into_iter().all(real_class) {
            return Ok(false);
        }
        let one = Scalar::one();
        let gamma = &(&(&one / &v_a) + &(&one / &t_b)) - &one;
        if !admissible(&gamma) {
            return Ok(false);
        }
        let alpha = -&(&v_a * &gamma);
        let beta = -&(&t_b * &gamma);
        if !admissible(&alpha) || !admissible(&beta) {
            return Ok(false);
        }
        let s = self.mark_and_blow_point(z, false)?;
        let ma = self.line_in(s, a);
        let mb = self.line_in(s, b);
        let me = self.line_in(s, e);
        self.cx.assign_index(ma, a, alpha)?;
        self.cx.assign_index(mb, b, beta)?;
        self.cx.assign_index(me, e, gamma)?;
        let e_new = self.comp_named(&format!("E{}", s));
        self.reserve_bare(e_new)?;
        if self.corner_targets {
            let crossings: Vec<PointId> = self
                .cx
                .point_ids()
                .filter(|&q| {
                    let rec = self.cx.point(q);
                    rec.birth_level == s && !rec.retracted && rec.comps.len() == 3
                })
                .collect();
            for q in crossings {
                if self.rng.gen_bool(0.4) {
                    self.targets.push(Target::Crossing(q));
                }
            }
            for line in [ma, mb, me] {
                if self.rng.gen_bool(0.3) {
                    self.reserve_on_corner(line)?;
                }
            }
        }
        Ok(true)
    }

    /// Resolves a germ: blow up along it and plant two fiber traces.
    fn move_germ(&mut self, g: CurveId) -> Result<bool, GenError> {
        self.cx.mark_singular(EntityRef::Curve(g))?;
        self.cx.blow_up_curve(g)?;
        let s = self.cx.levels();
        let e_new = self.comp_named(&format!("E{}", s));
        let fiber = self.curve_named(&format!("F({})", s));
        let fiber_name = self.cx.curve(fiber).name.clone();
        for _ in 0..2 {
            let v = self.pick_pool();
            self.plant_trace(e_new, PSpec::OnCurve(fiber_name.clone()), v)?;
        }
        Ok(true)
    }

    fn try_target(&mut self, idx: usize) -> Result<bool, GenError> {
        let target = self.targets[idx].clone();
        let applied = match target {
            Target::Bare(z) => {
                let plane = self.cx.point(z).comps[0];
                if self.cx.comp(plane).nature == Nature::Dicritical {
                    self.move_split(z)?
                } else {
                    self.move_bare(z)?
                }
            }
            Target::OnTrace(z, t) => self.move_extend(z, &[t])?,
            Target::TracePair(z, a, b) => self.move_extend(z, &[a, b])?,
            Target::OnCorner(z, w) => self.move_corner(z, w)?,
            Target::Crossing(z) => self.move_crossing(z)?,
            Target::GermCenter(g) => self.move_germ(g)?,
        };
        if applied {
            self.targets.remove(idx);
        }
        Ok(applied)
    }

    fn run(&mut self, target_steps: u32) -> Result<(), GenError> {
        while self.cx.levels() < target_steps {
            let remaining = target_steps - self.cx.levels();
            let obligations: Vec<usize> = self
                .targets
                .iter()
                .enumerate()
                .filter(|(_, t)| t.obligatory())
                .map(|(i, _)| i)
                .collect();
            let germs: Vec<usize> = self
                .targets
                .iter()
                .enumerate()
                .filter(|(_, t)| matches!(t, Target::GermCenter(..)))
                .map(|(i, _)| i)
                .collect();
            let mut done = false;
            for _ in 0..ATTEMPT_CAP {
                let idx = if obligations.len() as u32 >= remaining {
                    obligations[self.rng.gen_range(0..obligations.len())]
                } else if !germs.is_empty()
                    && self.rng.gen_bool(self.curve_step_probability)
                {
                    germs[self.rng.gen_range(0..germs.len())]
                } else {
                    self.rng.gen_range(0..self.targets.len())
                };
                if self.try_target(idx)? {
                    done = true;
                    break;
                }
            }
            if !done {
                return Err(GenError(format!(
                    "step {}: no playable move after {} attempts",
                    self.cx.levels() + 1,
                    ATTEMPT_CAP
                )));
            }
        }
        Ok(())
    }

    /// Stores restricted indices on curves split between an invariant and
    /// a dicritical component, sets the flag, and validates.
    fn finish(&mut self, mode: Mode) -> Result<(), GenError> {
        let split: Vec<(CurveId, ComponentId)> = self
            .cx
            .curve_ids()
            .filter_map(|c| {
                let rec = self.cx.curve(c);
                if rec.housing.len() != 2 {
                    return None;
                }
                let (a, b) = (rec.housing[0], rec.housing[1]);
                match (self.cx.comp(a).nature, self.cx.comp(b).nature) {
                    (Nature::Invariant, Nature::Dicritical) => Some((c, a)),
                    (Nature::Dicritical, Nature::Invariant) => Some((c, b)),
                    _ => None,
                }
            })
            .collect();
        for (c, inv) in split {
            let points: Vec<PointId> = self
                .cx
                .point_ids()
                .filter(|&q| {
                    let rec = self.cx.point(q);
                    !rec.retracted && rec.curves.contains(&c)
                })
                .collect();
            for q in points {
                let k = self.cx.point(q).birth_level;
                let sum = weighted_index_sum(&self.cx, k, q, inv, c, None)
                    .map_err(|e| GenError(format!("restricted sum failed: {}", e)))?;
                if !sum.value.is_zero() {
                    self.cx.assign_restricted(c, q, sum.value)?;
                }
            }
        }

        let truth = partial_separatrices(&self.cx)
            .iter()
            .all(|sep| sep.incomplete);
        match mode {
            Mode::Free => self.cx.set_flag(truth)?,
            Mode::AllIncomplete | Mode::ForceNodalChain => {
                if !truth {
                    return Err(GenError(
                        "dicritical skeleton left a complete separatrix".into(),
                    ));
                }
                self.cx.set_flag(true)?;
            }
        }

        let rep = self.cx.validate_sequence();
        if !rep.passed() {
            return Err(GenError(format!(
                "generated sequence failed validation: {}",
                rep
            )));
        }
        Ok(())
    }
}

/// Scripted opening for `ForceNodalChain`: a trace with index sqrt(2) is
/// extended once, so the line over its center has the nodal index
/// sqrt(2) - 1 and joins the trace in an uninterrupted nodal component.
fn force_chain(gen: &mut Gen) -> Result<(), GenError> {
    let bare = gen
        .targets
        .iter()
        .position(|t| matches!(t, Target::Bare(_)))
        .expect("dicritical seed reserves interior points");
    let z = match gen.targets.remove(bare) {
        Target::Bare(z) => z,
        _ => unreachable!(),
    };
    let sqrt2 = Scalar::sqrt2();
    let coal: Scalar = -(&Scalar::one() + &sqrt2);
    let s = gen.mark_and_blow_point(z, false)?;
    let e_new = gen.comp_named(&format!("E{}", s));
    let d_plane = gen.comp_named("E1");
    let line = gen.line_in(s, d_plane);
    let line_name = gen.cx.curve(line).name.clone();
    let lead = gen.plant_trace(e_new, PSpec::OnCurve(line_name.clone()), sqrt2)?;
    gen.plant_trace(e_new, PSpec::OnCurve(line_name), coal)?;
    gen.reserve_bare(e_new)?;

    let name = gen.cx.curve(lead).name.clone();
    let z2 = gen.cx.declare_point(PSpec::OnCurve(name))?;
    if !gen.move_extend(z2, &[lead])? {
        return Err(GenError("chain extension was rejected".into()));
    }
    Ok(())
}

pub fn random_scenario(params: GeneratorParams) -> Result<Complex, GenError> {
    if params.min_steps < 1 || params.min_steps > params.max_steps {
        return Err(GenError("step bounds must satisfy 1 <= min <= max".into()));
    }
    for p in [params.dicritical_probability, params.curve_step_probability] {
        if !(0.0..=1.0).contains(&p) {
            return Err(GenError("probabilities must lie in [0, 1]".into()));
        }
    }
    let floor = match params.mode {
        Mode::Free => 1,
        Mode::AllIncomplete => 2,
        Mode::ForceNodalChain => 3,
    };
    if params.max_steps < floor {
        return Err(GenError(format!(
            "{:?} scenarios need at least {} steps",
            params.mode, floor
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let target = rng.gen_range(params.min_steps.max(floor)..=params.max_steps);

    let mut gen = Gen::new(rng, &params);
    match params.mode {
        Mode::Free => {
            let dicritical =
                target >= 2 && gen.rng.gen_bool(params.dicritical_probability);
            if dicritical {
                let cap = (target - 1).min(2);
                let germs = gen.rng.gen_range(0..=cap);
                gen.seed_dicritical(target, germs)?;
            } else {
                gen.seed_invariant(target)?;
            }
        }
        Mode::AllIncomplete => {
            let cap = (target - 1).min(2);
            let germs = gen.rng.gen_range(0..=cap);
            gen.seed_dicritical(target, germs)?;
        }
        Mode::ForceNodalChain => {
            gen.seed_dicritical(target, 0)?;
            force_chain(&mut gen)?;
        }
    }
    gen.run(target)?;
    gen.finish(params.mode)?;
    Ok(gen.cx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dualgraph::build_dual_graph;
    use crate::index::{
        check_dicritical_restriction, check_line_sums, check_corner_reciprocity,
        check_trace_transition, check_triple_relations,
    };
    use crate::nodal::{
        audit_nodal_transitions, nodal_components, persistency_audit, consistency_verdict,
        Verdict,
    };
    use crate::separatrix::audit_completeness;

    fn params(seed: u64, mode: Mode) -> GeneratorParams {
        GeneratorParams {
            seed,
            mode,
            ..GeneratorParams::default()
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = random_scenario(params(11, Mode::Free)).unwrap();
        let b = random_scenario(params(11, Mode::Free)).unwrap();
        assert_eq!(a.records(), b.records());
    }

    #[test]
    fn distinct_seeds_differ() {
        let a = random_scenario(params(1, Mode::Free)).unwrap();
        let b = random_scenario(params(2, Mode::Free)).unwrap();
        assert_ne!(a.records(), b.records());
    }

    #[test]
    fn free_scenarios_pass_the_audit_battery() {
        for seed in 0..25 {
            let cx = random_scenario(params(seed, Mode::Free)).unwrap();
            assert!(cx.validate_sequence().passed(), "seed {}", seed);
            for rep in [
                check_corner_reciprocity(&cx),
                check_triple_relations(&cx),
                check_line_sums(&cx),
                check_dicritical_restriction(&cx),
                check_trace_transition(&cx),
                audit_completeness(&cx),
                audit_nodal_transitions(&cx),
            ] {
                assert!(rep.passed(), "seed {}: {}", seed, rep);
            }
            let n = cx.levels();
            build_dual_graph(&cx, n).unwrap();
        }
    }

    #[test]
    fn all_incomplete_scenarios_are_consistent() {
        for seed in 0..25 {
            let cx = random_scenario(params(seed, Mode::AllIncomplete)).unwrap();
            assert!(cx.all_separatrices_incomplete());
            assert!(cx.validate_sequence().passed(), "seed {}", seed);
            assert!(persistency_audit(&cx).passed(), "seed {}", seed);
            assert_eq!(consistency_verdict(&cx), Verdict::Consistent, "seed {}", seed);
            assert!(nodal_components(&cx)
                .iter()
                .all(|n| !n.complete() || !n.uninterrupted));
        }
    }

    #[test]
    fn forced_chains_are_nodal_and_uninterrupted() {
        for seed in 0..10 {
            let cx = random_scenario(params(seed, Mode::ForceNodalChain)).unwrap();
            let comps = nodal_components(&cx);
            assert!(
                comps
                    .iter()
                    .any(|n| n.uninterrupted && n.members.len() >= 2),
                "seed {}: no uninterrupted chain",
                seed
            );
            assert!(comps.iter().all(|n| !n.complete()), "seed {}", seed);
            assert_eq!(consistency_verdict(&cx), Verdict::Consistent);
            assert!(persistency_audit(&cx).passed(), "seed {}", seed);
        }
    }

    #[test]
    fn step_counts_respect_the_bounds() {
        for seed in 0..20 {
            let p = GeneratorParams {
                seed,
                min_steps: 4,
                max_steps: 6,
                ..GeneratorParams::default()
            };
            let cx = random_scenario(p).unwrap();
            assert!((4..=6).contains(&cx.levels()));
        }
    }

    #[test]
    fn bad_parameters_are_rejected() {
        let p = GeneratorParams {
            min_steps: 5,
            max_steps: 2,
            ..GeneratorParams::default()
        };
        assert!(random_scenario(p).is_err());
        let p = GeneratorParams {
            max_steps: 2,
            min_steps: 1,
            mode: Mode::ForceNodalChain,
            ..GeneratorParams::default()
        };
        assert!(random_scenario(p).is_err());
    }

    #[test]
    fn every_scenario_has_a_perturbable_sum_bound_index() {
        use crate::complex::Record;
        for seed in 0..20 {
            let cx = random_scenario(params(seed, Mode::Free)).unwrap();
            let one = Scalar::one();
            let candidates = cx
                .records()
                .iter()
                .filter(|r| match r {
                    Record::Index { value, .. } => !(value + &one).is_zero(),
                    _ => false,
                })
                .count();
            assert!(candidates > 0, "seed {}", seed);
        }
    }
}
