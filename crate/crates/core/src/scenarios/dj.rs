//! The Darboux-Jouanolou scenarios.
//!
//! For a degree `m` the sequence opens with a dicritical blow-up of the
//! origin and continues with one curve blow-up for each of the
//! `m^2 + m + 1` invariant germs through it.  Every fiber meets the
//! dicritical plane, so each of the `2(m^2 + m + 1)` trace curves declared
//! on the fibers forms its own incomplete partial separatrix whose compact
//! part is the single point where it crosses its fiber.  The counts are
//! classical; the index values are not pinned down by them, so they are
//! drawn from the same admissible pool the random generator uses.

use crate::complex::{BuildError, Complex, EntityRef, PSpec};
use crate::scalar::Scalar;

/// Index values cycled over the trace curves: one per class, none of them
/// zero or a nonnegative rational.
pub(crate) fn admissible_pool() -> Vec<Scalar> {
    vec![
        Scalar::sqrt2(),
        Scalar::from_integer(-1),
        Scalar::i(),
        Scalar::from_coords(1, 1, 0, 0),
        Scalar::from_coords(0, -1, 0, 0),
        Scalar::from_coords(-1, 0, 1, 0),
    ]
}

/// Builds the degree-`m` scenario: `1 + m^2 + m + 1` steps, all
/// separatrices incomplete.
pub fn darboux_jouanolou(m: u32) -> Result<Complex, BuildError> {
    if m < 1 {
        return Err(BuildError(format!("the family needs a degree of at least 1, got {}", m)));
    }
    let germs = (m * m + m + 1) as usize;
    let pool = admissible_pool();
    let mut cx = Complex::new_ambient(&format!("jouanolou-{}", m));
    cx.set_flag(true)?;
    let mut germ_ids = Vec::with_capacity(germs);
    for t in 1..=germs {
        let id = cx.declare_germ(&format!("G{}", t), PSpec::Named("O".to_string()))?;
        germ_ids.push(id);
    }
    cx.mark_singular(EntityRef::Point(cx.origin()))?;
    cx.blow_up_point(cx.origin(), true)?;

    for (t, &germ) in germ_ids.iter().enumerate() {
        let s = t as u32 + 2;
        cx.mark_singular(EntityRef::Curve(germ))?;
        cx.blow_up_curve(germ)?;
        let plane = match cx.lookup(&format!("E{}", s)) {
            Some(EntityRef::Component(e)) => e,
            _ => unreachable!("curve steps name their component E<s>"),
        };
        let fiber = match cx.lookup(&format!("F({})", s)) {
            Some(EntityRef::Curve(c)) => c,
            _ => unreachable!("curve steps name their fiber F(<s>)"),
        };
        let fiber_name = cx.curve(fiber).name.clone();
        for branch in 0..2 {
            let n = 2 * t + branch + 1;
            let trace = cx.declare_trace(
                &format!("T{}", n),
                plane,
                None,
                vec![PSpec::OnCurve(fiber_name.clone())],
            )?;
            let value = pool[(n - 1) % pool.len()].clone();
            cx.assign_index(trace, plane, value.clone())?;
            let at = cx
                .point_ids()
                .find(|&q| cx.point(q).curves.contains(&trace))
                .expect("a declared trace passes through its declaration point");
            cx.assign_restricted(fiber, at, value)?;
        }
    }
    Ok(cx)
}
