//! Exact-arithmetic engine for sequences of blow-ups of a germ in
//! three-dimensional ambient space.
//!
//! The crate tracks the combinatorics of the exceptional divisor across a
//! blow-up sequence (components, curves, points, incidence), carries
//! Camacho-Sad index data in the exact field Q(√2, i), and mechanically
//! audits the relations those objects satisfy: corner reciprocity, triple
//! relations at three-fold points, line sums under point blow-ups,
//! restricted indices on dicritical components, dual-graph chain
//! transforms, partial-separatrix completeness, and the transition rules
//! for nodal components, including the final consistency verdict for the
//! everything-incomplete scenario.
//!
//! Scenario files describe a blow-up sequence as a line-oriented record
//! log; [`scenarios`] parses, renders and generates them, and the CLI in
//! the companion crate wires the audits to files.

pub mod complex;
pub mod dualgraph;
pub mod index;
pub mod nodal;
pub mod par;
pub mod report;
pub mod scalar;
pub mod scenarios;
pub mod separatrix;

pub use complex::{Complex, ComponentId, CurveId, PointId};
pub use par::init_workers;
pub use report::Report;
pub use scalar::{IndexClass, Scalar};
