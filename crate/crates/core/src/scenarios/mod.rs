//! Scenario files, canned and random scenario construction, and reports.
//!
//! A scenario is a complete complex: the blow-up sequence together with
//! its declared curves, index assignments and markers.  This module moves
//! scenarios across the process boundary.  [`parse_scenario`] and
//! [`render_scenario`] translate between a complex and its line-oriented
//! text form, [`darboux_jouanolou`] builds the classical dicritical
//! family, [`random_scenario`] samples audit-clean complexes from a seed,
//! and [`render_report`] prints the census, separatrix, nodal and audit
//! summary of any complex.

mod dj;
mod file;
mod generate;
mod render;

pub use dj::darboux_jouanolou;
pub use file::{parse_scenario, render_scenario, ParseError};
pub use generate::{random_scenario, GenError, GeneratorParams, Mode};
pub use render::{render_report, AuditSelection};
