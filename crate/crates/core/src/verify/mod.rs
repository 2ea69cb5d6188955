//! Verification tools: manufactured solutions and refinement studies, the
//! invariant suite, and a dense direct solver for small systems.

mod invariants;
pub mod jet;
mod mms;
mod oracle;
mod study;

pub use invariants::{invariant_suite, InvariantItem, InvariantReport, DIVERGENCE_TOL, KORN_SLACK};
pub use mms::{exact_state, mms_forcing, ExactJets, MmsCase, PointForcing};
pub use oracle::{dense_oracle, relative_distance, DENSE_LIMIT};
pub use study::{
    convergence_study, fitted_order, EpsPolicy, FieldOrders, GridErrors, StudyConfig, StudyKind, StudyResult,
};
