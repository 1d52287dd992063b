//! The dynamical Borell–Brascamp–Lieb gap, its derivative at h = 0, the admissibility
//! checker and the equivalence scan.

mod admissibility;
mod appendix;
mod equivalence;
mod gap;

pub use admissibility::{admissibility_report, growth_condition, AdmissibilityParams, AdmissibilityReport, ConditionResult, GrowthReport};
pub use appendix::{appendix_limit_residual, AppendixReport, AppendixRow};
pub use equivalence::{equivalence_scan, EquivalenceReport};
pub use gap::{bbl_gap, derived_gap, GapReport, GapTail};
