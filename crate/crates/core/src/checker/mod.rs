//! Contract model, structural auditor, exact reference and inversion count.

pub mod audit;
pub mod harness;
pub mod inversions;
pub mod model;
pub mod reference;
pub mod trace;

pub use audit::{check_bounds, AuditReport, BoundKind, BoundViolation, RankRow};
pub use harness::{
    churn, churn_heap, random_trace, validate, validate_with, OpMix, Session, ValidateConfig, ValidationReport,
};
pub use inversions::count_inversions;
pub use model::{Clause, ModelState, Violation};
pub use reference::{reference_heap_compare, reference_heap_compare_with, CompareError, TextbookHeap};
pub use trace::{format_trace, parse_trace, TraceError, TraceLine, TraceOp};
