//! Coupling engine: compositions, validation, scheduled runs and smoke
//! tests.
//!
//! Exchange is lagged: at sync time `t_k` every link copies the producer's
//! value as of `t_{k-1}` into its consumer, then every instance advances to
//! `t_k` in lexicographic instance-id order. Because all reads happen before
//! any update, the order does not change results.

mod catalog;
mod composition;
mod run;
mod smoke;
mod validate;

pub use catalog::{Catalog, Constructor};
pub use composition::{
    load_composition, Clock, Composition, CompositionError, Endpoint, Instance, Link, Mapper,
    OutputSpec, UnitMode,
};
pub use run::{run, RunFailure, RunStatus, RunSummary, Session};
pub use smoke::{smoke_test, SmokeCheck, SmokeReport};
pub use validate::{validate_composition, Finding};
