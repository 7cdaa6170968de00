//! CP-nets with asymmetric merging.
//!
//! The library models conditional preference networks (features with value
//! domains, one conditional preference table per feature) and implements
//! *enrichment*: merging a reference net into an initial net so that every
//! original strict preference survives untouched while every non-conflicting
//! reference preference is absorbed. A brute-force oracle re-verifies those
//! two guarantees on small instances, independently of the merge engine.
//!
//! Modules:
//! - [`model`] — nets, conditions, relations, validation, derived parent
//!   graph, cycle detection, fact atomization;
//! - [`unfold`] — expanding independent relations into conditioned ones and
//!   folding them back;
//! - [`merge`] — complete/partial merging and the `enrich` entry point, with
//!   a full decision trace;
//! - [`oracle`] — seeded net generator, constraint checker, property suite;
//! - [`mod@format`] — the `.cpn` text format (parser and canonical
//!   serializer);
//! - [`mod@trace`] — the trace log text format.
//!
//! ```
//! use cpnet::{enrich, CyclePolicy};
//!
//! let initial = cpnet::parse(
//!     "feature A: a1, a2\nfeature B: b1, b2\ncpt A:\n- B=b1 : a1 > a2\n",
//! )?;
//! let reference = cpnet::parse(
//!     "feature A: a1, a2, a3\nfeature B: b1, b2\ncpt A:\n- B=b1 : a3 > a1 > a2\n",
//! )?;
//! let (enriched, trace) = enrich(&initial, &reference, CyclePolicy::Warn)?;
//! assert!(trace.cycles.is_empty());
//! assert_eq!(
//!     cpnet::serialize(&enriched)?,
//!     "feature A: a1, a2, a3\nfeature B: b1, b2\ncpt A:\n- B=b1 : a3 > a1 > a2\n",
//! );
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod format;
pub mod merge;
pub mod model;
pub mod oracle;
pub mod trace;
pub mod unfold;

pub use format::{parse, serialize, ParseError, SourceLocation};
pub use merge::{
    can_complete_merge, conditions_match, enrich, find_position, merge_relation, partial_merge,
    CyclePolicy, MergeError, MergeTrace, PartialMergeOutcome, PositionResult, TraceEvent,
};
pub use model::{
    fact_equal, Condition, CpNet, Cpt, Fact, FactKind, FactSet, Feature, InvalidNet, ModelError,
    PreferenceRelation, ValidationReport, Violation,
};
pub use oracle::{
    check_enrichment, enumerate_two_feature_chain_nets, generate_net, property_suite,
    ConstraintReport, GeneratorError, GeneratorParams, SuiteSummary, TrialFailure,
};
pub use trace::{parse_trace, render_trace};
pub use unfold::{fold_net, unfold_net, unfold_relation, UnfoldError};
