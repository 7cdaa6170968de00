//! Asymmetric merging: enriching an initial net with every preference of a
//! reference net that does not conflict with it.
//!
//! `enrich` unfolds both nets, adds the reference's missing features, unions
//! domains of shared features, merges every reference relation, folds the
//! result, and reports cycles of the enriched dependency graph.
//!
//! A reference relation merges *completely* (copied into the CPT) when no
//! existing relation has the same condition and overlapping values. Otherwise
//! it merges *partially*: each of its values missing from an existing
//! same-condition relation is placed one at a time. A value either gets a
//! consistent position (inserted as a new level), is position-equivalent to
//! existing values the reference says nothing about (a new indifference
//! relation is created), or has no consistent position at all (skipped, with
//! the witnessing pair recorded). The initial net's own orderings are never
//! touched: values are only ever spliced in between existing levels.
//!
//! Every decision is recorded in a [`MergeTrace`], which gives external
//! checkers a certificate for every reference preference that did not survive.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{Condition, CpNet, Cpt, PreferenceRelation, ValidationReport};
use crate::unfold::{fold_net_unchecked, unfold_net_unchecked};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MergeError {
    #[error("initial net is invalid:\n{0}")]
    InvalidInitial(ValidationReport),
    #[error("reference net is invalid:\n{0}")]
    InvalidReference(ValidationReport),
    #[error("enrichment produced a cyclic net: {}", render_cycles(.0))]
    RejectedCyclic(Vec<Vec<String>>),
    #[error("conditions `{left}` and `{right}` do not match")]
    ConditionMismatch { left: String, right: String },
    #[error("value `{0}` is not in the reference relation")]
    ValueNotInReference(String),
    #[error("value `{0}` is already in the target relation")]
    ValueAlreadyPresent(String),
    #[error("target and reference relations share no values")]
    DisjointRelations,
}

fn render_cycles(cycles: &[Vec<String>]) -> String {
    cycles
        .iter()
        .map(|c| c.join(","))
        .collect::<Vec<_>>()
        .join("; ")
}

/// What to do when the enriched net's dependency graph turns out cyclic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CyclePolicy {
    /// Return the net and attach the cycles to the trace.
    #[default]
    Warn,
    /// Fail with [`MergeError::RejectedCyclic`].
    Reject,
}

/// Where a single reference value can go relative to an existing relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PositionResult {
    /// The value has a consistent slot: a new singleton level at `index`.
    Insert { index: usize },
    /// Every consistent slot is shared with existing values the reference
    /// does not relate to the new one; they become indifferent to it.
    Tie { values: BTreeSet<String> },
    /// No consistent slot: `above_bound` must stay above the value but sits
    /// at or below `below_bound`, which must stay below it.
    Infeasible {
        above_bound: String,
        below_bound: String,
    },
}

/// One recorded merge decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    /// A reference feature absent from the initial net was added.
    FeatureAdded { feature: String },
    /// A reference relation was copied wholesale into the CPT.
    CompleteMerge {
        feature: String,
        relation: PreferenceRelation,
    },
    /// A reference value was spliced into an existing relation at `index`.
    PartialInsert {
        feature: String,
        condition: Condition,
        value: String,
        index: usize,
    },
    /// A reference value was recorded as indifferent to `tied_with` instead
    /// of being inserted.
    TieCreated {
        feature: String,
        condition: Condition,
        value: String,
        tied_with: BTreeSet<String>,
    },
    /// A reference value had no consistent position; the witnessing pair is
    /// the infeasibility certificate.
    Skipped {
        feature: String,
        condition: Condition,
        value: String,
        above_bound: String,
        below_bound: String,
    },
    /// A reference relation whose content already holds (or is directly
    /// opposed) left the CPT unchanged.
    NoOp {
        feature: String,
        condition: Condition,
    },
}

impl TraceEvent {
    pub fn feature(&self) -> &str {
        match self {
            TraceEvent::FeatureAdded { feature }
            | TraceEvent::CompleteMerge { feature, .. }
            | TraceEvent::PartialInsert { feature, .. }
            | TraceEvent::TieCreated { feature, .. }
            | TraceEvent::Skipped { feature, .. }
            | TraceEvent::NoOp { feature, .. } => feature,
        }
    }
}

/// The full decision log of one enrichment, plus any cycles found afterwards.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MergeTrace {
    pub events: Vec<TraceEvent>,
    pub cycles: Vec<Vec<String>>,
}

/// Condition equality, as sets of assignments.
pub fn conditions_match(a: &Condition, b: &Condition) -> bool {
    a == b
}

/// True when `reference` can be copied into `cpt` wholesale: every existing
/// relation with the same condition shares no values with it.
pub fn can_complete_merge(reference: &PreferenceRelation, cpt: &Cpt) -> bool {
    cpt.relations().iter().all(|p| {
        !conditions_match(p.condition(), reference.condition())
            || !p.values().any(|v| reference.contains(v))
    })
}

/// Finds where `x` (a value of `reference`, absent from `target`) belongs in
/// `target`, honoring every strict relation `reference` states between `x`
/// and values the two relations share.
pub fn find_position(
    x: &str,
    target: &PreferenceRelation,
    reference: &PreferenceRelation,
) -> Result<PositionResult, MergeError> {
    if !conditions_match(target.condition(), reference.condition()) {
        return Err(MergeError::ConditionMismatch {
            left: target.condition().to_string(),
            right: reference.condition().to_string(),
        });
    }
    let Some(x_level) = reference.level_of(x) else {
        return Err(MergeError::ValueNotInReference(x.to_owned()));
    };
    if target.contains(x) {
        return Err(MergeError::ValueAlreadyPresent(x.to_owned()));
    }

    // Tightest bounds from shared values: `floor` is the deepest target level
    // holding a value the reference puts above x, `ceiling` the shallowest
    // holding one it puts below x. Values tied with x impose nothing.
    let mut floor: Option<(usize, &str)> = None;
    let mut ceiling: Option<(usize, &str)> = None;
    for (level_index, level) in target.levels().iter().enumerate() {
        for value in level {
            let Some(ref_level) = reference.level_of(value) else {
                continue;
            };
            if ref_level < x_level && floor.is_none_or(|(l, _)| level_index > l) {
                floor = Some((level_index, value));
            }
            if ref_level > x_level && ceiling.is_none_or(|(l, _)| level_index < l) {
                ceiling = Some((level_index, value));
            }
        }
    }

    let start = floor.map_or(0, |(l, _)| l + 1);
    let end = ceiling.map_or(target.levels().len(), |(l, _)| l);
    if start > end {
        let (_, above_bound) = floor.expect("an empty floor cannot exceed the ceiling");
        let (_, below_bound) = ceiling.expect("an empty ceiling cannot be exceeded");
        return Ok(PositionResult::Infeasible {
            above_bound: above_bound.to_owned(),
            below_bound: below_bound.to_owned(),
        });
    }
    let unconstrained: BTreeSet<String> = target.levels()[start..end]
        .iter()
        .flatten()
        .filter(|v| !reference.contains(v))
        .cloned()
        .collect();
    if unconstrained.is_empty() {
        Ok(PositionResult::Insert { index: start })
    } else {
        Ok(PositionResult::Tie {
            values: unconstrained,
        })
    }
}

/// The outcome of partially merging one reference relation into one target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialMergeOutcome {
    /// The target relation with every placeable value spliced in.
    pub updated: PreferenceRelation,
    /// New single-level indifference relations for tied values.
    pub ties: Vec<PreferenceRelation>,
    pub events: Vec<TraceEvent>,
}

/// Inserts the reference's missing values into `target` one at a time, most
/// preferred first, restarting the scan after every successful insertion.
/// Tied and skipped values never enter `target` and are not reconsidered.
pub fn partial_merge(
    feature: &str,
    target: &PreferenceRelation,
    reference: &PreferenceRelation,
) -> Result<PartialMergeOutcome, MergeError> {
    if !conditions_match(target.condition(), reference.condition()) {
        return Err(MergeError::ConditionMismatch {
            left: target.condition().to_string(),
            right: reference.condition().to_string(),
        });
    }
    if !target.values().any(|v| reference.contains(v)) {
        return Err(MergeError::DisjointRelations);
    }
    let mut updated = target.clone();
    let mut ties = Vec::new();
    let mut events = Vec::new();
    let order: Vec<String> = reference.values().map(ToOwned::to_owned).collect();
    let mut done: BTreeSet<&str> = BTreeSet::new();
    loop {
        let next = order
            .iter()
            .find(|v| !updated.contains(v) && !done.contains(v.as_str()));
        let Some(x) = next else { break };
        match find_position(x, &updated, reference)? {
            PositionResult::Insert { index } => {
                updated.insert_singleton_level(index, x.clone());
                events.push(TraceEvent::PartialInsert {
                    feature: feature.to_owned(),
                    condition: reference.condition().clone(),
                    value: x.clone(),
                    index,
                });
            }
            PositionResult::Tie { values } => {
                // One pairwise relation per unconstrained value. A single
                // level holding all of them would assert indifference between
                // values the target still orders strictly.
                for tied in &values {
                    let level: BTreeSet<String> = [x.clone(), tied.clone()].into();
                    ties.push(
                        PreferenceRelation::new(reference.condition().clone(), vec![level])
                            .expect("a tie level is non-empty"),
                    );
                }
                events.push(TraceEvent::TieCreated {
                    feature: feature.to_owned(),
                    condition: reference.condition().clone(),
                    value: x.clone(),
                    tied_with: values,
                });
                done.insert(x);
            }
            PositionResult::Infeasible {
                above_bound,
                below_bound,
            } => {
                events.push(TraceEvent::Skipped {
                    feature: feature.to_owned(),
                    condition: reference.condition().clone(),
                    value: x.clone(),
                    above_bound,
                    below_bound,
                });
                done.insert(x);
            }
        }
    }
    Ok(PartialMergeOutcome {
        updated,
        ties,
        events,
    })
}

/// Merges one reference relation into a CPT: a complete copy when possible,
/// otherwise partial merges against every same-condition relation sharing
/// values with it, in CPT order. A relation that changes nothing records a
/// no-op so the trace stays total.
pub fn merge_relation(
    reference: &PreferenceRelation,
    cpt: &Cpt,
) -> Result<(Cpt, Vec<TraceEvent>), MergeError> {
    let mut merged = cpt.clone();
    let mut events = Vec::new();
    if can_complete_merge(reference, cpt) {
        merged.push(reference.clone());
        events.push(TraceEvent::CompleteMerge {
            feature: cpt.owner().to_owned(),
            relation: reference.clone(),
        });
        return Ok((merged, events));
    }
    let targets: Vec<usize> = cpt
        .relations()
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            conditions_match(p.condition(), reference.condition())
                && p.values().any(|v| reference.contains(v))
        })
        .map(|(index, _)| index)
        .collect();
    for index in targets {
        let target = merged.relations()[index].clone();
        let outcome = partial_merge(cpt.owner(), &target, reference)?;
        merged.relations_mut()[index] = outcome.updated;
        for tie in outcome.ties {
            merged.push(tie);
        }
        events.extend(outcome.events);
    }
    if events.is_empty() {
        events.push(TraceEvent::NoOp {
            feature: cpt.owner().to_owned(),
            condition: reference.condition().clone(),
        });
    }
    Ok((merged, events))
}

/// Enriches `initial` with every non-conflicting preference of `reference`.
///
/// Steps: unfold both nets; add each reference feature missing from the
/// initial net (empty CPT, its relations arrive through merging); union the
/// reference's values into shared domains; merge every relation of the
/// unfolded reference in declaration/CPT order; fold; detect cycles and apply
/// the policy. Deterministic: equal inputs yield an identical net and trace.
pub fn enrich(
    initial: &CpNet,
    reference: &CpNet,
    policy: CyclePolicy,
) -> Result<(CpNet, MergeTrace), MergeError> {
    let report = initial.validate();
    if !report.is_empty() {
        return Err(MergeError::InvalidInitial(report));
    }
    let report = reference.validate();
    if !report.is_empty() {
        return Err(MergeError::InvalidReference(report));
    }

    let mut result = unfold_net_unchecked(initial);
    let unfolded_reference = unfold_net_unchecked(reference);
    let mut trace = MergeTrace::default();

    for feature in reference.features() {
        if result.has_feature(feature.name()) {
            result
                .extend_domain(feature.name(), feature.domain().iter().map(String::as_str))
                .expect("feature exists");
        } else {
            result
                .add_feature(feature.name(), feature.domain().to_vec())
                .expect("feature is new and its domain is well-formed");
            trace.events.push(TraceEvent::FeatureAdded {
                feature: feature.name().to_owned(),
            });
        }
    }

    for feature in unfolded_reference.features() {
        let name = feature.name();
        for rel in unfolded_reference
            .cpt(name)
            .expect("cpt exists")
            .relations()
        {
            let (merged, events) = merge_relation(rel, result.cpt(name).expect("feature added"))?;
            result.replace_relations(name, merged.relations().to_vec());
            trace.events.extend(events);
        }
    }

    let folded = fold_net_unchecked(&result);
    let cycles = folded.detect_cycles();
    if policy == CyclePolicy::Reject && !cycles.is_empty() {
        return Err(MergeError::RejectedCyclic(cycles));
    }
    trace.cycles = cycles;
    Ok((folded, trace))
}

impl fmt::Display for PositionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PositionResult::Insert { index } => write!(f, "insert at {index}"),
            PositionResult::Tie { values } => write!(
                f,
                "tie with {}",
                values.iter().cloned().collect::<Vec<_>>().join(",")
            ),
            PositionResult::Infeasible {
                above_bound,
                below_bound,
            } => write!(f, "infeasible above={above_bound} below={below_bound}"),
        }
    }
}
