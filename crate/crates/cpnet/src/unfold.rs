//! Unfolding independent relations into explicitly conditioned ones, and
//! folding them back.
//!
//! Unfolding replaces a `T`-conditioned relation of `CPT(F)` with one copy
//! per (other feature `G`, value `g`), conditioned `G=g`. Conditions stay
//! single-feature; the cross-product over all other features is never built.
//! Already-conditioned relations never unfold further.
//!
//! Folding is the inverse: a group of relations whose conditions enumerate
//! every value of one parent feature with identical orderings collapses to a
//! single independent relation — unless any other relation of the same CPT
//! orders one of the group's values, in which case folding would overstate
//! what the table says and the group is kept as-is.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{Condition, CpNet, InvalidNet, PreferenceRelation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnfoldError {
    #[error("scope contains the owning feature `{0}`")]
    ScopeContainsOwner(String),
    #[error("the relation's condition assigns scope feature `{0}`")]
    ConditionOverlapsScope(String),
    #[error("unknown feature `{0}` in scope")]
    UnknownScopeFeature(String),
}

/// Expands an independent relation over `scope`, one single-feature condition
/// per (feature, value) pair, in lexical feature order and domain order.
///
/// A conditioned relation is returned unchanged. An empty scope is the
/// identity: unfolding over nothing keeps the relation, which is what a
/// one-feature net needs.
pub fn unfold_relation(
    rel: &PreferenceRelation,
    owner: &str,
    net: &CpNet,
    scope: &BTreeSet<String>,
) -> Result<Vec<PreferenceRelation>, UnfoldError> {
    if scope.contains(owner) {
        return Err(UnfoldError::ScopeContainsOwner(owner.to_owned()));
    }
    for feature in rel.condition().features() {
        if scope.contains(feature) {
            return Err(UnfoldError::ConditionOverlapsScope(feature.to_owned()));
        }
    }
    for feature in scope {
        if !net.has_feature(feature) {
            return Err(UnfoldError::UnknownScopeFeature(feature.clone()));
        }
    }
    if !rel.is_independent() || scope.is_empty() {
        return Ok(vec![rel.clone()]);
    }
    let mut unfolded = Vec::new();
    for feature in scope {
        let domain = net.feature(feature).expect("scope features were checked");
        for value in domain.domain() {
            unfolded.push(rel.with_condition(Condition::single(feature, value)));
        }
    }
    Ok(unfolded)
}

/// Unfolds every independent relation of every CPT over all other features.
/// Conditioned relations, the feature set, and the domains are untouched.
pub fn unfold_net(net: &CpNet) -> Result<CpNet, InvalidNet> {
    let report = net.validate();
    if !report.is_empty() {
        return Err(InvalidNet { report });
    }
    Ok(unfold_net_unchecked(net))
}

pub(crate) fn unfold_net_unchecked(net: &CpNet) -> CpNet {
    let mut result = net.clone();
    let names: Vec<String> = net.features().iter().map(|f| f.name().to_owned()).collect();
    for name in &names {
        let scope: BTreeSet<String> = names.iter().filter(|n| *n != name).cloned().collect();
        let mut relations = Vec::new();
        for rel in net.cpt(name).expect("cpt exists").relations() {
            if rel.is_independent() {
                let copies = unfold_relation(rel, name, net, &scope)
                    .expect("scope excludes the owner and an empty condition overlaps nothing");
                relations.extend(copies);
            } else {
                relations.push(rel.clone());
            }
        }
        result.replace_relations(name, relations);
    }
    result
}

/// Folds fully covered single-parent groups back to independent relations,
/// repeatedly until nothing changes.
pub fn fold_net(net: &CpNet) -> Result<CpNet, InvalidNet> {
    let report = net.validate();
    if !report.is_empty() {
        return Err(InvalidNet { report });
    }
    Ok(fold_net_unchecked(net))
}

pub(crate) fn fold_net_unchecked(net: &CpNet) -> CpNet {
    let mut result = net.clone();
    let names: Vec<String> = net.features().iter().map(|f| f.name().to_owned()).collect();
    for name in &names {
        let mut relations = result.cpt(name).expect("cpt exists").relations().to_vec();
        while fold_one_group(net, &mut relations) {}
        result.replace_relations(name, relations);
    }
    result
}

/// Performs the first possible fold in `relations`; returns whether one
/// happened. Candidate parents are visited in lexical order, groups in level
/// order, so repeated application is deterministic.
fn fold_one_group(net: &CpNet, relations: &mut Vec<PreferenceRelation>) -> bool {
    let Some((levels, indices)) = find_foldable_group(net, relations) else {
        return false;
    };
    let folded = PreferenceRelation::new(Condition::top(), levels)
        .expect("levels come from an existing relation");
    let first = indices[0];
    let removed: BTreeSet<usize> = indices.into_iter().collect();
    let mut index = 0;
    relations.retain(|_| {
        let keep = !removed.contains(&index);
        index += 1;
        keep
    });
    relations.insert(first, folded);
    true
}

type FoldPlan = (Vec<BTreeSet<String>>, Vec<usize>);

/// A full single-parent cover with identical orderings whose values no other
/// relation touches: the exact pattern `fold_net` rewrites as independent.
pub(crate) fn find_foldable_group(
    net: &CpNet,
    relations: &[PreferenceRelation],
) -> Option<FoldPlan> {
    let parents: BTreeSet<&str> = relations
        .iter()
        .filter_map(|rel| single_assignment(rel.condition()).map(|(f, _)| f))
        .collect();
    for parent in parents {
        // group same-parent rows by their level sequence
        let mut groups: BTreeMap<&[BTreeSet<String>], Vec<usize>> = BTreeMap::new();
        for (index, rel) in relations.iter().enumerate() {
            if let Some((feature, _)) = single_assignment(rel.condition()) {
                if feature == parent {
                    groups.entry(rel.levels()).or_default().push(index);
                }
            }
        }
        let domain: BTreeSet<&str> = net
            .feature(parent)
            .expect("conditions reference declared features")
            .domain()
            .iter()
            .map(String::as_str)
            .collect();
        for (levels, indices) in groups {
            let covered: BTreeSet<&str> = indices
                .iter()
                .filter_map(|&i| relations[i].condition().value_of(parent))
                .collect();
            if covered != domain {
                continue;
            }
            let group_values: BTreeSet<&str> =
                levels.iter().flatten().map(String::as_str).collect();
            let conflicting = relations.iter().enumerate().any(|(i, rel)| {
                !indices.contains(&i) && rel.values().any(|v| group_values.contains(v))
            });
            if conflicting {
                continue;
            }
            return Some((levels.to_vec(), indices));
        }
    }
    None
}

fn single_assignment(condition: &Condition) -> Option<(&str, &str)> {
    let mut assignments = condition.assignments();
    match (assignments.next(), assignments.next()) {
        (Some(pair), None) => Some(pair),
        _ => None,
    }
}
