//! Core CP-net data model.
//!
//! A [`CpNet`] is a set of named features, each with an ordered value domain
//! and a conditional preference table ([`Cpt`]). Every CPT row is a
//! [`PreferenceRelation`]: a [`Condition`] (partial assignment over *other*
//! features) plus an ordered sequence of levels. Values in earlier levels are
//! strictly preferred to values in later levels; values sharing a level are
//! indifferent. A relation with a single multi-value level is a pure
//! indifference statement, a relation with singleton levels is a strict chain.
//!
//! The dependency graph is not stored: an edge `G -> F` exists exactly when
//! `G` appears in some condition of `CPT(F)` (see [`CpNet::derived_parents`]).
//! Acyclicity is a reportable property, not an invariant — merging two acyclic
//! nets can produce a cyclic one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Construction errors for nets, features, and relations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("feature name must be non-empty")]
    EmptyFeatureName,
    #[error("feature `{0}` is already declared")]
    DuplicateFeature(String),
    #[error("feature `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("duplicate value `{value}` in the domain of `{feature}`")]
    DuplicateDomainValue { feature: String, value: String },
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("value `{value}` is not in the domain of `{feature}`")]
    UnknownValue { feature: String, value: String },
    #[error("relation for `{0}` conditions on its own feature")]
    SelfCondition(String),
    #[error("condition assigns feature `{0}` more than once")]
    DuplicateAssignment(String),
    #[error("relation has no levels")]
    NoLevels,
    #[error("relation has an empty level")]
    EmptyLevel,
    #[error("value `{0}` appears in more than one level")]
    OverlappingLevels(String),
}

/// A net that failed validation where a valid one was required.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid CP-net:\n{report}")]
pub struct InvalidNet {
    pub report: ValidationReport,
}

// ---------------------------------------------------------------------------
// Features and conditions
// ---------------------------------------------------------------------------

/// A named feature with its ordered value domain.
///
/// Domain order is declaration order; it only affects canonical serialization,
/// never preference semantics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feature {
    name: String,
    domain: Vec<String>,
}

impl Feature {
    pub fn new<N, D, V>(name: N, domain: D) -> Result<Self, ModelError>
    where
        N: Into<String>,
        D: IntoIterator<Item = V>,
        V: Into<String>,
    {
        let name = name.into();
        if name.is_empty() {
            return Err(ModelError::EmptyFeatureName);
        }
        let domain: Vec<String> = domain.into_iter().map(Into::into).collect();
        if domain.is_empty() {
            return Err(ModelError::EmptyDomain(name));
        }
        let mut seen = BTreeSet::new();
        for value in &domain {
            if !seen.insert(value.as_str()) {
                return Err(ModelError::DuplicateDomainValue {
                    feature: name,
                    value: value.clone(),
                });
            }
        }
        Ok(Feature { name, domain })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn has_value(&self, value: &str) -> bool {
        self.domain.iter().any(|v| v == value)
    }
}

/// A partial assignment of values to features: the part before the colon in
/// `B=b1 : a1 > a2`. The empty condition (`T`) marks an independent relation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Condition {
    assignments: BTreeMap<String, String>,
}

impl Condition {
    /// The empty (unconditional) condition.
    pub fn top() -> Self {
        Condition::default()
    }

    /// A single-feature condition `feature = value`.
    pub fn single(feature: impl Into<String>, value: impl Into<String>) -> Self {
        let mut assignments = BTreeMap::new();
        assignments.insert(feature.into(), value.into());
        Condition { assignments }
    }

    /// Builds a condition from assignment pairs, rejecting a feature that is
    /// assigned twice.
    pub fn from_assignments<I, F, V>(pairs: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (F, V)>,
        F: Into<String>,
        V: Into<String>,
    {
        let mut assignments = BTreeMap::new();
        for (feature, value) in pairs {
            let feature = feature.into();
            if assignments.insert(feature.clone(), value.into()).is_some() {
                return Err(ModelError::DuplicateAssignment(feature));
            }
        }
        Ok(Condition { assignments })
    }

    pub fn is_top(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Assignments in lexical feature order.
    pub fn assignments(&self) -> impl Iterator<Item = (&str, &str)> {
        self.assignments
            .iter()
            .map(|(f, v)| (f.as_str(), v.as_str()))
    }

    /// Feature names mentioned by this condition, in lexical order.
    pub fn features(&self) -> impl Iterator<Item = &str> {
        self.assignments.keys().map(String::as_str)
    }

    pub fn assigns(&self, feature: &str) -> bool {
        self.assignments.contains_key(feature)
    }

    pub fn value_of(&self, feature: &str) -> Option<&str> {
        self.assignments.get(feature).map(String::as_str)
    }
}

impl fmt::Display for Condition {
    /// Compact rendering: `T`, `B=b1`, `A=a1&B=b2` (no spaces, lexical order).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_top() {
            return write!(f, "T");
        }
        let mut first = true;
        for (feature, value) in &self.assignments {
            if !first {
                write!(f, "&")?;
            }
            write!(f, "{feature}={value}")?;
            first = false;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Preference relations and CPTs
// ---------------------------------------------------------------------------

/// One CPT row: a condition plus an ordered sequence of disjoint, non-empty
/// value levels. `a1 > a2 ~ a3` has levels `[{a1}, {a2, a3}]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PreferenceRelation {
    condition: Condition,
    levels: Vec<BTreeSet<String>>,
}

impl PreferenceRelation {
    pub fn new(condition: Condition, levels: Vec<BTreeSet<String>>) -> Result<Self, ModelError> {
        if levels.is_empty() {
            return Err(ModelError::NoLevels);
        }
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for level in &levels {
            if level.is_empty() {
                return Err(ModelError::EmptyLevel);
            }
            for value in level {
                if !seen.insert(value) {
                    return Err(ModelError::OverlappingLevels(value.clone()));
                }
            }
        }
        Ok(PreferenceRelation { condition, levels })
    }

    pub fn condition(&self) -> &Condition {
        &self.condition
    }

    pub fn levels(&self) -> &[BTreeSet<String>] {
        &self.levels
    }

    /// True when the condition is empty (an independent relation).
    pub fn is_independent(&self) -> bool {
        self.condition.is_top()
    }

    /// All values, most-preferred level first, lexical within a level.
    pub fn values(&self) -> impl Iterator<Item = &str> {
        self.levels.iter().flatten().map(String::as_str)
    }

    pub fn contains(&self, value: &str) -> bool {
        self.levels.iter().any(|level| level.contains(value))
    }

    /// Index of the level holding `value`, if present.
    pub fn level_of(&self, value: &str) -> Option<usize> {
        self.levels.iter().position(|level| level.contains(value))
    }

    /// Rebinds the relation to a different condition, keeping the levels.
    pub fn with_condition(&self, condition: Condition) -> Self {
        PreferenceRelation {
            condition,
            levels: self.levels.clone(),
        }
    }

    /// Splices `value` in as a new singleton level at `index`.
    ///
    /// Caller guarantees `value` is not already present and
    /// `index <= levels.len()`.
    pub(crate) fn insert_singleton_level(&mut self, index: usize, value: String) {
        debug_assert!(!self.contains(&value));
        let mut level = BTreeSet::new();
        level.insert(value);
        self.levels.insert(index, level);
    }
}

impl fmt::Display for PreferenceRelation {
    /// Canonical `cond : v1 > v2 ~ v3` rendering.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {}", self.condition, render_levels(&self.levels))
    }
}

/// Canonical ordering text: levels joined by ` > `, values within a level
/// joined by ` ~ ` in lexical order.
pub(crate) fn render_levels(levels: &[BTreeSet<String>]) -> String {
    levels
        .iter()
        .map(|level| level.iter().cloned().collect::<Vec<_>>().join(" ~ "))
        .collect::<Vec<_>>()
        .join(" > ")
}

/// A conditional preference table: the relations of one feature, in insertion
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cpt {
    owner: String,
    relations: Vec<PreferenceRelation>,
}

impl Cpt {
    pub(crate) fn new(owner: impl Into<String>) -> Self {
        Cpt {
            owner: owner.into(),
            relations: Vec::new(),
        }
    }

    pub fn owner(&self) -> &str {
        &self.owner
    }

    pub fn relations(&self) -> &[PreferenceRelation] {
        &self.relations
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub(crate) fn push(&mut self, rel: PreferenceRelation) {
        self.relations.push(rel);
    }

    pub(crate) fn relations_mut(&mut self) -> &mut Vec<PreferenceRelation> {
        &mut self.relations
    }
}

// ---------------------------------------------------------------------------
// The net
// ---------------------------------------------------------------------------

/// A CP-net: features in declaration order, one CPT per feature.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CpNet {
    features: Vec<Feature>,
    cpts: BTreeMap<String, Cpt>,
}

impl CpNet {
    pub fn new() -> Self {
        CpNet::default()
    }

    /// True when the net declares no features at all.
    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn feature(&self, name: &str) -> Option<&Feature> {
        self.features.iter().find(|f| f.name() == name)
    }

    pub fn has_feature(&self, name: &str) -> bool {
        self.feature(name).is_some()
    }

    pub fn cpt(&self, feature: &str) -> Option<&Cpt> {
        self.cpts.get(feature)
    }

    /// Declares a new feature with an empty CPT.
    pub fn add_feature<N, D, V>(&mut self, name: N, domain: D) -> Result<(), ModelError>
    where
        N: Into<String>,
        D: IntoIterator<Item = V>,
        V: Into<String>,
    {
        let feature = Feature::new(name, domain)?;
        if self.has_feature(feature.name()) {
            return Err(ModelError::DuplicateFeature(feature.name().to_owned()));
        }
        self.cpts
            .insert(feature.name().to_owned(), Cpt::new(feature.name()));
        self.features.push(feature);
        Ok(())
    }

    /// Appends a relation to `CPT(feature)` after checking that every value
    /// belongs to the owner's domain, every condition assignment names an
    /// existing feature and a value of its domain, and the condition does not
    /// assign the owner itself.
    pub fn add_relation(
        &mut self,
        feature: &str,
        rel: PreferenceRelation,
    ) -> Result<(), ModelError> {
        let owner = self
            .feature(feature)
            .ok_or_else(|| ModelError::UnknownFeature(feature.to_owned()))?;
        for value in rel.values() {
            if !owner.has_value(value) {
                return Err(ModelError::UnknownValue {
                    feature: feature.to_owned(),
                    value: value.to_owned(),
                });
            }
        }
        for (cond_feature, cond_value) in rel.condition().assignments() {
            if cond_feature == feature {
                return Err(ModelError::SelfCondition(feature.to_owned()));
            }
            let declared = self
                .feature(cond_feature)
                .ok_or_else(|| ModelError::UnknownFeature(cond_feature.to_owned()))?;
            if !declared.has_value(cond_value) {
                return Err(ModelError::UnknownValue {
                    feature: cond_feature.to_owned(),
                    value: cond_value.to_owned(),
                });
            }
        }
        self.cpts
            .get_mut(feature)
            .expect("cpt exists for every feature")
            .push(rel);
        Ok(())
    }

    /// Appends any of `values` missing from `feature`'s domain, in the order
    /// given. Used by enrichment to union the reference net's domain in.
    pub(crate) fn extend_domain<'a>(
        &mut self,
        feature: &str,
        values: impl IntoIterator<Item = &'a str>,
    ) -> Result<(), ModelError> {
        let owner = self
            .features
            .iter_mut()
            .find(|f| f.name() == feature)
            .ok_or_else(|| ModelError::UnknownFeature(feature.to_owned()))?;
        for value in values {
            if !owner.has_value(value) {
                owner.domain.push(value.to_owned());
            }
        }
        Ok(())
    }

    /// Swaps in a new relation list for `feature`, preserving everything else.
    pub(crate) fn replace_relations(&mut self, feature: &str, relations: Vec<PreferenceRelation>) {
        let cpt = self
            .cpts
            .get_mut(feature)
            .expect("cpt exists for every feature");
        *cpt.relations_mut() = relations;
    }

    /// The features mentioned by conditions in `CPT(feature)`. An edge
    /// `G -> F` of the dependency graph exists iff `G` is in
    /// `derived_parents(F)`.
    pub fn derived_parents(&self, feature: &str) -> Result<BTreeSet<String>, ModelError> {
        let cpt = self
            .cpt(feature)
            .ok_or_else(|| ModelError::UnknownFeature(feature.to_owned()))?;
        let mut parents = BTreeSet::new();
        for rel in cpt.relations() {
            for parent in rel.condition().features() {
                parents.insert(parent.to_owned());
            }
        }
        Ok(parents)
    }

    /// Every elementary cycle of the derived dependency graph.
    ///
    /// Each cycle is listed in edge order and rotated to start at its
    /// lexically smallest feature; the cycle list itself is sorted lexically.
    /// Empty result iff the graph is acyclic.
    pub fn detect_cycles(&self) -> Vec<Vec<String>> {
        // successors[g] = features whose CPT conditions on g
        let mut successors: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for feature in &self.features {
            for rel in self.cpts[feature.name()].relations() {
                for parent in rel.condition().features() {
                    successors.entry(parent).or_default().insert(feature.name());
                }
            }
        }

        // Rooted DFS: a cycle is enumerated exactly once, from its lexically
        // smallest node, by only walking nodes greater than the root.
        let mut cycles: Vec<Vec<String>> = Vec::new();
        let mut names: Vec<&str> = self.features.iter().map(|f| f.name()).collect();
        names.sort_unstable();
        for &root in &names {
            let mut path: Vec<&str> = vec![root];
            let mut on_path: BTreeSet<&str> = BTreeSet::new();
            on_path.insert(root);
            search_cycles(
                root,
                root,
                &successors,
                &mut path,
                &mut on_path,
                &mut cycles,
            );
        }
        cycles.sort();
        cycles
    }

    /// Checks well-formedness: unknown features/values, self-conditioning,
    /// duplicate values within a relation, and ordering contradictions (two
    /// relations asserting opposite strict directions, or strict versus
    /// indifferent, over the same value pair under equal conditions).
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for feature in &self.features {
            let cpt = &self.cpts[feature.name()];
            for rel in cpt.relations() {
                for (cond_feature, cond_value) in rel.condition().assignments() {
                    if cond_feature == feature.name() {
                        violations.push(Violation::SelfCondition {
                            feature: feature.name().to_owned(),
                        });
                        continue;
                    }
                    match self.feature(cond_feature) {
                        None => violations.push(Violation::UnknownConditionFeature {
                            feature: feature.name().to_owned(),
                            condition_feature: cond_feature.to_owned(),
                        }),
                        Some(declared) if !declared.has_value(cond_value) => {
                            violations.push(Violation::UnknownConditionValue {
                                feature: feature.name().to_owned(),
                                condition_feature: cond_feature.to_owned(),
                                value: cond_value.to_owned(),
                            })
                        }
                        Some(_) => {}
                    }
                }
                let mut seen = BTreeSet::new();
                for value in rel.values() {
                    if !feature.has_value(value) {
                        violations.push(Violation::UnknownValue {
                            feature: feature.name().to_owned(),
                            value: value.to_owned(),
                        });
                    }
                    if !seen.insert(value) {
                        violations.push(Violation::DuplicateValue {
                            feature: feature.name().to_owned(),
                            value: value.to_owned(),
                        });
                    }
                }
            }
            violations.extend(find_contradictions(feature.name(), cpt));
        }
        violations.sort();
        violations.dedup();
        ValidationReport { violations }
    }

    /// Atomizes the net into sanctioned pairwise facts. Requires a net that
    /// passes [`CpNet::validate`].
    pub fn fact_set(&self) -> Result<FactSet, InvalidNet> {
        let report = self.validate();
        if !report.is_empty() {
            return Err(InvalidNet { report });
        }
        Ok(self.fact_set_unchecked())
    }

    pub(crate) fn fact_set_unchecked(&self) -> FactSet {
        let mut facts = BTreeSet::new();
        for feature in &self.features {
            for rel in self.cpts[feature.name()].relations() {
                atomize(feature.name(), rel, &mut facts);
            }
        }
        facts
    }
}

fn search_cycles<'a>(
    root: &'a str,
    current: &'a str,
    successors: &BTreeMap<&'a str, BTreeSet<&'a str>>,
    path: &mut Vec<&'a str>,
    on_path: &mut BTreeSet<&'a str>,
    cycles: &mut Vec<Vec<String>>,
) {
    let Some(nexts) = successors.get(current) else {
        return;
    };
    for &next in nexts {
        if next == root {
            cycles.push(path.iter().map(|&n| n.to_owned()).collect());
        } else if next > root && on_path.insert(next) {
            path.push(next);
            search_cycles(root, next, successors, path, on_path, cycles);
            path.pop();
            on_path.remove(next);
        }
    }
}

/// Strict pair direction bookkeeping for the contradiction scan.
#[derive(Default)]
struct PairOrderings {
    forward: bool,  // left > right (lexical pair order)
    backward: bool, // right > left
    indifferent: bool,
}

fn find_contradictions(feature: &str, cpt: &Cpt) -> Vec<Violation> {
    let mut seen: BTreeMap<(Condition, String, String), PairOrderings> = BTreeMap::new();
    for rel in cpt.relations() {
        let levels = rel.levels();
        for (i, upper) in levels.iter().enumerate() {
            for left in upper {
                for right in upper {
                    if left < right {
                        seen.entry((rel.condition().clone(), left.clone(), right.clone()))
                            .or_default()
                            .indifferent = true;
                    }
                }
            }
            for lower in levels.iter().skip(i + 1) {
                for winner in upper {
                    for loser in lower {
                        let entry = if winner < loser {
                            (rel.condition().clone(), winner.clone(), loser.clone())
                        } else {
                            (rel.condition().clone(), loser.clone(), winner.clone())
                        };
                        let orderings = seen.entry(entry).or_default();
                        if winner < loser {
                            orderings.forward = true;
                        } else {
                            orderings.backward = true;
                        }
                    }
                }
            }
        }
    }
    seen.into_iter()
        .filter(|(_, o)| (o.forward && o.backward) || (o.indifferent && (o.forward || o.backward)))
        .map(|((condition, left, right), _)| Violation::Contradiction {
            feature: feature.to_owned(),
            condition,
            left,
            right,
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Facts
// ---------------------------------------------------------------------------

/// Whether a fact asserts strict preference or indifference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FactKind {
    Strict,
    Indifferent,
}

/// An atomic conditional pairwise preference: `condition : left > right` or
/// `condition : left ~ right`. Indifferent facts keep `(left, right)` in
/// lexical order so that `a ~ b` and `b ~ a` are one fact.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    feature: String,
    condition: Condition,
    kind: FactKind,
    left: String,
    right: String,
}

impl Fact {
    /// A strict fact `left > right`.
    pub fn strict(
        feature: impl Into<String>,
        condition: Condition,
        left: impl Into<String>,
        right: impl Into<String>,
    ) -> Self {
        let (left, right) = (left.into(), right.into());
        assert_ne!(left, right, "a fact relates two distinct values");
        Fact {
            feature: feature.into(),
            condition,
            kind: FactKind::Strict,
            left,
            right,
        }
    }

    /// An indifferent fact `left ~ right` (stored in lexical order).
    pub fn indifferent(
        feature: impl Into<String>,
        condition: Condition,
        a: impl Into<String>,
        b: impl Into<String>,
    ) -> Self {
        let (a, b) = (a.into(), b.into());
        assert_ne!(a, b, "a fact relates two distinct values");
        let (left, right) = if a < b { (a, b) } else { (b, a) };
        Fact {
            feature: feature.into(),
            condition,
            kind: FactKind::Indifferent,
            left,
            right,
        }
    }

    pub fn feature(&self) -> &str {
        &self.feature
    }

    pub fn condition(&self) -> &Condition {
        &self.condition
    }

    pub fn kind(&self) -> FactKind {
        self.kind
    }

    pub fn is_strict(&self) -> bool {
        self.kind == FactKind::Strict
    }

    pub fn left(&self) -> &str {
        &self.left
    }

    pub fn right(&self) -> &str {
        &self.right
    }

    /// The unordered value pair, lexically ordered.
    pub fn pair(&self) -> (&str, &str) {
        if self.left < self.right {
            (&self.left, &self.right)
        } else {
            (&self.right, &self.left)
        }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = match self.kind {
            FactKind::Strict => ">",
            FactKind::Indifferent => "~",
        };
        write!(
            f,
            "{} | {} | {} {} {}",
            self.feature, self.condition, self.left, sym, self.right
        )
    }
}

/// The sanctioned facts of a net, deterministically ordered.
pub type FactSet = BTreeSet<Fact>;

fn atomize(feature: &str, rel: &PreferenceRelation, facts: &mut FactSet) {
    let levels = rel.levels();
    for (i, upper) in levels.iter().enumerate() {
        for a in upper {
            for b in upper {
                if a < b {
                    facts.insert(Fact::indifferent(feature, rel.condition().clone(), a, b));
                }
            }
        }
        for lower in levels.iter().skip(i + 1) {
            for winner in upper {
                for loser in lower {
                    facts.insert(Fact::strict(
                        feature,
                        rel.condition().clone(),
                        winner,
                        loser,
                    ));
                }
            }
        }
    }
}

/// Semantic equality: equal feature/domain sets and equal fact sets of the
/// unfolded nets. Both nets must pass validation.
pub fn fact_equal(a: &CpNet, b: &CpNet) -> Result<bool, InvalidNet> {
    for net in [a, b] {
        let report = net.validate();
        if !report.is_empty() {
            return Err(InvalidNet { report });
        }
    }
    let features_a: BTreeMap<&str, BTreeSet<&str>> = feature_map(a);
    let features_b: BTreeMap<&str, BTreeSet<&str>> = feature_map(b);
    if features_a != features_b {
        return Ok(false);
    }
    let facts_a = crate::unfold::unfold_net_unchecked(a).fact_set_unchecked();
    let facts_b = crate::unfold::unfold_net_unchecked(b).fact_set_unchecked();
    Ok(facts_a == facts_b)
}

fn feature_map(net: &CpNet) -> BTreeMap<&str, BTreeSet<&str>> {
    net.features()
        .iter()
        .map(|f| (f.name(), f.domain().iter().map(String::as_str).collect()))
        .collect()
}

// ---------------------------------------------------------------------------
// Validation report
// ---------------------------------------------------------------------------

/// One well-formedness violation found by [`CpNet::validate`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    UnknownConditionFeature {
        feature: String,
        condition_feature: String,
    },
    UnknownConditionValue {
        feature: String,
        condition_feature: String,
        value: String,
    },
    UnknownValue {
        feature: String,
        value: String,
    },
    SelfCondition {
        feature: String,
    },
    DuplicateValue {
        feature: String,
        value: String,
    },
    Contradiction {
        feature: String,
        condition: Condition,
        left: String,
        right: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownConditionFeature {
                feature,
                condition_feature,
            } => write!(
                f,
                "cpt {feature}: condition references unknown feature `{condition_feature}`"
            ),
            Violation::UnknownConditionValue {
                feature,
                condition_feature,
                value,
            } => write!(
                f,
                "cpt {feature}: condition value `{value}` is not in the domain of `{condition_feature}`"
            ),
            Violation::UnknownValue { feature, value } => write!(
                f,
                "cpt {feature}: value `{value}` is not in the domain of `{feature}`"
            ),
            Violation::SelfCondition { feature } => {
                write!(f, "cpt {feature}: relation conditions on its own feature")
            }
            Violation::DuplicateValue { feature, value } => write!(
                f,
                "cpt {feature}: value `{value}` appears in more than one level of a relation"
            ),
            Violation::Contradiction {
                feature,
                condition,
                left,
                right,
            } => write!(
                f,
                "cpt {feature}: contradictory orderings over `{left}`/`{right}` under condition `{condition}`"
            ),
        }
    }
}

/// The outcome of validating a net. Empty iff the net is well-formed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, violation) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{violation}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{net_from, rel};

    fn chain_net() -> CpNet {
        net_from(
            "feature A: a1, a2, a3\n\
             feature B: b1, b2\n\
             feature C: c1, c2\n\
             cpt A:\n\
             - T : a1 > a2 > a3\n\
             cpt B:\n\
             - A=a1 : b1 > b2\n\
             - A=a2 : b2 > b1\n\
             - A=a3 : b1 > b2\n\
             cpt C:\n\
             - B=b1 : c1 > c2\n\
             - B=b2 : c2 > c1\n",
        )
    }

    #[test]
    fn add_feature_to_existing_net() {
        let mut net = CpNet::new();
        net.add_feature("A", ["a1", "a2"]).unwrap();
        net.add_feature("B", ["b1", "b2"]).unwrap();
        net.add_feature("C", ["c1", "c2"]).unwrap();
        assert_eq!(
            net.features().iter().map(Feature::name).collect::<Vec<_>>(),
            ["A", "B", "C"]
        );
        assert!(net.cpt("C").unwrap().is_empty());
    }

    #[test]
    fn add_feature_to_empty_net() {
        let mut net = CpNet::new();
        net.add_feature("A", ["a1"]).unwrap();
        assert_eq!(net.features().len(), 1);
        assert!(net.cpt("A").unwrap().is_empty());
    }

    #[test]
    fn add_feature_rejects_duplicates_and_bad_domains() {
        let mut net = CpNet::new();
        net.add_feature("A", ["a1"]).unwrap();
        assert_eq!(
            net.add_feature("A", ["a2"]),
            Err(ModelError::DuplicateFeature("A".into()))
        );
        assert_eq!(
            net.add_feature("B", Vec::<String>::new()),
            Err(ModelError::EmptyDomain("B".into()))
        );
        assert!(matches!(
            net.add_feature("C", ["c1", "c1"]),
            Err(ModelError::DuplicateDomainValue { .. })
        ));
    }

    #[test]
    fn add_relation_accepts_conditional_chain() {
        let mut net = CpNet::new();
        net.add_feature("A", ["a1", "a2", "a3", "a4"]).unwrap();
        net.add_feature("B", ["b1", "b2"]).unwrap();
        net.add_relation("A", rel("B=b1 : a1 > a2 > a3 > a4"))
            .unwrap();
        assert_eq!(net.cpt("A").unwrap().relations().len(), 1);
    }

    #[test]
    fn add_relation_accepts_empty_condition() {
        let mut net = CpNet::new();
        net.add_feature("A", ["a1", "a2"]).unwrap();
        net.add_feature("B", ["b1", "b2"]).unwrap();
        net.add_relation("B", rel("T : b2 > b1")).unwrap();
        assert!(net.cpt("B").unwrap().relations()[0].is_independent());
    }

    #[test]
    fn add_relation_rejects_bad_values_and_self_conditions() {
        let mut net = CpNet::new();
        net.add_feature("A", ["a1", "a2"]).unwrap();
        net.add_feature("B", ["b1", "b2"]).unwrap();
        assert_eq!(
            net.add_relation("A", rel("T : a1 > a9")),
            Err(ModelError::UnknownValue {
                feature: "A".into(),
                value: "a9".into()
            })
        );
        assert_eq!(
            net.add_relation("A", rel("A=a1 : a1 > a2")),
            Err(ModelError::SelfCondition("A".into()))
        );
        assert_eq!(
            net.add_relation("A", rel("B=b9 : a1 > a2")),
            Err(ModelError::UnknownValue {
                feature: "B".into(),
                value: "b9".into()
            })
        );
        assert_eq!(
            net.add_relation("Z", rel("T : a1 > a2")),
            Err(ModelError::UnknownFeature("Z".into()))
        );
    }

    #[test]
    fn relation_construction_rejects_malformed_levels() {
        assert_eq!(
            PreferenceRelation::new(Condition::top(), vec![]),
            Err(ModelError::NoLevels)
        );
        assert_eq!(
            PreferenceRelation::new(Condition::top(), vec![BTreeSet::new()]),
            Err(ModelError::EmptyLevel)
        );
        let a1: BTreeSet<String> = ["a1".to_owned()].into();
        assert_eq!(
            PreferenceRelation::new(Condition::top(), vec![a1.clone(), a1]),
            Err(ModelError::OverlappingLevels("a1".into()))
        );
    }

    #[test]
    fn derived_parents_of_conditioned_feature() {
        let net = chain_net();
        assert_eq!(
            net.derived_parents("B").unwrap(),
            BTreeSet::from(["A".to_owned()])
        );
    }

    #[test]
    fn derived_parents_of_independent_feature_is_empty() {
        let net = chain_net();
        assert!(net.derived_parents("A").unwrap().is_empty());
    }

    #[test]
    fn derived_parents_unions_over_all_conditions() {
        // CPT(B) shaped like the enriched two-parent table: a-rows and c-rows.
        let net = net_from(
            "feature A: a1, a2\n\
             feature B: b1, b2\n\
             feature C: c1, c2\n\
             cpt B:\n\
             - A=a1 : b2 > b1\n\
             - C=c1 : b1 > b2\n",
        );
        assert_eq!(
            net.derived_parents("B").unwrap(),
            BTreeSet::from(["A".to_owned(), "C".to_owned()])
        );
        assert!(net.derived_parents("Q").is_err());
    }

    #[test]
    fn detect_cycles_on_chain_is_empty() {
        assert!(chain_net().detect_cycles().is_empty());
    }

    #[test]
    fn detect_cycles_finds_five_cycle() {
        let net = net_from(
            "feature A: a1, a2\n\
             feature B: b1, b2\n\
             feature C: c1, c2\n\
             feature D: d1, d2\n\
             feature E: e1, e2\n\
             cpt A:\n\
             - E=e1 : a1 > a2\n\
             cpt B:\n\
             - A=a1 : b1 > b2\n\
             cpt C:\n\
             - B=b1 : c1 > c2\n\
             cpt D:\n\
             - C=c1 : d1 > d2\n\
             cpt E:\n\
             - D=d1 : e1 > e2\n",
        );
        assert_eq!(
            net.detect_cycles(),
            vec![vec![
                "A".to_owned(),
                "B".into(),
                "C".into(),
                "D".into(),
                "E".into()
            ]]
        );
    }

    #[test]
    fn detect_cycles_finds_two_cycle() {
        let net = net_from(
            "feature X: x1, x2\n\
             feature Y: y1, y2\n\
             cpt X:\n\
             - Y=y1 : x1 > x2\n\
             cpt Y:\n\
             - X=x1 : y1 > y2\n",
        );
        assert_eq!(net.detect_cycles(), vec![vec!["X".to_owned(), "Y".into()]]);
    }

    #[test]
    fn validate_accepts_chain_net() {
        assert!(chain_net().validate().is_empty());
    }

    #[test]
    fn validate_flags_direct_opposition_once() {
        let net = net_from(
            "feature A: a1, a2\n\
             feature B: b1, b2\n\
             cpt A:\n\
             - B=b1 : a1 > a2\n\
             - B=b1 : a2 > a1\n",
        );
        let report = net.validate();
        assert_eq!(report.violations().len(), 1);
        assert!(matches!(
            &report.violations()[0],
            Violation::Contradiction { feature, left, right, .. }
                if feature == "A" && left == "a1" && right == "a2"
        ));
    }

    #[test]
    fn validate_allows_opposite_orders_under_different_conditions() {
        let net = net_from(
            "feature A: a1, a2\n\
             feature B: b1, b2\n\
             cpt A:\n\
             - B=b1 : a1 > a2\n\
             - B=b2 : a2 > a1\n",
        );
        assert!(net.validate().is_empty());
    }

    #[test]
    fn validate_flags_strict_versus_indifferent() {
        let net = net_from(
            "feature A: a1, a2\n\
             feature B: b1, b2\n\
             cpt A:\n\
             - B=b1 : a1 > a2\n\
             - B=b1 : a1 ~ a2\n",
        );
        assert_eq!(net.validate().violations().len(), 1);
    }

    #[test]
    fn fact_set_takes_transitive_closure_of_chain() {
        let net = net_from(
            "feature A: a1, a2, a3\n\
             cpt A:\n\
             - T : a1 > a2 > a3\n",
        );
        let facts = net.fact_set().unwrap();
        let expected: FactSet = [
            Fact::strict("A", Condition::top(), "a1", "a2"),
            Fact::strict("A", Condition::top(), "a1", "a3"),
            Fact::strict("A", Condition::top(), "a2", "a3"),
        ]
        .into();
        assert_eq!(facts, expected);
    }

    #[test]
    fn fact_set_emits_one_fact_per_indifferent_pair() {
        let net = net_from(
            "feature A: a1, a5\n\
             feature B: b1, b2\n\
             cpt A:\n\
             - B=b1 : a1 ~ a5\n",
        );
        let facts = net.fact_set().unwrap();
        let expected: FactSet = [Fact::indifferent(
            "A",
            Condition::single("B", "b1"),
            "a1",
            "a5",
        )]
        .into();
        assert_eq!(facts, expected);
    }

    #[test]
    fn fact_set_of_conditioned_two_value_cpt() {
        let mut net = CpNet::new();
        net.add_feature("B", ["b1", "b2"]).unwrap();
        net.add_feature("C", ["c1", "c2"]).unwrap();
        net.add_relation("C", rel("B=b1 : c1 > c2")).unwrap();
        net.add_relation("C", rel("B=b2 : c2 > c1")).unwrap();
        let expected: FactSet = [
            Fact::strict("C", Condition::single("B", "b1"), "c1", "c2"),
            Fact::strict("C", Condition::single("B", "b2"), "c2", "c1"),
        ]
        .into();
        assert_eq!(net.fact_set().unwrap(), expected);
    }

    #[test]
    fn fact_set_rejects_invalid_net() {
        let net = net_from(
            "feature A: a1, a2\n\
             cpt A:\n\
             - T : a1 > a2\n\
             - T : a2 > a1\n",
        );
        assert!(net.fact_set().is_err());
    }

    #[test]
    fn fact_equal_is_reflexive() {
        let net = chain_net();
        assert!(fact_equal(&net, &net).unwrap());
    }

    #[test]
    fn fact_equal_matches_unfolded_form() {
        let folded = net_from(
            "feature Y: y1, y2\n\
             feature X: x1, x2\n\
             cpt Y:\n\
             - T : y1 > y2\n",
        );
        let unfolded = net_from(
            "feature Y: y1, y2\n\
             feature X: x1, x2\n\
             cpt Y:\n\
             - X=x1 : y1 > y2\n\
             - X=x2 : y1 > y2\n",
        );
        assert!(fact_equal(&folded, &unfolded).unwrap());
    }

    #[test]
    fn fact_equal_detects_reversed_chain() {
        let net = chain_net();
        let mut reversed = net_from(
            "feature A: a1, a2, a3\n\
             feature B: b1, b2\n\
             feature C: c1, c2\n\
             cpt A:\n\
             - T : a3 > a2 > a1\n",
        );
        for line in ["A=a1 : b1 > b2", "A=a2 : b2 > b1", "A=a3 : b1 > b2"] {
            reversed.add_relation("B", rel(line)).unwrap();
        }
        reversed.add_relation("C", rel("B=b1 : c1 > c2")).unwrap();
        reversed.add_relation("C", rel("B=b2 : c2 > c1")).unwrap();
        assert!(!fact_equal(&net, &reversed).unwrap());
    }

    #[test]
    fn condition_display_is_compact_and_sorted() {
        assert_eq!(Condition::top().to_string(), "T");
        let cond = Condition::from_assignments([("B", "b2"), ("A", "a1")]).unwrap();
        assert_eq!(cond.to_string(), "A=a1&B=b2");
    }
}
