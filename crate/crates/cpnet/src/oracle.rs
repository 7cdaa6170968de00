//! Brute-force, implementation-independent verification of the enrichment
//! guarantees, plus a seeded random net generator for property testing.
//!
//! The two guarantees checked by [`check_enrichment`]:
//!
//! 1. no strict preference of the initial net is lost or overwritten;
//! 2. every strict preference of the reference net either appears in the
//!    result, is directly opposed by an initial-net fact under the same
//!    condition, or has a trace certificate (its value was skipped or tied).
//!
//! The checker consumes only nets and traces — never merge internals — so it
//! stays an independent oracle for the merge engine.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::merge::{enrich, CyclePolicy, MergeTrace, TraceEvent};
use crate::model::{fact_equal, Condition, CpNet, Fact, FactSet, InvalidNet, PreferenceRelation};
use crate::unfold::{fold_net_unchecked, unfold_net_unchecked};

/// Knobs for the seeded net generator. Identical params produce identical
/// nets, across processes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorParams {
    pub feature_count: usize,
    /// Inclusive (min, max) domain size per feature.
    pub domain_size: (usize, usize),
    /// Fraction of candidate conditions that get a relation.
    pub relation_density: f64,
    /// Chance that a value joins the previous level instead of starting one.
    pub indifference_probability: f64,
    pub seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            feature_count: 4,
            domain_size: (2, 4),
            relation_density: 0.7,
            indifference_probability: 0.15,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

fn validate_params(params: &GeneratorParams) -> Result<(), GeneratorError> {
    let (lo, hi) = params.domain_size;
    if params.feature_count == 0 {
        return Err(GeneratorError::InvalidParams(
            "feature count must be positive".into(),
        ));
    }
    if lo == 0 || lo > hi {
        return Err(GeneratorError::InvalidParams(format!(
            "domain size range ({lo}, {hi}) must be positive and ordered"
        )));
    }
    for (name, fraction) in [
        ("relation density", params.relation_density),
        ("indifference probability", params.indifference_probability),
    ] {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(GeneratorError::InvalidParams(format!(
                "{name} {fraction} is outside [0, 1]"
            )));
        }
    }
    Ok(())
}

fn feature_name(index: usize) -> String {
    if index < 26 {
        char::from(b'A' + index as u8).to_string()
    } else {
        format!("F{index}")
    }
}

/// Generates a valid, acyclic net: parents are drawn only from features
/// earlier in a shuffled topological order, and each (parent, value) pair
/// carries at most one relation, so validation cannot fail.
pub fn generate_net(params: &GeneratorParams) -> Result<CpNet, GeneratorError> {
    validate_params(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let names: Vec<String> = (0..params.feature_count).map(feature_name).collect();

    let mut net = CpNet::new();
    let (lo, hi) = params.domain_size;
    for name in &names {
        let size = rng.random_range(lo..=hi);
        let prefix = name.to_lowercase();
        let domain: Vec<String> = (1..=size).map(|j| format!("{prefix}{j}")).collect();
        net.add_feature(name, domain)
            .expect("generated feature names are unique");
    }

    let mut order: Vec<usize> = (0..params.feature_count).collect();
    order.shuffle(&mut rng);

    for (position, &feature_index) in order.iter().enumerate() {
        let feature = names[feature_index].clone();
        let own_domain = net
            .feature(&feature)
            .expect("feature was added")
            .domain()
            .to_vec();
        let roll: f64 = rng.random();
        let wanted_parents = if roll < 0.25 {
            0
        } else if roll < 0.75 {
            1
        } else {
            2
        };
        let parent_count = wanted_parents.min(position);
        let mut earlier: Vec<usize> = order[..position].to_vec();
        earlier.shuffle(&mut rng);
        let mut parents: Vec<String> = earlier[..parent_count]
            .iter()
            .map(|&i| names[i].clone())
            .collect();
        parents.sort();

        if parents.is_empty() {
            if rng.random_bool(params.relation_density) {
                let rel = random_relation(&mut rng, Condition::top(), &own_domain, params);
                net.add_relation(&feature, rel)
                    .expect("generated relation is well-formed");
            }
            continue;
        }
        for parent in &parents {
            let parent_domain = net
                .feature(parent)
                .expect("parents are declared features")
                .domain()
                .to_vec();
            for value in parent_domain {
                if rng.random_bool(params.relation_density) {
                    let rel = random_relation(
                        &mut rng,
                        Condition::single(parent, value),
                        &own_domain,
                        params,
                    );
                    net.add_relation(&feature, rel)
                        .expect("generated relation is well-formed");
                }
            }
        }
    }

    break_fold_triggers(&mut net);
    Ok(net)
}

fn random_relation(
    rng: &mut ChaCha8Rng,
    condition: Condition,
    domain: &[String],
    params: &GeneratorParams,
) -> PreferenceRelation {
    let mut values = domain.to_vec();
    values.shuffle(rng);
    let min_take = 2.min(values.len());
    let take = rng.random_range(min_take..=values.len());
    values.truncate(take);
    let mut levels: Vec<BTreeSet<String>> = Vec::new();
    for (i, value) in values.into_iter().enumerate() {
        if i == 0 || !rng.random_bool(params.indifference_probability) {
            levels.push(BTreeSet::new());
        }
        levels
            .last_mut()
            .expect("a level was just pushed")
            .insert(value);
    }
    PreferenceRelation::new(condition, levels).expect("levels are non-empty and disjoint")
}

/// Rewrites CPTs so that no single-parent group covers its parent's whole
/// domain with identical orderings while nothing else touches its values.
///
/// Folding such a group rewrites it as an independent relation, which in a
/// net of three or more features *widens* the stated facts (the new relation
/// also speaks under every other feature's values). Generated nets avoid the
/// pattern so that fold-after-unfold is fact-preserving on them.
fn break_fold_triggers(net: &mut CpNet) {
    if net.features().len() < 3 {
        return;
    }
    let names: Vec<String> = net.features().iter().map(|f| f.name().to_owned()).collect();
    for name in &names {
        loop {
            let relations = net.cpt(name).expect("cpt exists").relations().to_vec();
            let Some((levels, indices)) = crate::unfold::find_foldable_group(net, &relations)
            else {
                break;
            };
            let last = *indices.last().expect("a group has at least one member");
            let mut updated = relations;
            if indices.len() >= 2 && levels.len() >= 2 {
                let target = &updated[last];
                let mut reversed = target.levels().to_vec();
                reversed.reverse();
                updated[last] = PreferenceRelation::new(target.condition().clone(), reversed)
                    .expect("reversal preserves well-formedness");
            } else {
                updated.remove(last);
            }
            net.replace_relations(name, updated);
        }
    }
}

// ---------------------------------------------------------------------------
// Constraint checking
// ---------------------------------------------------------------------------

/// The verdict of [`check_enrichment`]. Passing means both violation lists
/// are empty.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintReport {
    /// Strict facts of the initial net missing from the result.
    pub constraint1_violations: Vec<Fact>,
    /// Strict facts of the reference net that vanished without a trace
    /// certificate or an opposing initial-net fact.
    pub constraint2_violations: Vec<Fact>,
}

impl ConstraintReport {
    pub fn passed(&self) -> bool {
        self.constraint1_violations.is_empty() && self.constraint2_violations.is_empty()
    }
}

impl fmt::Display for ConstraintReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "both constraints hold");
        }
        for fact in &self.constraint1_violations {
            writeln!(f, "constraint 1: initial fact lost: {fact}")?;
        }
        for fact in &self.constraint2_violations {
            writeln!(f, "constraint 2: reference fact uncovered: {fact}")?;
        }
        Ok(())
    }
}

/// Verifies an enrichment result against the two preservation constraints,
/// from the fact sets of the unfolded nets alone.
pub fn check_enrichment(
    initial: &CpNet,
    reference: &CpNet,
    result: &CpNet,
    trace: &MergeTrace,
) -> Result<ConstraintReport, InvalidNet> {
    for net in [initial, reference, result] {
        let report = net.validate();
        if !report.is_empty() {
            return Err(InvalidNet { report });
        }
    }
    let initial_facts = unfold_net_unchecked(initial).fact_set_unchecked();
    let reference_facts = unfold_net_unchecked(reference).fact_set_unchecked();
    let result_facts = unfold_net_unchecked(result).fact_set_unchecked();

    let constraint1_violations: Vec<Fact> = initial_facts
        .iter()
        .filter(|fact| fact.is_strict() && !result_facts.contains(fact))
        .cloned()
        .collect();
    let constraint2_violations: Vec<Fact> = reference_facts
        .iter()
        .filter(|fact| {
            fact.is_strict()
                && !result_facts.contains(*fact)
                && !opposed_by(fact, &initial_facts)
                && !certified(fact, trace)
        })
        .cloned()
        .collect();
    Ok(ConstraintReport {
        constraint1_violations,
        constraint2_violations,
    })
}

/// True when `facts` relates the same pair under the same condition the other
/// way: the reverse strict direction, or indifference against a strict claim.
fn opposed_by(fact: &Fact, facts: &FactSet) -> bool {
    let reverse = Fact::strict(
        fact.feature(),
        fact.condition().clone(),
        fact.right(),
        fact.left(),
    );
    let (a, b) = fact.pair();
    let indifferent = Fact::indifferent(fact.feature(), fact.condition().clone(), a, b);
    facts.contains(&reverse) || facts.contains(&indifferent)
}

/// True when the trace certifies the disappearance of `fact`: one of its
/// values was skipped as infeasible or stored in a tie instead of the chain.
fn certified(fact: &Fact, trace: &MergeTrace) -> bool {
    trace.events.iter().any(|event| {
        let (feature, condition, value) = match event {
            TraceEvent::Skipped {
                feature,
                condition,
                value,
                ..
            } => (feature, condition, value),
            TraceEvent::TieCreated {
                feature,
                condition,
                value,
                ..
            } => (feature, condition, value),
            _ => return false,
        };
        feature == fact.feature()
            && condition == fact.condition()
            && (value == fact.left() || value == fact.right())
    })
}

// ---------------------------------------------------------------------------
// Property suite
// ---------------------------------------------------------------------------

/// One failed check, with everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub trial: u64,
    pub initial_seed: u64,
    pub reference_seed: u64,
    pub check: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSummary {
    pub params: GeneratorParams,
    pub trials: u64,
    pub failures: Vec<TrialFailure>,
}

impl SuiteSummary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for SuiteSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "property suite: {} failures in {} trials (features={}, domains={}..={}, density={}, indifference={}, seed={})",
            self.failures.len(),
            self.trials,
            self.params.feature_count,
            self.params.domain_size.0,
            self.params.domain_size.1,
            self.params.relation_density,
            self.params.indifference_probability,
            self.params.seed,
        )?;
        for failure in &self.failures {
            writeln!(
                f,
                "trial {} [{}] (initial seed {}, reference seed {}): {}",
                failure.trial,
                failure.check,
                failure.initial_seed,
                failure.reference_seed,
                failure.detail
            )?;
        }
        Ok(())
    }
}

/// Runs `trials` independent trials: generate an (initial, reference) pair,
/// enrich, verify both constraints, and check fold-after-unfold identity,
/// self-enrichment, and empty-reference neutrality. Expected failure count is
/// zero; every failure carries its reproducer seeds.
pub fn property_suite(
    params: &GeneratorParams,
    trials: u64,
) -> Result<SuiteSummary, GeneratorError> {
    validate_params(params)?;
    if trials == 0 {
        return Err(GeneratorError::InvalidParams(
            "trial count must be positive".into(),
        ));
    }
    let mut seeder = ChaCha8Rng::seed_from_u64(params.seed);
    let mut failures = Vec::new();
    for trial in 0..trials {
        let initial_seed: u64 = seeder.random();
        let reference_seed: u64 = seeder.random();
        let initial = generate_net(&GeneratorParams {
            seed: initial_seed,
            ..*params
        })?;
        let reference = generate_net(&GeneratorParams {
            seed: reference_seed,
            ..*params
        })?;
        let mut fail = |check: &'static str, detail: String| {
            failures.push(TrialFailure {
                trial,
                initial_seed,
                reference_seed,
                check,
                detail,
            });
        };
        run_trial(&initial, &reference, &mut fail);
    }
    Ok(SuiteSummary {
        params: *params,
        trials,
        failures,
    })
}

fn run_trial(initial: &CpNet, reference: &CpNet, fail: &mut impl FnMut(&'static str, String)) {
    for (role, net) in [("initial", initial), ("reference", reference)] {
        let report = net.validate();
        if !report.is_empty() {
            fail(
                "generator-validity",
                format!("{role} net invalid: {report}"),
            );
            return;
        }
        let cycles = net.detect_cycles();
        if !cycles.is_empty() {
            fail(
                "generator-acyclic",
                format!("{role} net cyclic: {cycles:?}"),
            );
            return;
        }
    }

    match enrich(initial, reference, CyclePolicy::Warn) {
        Err(e) => fail("enrich", e.to_string()),
        Ok((result, trace)) => match check_enrichment(initial, reference, &result, &trace) {
            Err(e) => fail("constraints", e.to_string()),
            Ok(report) if !report.passed() => fail("constraints", report.to_string()),
            Ok(_) => {}
        },
    }

    for (role, net) in [("initial", initial), ("reference", reference)] {
        let round = fold_net_unchecked(&unfold_net_unchecked(net));
        match fact_equal(&round, net) {
            Ok(true) => {}
            Ok(false) => fail(
                "fold-unfold",
                format!("{role} net changed facts across fold(unfold(net))"),
            ),
            Err(e) => fail("fold-unfold", e.to_string()),
        }
    }

    match enrich(initial, initial, CyclePolicy::Warn) {
        Err(e) => fail("self-enrich", e.to_string()),
        Ok((result, _)) => match fact_equal(&result, initial) {
            Ok(true) => {}
            Ok(false) => fail("self-enrich", "facts changed".into()),
            Err(e) => fail("self-enrich", e.to_string()),
        },
    }

    match enrich(initial, &CpNet::new(), CyclePolicy::Warn) {
        Err(e) => fail("empty-reference", e.to_string()),
        Ok((result, _)) => match fact_equal(&result, initial) {
            Ok(true) => {}
            Ok(false) => fail("empty-reference", "facts changed".into()),
            Err(e) => fail("empty-reference", e.to_string()),
        },
    }
}

// ---------------------------------------------------------------------------
// Exhaustive desk-scale enumeration
// ---------------------------------------------------------------------------

/// Every two-feature net over `A{a1,a2}`/`B{b1,b2}` whose CPTs hold only
/// full-domain strict chains: per feature, an empty CPT, one independent
/// chain, one conditioned chain, or two conditioned chains. 11 x 11 nets.
pub fn enumerate_two_feature_chain_nets() -> Vec<CpNet> {
    fn cpt_options(other: &str, values: [&str; 2], orders: [&str; 2]) -> Vec<Vec<String>> {
        let mut options: Vec<Vec<String>> = vec![Vec::new()];
        for order in orders {
            options.push(vec![format!("- T : {order}")]);
        }
        for value in values {
            for order in orders {
                options.push(vec![format!("- {other}={value} : {order}")]);
            }
        }
        for first in orders {
            for second in orders {
                options.push(vec![
                    format!("- {other}={}: {first}", values[0]),
                    format!("- {other}={}: {second}", values[1]),
                ]);
            }
        }
        options
    }

    let a_options = cpt_options("B", ["b1", "b2"], ["a1 > a2", "a2 > a1"]);
    let b_options = cpt_options("A", ["a1", "a2"], ["b1 > b2", "b2 > b1"]);
    let mut nets = Vec::with_capacity(a_options.len() * b_options.len());
    for a_lines in &a_options {
        for b_lines in &b_options {
            let mut text = String::from("feature A: a1, a2\nfeature B: b1, b2\n");
            if !a_lines.is_empty() {
                text.push_str("cpt A:\n");
                for line in a_lines {
                    text.push_str(line);
                    text.push('\n');
                }
            }
            if !b_lines.is_empty() {
                text.push_str("cpt B:\n");
                for line in b_lines {
                    text.push_str(line);
                    text.push('\n');
                }
            }
            nets.push(crate::format::parse(&text).expect("enumerated nets are well-formed"));
        }
    }
    nets
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::net_from;

    #[test]
    fn generation_is_deterministic() {
        let params = GeneratorParams {
            feature_count: 2,
            domain_size: (2, 2),
            relation_density: 1.0,
            indifference_probability: 0.0,
            seed: 7,
        };
        let first = generate_net(&params).unwrap();
        let second = generate_net(&params).unwrap();
        assert_eq!(first, second);
        assert!(!first.is_empty());
    }

    #[test]
    fn zero_density_generates_empty_cpts() {
        let params = GeneratorParams {
            relation_density: 0.0,
            seed: 3,
            ..GeneratorParams::default()
        };
        let net = generate_net(&params).unwrap();
        assert!(net
            .features()
            .iter()
            .all(|f| net.cpt(f.name()).unwrap().is_empty()));
    }

    #[test]
    fn generated_nets_are_valid_and_acyclic() {
        for seed in 0..50 {
            let params = GeneratorParams {
                feature_count: 4,
                domain_size: (2, 3),
                relation_density: 0.8,
                indifference_probability: 0.2,
                seed,
            };
            let net = generate_net(&params).unwrap();
            assert!(net.validate().is_empty(), "seed {seed}");
            assert!(net.detect_cycles().is_empty(), "seed {seed}");
        }
    }

    #[test]
    fn params_are_validated() {
        let bad = GeneratorParams {
            relation_density: 1.5,
            ..GeneratorParams::default()
        };
        assert!(generate_net(&bad).is_err());
        let bad = GeneratorParams {
            feature_count: 0,
            ..GeneratorParams::default()
        };
        assert!(generate_net(&bad).is_err());
        let bad = GeneratorParams {
            domain_size: (3, 2),
            ..GeneratorParams::default()
        };
        assert!(generate_net(&bad).is_err());
    }

    fn worked_example_nets() -> (CpNet, CpNet) {
        let initial = net_from(
            "feature A: a1, a2, a3, a4\n\
             feature B: b1, b2\n\
             cpt A:\n\
             - B=b1 : a1 > a2 > a3 > a4\n\
             cpt B:\n\
             - T : b2 > b1\n",
        );
        let reference = net_from(
            "feature A: a2, a3, a4, a5, a6, a7\n\
             feature B: b1, b2\n\
             feature C: c1, c2\n\
             cpt A:\n\
             - B=b1 : a5 > a2 > a7 > a4 > a6 > a3\n\
             cpt B:\n\
             - T : b1 > b2\n\
             cpt C:\n\
             - B=b1 : c2 > c1\n",
        );
        (initial, reference)
    }

    #[test]
    fn checker_passes_the_worked_example() {
        let (initial, reference) = worked_example_nets();
        let (result, trace) = enrich(&initial, &reference, CyclePolicy::Warn).unwrap();
        let report = check_enrichment(&initial, &reference, &result, &trace).unwrap();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn checker_flags_a_planted_constraint1_fault() {
        let (initial, reference) = worked_example_nets();
        let (mut result, trace) = enrich(&initial, &reference, CyclePolicy::Warn).unwrap();
        // dropping the enriched chain erases the initial `a1 > a2` facts
        let kept: Vec<_> = result.cpt("A").unwrap().relations()[1..].to_vec();
        result.replace_relations("A", kept);
        let report = check_enrichment(&initial, &reference, &result, &trace).unwrap();
        assert!(!report.constraint1_violations.is_empty());
        assert!(report.to_string().contains("constraint 1"));
    }

    #[test]
    fn checker_accepts_skip_certificates_and_notices_their_absence() {
        let (initial, reference) = worked_example_nets();
        let (result, trace) = enrich(&initial, &reference, CyclePolicy::Warn).unwrap();
        // a6 never made it into the result; only its Skipped event covers it
        assert!(check_enrichment(&initial, &reference, &result, &trace)
            .unwrap()
            .passed());
        let mut censored = trace.clone();
        censored
            .events
            .retain(|e| !matches!(e, TraceEvent::Skipped { .. }));
        let report = check_enrichment(&initial, &reference, &result, &censored).unwrap();
        assert!(!report.constraint2_violations.is_empty());
    }

    #[test]
    fn suite_smoke_runs_clean() {
        let params = GeneratorParams {
            feature_count: 3,
            domain_size: (2, 3),
            relation_density: 0.7,
            indifference_probability: 0.1,
            seed: 11,
        };
        let summary = property_suite(&params, 5).unwrap();
        assert!(summary.passed(), "{summary}");
        assert_eq!(summary.trials, 5);
    }

    #[test]
    fn suite_rejects_zero_trials() {
        assert!(property_suite(&GeneratorParams::default(), 0).is_err());
    }

    #[test]
    fn enumeration_covers_all_chain_nets() {
        let nets = enumerate_two_feature_chain_nets();
        assert_eq!(nets.len(), 121);
        let unique: BTreeSet<String> = nets
            .iter()
            .map(|n| crate::format::serialize(n).unwrap())
            .collect();
        assert_eq!(unique.len(), 121);
        for net in &nets {
            assert!(net.validate().is_empty());
        }
    }
}
