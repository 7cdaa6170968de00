//! Shared fixtures for the benchmarks.

use cpnet::model::CpNet;
use cpnet::oracle::{generate_net, GeneratorParams};

/// A dense generated pair of nets sharing the same feature universe.
pub fn generated_pair(features: usize, domain: usize) -> (CpNet, CpNet) {
    let make = |seed| {
        generate_net(&GeneratorParams {
            feature_count: features,
            domain_size: (domain, domain),
            relation_density: 1.0,
            indifference_probability: 0.2,
            seed,
        })
        .expect("bench params are valid")
    };
    (make(1), make(2))
}

/// The small worked-example pair: one insertion, one tie, one skip, one new
/// feature.
pub fn worked_example_pair() -> (CpNet, CpNet) {
    let initial = cpnet::parse(
        "feature A: a1, a2, a3, a4\n\
         feature B: b1, b2\n\
         cpt A:\n\
         - B=b1 : a1 > a2 > a3 > a4\n\
         cpt B:\n\
         - T : b2 > b1\n",
    )
    .unwrap();
    let reference = cpnet::parse(
        "feature A: a2, a3, a4, a5, a6, a7\n\
         feature B: b1, b2\n\
         feature C: c1, c2\n\
         cpt A:\n\
         - B=b1 : a5 > a2 > a7 > a4 > a6 > a3\n\
         cpt B:\n\
         - T : b1 > b2\n\
         cpt C:\n\
         - B=b1 : c2 > c1\n",
    )
    .unwrap();
    (initial, reference)
}
