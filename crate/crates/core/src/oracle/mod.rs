//! Independent checking machinery: random models, brute-force path
//! enumeration, round-trip estimation, non-identifiability witnesses,
//! c-tree search and the comparison of identification procedures.

pub mod brute;
mod compare;
mod ctree;
mod random;
mod roundtrip;
mod suite;
mod witness;

pub use compare::{compare_criteria, comparison_csv, run_criterion, Comparison, Criterion};
pub use ctree::{c_tree_exists, C_TREE_MAX_NODES};
pub use random::{
    ensemble, random_graph, random_instance, random_model, EnsembleConfig, EnsembleGraph,
    COEFFICIENT_RANGE, CONFOUNDING_RANGE,
};
pub use roundtrip::{oracle_sub_model_covariance, verify_round_trip, RoundTripMiss, RoundTripReport};
pub use suite::{
    random_check, CTreeViolation, ContainmentViolation, RandomCheckReport, SoundnessViolation,
    SuiteOptions,
};
pub use witness::{nonident_witness, Witness, MIN_LAMBDA_GAP, SIGMA_MATCH};
