//! Measurement-to-track association with likelihood-based distances.
//!
//! The crate compares the Mahalanobis distance with the association
//! log-likelihood distance for single-scan assignment, casts multi-hypothesis
//! association into assignment matrices, and runs the Monte-Carlo study that
//! measures correct-assignment rates.

pub mod assignment;
pub mod distance;
pub mod dynamics;
pub mod error;
pub mod gaussian;
pub mod hypothesis;
pub mod rng;
pub mod simulation;

pub use assignment::{maximize, solve, Assignment, CostMatrix};
pub use distance::{asso_ll_sq, generalized_mahalanobis_sq, mahalanobis_sq, DistanceContext, DistanceKind, InnovationTerms};
pub use dynamics::{
    solve_dare, steady_state_predicted_cov, KinematicModel, MeasurementModel, RiccatiOptions, RiccatiSolution,
    StateVector, DEFAULT_DT,
};
pub use error::{Error, Result};
pub use gaussian::{random_spd, DGaussian, GaussianDensity, RandomSpdSpec};
pub use hypothesis::{
    build_full_matrix, build_reduced_matrix, count_hypotheses, enumerate_hypotheses, score_hypothesis,
    HypothesisMatrix, HypothesisParams, JointHypothesis, Measurement, Origin, ScanInput,
};
pub use simulation::{
    generate_scenario, run_batches, run_scenario, BatchSummary, CovarianceRegime, ModelPolicy, Scenario,
    ScenarioConfig, ScenarioResult, SimulationReport,
};
