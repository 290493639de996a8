//! Simulation of clustered, correlated two-endpoint ordinal trials.

pub mod config;
pub mod design;
pub mod marginal;
pub mod run;

pub use config::{ClusterSizeMode, CorrelationTargets, ScenarioConfig};
pub use design::{generate_trial, prepare, simulation_endpoints, ArmDesign, PreparedScenario};
pub use marginal::{
    binomial_pmf, binomial_win_probability, discretized_correlation,
    solve_intermediate_correlation, solve_treatment_p, win_probability, BinomialSpec,
    OrdinalMarginal,
};
pub use run::{
    run_prepared, run_replicate, run_scenario, run_scenario_with, Execution, ReplicateOutcome,
    ScaleMetrics, ScenarioMetrics,
};
