//! Simulation designs, the experiment runner and table regeneration.

pub mod dgp;
pub mod experiment;
pub mod tables;

pub use dgp::{Dataset, DgpSpec, ModelId, TestKind};
pub use experiment::{default_estimators, run_experiment, Cell, ExperimentConfig, SimulationReport};
pub use tables::{reference_tables, run_tables, TableResult, TableSpec, TablesOptions, TablesSummary};
