//! Cooperative decode-and-forward beamforming for secure wireless links.
//!
//! The library designs node weight vectors that either maximize the secrecy
//! capacity of a relay cluster under a transmit-power budget or minimize the
//! transmit power needed for a target secrecy capacity, against one or many
//! eavesdroppers and under perfect or imperfect eavesdropper CSI. A seeded
//! Monte-Carlo engine evaluates the designs over random line-of-sight
//! geometries and a CLI emits the aggregates as CSV or JSON.

pub mod channel;
pub mod config;
pub mod design;
pub mod montecarlo;
pub mod numerics;
pub mod output;
pub mod secrecy;

pub use channel::{los_gain, sample_scenario, GeometryConfig, PhaseModel, Scenario, PRNG_ID};
pub use config::{dbm_to_watts, parse_config, ConfigError};
pub use design::{
    imperfect_min_power, imperfect_multi_max, imperfect_single_max, max_secrecy_single,
    min_power_single, null_max_secrecy_multi, null_min_power_multi, CsiMode, DesignError,
    DesignProblem, IterationTrace, Objective,
};
pub use montecarlo::{
    run_sweep, run_trial, trial_seed, Strategy, SweepConfig, SweepResult, SweepRow,
};
pub use numerics::{
    largest_generalized_eigpair, min_norm_solve, null_space_basis, CMatrix, CVector, NumericsError,
};
pub use output::{emit_csv, emit_json, RunManifest};
pub use secrecy::{
    capacity_destination, capacity_eavesdropper, direct_min_power, direct_secrecy,
    secrecy_capacity, BeamformerSolution, Stage1Accounting,
};
