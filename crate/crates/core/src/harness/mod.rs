//! Experiment drivers, configuration, slope fitting, reports and the
//! validation suite.

pub mod config;
pub mod experiments;
pub mod fit;
pub mod report;
pub mod validate;

pub use config::{Datum, Experiment, ExperimentConfig, Fault};
pub use experiments::{
    apply_fault, exp_evolve, exp_galerkin_tail, exp_global_bound, exp_linear_longtime,
    exp_nonlinear_locuniform, exp_scaling_identity, exp_transform_gain, initial_dt,
    integrate_with_policy, DtChoice, EvolveOutcome, GalerkinTail, SystemFactory,
    TransformGainReport,
};
pub use fit::{fit_linear, fit_loglog, local_slopes, SlopeFit};
pub use report::{ConvergenceReport, Row};
pub use validate::{run_validation_suite, CheckResult, ValidationSummary};
