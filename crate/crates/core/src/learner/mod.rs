//! Parameter nets, ERM selection and the learning experiments built on them.

pub mod erm;
pub mod experiment;
pub mod net;

pub use erm::{erm_select, run_cost, CostTable, ErmSelection};
pub use experiment::{
    calibrate_k, learning_experiment, reference_costs, uniform_convergence_trial, Calibration, FixedInstance,
    InstanceSource, LearnOutcome, LearningOptions, LearningReport, ReferenceCosts, Scope, UniformConvergence,
};
pub use net::{build_cg_nets, build_gd_net, build_net, Axis, CgNets, NetPolicy, ParameterNet};
