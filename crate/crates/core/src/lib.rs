//! Step-size learning for gradient descent and heavy-ball conjugate gradient.
//!
//! The crate treats the choice of a step size `ρ` (and a conjugate parameter
//! `η`) as a statistical learning problem over a distribution of convex
//! quadratic instances:
//!
//! * [`instance`] generates instances and probes the contraction assumption,
//! * [`iterators`] runs the fixed-step methods and records trajectories,
//! * [`cost`] evaluates iteration-count and primal-integral costs,
//! * [`certificate`] computes every closed-form constant and perturbation
//!   bound (net spacings, recurrence-based sensitivity bounds, sample sizes),
//! * [`learner`] builds parameter nets and performs ERM selection,
//! * [`verify`] checks the bounds against simulated trajectories.

pub mod certificate;
pub mod cost;
pub mod error;
pub mod instance;
pub mod iterators;
pub mod learner;
pub mod seed;
pub mod verify;

mod interval;

pub use certificate::{CertificateContext, RecurrencePair};
pub use cost::{CostMeasure, CostValue};
pub use error::{Error, Result};
pub use instance::{AssumptionReport, InstanceDistribution, ProblemInstance};
pub use interval::Interval;
pub use iterators::{AlgorithmConfig, Method, Termination, Trajectory};
pub use learner::{LearnOutcome, NetPolicy, ParameterNet};
