//! Fixed-step gradient descent and the heavy-ball style conjugate iteration
//! `z_{n+1} = z_n − ρ∇f(z_n) − η(z_n − z_{n−1})`.
//!
//! Both loops stop as soon as `‖∇f(z)‖ ≤ ν`; the test runs before every step.

use std::fmt::Write as _;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::instance::ProblemInstance;
use crate::interval::Interval;

/// An iterate whose norm exceeds `DIVERGENCE_FACTOR · Z` aborts the run.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Gd,
    Cg,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Gd => "gd",
            Method::Cg => "cg",
        })
    }
}

/// A step size `ρ` (and conjugate parameter `η` for CG) together with the
/// intervals it was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    pub method: Method,
    pub rho: f64,
    /// Always 0 for GD. For CG, 0 is admitted only as the GD-degenerate mode.
    #[serde(default)]
    pub eta: f64,
    pub rho_interval: Interval,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_interval: Option<Interval>,
}

impl AlgorithmConfig {
    pub fn gd(rho: f64) -> Self {
        Self {
            method: Method::Gd,
            rho,
            eta: 0.0,
            rho_interval: Interval::point(rho),
            eta_interval: None,
        }
    }

    pub fn cg(rho: f64, eta: f64) -> Self {
        Self {
            method: Method::Cg,
            rho,
            eta,
            rho_interval: Interval::point(rho),
            eta_interval: Some(Interval::point(eta)),
        }
    }

    /// Attaches the admissible intervals, checking membership.
    pub fn within(mut self, rho_interval: Interval, eta_interval: Option<Interval>) -> Result<Self> {
        self.rho_interval = rho_interval;
        if self.method == Method::Cg {
            self.eta_interval = eta_interval.or(self.eta_interval);
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(invalid("rho", format!("{} must be positive", self.rho)));
        }
        self.rho_interval.validate("rho_interval", true)?;
        if !self.rho_interval.contains(self.rho) {
            return Err(invalid(
                "rho",
                format!("{} outside [{}, {}]", self.rho, self.rho_interval.lo, self.rho_interval.hi),
            ));
        }
        match self.method {
            Method::Gd => {
                if self.eta != 0.0 {
                    return Err(invalid("eta", "gradient descent has no conjugate parameter"));
                }
            }
            Method::Cg => {
                if !(self.eta.is_finite() && self.eta >= 0.0) {
                    return Err(invalid("eta", format!("{} must be non-negative", self.eta)));
                }
                if let Some(iv) = self.eta_interval {
                    iv.validate("eta_interval", false)?;
                    if !iv.contains(self.eta) {
                        return Err(invalid(
                            "eta",
                            format!("{} outside [{}, {}]", self.eta, iv.lo, iv.hi),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    GradientBelowNu,
    MaxIterations,
}

/// Every iterate of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub iterates: Vec<DVector<f64>>,
    pub gradient_norms: Vec<f64>,
    pub config: AlgorithmConfig,
    pub termination: Termination,
    pub max_iters: usize,
}

impl Trajectory {
    /// Number of update steps actually applied, `M`.
    pub fn steps(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn norms(&self) -> impl Iterator<Item = f64> + '_ {
        self.iterates.iter().map(|z| z.norm())
    }

    pub fn header(&self) -> TrajectoryHeader {
        TrajectoryHeader {
            config: self.config,
            termination: self.termination,
            steps: self.steps(),
            max_iters: self.max_iters,
        }
    }

    /// `step,norm_z,grad_norm` rows, one per recorded iterate.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,norm_z,grad_norm\n");
        for (j, (z, g)) in self.iterates.iter().zip(&self.gradient_norms).enumerate() {
            let _ = writeln!(out, "{j},{:e},{:e}", z.norm(), g);
        }
        out
    }
}

/// JSON header emitted next to a trajectory CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryHeader {
    pub config: AlgorithmConfig,
    pub termination: Termination,
    #[serde(rename = "M")]
    pub steps: usize,
    pub max_iters: usize,
}

/// `z − ρ·Qz`. A non-finite result signals overflow of a diverging step size.
pub fn gd_step(inst: &ProblemInstance, z: &DVector<f64>, rho: f64) -> DVector<f64> {
    z - inst.gradient(z) * rho
}

/// `z_n − ρ·Q·z_n − η·(z_n − z_{n−1})`.
pub fn cg_step(
    inst: &ProblemInstance,
    z_curr: &DVector<f64>,
    z_prev: &DVector<f64>,
    rho: f64,
    eta: f64,
) -> DVector<f64> {
    let mut next = gd_step(inst, z_curr, rho);
    next.axpy(-eta, &(z_curr - z_prev), 1.0);
    next
}

/// Summary of a run without its iterates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    #[serde(rename = "M")]
    pub steps: usize,
    pub termination: Termination,
    /// `Σ ‖z_j‖` over `j ≥ 1`, the primal integral of the run.
    pub primal_integral: f64,
}

/// Drives one run with reused buffers, handing every iterate and its
/// gradient norm to `visit`. The arithmetic matches [`gd_step`] and
/// [`cg_step`] operation for operation.
fn drive(
    inst: &ProblemInstance,
    config: &AlgorithmConfig,
    max_iters: usize,
    mut visit: impl FnMut(&DVector<f64>, f64),
) -> Result<(usize, Termination)> {
    if !(config.rho.is_finite() && config.rho > 0.0) {
        return Err(invalid("rho", format!("{} must be positive", config.rho)));
    }
    if !(config.eta.is_finite() && config.eta >= 0.0) {
        return Err(invalid("eta", format!("{} must be non-negative", config.eta)));
    }
    let q = inst.quadratic();
    let nu = inst.nu();
    let limit = DIVERGENCE_FACTOR * inst.norm_bound_z();
    let conjugate = config.method == Method::Cg;
    let (rho, eta) = (config.rho, config.eta);

    let mut curr = inst.z0().clone();
    let mut prev = curr.clone();
    let mut next = DVector::zeros(curr.len());
    let mut grad = q * &curr;
    let mut gnorm = grad.norm();
    visit(&curr, gnorm);

    let mut steps = 0;
    while steps < max_iters && gnorm > nu {
        for i in 0..curr.len() {
            next[i] = curr[i] - grad[i] * rho;
        }
        if conjugate && steps > 0 {
            for i in 0..curr.len() {
                next[i] += -eta * (curr[i] - prev[i]);
            }
        }
        steps += 1;
        let norm = next.norm();
        if !norm.is_finite() || norm > limit {
            return Err(Error::Diverged { step: steps, norm });
        }
        std::mem::swap(&mut prev, &mut curr);
        std::mem::swap(&mut curr, &mut next);
        q.mul_to(&curr, &mut grad);
        gnorm = grad.norm();
        visit(&curr, gnorm);
    }
    let termination = if gnorm <= nu {
        Termination::GradientBelowNu
    } else {
        Termination::MaxIterations
    };
    Ok((steps, termination))
}

/// Gradient descent from `inst.z0()` until `‖∇f(z)‖ ≤ ν` or `max_iters`
/// steps.
pub fn gd_run(inst: &ProblemInstance, rho: f64, max_iters: usize) -> Result<Trajectory> {
    run(inst, &AlgorithmConfig::gd(rho), max_iters)
}

/// Conjugate iteration: the first step is a plain gradient step, later steps
/// use [`cg_step`].
pub fn cg_run(inst: &ProblemInstance, rho: f64, eta: f64, max_iters: usize) -> Result<Trajectory> {
    run(inst, &AlgorithmConfig::cg(rho, eta), max_iters)
}

/// Runs `config` on `inst`, recording every iterate.
pub fn run(inst: &ProblemInstance, config: &AlgorithmConfig, max_iters: usize) -> Result<Trajectory> {
    let mut iterates = Vec::new();
    let mut gradient_norms = Vec::new();
    let (_, termination) = drive(inst, config, max_iters, |z, g| {
        iterates.push(z.clone());
        gradient_norms.push(g);
    })?;
    Ok(Trajectory {
        iterates,
        gradient_norms,
        config: *config,
        termination,
        max_iters,
    })
}

/// Runs `config` on `inst` keeping only the step count, termination and
/// primal integral. Agrees exactly with [`run`].
pub fn run_summary(inst: &ProblemInstance, config: &AlgorithmConfig, max_iters: usize) -> Result<RunSummary> {
    let mut first = true;
    let mut primal_integral = 0.0;
    let (steps, termination) = drive(inst, config, max_iters, |z, _| {
        if first {
            first = false;
        } else {
            primal_integral += z.norm();
        }
    })?;
    Ok(RunSummary {
        steps,
        termination,
        primal_integral,
    })
}

/// Raw iterates `z_0 … z_count` without the stopping test, as used by the
/// perturbation bounds.
pub fn raw_iterates(inst: &ProblemInstance, config: &AlgorithmConfig, count: usize) -> Vec<DVector<f64>> {
    let mut out = Vec::with_capacity(count + 1);
    out.push(inst.z0().clone());
    for n in 1..=count {
        let next = if config.method == Method::Gd || n == 1 {
            gd_step(inst, &out[n - 1], config.rho)
        } else {
            cg_step(inst, &out[n - 1], &out[n - 2], config.rho, config.eta)
        };
        out.push(next);
    }
    out
}

/// `z_j` for `j ≤ M`, the optimum (zero vector) beyond the last iterate.
pub fn pad_iterate(traj: &Trajectory, j: usize) -> DVector<f64> {
    traj.iterates
        .get(j)
        .cloned()
        .unwrap_or_else(|| DVector::zeros(traj.iterates[0].len()))
}
