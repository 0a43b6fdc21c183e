//! Cost measures of a run: the iteration count and the primal integral
//! `Σ ‖z_j − z*‖`, plus their a-priori upper bounds.

use serde::{Deserialize, Serialize};

use crate::certificate::{horizon, CertificateContext};
use crate::error::{Error, Result};
use crate::iterators::{pad_iterate, Method, Termination, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostMeasure {
    IterationCount,
    PrimalIntegral,
}

impl std::fmt::Display for CostMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CostMeasure::IterationCount => "iteration-count",
            CostMeasure::PrimalIntegral => "primal-integral",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostValue {
    pub measure: CostMeasure,
    pub value: f64,
    /// `M` for a converged run, the iteration cap for a truncated one.
    pub horizon_used: usize,
}

fn horizon_used(traj: &Trajectory) -> usize {
    match traj.termination {
        Termination::GradientBelowNu => traj.steps(),
        Termination::MaxIterations => traj.max_iters,
    }
}

/// `M`, defined only for runs that reached `‖∇f‖ ≤ ν`.
pub fn iteration_count_cost(traj: &Trajectory) -> Result<CostValue> {
    if traj.termination != Termination::GradientBelowNu {
        return Err(Error::IterationCountUndefined);
    }
    Ok(CostValue {
        measure: CostMeasure::IterationCount,
        value: traj.steps() as f64,
        horizon_used: traj.steps(),
    })
}

/// GD: `Σ_{j=1}^{M} ‖z_j‖`. CG: `Σ_{i=0}^{M} ‖g^i(z_1, z_0)‖` with
/// `g^i = z_{i+1}` padded by the optimum past the last iterate. Both sums
/// cover `z_1` onward. Truncated runs sum the recorded iterates.
pub fn primal_integral_cost(traj: &Trajectory) -> CostValue {
    let m = traj.steps();
    let value = match traj.config.method {
        Method::Gd => (1..=m).map(|j| traj.iterates[j].norm()).sum(),
        Method::Cg => (0..=m).map(|i| pad_iterate(traj, i + 1).norm()).sum(),
    };
    CostValue {
        measure: CostMeasure::PrimalIntegral,
        value,
        horizon_used: horizon_used(traj),
    }
}

pub fn evaluate(traj: &Trajectory, measure: CostMeasure) -> Result<CostValue> {
    match measure {
        CostMeasure::IterationCount => iteration_count_cost(traj),
        CostMeasure::PrimalIntegral => Ok(primal_integral_cost(traj)),
    }
}

/// `H` for the iteration count, `Z·H` for the primal integral.
pub fn cost_upper_bound(ctx: &CertificateContext, measure: CostMeasure) -> f64 {
    let h = horizon(ctx);
    match measure {
        CostMeasure::IterationCount => h,
        CostMeasure::PrimalIntegral => ctx.z * h,
    }
}

/// One row of the experiment cost CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRecord {
    pub instance_id: u64,
    pub method: Method,
    pub rho: f64,
    pub eta: f64,
    pub measure: CostMeasure,
    /// Empty when the measure is undefined for the run.
    pub value: Option<f64>,
    #[serde(rename = "M")]
    pub steps: usize,
    pub termination: Termination,
}

impl CostRecord {
    pub fn new(instance_id: u64, traj: &Trajectory, measure: CostMeasure) -> Self {
        Self {
            instance_id,
            method: traj.config.method,
            rho: traj.config.rho,
            eta: traj.config.eta,
            measure,
            value: evaluate(traj, measure).ok().map(|c| c.value),
            steps: traj.steps(),
            termination: traj.termination,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::unit_ctx;
    use crate::iterators::{cg_run, gd_run};
    use crate::ProblemInstance;

    fn scalar(lambda: f64, z0: f64, nu: f64) -> ProblemInstance {
        ProblemInstance::diagonal(vec![lambda], vec![z0], nu, z0.abs().max(1.0)).unwrap()
    }

    #[test]
    fn iteration_count_examples() {
        let t = gd_run(&scalar(1.0, 1.0, 0.1), 0.5, 100).unwrap();
        assert_eq!(iteration_count_cost(&t).unwrap().value, 4.0);
        let t = gd_run(&scalar(2.0, 1.0, 0.1), 0.5, 100).unwrap();
        assert_eq!(iteration_count_cost(&t).unwrap().value, 1.0);
        assert_eq!(primal_integral_cost(&t).value, 0.0);

        // ‖∇f(z0)‖ = 0.05·0.5 ≤ ν while ‖z0‖ > ν
        let inst = ProblemInstance::diagonal(vec![0.05], vec![0.5], 0.1, 1.0).unwrap();
        let t = gd_run(&inst, 0.5, 100).unwrap();
        assert_eq!(iteration_count_cost(&t).unwrap().value, 0.0);
    }

    #[test]
    fn truncated_run_has_no_iteration_count() {
        let t = gd_run(&scalar(1.0, 1.0, 0.1), 2.0, 10).unwrap();
        assert_eq!(t.termination, Termination::MaxIterations);
        assert_eq!(iteration_count_cost(&t), Err(Error::IterationCountUndefined));
        let pi = primal_integral_cost(&t);
        assert_eq!(pi.horizon_used, 10);
        assert!((pi.value - 10.0).abs() < 1e-12);
    }

    #[test]
    fn primal_integral_examples() {
        let t = gd_run(&scalar(1.0, 1.0, 0.1), 0.5, 100).unwrap();
        assert!((primal_integral_cost(&t).value - 0.9375).abs() < 1e-15);

        let inst = scalar(1.0, 1.0, 0.05);
        let t = cg_run(&inst, 0.5, 0.1, 100).unwrap();
        // independent scalar recurrence, summed from z_1 until |z| ≤ ν
        let (mut prev, mut curr) = (1.0f64, 0.5f64);
        let mut expected = 0.0;
        loop {
            expected += curr.abs();
            if curr.abs() <= 0.05 {
                break;
            }
            let next = curr - 0.5 * curr - 0.1 * (curr - prev);
            prev = curr;
            curr = next;
        }
        assert!((primal_integral_cost(&t).value - expected).abs() < 1e-14);

        let gd = gd_run(&inst, 0.5, 100).unwrap();
        let cg0 = cg_run(&inst, 0.5, 0.0, 100).unwrap();
        assert!((primal_integral_cost(&gd).value - primal_integral_cost(&cg0).value).abs() < 1e-15);
    }

    #[test]
    fn truncation_monotonicity() {
        let inst = scalar(1.0, 1.0, 1e-3);
        let mut last = 0.0;
        for k in 0..12 {
            let v = primal_integral_cost(&gd_run(&inst, 0.3, k).unwrap()).value;
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn upper_bound_examples() {
        let ctx = unit_ctx();
        let it = cost_upper_bound(&ctx, CostMeasure::IterationCount);
        let pi = cost_upper_bound(&ctx, CostMeasure::PrimalIntegral);
        assert!((it - std::f64::consts::LOG2_10).abs() < 1e-12);
        assert!((pi - std::f64::consts::LOG2_10).abs() < 1e-12);

        let capped = CertificateContext { beta: 0.999, ..ctx.clone() };
        assert!(cost_upper_bound(&capped, CostMeasure::IterationCount) < 0.34);

        let doubled = CertificateContext { z: 2.0, l: 0.5, ..ctx.clone() };
        assert!(cost_upper_bound(&doubled, CostMeasure::PrimalIntegral) > pi);
        let wider = CertificateContext { z: 2.0, ..ctx };
        assert!(cost_upper_bound(&wider, CostMeasure::IterationCount) > it);
        assert!(cost_upper_bound(&wider, CostMeasure::PrimalIntegral) > pi);
    }

    #[test]
    fn records_carry_run_metadata() {
        let t = gd_run(&scalar(1.0, 1.0, 0.1), 0.5, 100).unwrap();
        let r = CostRecord::new(7, &t, CostMeasure::IterationCount);
        assert_eq!((r.instance_id, r.steps, r.value), (7, 4, Some(4.0)));
    }
}
