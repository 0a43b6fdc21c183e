//! Closed-form constants and perturbation bounds.
//!
//! Everything here is a pure function of a [`CertificateContext`] plus the
//! parameters being compared. Submodules group the gradient-descent spacings,
//! the second-order recurrence machinery, the conjugate-iteration sensitivity
//! bounds and the learning-theoretic sample sizes.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::interval::Interval;

mod cg;
mod complexity;
mod gd;
mod recurrence;
pub mod report;

pub use cg::{
    cg_combined_bound, cg_cost_diff_bound, cg_eta_inner_max_fstar, cg_eta_sensitivity_h,
    cg_rho_sensitivity_g, cg_safe_deltas, cg_step_lipschitz_bound, cg_traj_lipschitz_f,
    eta_sensitivity_constants, fstar_term, g_star, h_star, h_star_with_fstar,
    rho_sensitivity_constants, FStar, RefinedBound, SensitivityConstants, FSTAR_GRID_POINTS,
};
pub use complexity::{pseudo_dimension_bound, sample_complexity, NetSize, PseudoDimensionVariant};
pub use gd::{
    d_factor, gd_cost_safe_delta, gd_iter_safe_delta, gd_traj_error_bound, horizon, spacing_ratio,
};
pub use recurrence::{recurrence_roots, recurrence_solution, RecurrencePair};

/// Largest admissible contraction constant.
pub const BETA_CAP: f64 = 0.999;

/// The constants every certificate is computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateContext {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "Z")]
    pub z: f64,
    pub nu: f64,
    pub beta: f64,
    pub rho_interval: Interval,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_interval: Option<Interval>,
    /// Target cost-difference tolerance.
    #[serde(rename = "C")]
    pub c: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// Constant of the uniform-convergence sample bound.
    #[serde(default = "default_uc_constant")]
    pub uc_constant_k: f64,
}

fn default_uc_constant() -> f64 {
    1.0
}

impl CertificateContext {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(name, format!("{v} must be positive")))
            }
        };
        positive("L", self.l)?;
        positive("Z", self.z)?;
        positive("nu", self.nu)?;
        positive("C", self.c)?;
        positive("epsilon", self.epsilon)?;
        positive("uc_constant_k", self.uc_constant_k)?;
        if !(self.beta > 0.0 && self.beta <= BETA_CAP) {
            return Err(invalid("beta", format!("{} must lie in (0, {BETA_CAP}]", self.beta)));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(invalid("delta", format!("{} must lie in (0, 1]", self.delta)));
        }
        if self.nu >= self.l * self.z {
            return Err(invalid(
                "nu",
                format!("nu = {} must be below L·Z = {}", self.nu, self.l * self.z),
            ));
        }
        self.rho_interval.validate("rho_interval", true)?;
        if let Some(eta) = self.eta_interval {
            eta.validate("eta_interval", true)?;
        }
        Ok(())
    }

    /// `ceil(H)`, the iteration count the horizon allows.
    pub fn horizon_steps(&self) -> usize {
        horizon(self).ceil().max(0.0) as usize
    }

    /// Iteration cap used for runs under this context: `4·ceil(H)`.
    pub fn default_max_iters(&self) -> usize {
        4 * self.horizon_steps().max(1)
    }

    /// Whether the η-side certificate (which divides by `η − L`) applies.
    pub fn in_certificate_scope(&self) -> bool {
        self.eta_interval.is_some_and(|iv| iv.lo > self.l)
    }

    pub(crate) fn eta_interval_or_err(&self) -> Result<Interval> {
        self.eta_interval
            .ok_or_else(|| invalid("eta_interval", "required for conjugate-iteration bounds"))
    }
}

#[cfg(test)]
pub(crate) fn unit_ctx() -> CertificateContext {
    CertificateContext {
        l: 1.0,
        z: 1.0,
        nu: 0.1,
        beta: 0.5,
        rho_interval: Interval::new(0.1, 0.5),
        eta_interval: None,
        c: 0.1,
        epsilon: 0.1,
        delta: 0.1,
        uc_constant_k: 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn context_validation() {
        let ctx = unit_ctx();
        ctx.validate().unwrap();
        let bad = CertificateContext { nu: 2.0, ..ctx.clone() };
        assert!(bad.validate().is_err());
        let bad = CertificateContext { beta: 0.9995, ..ctx.clone() };
        assert!(bad.validate().is_err());
        let bad = CertificateContext { delta: 0.0, ..ctx.clone() };
        assert!(bad.validate().is_err());
        let ok = CertificateContext { beta: BETA_CAP, ..ctx };
        ok.validate().unwrap();
    }

    #[test]
    fn scope_requires_eta_above_l() {
        let mut ctx = unit_ctx();
        assert!(!ctx.in_certificate_scope());
        ctx.eta_interval = Some(Interval::new(0.5, 2.0));
        assert!(!ctx.in_certificate_scope());
        ctx.eta_interval = Some(Interval::new(1.5, 2.0));
        assert!(ctx.in_certificate_scope());
    }

    #[test]
    fn context_serde_uses_symbol_names() {
        let json = serde_json::to_value(unit_ctx()).unwrap();
        for key in ["L", "Z", "nu", "beta", "C", "epsilon", "delta", "uc_constant_k"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
    }
}
