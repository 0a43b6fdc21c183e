//! Capacity and sample-size bounds for finite parameter classes.

use serde::{Deserialize, Serialize};

use super::gd::horizon;
use super::CertificateContext;
use crate::error::{invalid, Result};

/// Size of a finite class: one net, or the product of a `ρ`-net and an
/// `η`-net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetSize {
    Single(usize),
    Product { rho: usize, eta: usize },
}

impl NetSize {
    pub fn total(&self) -> usize {
        match *self {
            NetSize::Single(n) => n,
            NetSize::Product { rho, eta } => rho * eta,
        }
    }
}

/// Which pseudo-dimension bound to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PseudoDimensionVariant {
    /// `log₂ |A|`, valid for any finite class.
    FiniteClass,
    /// `H·log₂|N|` for one net, `H·log₂|N_ρ|·log₂|N_η|` for a product.
    HorizonProduct,
}

/// Pseudo-dimension bound of a finite net class. All logarithms are base 2.
pub fn pseudo_dimension_bound(
    net: NetSize,
    variant: PseudoDimensionVariant,
    ctx: &CertificateContext,
) -> Result<f64> {
    let check = |n: usize| {
        if n == 0 {
            Err(invalid("net_size", "must be at least 1"))
        } else {
            Ok((n as f64).log2())
        }
    };
    match (variant, net) {
        (PseudoDimensionVariant::FiniteClass, NetSize::Single(n)) => check(n),
        (PseudoDimensionVariant::FiniteClass, NetSize::Product { rho, eta }) => Ok(check(rho)? + check(eta)?),
        (PseudoDimensionVariant::HorizonProduct, NetSize::Single(n)) => Ok(horizon(ctx) * check(n)?),
        (PseudoDimensionVariant::HorizonProduct, NetSize::Product { rho, eta }) => {
            Ok(horizon(ctx) * check(rho)? * check(eta)?)
        }
    }
}

/// Uniform-convergence sample size `ceil(k·(R/ε)²·(d + ln(1/δ)))` for a cost
/// with range `[0, R]` and pseudo-dimension `d`.
pub fn sample_complexity(ctx: &CertificateContext, d: f64, range: f64) -> Result<u64> {
    if !(d.is_finite() && d >= 0.0) {
        return Err(invalid("d", format!("{d} must be non-negative")));
    }
    if !(range.is_finite() && range > 0.0) {
        return Err(invalid("range", format!("{range} must be positive")));
    }
    let ratio = range / ctx.epsilon;
    let m = ctx.uc_constant_k * ratio * ratio * (d + (1.0 / ctx.delta).ln());
    Ok(m.ceil().max(1.0) as u64)
}
