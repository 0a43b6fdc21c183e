//! Parameter nets: integer multiples of a spacing `K` inside an interval,
//! with both endpoints adjoined.

use serde::{Deserialize, Serialize};

use crate::certificate::{
    cg_eta_inner_max_fstar, d_factor, g_star, gd_cost_safe_delta, gd_iter_safe_delta, h_star_with_fstar,
    CertificateContext,
};
use crate::cost::CostMeasure;
use crate::error::{invalid, Result};
use crate::interval::Interval;
use crate::iterators::AlgorithmConfig;

/// Points of the parameter box at which `G*` and `H*` are evaluated, per axis.
pub const CG_NET_GRID: usize = 32;

/// Nets larger than this are rejected.
pub const MAX_NET_POINTS: usize = 1_000_000;

const MULTIPLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Rho,
    Eta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterNet {
    pub axis: Axis,
    #[serde(rename = "K")]
    pub spacing: f64,
    pub points: Vec<f64>,
    pub interval: Interval,
}

impl ParameterNet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The net point closest to `x` (the smaller one on ties).
    pub fn nearest(&self, x: f64) -> f64 {
        let i = self.points.partition_point(|&p| p < x);
        match (i.checked_sub(1).map(|k| self.points[k]), self.points.get(i).copied()) {
            (Some(a), Some(b)) => {
                if x - a <= b - x {
                    a
                } else {
                    b
                }
            }
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => x,
        }
    }
}

/// All integer multiples `n·K` in `[lo, hi]` plus both endpoints, sorted and
/// deduplicated. A multiple within `1e-9·K` of the interval is snapped in.
pub fn build_net(axis: Axis, interval: Interval, spacing: f64) -> Result<ParameterNet> {
    interval.validate("interval", false)?;
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(invalid("K", format!("{spacing} must be positive")));
    }
    let first = (interval.lo / spacing - MULTIPLE_TOL).ceil();
    let last = (interval.hi / spacing + MULTIPLE_TOL).floor();
    let count = (last - first + 1.0).max(0.0);
    if count > MAX_NET_POINTS as f64 {
        return Err(invalid(
            "K",
            format!("spacing {spacing} yields {count} points on [{}, {}]", interval.lo, interval.hi),
        ));
    }
    if spacing > interval.width() && !interval.is_degenerate() {
        log::warn!(
            "net spacing {spacing} exceeds the width of [{}, {}]; the net reduces to the endpoints",
            interval.lo,
            interval.hi
        );
    }
    let mut points = vec![interval.lo, interval.hi];
    let mut n = first;
    while n <= last {
        points.push((n * spacing).clamp(interval.lo, interval.hi));
        n += 1.0;
    }
    points.sort_by(f64::total_cmp);
    let tol = MULTIPLE_TOL * spacing;
    points.dedup_by(|b, a| (*b - *a).abs() <= tol);
    Ok(ParameterNet {
        axis,
        spacing,
        points,
        interval,
    })
}

/// The gradient-descent net for `measure`, with spacing taken at `ρ_u`:
/// `νβ²/(LZ)·D(ρ_u)^{−H}` for the iteration count and the primal-integral
/// spacing `(β/LZ)·(1−D)/(1−D^H)·D^{−1}·C` otherwise.
pub fn build_gd_net(ctx: &CertificateContext, measure: CostMeasure) -> Result<ParameterNet> {
    ctx.validate()?;
    let rho_u = ctx.rho_interval.hi;
    let k = match measure {
        CostMeasure::IterationCount => gd_iter_safe_delta(ctx, rho_u),
        CostMeasure::PrimalIntegral => gd_cost_safe_delta(ctx, rho_u),
    };
    build_net(Axis::Rho, ctx.rho_interval, k)
}

/// How the per-point CG spacings are reduced to one spacing per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetPolicy {
    /// The smallest spacing over the box, valid at every point.
    #[default]
    UniformMin,
    /// The largest spacing over the box.
    BoxMax,
}

/// Range of `C/(2G*)` and `C/(2H*)` over the parameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacingRange {
    pub k_rho_min: f64,
    pub k_rho_max: f64,
    pub k_eta_min: f64,
    pub k_eta_max: f64,
}

impl SpacingRange {
    pub fn select(&self, policy: NetPolicy) -> (f64, f64) {
        match policy {
            NetPolicy::UniformMin => (self.k_rho_min, self.k_eta_min),
            NetPolicy::BoxMax => (self.k_rho_max, self.k_eta_max),
        }
    }
}

/// `C/(2G*)` and `C/(2H*)` over a [`CG_NET_GRID`]² grid of the box. `F*`
/// depends only on `ρ` and is computed once per grid column.
pub fn cg_spacing_range(ctx: &CertificateContext) -> Result<SpacingRange> {
    ctx.validate()?;
    let eta_iv = ctx.eta_interval_or_err()?;
    let steps = ctx.horizon_steps().max(1);
    let mut out = SpacingRange {
        k_rho_min: f64::INFINITY,
        k_rho_max: 0.0,
        k_eta_min: f64::INFINITY,
        k_eta_max: 0.0,
    };
    for rho in ctx.rho_interval.grid(CG_NET_GRID) {
        let fstar = cg_eta_inner_max_fstar(ctx, rho, steps)?;
        for eta in eta_iv.grid(CG_NET_GRID) {
            let kr = ctx.c / (2.0 * g_star(ctx, rho, eta)?.value);
            let ke = ctx.c / (2.0 * h_star_with_fstar(ctx, rho, eta, fstar)?.value);
            out.k_rho_min = out.k_rho_min.min(kr);
            out.k_rho_max = out.k_rho_max.max(kr);
            out.k_eta_min = out.k_eta_min.min(ke);
            out.k_eta_max = out.k_eta_max.max(ke);
        }
    }
    Ok(out)
}

/// Range of `C/(2G*)` alone over the [`CG_NET_GRID`]² grid; needs no `η`
/// scope.
pub fn cg_rho_spacing_range(ctx: &CertificateContext) -> Result<(f64, f64)> {
    ctx.validate()?;
    let eta_iv = ctx.eta_interval_or_err()?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for rho in ctx.rho_interval.grid(CG_NET_GRID) {
        for eta in eta_iv.grid(CG_NET_GRID) {
            let k = ctx.c / (2.0 * g_star(ctx, rho, eta)?.value);
            lo = lo.min(k);
            hi = hi.max(k);
        }
    }
    Ok((lo, hi))
}

/// A `ρ`-net and an `η`-net for the conjugate iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CgNets {
    pub rho: ParameterNet,
    pub eta: ParameterNet,
    /// `None` when the spacings were supplied rather than certified.
    pub policy: Option<NetPolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing_range: Option<SpacingRange>,
}

/// Certified CG nets. Requires `η_l > L`.
pub fn build_cg_nets(ctx: &CertificateContext, policy: NetPolicy) -> Result<CgNets> {
    let range = cg_spacing_range(ctx)?;
    let (kr, ke) = range.select(policy);
    Ok(CgNets {
        rho: build_net(Axis::Rho, ctx.rho_interval, kr)?,
        eta: build_net(Axis::Eta, ctx.eta_interval_or_err()?, ke)?,
        policy: Some(policy),
        spacing_range: Some(range),
    })
}

/// CG nets with caller-chosen spacings; no certificate is attached.
pub fn build_cg_nets_with_spacing(ctx: &CertificateContext, k_rho: f64, k_eta: f64) -> Result<CgNets> {
    Ok(CgNets {
        rho: build_net(Axis::Rho, ctx.rho_interval, k_rho)?,
        eta: build_net(Axis::Eta, ctx.eta_interval_or_err()?, k_eta)?,
        policy: None,
        spacing_range: None,
    })
}

/// One gradient-descent config per net point.
pub fn gd_configs(net: &ParameterNet) -> Vec<AlgorithmConfig> {
    net.points
        .iter()
        .map(|&rho| AlgorithmConfig {
            rho_interval: net.interval,
            ..AlgorithmConfig::gd(rho)
        })
        .collect()
}

/// The product of the two nets, ordered by `ρ` then `η`.
pub fn cg_configs(nets: &CgNets) -> Vec<AlgorithmConfig> {
    let mut out = Vec::with_capacity(nets.rho.len() * nets.eta.len());
    for &rho in &nets.rho.points {
        for &eta in &nets.eta.points {
            out.push(AlgorithmConfig {
                rho_interval: nets.rho.interval,
                eta_interval: Some(nets.eta.interval),
                ..AlgorithmConfig::cg(rho, eta)
            });
        }
    }
    out
}

/// `D(ρ_u)`, the expansion factor the gradient-descent spacing is taken at.
pub fn gd_net_expansion(ctx: &CertificateContext) -> f64 {
    d_factor(ctx.rho_interval.hi, ctx.l)
}
