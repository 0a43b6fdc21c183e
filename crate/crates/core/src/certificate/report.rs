//! A JSON-ready report of every constant derived from a context.

use serde::{Deserialize, Serialize};

use super::{
    cg_eta_inner_max_fstar, d_factor, g_star, gd_cost_safe_delta, gd_iter_safe_delta, h_star_with_fstar, horizon,
    pseudo_dimension_bound, sample_complexity, CertificateContext, FStar, NetSize, PseudoDimensionVariant,
    RecurrencePair,
};
use crate::cost::{cost_upper_bound, CostMeasure};
use crate::error::Result;
use crate::learner::net::{build_cg_nets, build_gd_net, cg_rho_spacing_range, NetPolicy, SpacingRange};

/// A value with the formula that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub formula: String,
}

fn q(value: f64, formula: &str) -> Quantity {
    Quantity {
        value,
        formula: formula.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoDimensions {
    pub finite_class: f64,
    pub horizon_product: f64,
}

/// Range, pseudo-dimension and sample size for one cost measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSize {
    pub measure: CostMeasure,
    /// `H` or `Z·H`.
    pub range: Quantity,
    pub net_size: NetSize,
    pub pseudo_dimension: PseudoDimensions,
    /// Sample size using the finite-class pseudo-dimension.
    pub m: u64,
    pub m_formula: String,
}

fn sample_size(ctx: &CertificateContext, measure: CostMeasure, net_size: NetSize) -> Result<SampleSize> {
    let range = cost_upper_bound(ctx, measure);
    let d = PseudoDimensions {
        finite_class: pseudo_dimension_bound(net_size, PseudoDimensionVariant::FiniteClass, ctx)?,
        horizon_product: pseudo_dimension_bound(net_size, PseudoDimensionVariant::HorizonProduct, ctx)?,
    };
    let m = sample_complexity(ctx, d.finite_class, range)?;
    Ok(SampleSize {
        measure,
        range: match measure {
            CostMeasure::IterationCount => q(range, "H"),
            CostMeasure::PrimalIntegral => q(range, "Z*H"),
        },
        net_size,
        pseudo_dimension: d,
        m,
        m_formula: "ceil(k*(R/epsilon)^2*(d + ln(1/delta)))".into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdSection {
    pub d_at_rho_l: Quantity,
    pub d_at_rho_u: Quantity,
    /// Iteration-count spacing at `ρ_u`.
    pub k_iteration_count: Quantity,
    /// Primal-integral spacing at `ρ_u`.
    pub k_primal_integral: Quantity,
    pub cost_bound_iteration_count: Quantity,
    pub cost_bound_primal_integral: Quantity,
    pub iteration_count: SampleSize,
    pub primal_integral: SampleSize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScopeFlag {
    Certified,
    OutsideCertificateScope,
}

/// `Δ` (or `D+2η₁−1`), `R0`, `R1`, `R*` and the geometric factor behind one
/// refined bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedConstants {
    pub denominator: f64,
    pub r0: f64,
    pub r1: f64,
    pub r_star: f64,
    pub geometric_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CgSection {
    pub scope: ScopeFlag,
    /// The box corner `(ρ_u, η_u)` the point values are taken at.
    pub rho: f64,
    pub eta: f64,
    pub d: Quantity,
    pub roots: RecurrencePair,
    pub rho_constants: RefinedConstants,
    pub g_star: Quantity,
    pub safe_delta_rho: Quantity,
    /// `C/(2G*)` over the box: uniform-min and box-max.
    pub k_rho_uniform_min: f64,
    pub k_rho_box_max: f64,
    pub fstar: Option<FStar>,
    pub eta_constants: Option<RefinedConstants>,
    pub h_star: Option<Quantity>,
    pub safe_delta_eta: Option<Quantity>,
    pub spacing_range: Option<SpacingRange>,
    pub primal_integral: Option<SampleSize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub context: CertificateContext,
    pub horizon: Quantity,
    pub horizon_steps: usize,
    pub gd: GdSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cg: Option<CgSection>,
}

/// Computes every constant the context determines. The CG section is present
/// when an `η` interval is given; its `η`-side fields are `null` outside
/// certificate scope (`η_l ≤ L`).
pub fn certificate_report(ctx: &CertificateContext) -> Result<CertificateReport> {
    ctx.validate()?;
    let (rl, ru) = (ctx.rho_interval.lo, ctx.rho_interval.hi);
    let h = horizon(ctx);
    let d_formula = "max(1, L*rho - 1)";
    let it_net = build_gd_net(ctx, CostMeasure::IterationCount)?;
    let pi_net = build_gd_net(ctx, CostMeasure::PrimalIntegral)?;
    let gd = GdSection {
        d_at_rho_l: q(d_factor(rl, ctx.l), d_formula),
        d_at_rho_u: q(d_factor(ru, ctx.l), d_formula),
        k_iteration_count: q(gd_iter_safe_delta(ctx, ru), "nu*beta^2/(L*Z) * D(rho_u)^(-H)"),
        k_primal_integral: q(
            gd_cost_safe_delta(ctx, ru),
            "beta/(L*Z) * (1 - D)/(1 - D^H) * D^(-1) * C at rho_u (1/H when D = 1)",
        ),
        cost_bound_iteration_count: q(cost_upper_bound(ctx, CostMeasure::IterationCount), "H"),
        cost_bound_primal_integral: q(cost_upper_bound(ctx, CostMeasure::PrimalIntegral), "Z*H"),
        iteration_count: sample_size(ctx, CostMeasure::IterationCount, NetSize::Single(it_net.len()))?,
        primal_integral: sample_size(ctx, CostMeasure::PrimalIntegral, NetSize::Single(pi_net.len()))?,
    };
    let cg = match ctx.eta_interval {
        Some(iv) => Some(cg_section(ctx, ru, iv.hi)?),
        None => None,
    };
    Ok(CertificateReport {
        context: ctx.clone(),
        horizon: q(h, "ln(L*Z/nu) / ln(1/(1 - beta))"),
        horizon_steps: ctx.horizon_steps(),
        gd,
        cg,
    })
}

fn cg_section(ctx: &CertificateContext, rho: f64, eta: f64) -> Result<CgSection> {
    let g = g_star(ctx, rho, eta)?;
    let (k_min, k_max) = cg_rho_spacing_range(ctx)?;
    let mut section = CgSection {
        scope: ScopeFlag::OutsideCertificateScope,
        rho,
        eta,
        d: q(d_factor(rho, ctx.l), "max(1, L*rho - 1)"),
        roots: g.constants.roots,
        rho_constants: RefinedConstants {
            denominator: g.constants.denominator,
            r0: g.constants.r0,
            r1: g.constants.r1,
            r_star: g.r_star,
            geometric_factor: g.geometric_factor,
        },
        g_star: q(g.value, "L*Z*D/beta + R* * r1*(1 - r1^H)/(1 - r1)"),
        safe_delta_rho: q(ctx.c / (2.0 * g.value), "C/(2*G*)"),
        k_rho_uniform_min: k_min,
        k_rho_box_max: k_max,
        fstar: None,
        eta_constants: None,
        h_star: None,
        safe_delta_eta: None,
        spacing_range: None,
        primal_integral: None,
    };
    if !ctx.in_certificate_scope() {
        return Ok(section);
    }
    let fstar = cg_eta_inner_max_fstar(ctx, rho, ctx.horizon_steps().max(1))?;
    let hs = h_star_with_fstar(ctx, rho, eta, fstar)?;
    let nets = build_cg_nets(ctx, NetPolicy::UniformMin)?;
    section.scope = ScopeFlag::Certified;
    section.fstar = Some(fstar);
    section.eta_constants = Some(RefinedConstants {
        denominator: hs.constants.denominator,
        r0: hs.constants.r0,
        r1: hs.constants.r1,
        r_star: hs.r_star,
        geometric_factor: hs.geometric_factor,
    });
    section.h_star = Some(q(hs.value, "R*' * r1*(1 - r1^H)/(1 - r1)"));
    section.safe_delta_eta = Some(q(ctx.c / (2.0 * hs.value), "C/(2*H*)"));
    section.spacing_range = nets.spacing_range;
    section.primal_integral = Some(sample_size(
        ctx,
        CostMeasure::PrimalIntegral,
        NetSize::Product {
            rho: nets.rho.len(),
            eta: nets.eta.len(),
        },
    )?);
    Ok(section)
}
