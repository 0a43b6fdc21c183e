//! Gradient-descent constants: the expansion factor, the iteration horizon,
//! and the step-size spacings that keep cost differences bounded.

use super::CertificateContext;

/// `D(ρ) = max{1, Lρ − 1}`, the worst one-step expansion of `I − ρQ` over
/// spectra in `[0, L]`.
pub fn d_factor(rho: f64, l: f64) -> f64 {
    (l * rho - 1.0).max(1.0)
}

/// Iteration horizon `H = ln(LZ/ν) / ln(1/(1−β))`, the positive form of
/// `log(ν/LZ)/log(1−β)`. Kept real-valued.
pub fn horizon(ctx: &CertificateContext) -> f64 {
    (ctx.l * ctx.z / ctx.nu).ln() / -(1.0 - ctx.beta).ln()
}

/// `(1 − D)/(1 − D^H)` with its limit `1/H` at `D = 1`.
///
/// Evaluated as `expm1(ln D)/expm1(H ln D)` so the ratio is continuous across
/// `D = 1`.
pub fn spacing_ratio(d: f64, h: f64) -> f64 {
    let x = d.ln();
    if x == 0.0 {
        1.0 / h
    } else {
        x.exp_m1() / (h * x).exp_m1()
    }
}

/// Step-size spacing that changes the iteration count by at most one:
/// `νβ²/(LZ) · D(ρ)^{−H}`.
pub fn gd_iter_safe_delta(ctx: &CertificateContext, rho: f64) -> f64 {
    let h = horizon(ctx);
    ctx.nu * ctx.beta * ctx.beta / (ctx.l * ctx.z) * d_factor(rho, ctx.l).powf(-h)
}

/// Bound on `‖g^j(z,ρ) − g^j(z,η)‖`: `|η−ρ| · D(min)^j · LZ/β`, where the
/// expansion factor is taken at the smaller step.
pub fn gd_traj_error_bound(ctx: &CertificateContext, rho: f64, eta: f64, j: usize) -> f64 {
    let (lo, hi) = if rho <= eta { (rho, eta) } else { (eta, rho) };
    (hi - lo) * d_factor(lo, ctx.l).powi(j as i32) * ctx.l * ctx.z / ctx.beta
}

/// Step-size spacing under which the primal-integral costs differ by at most
/// `C`: `(β/LZ) · (1−D)/(1−D^H) · D^{−1} · C`.
pub fn gd_cost_safe_delta(ctx: &CertificateContext, rho: f64) -> f64 {
    let d = d_factor(rho, ctx.l);
    let h = horizon(ctx);
    ctx.beta / (ctx.l * ctx.z) * spacing_ratio(d, h) / d * ctx.c
}
