//! Sensitivity of the conjugate iteration to its parameters.
//!
//! Two runs that differ in `ρ` (or `η`) drift apart at a rate governed by the
//! recurrence `A_n = [D(ρ)+η]·A_{n−1} + η·A_{n−2}`. Each bound below is the
//! closed-form solution of such a recurrence with a particular pair of
//! initial values `(R0, R1)` minus an offset term, and the refined bounds
//! `G*`, `H*` dominate the sum of those solutions over the horizon by a
//! geometric series in the dominant root.

use serde::{Deserialize, Serialize};

use super::gd::{d_factor, horizon};
use super::recurrence::{pow, recurrence_roots, RecurrencePair};
use super::CertificateContext;
use crate::error::{invalid, Error, Result};

/// Grid resolution of the inner maximization over `η`.
pub const FSTAR_GRID_POINTS: usize = 1024;

const GOLDEN_ITERS: usize = 80;

/// One-step Lipschitz bound of the conjugate update:
/// `(D(ρ)+η)·‖w_n − y_n‖ + η·‖w_{n−1} − y_{n−1}‖`.
pub fn cg_step_lipschitz_bound(rho: f64, eta: f64, l: f64, dcurr: f64, dprev: f64) -> f64 {
    (d_factor(rho, l) + eta) * dcurr + eta * dprev
}

/// `F(ρ, η, n)`, the factor bounding `‖w_n − y_n‖ / ‖w_0 − y_0‖` for two runs
/// with the same parameters:
/// `((D − r2)/(r1 − r2))·r1ⁿ + ((D − r1)/(r2 − r1))·r2ⁿ`.
pub fn cg_traj_lipschitz_f(rho: f64, eta: f64, l: f64, n: usize) -> Result<f64> {
    let d = d_factor(rho, l);
    let p = recurrence_roots(d + eta, eta)?;
    let gap = p.r1 - p.r2;
    if gap.abs() <= 1e-14 * p.r1.abs().max(1.0) {
        return Err(Error::RepeatedRoot(p.r1));
    }
    Ok((d - p.r2) / gap * pow(p.r1, n) + (d - p.r1) / (p.r2 - p.r1) * pow(p.r2, n))
}

/// Initial values and roots of one sensitivity recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityConstants {
    pub r0: f64,
    pub r1: f64,
    pub roots: RecurrencePair,
    /// The denominator of the offset term: `Δ` for the ρ-recurrence,
    /// `D + 2η₁ − 1` for the η-recurrence.
    pub denominator: f64,
}

impl SensitivityConstants {
    /// `((R0·r2 − R1)/(r2 − r1))·r1ʲ + ((R0·r1 − R1)/(r1 − r2))·r2ʲ`.
    pub fn pair_term(&self, j: usize) -> f64 {
        let RecurrencePair { r1, r2, .. } = self.roots;
        (self.r0 * r2 - self.r1) / (r2 - r1) * pow(r1, j) + (self.r0 * r1 - self.r1) / (r1 - r2) * pow(r2, j)
    }

    /// `(R0·r2 − R1)/(r2 − r1) + |(R0·r1 − R1)/(r1 − r2)|`, the coefficient
    /// that dominates the pair term by `r1ʲ`.
    pub fn r_star(&self) -> f64 {
        let RecurrencePair { r1, r2, .. } = self.roots;
        (self.r0 * r2 - self.r1) / (r2 - r1) + ((self.r0 * r1 - self.r1) / (r1 - r2)).abs()
    }

    fn check_distinct(&self) -> Result<()> {
        let RecurrencePair { r1, r2, .. } = self.roots;
        if (r1 - r2).abs() <= 1e-14 * r1.abs().max(1.0) {
            return Err(Error::RepeatedRoot(r1));
        }
        Ok(())
    }
}

/// Constants of the ρ-sensitivity recurrence at `(ρ₁, η)`:
/// `Δ = [D+η](1−β) + η − (1−β)²`, `R0 = LZ(1−β)²/Δ`,
/// `R1 = D·LZ/β + LZ(1−β)³/Δ`, roots of `a = D+η`, `b = η`.
pub fn rho_sensitivity_constants(ctx: &CertificateContext, rho1: f64, eta: f64) -> Result<SensitivityConstants> {
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(invalid("eta", format!("{eta} must be non-negative")));
    }
    let d = d_factor(rho1, ctx.l);
    let alpha = 1.0 - ctx.beta;
    let lz = ctx.l * ctx.z;
    let delta = (d + eta) * alpha + eta - alpha * alpha;
    if delta.is_nan() || delta <= 0.0 {
        return Err(invalid("beta", format!("recurrence denominator {delta} is not positive")));
    }
    let c = SensitivityConstants {
        r0: lz * alpha * alpha / delta,
        r1: d * lz / ctx.beta + lz * alpha.powi(3) / delta,
        roots: recurrence_roots(d + eta, eta)?,
        denominator: delta,
    };
    c.check_distinct()?;
    Ok(c)
}

/// `G(ρ₁, η, j)`: the factor multiplying `|ρ₂ − ρ₁|` in the bound on
/// `‖z_j − z'_j‖` for two runs differing only in `ρ`.
///
/// The guarantee is stated for `j ≥ 2`; smaller `j` evaluate the same closed
/// form (it is well defined there, and the cost bound sums from `j = 1`).
pub fn cg_rho_sensitivity_g(ctx: &CertificateContext, rho1: f64, eta: f64, j: usize) -> Result<f64> {
    let c = rho_sensitivity_constants(ctx, rho1, eta)?;
    Ok(rho_g(ctx, &c, j))
}

fn rho_g(ctx: &CertificateContext, c: &SensitivityConstants, j: usize) -> f64 {
    let alpha = 1.0 - ctx.beta;
    c.pair_term(j) - ctx.l * ctx.z * pow(alpha, j + 2) / c.denominator
}

/// `η^n[ρLZ + ρZL/(η−L)] − (ρZ/(η−L))·L^{n+1}`, the quantity maximized by
/// [`cg_eta_inner_max_fstar`].
pub fn fstar_term(rho: f64, l: f64, z: f64, eta: f64, n: usize) -> f64 {
    let q = rho * z / (eta - l);
    pow(eta, n) * (rho * l * z + q * l) - q * pow(l, n + 1)
}

fn fstar_term_derivative(rho: f64, l: f64, z: f64, eta: f64, n: usize) -> f64 {
    let q = rho * z / (eta - l);
    let dq = -rho * z / ((eta - l) * (eta - l));
    let lead = if n == 0 { 0.0 } else { n as f64 * pow(eta, n - 1) * (rho * l * z + q * l) };
    lead + pow(eta, n) * dq * l - dq * pow(l, n + 1)
}

/// Result of the inner maximization over `n ∈ {0, …, j−1}` and
/// `η ∈ [η_l, η_u]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FStar {
    /// Best value after golden-section refinement.
    pub value: f64,
    /// Best value on the grid alone.
    pub grid_value: f64,
    /// Half a grid cell times the largest derivative magnitude seen on the
    /// grid: how far the true maximum may sit above `grid_value`.
    pub slack: f64,
    pub argmax_n: usize,
    pub argmax_eta: f64,
    pub j: usize,
}

/// Maximizes [`fstar_term`] over `n ∈ {0, …, j−1}` and a
/// [`FSTAR_GRID_POINTS`]-point `η` grid, refining each `n` by golden-section
/// search around its best grid cell.
///
/// Requires `η_l > L`: the expression divides by `η − L`.
pub fn cg_eta_inner_max_fstar(ctx: &CertificateContext, rho: f64, j: usize) -> Result<FStar> {
    let iv = ctx.eta_interval_or_err()?;
    if iv.lo <= ctx.l {
        return Err(Error::OutsideCertificateScope(format!(
            "eta_l = {} must exceed L = {} (the bound divides by eta - L)",
            iv.lo, ctx.l
        )));
    }
    if j == 0 {
        return Err(invalid("j", "must be at least 1"));
    }
    let (l, z) = (ctx.l, ctx.z);
    let grid = iv.grid(FSTAR_GRID_POINTS);
    let half_cell = if grid.len() > 1 { 0.5 * (grid[1] - grid[0]) } else { 0.0 };

    let mut best = FStar {
        value: f64::NEG_INFINITY,
        grid_value: f64::NEG_INFINITY,
        slack: 0.0,
        argmax_n: 0,
        argmax_eta: iv.lo,
        j,
    };
    for n in 0..j {
        let mut k_best = 0;
        let mut v_best = f64::NEG_INFINITY;
        let mut deriv_max: f64 = 0.0;
        for (k, &eta) in grid.iter().enumerate() {
            let v = fstar_term(rho, l, z, eta, n);
            if v > v_best {
                v_best = v;
                k_best = k;
            }
            deriv_max = deriv_max.max(fstar_term_derivative(rho, l, z, eta, n).abs());
        }
        best.slack = best.slack.max(deriv_max * half_cell);
        if v_best > best.grid_value {
            best.grid_value = v_best;
        }
        let (mut eta_best, mut refined) = (grid[k_best], v_best);
        if grid.len() > 1 {
            let lo = grid[k_best.saturating_sub(1)];
            let hi = grid[(k_best + 1).min(grid.len() - 1)];
            let (e, v) = golden_max(|e| fstar_term(rho, l, z, e, n), lo, hi);
            if v > refined {
                eta_best = e;
                refined = v;
            }
        }
        if refined > best.value {
            best.value = refined;
            best.argmax_n = n;
            best.argmax_eta = eta_best;
        }
    }
    Ok(best)
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Constants of the η-sensitivity recurrence at `(ρ, η₁)` for a given `F*`:
/// `R0 = F*/(D+2η₁−1)`, `R1 = (F*/η₁)·[1 + 1/(D+2η₁−1)]`, roots of
/// `a = D+η₁`, `b = η₁`.
pub fn eta_sensitivity_constants(
    ctx: &CertificateContext,
    rho: f64,
    eta1: f64,
    fstar: f64,
) -> Result<SensitivityConstants> {
    if !(eta1.is_finite() && eta1 > 0.0) {
        return Err(invalid("eta1", format!("{eta1} must be positive")));
    }
    let d = d_factor(rho, ctx.l);
    let den = d + 2.0 * eta1 - 1.0;
    let c = SensitivityConstants {
        r0: fstar / den,
        r1: fstar / eta1 * (1.0 + 1.0 / den),
        roots: recurrence_roots(d + eta1, eta1)?,
        denominator: den,
    };
    c.check_distinct()?;
    Ok(c)
}

fn eta_h(c: &SensitivityConstants, fstar: f64, j: usize) -> f64 {
    c.pair_term(j) - fstar / c.denominator
}

/// `H(η*, ρ, j)`: the factor multiplying `|η₂ − η₁|` in the bound on
/// `‖z_j − z'_j‖` for two runs differing only in `η`. Uses `F*` maximized
/// over `n ∈ {0, …, j−1}`.
pub fn cg_eta_sensitivity_h(ctx: &CertificateContext, rho: f64, eta1: f64, j: usize) -> Result<f64> {
    let fstar = cg_eta_inner_max_fstar(ctx, rho, j.max(1))?;
    let c = eta_sensitivity_constants(ctx, rho, eta1, fstar.value)?;
    Ok(eta_h(&c, fstar.value, j))
}

/// `|ρ₂−ρ₁|·G(ρ₁,η₁,j) + |η₂−η₁|·H(η*,ρ₁,j)`. A term whose parameter
/// difference is zero is skipped, so the ρ-only case needs no η scope.
pub fn cg_combined_bound(
    ctx: &CertificateContext,
    rho1: f64,
    rho2: f64,
    eta1: f64,
    eta2: f64,
    j: usize,
) -> Result<f64> {
    let mut total = 0.0;
    if rho1 != rho2 {
        total += (rho2 - rho1).abs() * cg_rho_sensitivity_g(ctx, rho1, eta1, j)?;
    }
    if eta1 != eta2 {
        total += (eta2 - eta1).abs() * cg_eta_sensitivity_h(ctx, rho1, eta1, j)?;
    }
    Ok(total)
}

/// Bound on the primal-integral cost difference of two conjugate runs over
/// `M` steps:
/// `|ρ₂−ρ₁|·(LZ·D(ρ₁)/β + Σ_{j=1}^{M} G(ρ₁,η₁,j)) + |η₂−η₁|·Σ_{j=1}^{M} H(η*,ρ₁,j)`.
pub fn cg_cost_diff_bound(
    ctx: &CertificateContext,
    rho1: f64,
    rho2: f64,
    eta1: f64,
    eta2: f64,
    m: usize,
) -> Result<f64> {
    let cap = ctx.horizon_steps();
    if m > cap {
        return Err(invalid("M", format!("{m} exceeds ceil(H) = {cap}")));
    }
    let mut total = 0.0;
    if rho1 != rho2 {
        let c = rho_sensitivity_constants(ctx, rho1, eta1)?;
        let base = ctx.l * ctx.z * d_factor(rho1, ctx.l) / ctx.beta;
        let sum: f64 = (1..=m).map(|j| rho_g(ctx, &c, j)).sum();
        total += (rho2 - rho1).abs() * (base + sum);
    }
    if eta1 != eta2 {
        let mut sum = 0.0;
        for j in 1..=m {
            let f = cg_eta_inner_max_fstar(ctx, rho1, j)?;
            let c = eta_sensitivity_constants(ctx, rho1, eta1, f.value)?;
            sum += eta_h(&c, f.value, j);
        }
        total += (eta2 - eta1).abs() * sum;
    }
    Ok(total)
}

/// A refined upper bound together with the constants it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinedBound {
    pub value: f64,
    /// `LZ·D(ρ₁)/β` for `G*`, zero for `H*`.
    pub base: f64,
    pub constants: SensitivityConstants,
    pub r_star: f64,
    /// `r1·(1 − r1^H)/(1 − r1)` with real-valued `H`.
    pub geometric_factor: f64,
    pub horizon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fstar: Option<FStar>,
}

fn geometric_factor(r1: f64, h: f64) -> Result<f64> {
    if r1 == 1.0 {
        return Err(Error::RepeatedRoot(r1));
    }
    Ok(r1 * (1.0 - r1.powf(h)) / (1.0 - r1))
}

/// `G* = LZ·D(ρ₁)/β + R*·r1(1 − r1^H)/(1 − r1)`, an upper bound on
/// `LZ·D(ρ₁)/β + Σ_{j=1}^{M} G(ρ₁, η₁, j)`.
pub fn g_star(ctx: &CertificateContext, rho1: f64, eta1: f64) -> Result<RefinedBound> {
    let c = rho_sensitivity_constants(ctx, rho1, eta1)?;
    let h = horizon(ctx);
    let base = ctx.l * ctx.z * d_factor(rho1, ctx.l) / ctx.beta;
    let r_star = c.r_star();
    let geo = geometric_factor(c.roots.r1, h)?;
    Ok(RefinedBound {
        value: base + r_star * geo,
        base,
        constants: c,
        r_star,
        geometric_factor: geo,
        horizon: h,
        fstar: None,
    })
}

/// `H* = R*′·r1(1 − r1^H)/(1 − r1)`, an upper bound on
/// `Σ_{j=1}^{M} H(η*, ρ₁, j)`. `F*` is maximized over `n < ceil(H)`, the
/// largest range any `j ≤ M` needs.
pub fn h_star(ctx: &CertificateContext, rho1: f64, eta1: f64) -> Result<RefinedBound> {
    let fstar = cg_eta_inner_max_fstar(ctx, rho1, ctx.horizon_steps().max(1))?;
    h_star_with_fstar(ctx, rho1, eta1, fstar)
}

/// [`h_star`] with a precomputed `F*` (it depends on `ρ₁` but not `η₁`).
pub fn h_star_with_fstar(ctx: &CertificateContext, rho1: f64, eta1: f64, fstar: FStar) -> Result<RefinedBound> {
    let c = eta_sensitivity_constants(ctx, rho1, eta1, fstar.value)?;
    let h = horizon(ctx);
    let r_star = c.r_star();
    let geo = geometric_factor(c.roots.r1, h)?;
    Ok(RefinedBound {
        value: r_star * geo,
        base: 0.0,
        constants: c,
        r_star,
        geometric_factor: geo,
        horizon: h,
        fstar: Some(fstar),
    })
}

/// `(C/(2·G*), C/(2·H*))`: parameter spacings under which two conjugate runs'
/// primal-integral costs differ by at most `C`.
pub fn cg_safe_deltas(ctx: &CertificateContext, rho1: f64, eta1: f64) -> Result<(f64, f64)> {
    let g = g_star(ctx, rho1, eta1)?;
    let h = h_star(ctx, rho1, eta1)?;
    Ok((ctx.c / (2.0 * g.value), ctx.c / (2.0 * h.value)))
}
