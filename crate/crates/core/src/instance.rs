//! Convex quadratic problem instances, their generating distribution, and
//! trajectory-based probes of the contraction assumption.
//!
//! Every instance minimizes `f(z) = ½·zᵀQz` with `Q` symmetric positive
//! definite, so the optimum is the origin with value zero. `Q` is stored as a
//! spectrum plus the seed of the orthogonal basis; the dense matrix is rebuilt
//! on load.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::interval::Interval;
use crate::iterators::{cg_step, gd_step, Method};
use crate::seed::derive_seed;

/// Symmetry tolerance for `Q`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Default number of probe points per parameter axis.
pub const DEFAULT_PROBE_COUNT: usize = 32;

/// Ratio slack when comparing a measured contraction against `1 − β`.
pub const CONTRACTION_TOL: f64 = 1e-12;

/// Step cap for a single assumption probe.
const PROBE_MAX_STEPS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    eigenvalues: Vec<f64>,
    orthogonal_seed: Option<u64>,
    quadratic: DMatrix<f64>,
    z0: DVector<f64>,
    nu: f64,
    norm_bound: f64,
    smoothness: f64,
    strong_convexity: f64,
}

impl ProblemInstance {
    /// Builds `Q = U·diag(eigenvalues)·Uᵀ` where `U` is the seeded orthogonal
    /// matrix (identity when `orthogonal_seed` is `None`).
    pub fn from_spectrum(
        eigenvalues: Vec<f64>,
        orthogonal_seed: Option<u64>,
        z0: Vec<f64>,
        nu: f64,
        norm_bound: f64,
    ) -> Result<Self> {
        let n = eigenvalues.len();
        if n == 0 {
            return Err(invalid("dimension", "must be at least 1"));
        }
        if eigenvalues.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
            return Err(invalid("eigenvalues", "must be finite and strictly positive"));
        }
        if z0.len() != n {
            return Err(invalid(
                "z0",
                format!("length {} does not match dimension {n}", z0.len()),
            ));
        }
        if !(nu.is_finite() && nu > 0.0) {
            return Err(invalid("nu", "must be positive"));
        }
        if !(norm_bound.is_finite() && norm_bound > 0.0) {
            return Err(invalid("Z", "must be positive"));
        }
        if nu >= norm_bound {
            return Err(invalid("nu", format!("nu = {nu} must be below Z = {norm_bound}")));
        }
        let z0 = DVector::from_vec(z0);
        let norm = z0.norm();
        if !(norm > nu && norm <= norm_bound * (1.0 + 1e-12)) {
            return Err(invalid(
                "z0",
                format!("initial norm {norm} must lie in (nu, Z] = ({nu}, {norm_bound}]"),
            ));
        }

        let quadratic = match orthogonal_seed {
            None => DMatrix::from_diagonal(&DVector::from_column_slice(&eigenvalues)),
            Some(seed) => {
                let u = seeded_orthogonal(n, seed);
                let lambda = DMatrix::from_diagonal(&DVector::from_column_slice(&eigenvalues));
                let q = &u * lambda * u.transpose();
                (&q + q.transpose()) * 0.5
            }
        };
        let smoothness = eigenvalues.iter().copied().fold(f64::MIN, f64::max);
        let strong_convexity = eigenvalues.iter().copied().fold(f64::MAX, f64::min);

        Ok(Self {
            eigenvalues,
            orthogonal_seed,
            quadratic,
            z0,
            nu,
            norm_bound,
            smoothness,
            strong_convexity,
        })
    }

    /// Diagonal `Q` in the standard basis.
    pub fn diagonal(eigenvalues: Vec<f64>, z0: Vec<f64>, nu: f64, norm_bound: f64) -> Result<Self> {
        Self::from_spectrum(eigenvalues, None, z0, nu, norm_bound)
    }

    /// Same `Q`, `ν` and `Z` with a different initial point.
    pub fn with_initial_point(&self, z0: Vec<f64>) -> Result<Self> {
        Self::from_spectrum(
            self.eigenvalues.clone(),
            self.orthogonal_seed,
            z0,
            self.nu,
            self.norm_bound,
        )
    }

    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn quadratic(&self) -> &DMatrix<f64> {
        &self.quadratic
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn orthogonal_seed(&self) -> Option<u64> {
        self.orthogonal_seed
    }

    /// Largest eigenvalue of `Q`.
    pub fn smoothness_l(&self) -> f64 {
        self.smoothness
    }

    /// Smallest eigenvalue of `Q`.
    pub fn strong_convexity_m(&self) -> f64 {
        self.strong_convexity
    }

    pub fn z0(&self) -> &DVector<f64> {
        &self.z0
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn norm_bound_z(&self) -> f64 {
        self.norm_bound
    }

    pub fn objective(&self, z: &DVector<f64>) -> f64 {
        0.5 * z.dot(&(&self.quadratic * z))
    }

    pub fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.quadratic * z
    }

    /// Checks symmetry and the spectral bounds of the dense `Q`.
    pub fn check_invariants(&self) -> Result<()> {
        let q = &self.quadratic;
        let asym = (q - q.transpose()).amax();
        if asym > SYMMETRY_TOL * q.amax().max(1.0) {
            return Err(invalid("Q", format!("asymmetry {asym:e} exceeds tolerance")));
        }
        let eig = q.clone().symmetric_eigenvalues();
        let tol = 1e-9 * self.smoothness;
        let (lo, hi) = eig
            .iter()
            .fold((f64::MAX, f64::MIN), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if lo < self.strong_convexity - tol || hi > self.smoothness + tol || lo <= 0.0 {
            return Err(invalid(
                "Q",
                format!(
                    "spectrum [{lo}, {hi}] outside [m, L] = [{}, {}]",
                    self.strong_convexity, self.smoothness
                ),
            ));
        }
        Ok(())
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            dimension: self.dimension(),
            eigenvalues: self.eigenvalues.clone(),
            orthogonal_seed: self.orthogonal_seed,
            z0: self.z0.iter().copied().collect(),
            nu: self.nu,
            z: self.norm_bound,
            l: self.smoothness,
            m: self.strong_convexity,
        }
    }

    pub fn from_file(file: &InstanceFile) -> Result<Self> {
        if file.dimension != file.eigenvalues.len() {
            return Err(invalid(
                "dimension",
                format!("{} does not match {} eigenvalues", file.dimension, file.eigenvalues.len()),
            ));
        }
        let inst = Self::from_spectrum(
            file.eigenvalues.clone(),
            file.orthogonal_seed,
            file.z0.clone(),
            file.nu,
            file.z,
        )?;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
        if !close(inst.smoothness, file.l) || !close(inst.strong_convexity, file.m) {
            return Err(invalid("L/m", "do not match the eigenvalue extremes"));
        }
        Ok(inst)
    }
}

/// On-disk form of an instance. `Q` is rebuilt from the spectrum and the
/// orthogonal seed, never stored densely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub dimension: usize,
    pub eigenvalues: Vec<f64>,
    pub orthogonal_seed: Option<u64>,
    pub z0: Vec<f64>,
    pub nu: f64,
    #[serde(rename = "Z")]
    pub z: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub m: f64,
}

/// Seeded orthogonal matrix: QR of a Gaussian matrix with the diagonal of `R`
/// made positive.
fn seeded_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        entries.push(rng.sample::<f64, _>(StandardNormal));
    }
    let g = DMatrix::from_column_slice(n, n, &entries);
    let (mut q, r) = g.qr().unpack();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            let mut col = q.column_mut(j);
            col.neg_mut();
        }
    }
    q
}

/// A seeded family of random convex quadratics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDistribution {
    pub seed: u64,
    pub dimension: usize,
    /// `[m, L]`.
    pub eigenvalue_range: Interval,
    /// `(ν_floor, Z]`; initial norms are drawn from `(max(ν_floor, ν), Z]`.
    pub initial_norm_range: Interval,
    /// Gradient tolerance `ν`; defaults to `1e-3·Z`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient_tolerance_nu: Option<f64>,
}

impl InstanceDistribution {
    pub fn nu(&self) -> f64 {
        self.gradient_tolerance_nu
            .unwrap_or(1e-3 * self.initial_norm_range.hi)
    }

    pub fn norm_bound_z(&self) -> f64 {
        self.initial_norm_range.hi
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(invalid("dimension", "must be at least 1"));
        }
        let r = self.eigenvalue_range;
        r.validate("eigenvalue_range", true)?;
        self.initial_norm_range.validate("initial_norm_range", false)?;
        if self.initial_norm_range.hi <= 0.0 {
            return Err(invalid("initial_norm_range", "Z must be positive"));
        }
        let nu = self.nu();
        if !(nu.is_finite() && nu > 0.0) {
            return Err(invalid("gradient_tolerance_nu", "must be positive"));
        }
        if nu >= self.norm_bound_z() {
            return Err(invalid(
                "gradient_tolerance_nu",
                format!("nu = {nu} must be below Z = {}", self.norm_bound_z()),
            ));
        }
        if self.initial_norm_range.lo >= self.initial_norm_range.hi {
            return Err(invalid("initial_norm_range", "the norm range (floor, Z] is empty"));
        }
        Ok(())
    }

    /// Copy of this distribution whose seed is derived from `(label, index)`.
    pub fn reseeded(&self, label: &str, index: u64) -> Self {
        Self {
            seed: derive_seed(self.seed, label, index),
            ..self.clone()
        }
    }
}

/// Draws instance `index` of the distribution. Deterministic in
/// `(dist.seed, index)`.
///
/// For dimension ≥ 2 the spectrum always contains both `m` and `L`, the rest
/// uniform in `[m, L]`. A one-dimensional instance draws its single eigenvalue
/// uniformly from `[m, L]`.
pub fn generate_instance(dist: &InstanceDistribution, index: u64) -> Result<ProblemInstance> {
    dist.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(dist.seed, "instance", index));
    let n = dist.dimension;
    let Interval { lo: m, hi: l } = dist.eigenvalue_range;

    let mut eigenvalues = Vec::with_capacity(n);
    if n == 1 {
        eigenvalues.push(if m == l { l } else { rng.random_range(m..=l) });
    } else {
        eigenvalues.push(l);
        eigenvalues.push(m);
        for _ in 2..n {
            eigenvalues.push(if m == l { l } else { rng.random_range(m..=l) });
        }
    }

    let nu = dist.nu();
    let z = dist.norm_bound_z();
    let floor = dist.initial_norm_range.lo.max(nu);
    // (floor, Z]: u ∈ [0, 1) maps to Z − u·(Z − floor)
    let u: f64 = rng.random();
    let radius = z - u * (z - floor);
    let mut direction: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let dnorm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if dnorm == 0.0 {
        direction[0] = 1.0;
    } else {
        direction.iter_mut().for_each(|x| *x /= dnorm);
    }
    let z0: Vec<f64> = direction.iter().map(|x| x * radius).collect();
    let mut z0 = z0;
    // rounding can push the norm a hair above Z
    let norm = z0.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > z {
        z0.iter_mut().for_each(|x| *x *= z / norm);
    }

    let orthogonal_seed = derive_seed(dist.seed, "orthogonal", index);
    ProblemInstance::from_spectrum(eigenvalues, Some(orthogonal_seed), z0, nu, z)
}

/// Outcome of an assumption probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub method: Method,
    pub rho_interval: Interval,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_interval: Option<Interval>,
    pub beta_requested: f64,
    /// Largest β passing on every probed step, `1 − worst_ratio`; only set
    /// when feasible.
    pub beta_max: Option<f64>,
    pub feasible: bool,
    /// `worst_ratio − (1 − β_requested)`.
    pub worst_violation: f64,
    /// Max over probed steps of `‖z_{n+1}‖ / ‖z_n‖`.
    pub worst_ratio: f64,
    pub probes: usize,
}

impl AssumptionReport {
    fn from_ratio(
        method: Method,
        rho_interval: Interval,
        eta_interval: Option<Interval>,
        beta: f64,
        worst_ratio: f64,
        probes: usize,
    ) -> Self {
        let worst_violation = worst_ratio - (1.0 - beta);
        let feasible = worst_violation <= CONTRACTION_TOL;
        Self {
            method,
            rho_interval,
            eta_interval,
            beta_requested: beta,
            beta_max: feasible.then_some(1.0 - worst_ratio),
            feasible,
            worst_violation,
            worst_ratio,
            probes,
        }
    }
}

/// Worst step ratio `‖z_{n+1}‖/‖z_n‖` along the trajectory from `z0` (GD when
/// `eta` is `None`, otherwise the conjugate iteration with a plain first
/// step). Stops at the gradient tolerance, or early once a ratio ≥ 1 shows no
/// β ∈ (0, 1) can pass.
pub fn worst_step_ratio(inst: &ProblemInstance, rho: f64, eta: Option<f64>) -> f64 {
    let nu = inst.nu();
    let mut prev = inst.z0().clone();
    if inst.gradient(&prev).norm() <= nu {
        return 0.0;
    }
    let mut curr = gd_step(inst, &prev, rho);
    let mut worst = ratio(&curr, &prev);
    let mut steps = 1;
    while worst < 1.0 && steps < PROBE_MAX_STEPS && inst.gradient(&curr).norm() > nu {
        let next = match eta {
            None => gd_step(inst, &curr, rho),
            Some(eta) => cg_step(inst, &curr, &prev, rho, eta),
        };
        worst = worst.max(ratio(&next, &curr));
        prev = curr;
        curr = next;
        steps += 1;
    }
    worst
}

fn ratio(next: &DVector<f64>, curr: &DVector<f64>) -> f64 {
    let c = curr.norm();
    let n = next.norm();
    if !n.is_finite() {
        f64::INFINITY
    } else if c == 0.0 {
        if n == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        n / c
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid("beta", format!("{beta} must lie in (0, 1)")));
    }
    Ok(())
}

/// Probes the gradient-descent contraction `‖z − ρ∇f(z)‖ ≤ (1 − β)‖z‖` along
/// trajectories for `probe_count` step sizes spanning `rho_interval`.
pub fn check_assumption_gd(
    inst: &ProblemInstance,
    rho_interval: Interval,
    beta: f64,
    probe_count: usize,
) -> Result<AssumptionReport> {
    rho_interval.validate("rho_interval", true)?;
    check_beta(beta)?;
    if probe_count == 0 {
        return Err(invalid("probe_count", "must be positive"));
    }
    let grid = rho_interval.grid(probe_count);
    let worst = grid
        .iter()
        .map(|&rho| worst_step_ratio(inst, rho, None))
        .fold(0.0, f64::max);
    Ok(AssumptionReport::from_ratio(
        Method::Gd,
        rho_interval,
        None,
        beta,
        worst,
        grid.len(),
    ))
}

/// Conjugate-iteration analogue of [`check_assumption_gd`] over the
/// `(ρ, η)` probe grid.
pub fn check_assumption_cg(
    inst: &ProblemInstance,
    rho_interval: Interval,
    eta_interval: Interval,
    beta: f64,
    probe_count: usize,
) -> Result<AssumptionReport> {
    rho_interval.validate("rho_interval", true)?;
    eta_interval.validate("eta_interval", false)?;
    if eta_interval.lo < 0.0 {
        return Err(invalid("eta_interval", "must be non-negative"));
    }
    check_beta(beta)?;
    if probe_count == 0 {
        return Err(invalid("probe_count", "must be positive"));
    }
    let rhos = rho_interval.grid(probe_count);
    let etas = eta_interval.grid(probe_count);
    let mut worst: f64 = 0.0;
    for &rho in &rhos {
        for &eta in &etas {
            worst = worst.max(worst_step_ratio(inst, rho, Some(eta)));
        }
    }
    Ok(AssumptionReport::from_ratio(
        Method::Cg,
        rho_interval,
        Some(eta_interval),
        beta,
        worst,
        rhos.len() * etas.len(),
    ))
}

/// For an `m`-strongly convex, `L`-smooth objective: the step `ρ* = 2/(m+L)`
/// and the contraction constant `β = 1 − (κ−1)/(κ+1)` with `κ = L/m`.
pub fn feasible_beta_strongly_convex(m: f64, l: f64) -> Result<(f64, f64)> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(invalid("m", format!("{m} must be positive")));
    }
    if !(l >= m && l.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "L",
            reason: format!("{l} must be at least m = {m}"),
        });
    }
    let kappa = l / m;
    Ok((2.0 / (m + l), 1.0 - (kappa - 1.0) / (kappa + 1.0)))
}
