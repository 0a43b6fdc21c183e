//! Monte-Carlo experiments: reference expectations, uniform-convergence
//! trials, calibration of the sample-size constant, and repeated
//! sample → ERM → holdout learning cycles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::erm::{argmin_config, average_prefix, cost_row};
use super::net::{
    build_cg_nets, build_cg_nets_with_spacing, build_gd_net, build_net, cg_configs, gd_configs, Axis, CgNets,
    NetPolicy, ParameterNet,
};
use crate::certificate::{pseudo_dimension_bound, sample_complexity, CertificateContext, NetSize, PseudoDimensionVariant};
use crate::cost::{cost_upper_bound, CostMeasure};
use crate::error::{invalid, Error, Result};
use crate::instance::{generate_instance, InstanceDistribution, ProblemInstance};
use crate::iterators::{AlgorithmConfig, Method};

/// Default number of fresh instances behind each reference expectation.
pub const REFERENCE_SAMPLES: usize = 100_000;

/// Multiplier of `std/√N` in the Monte-Carlo noise floor.
pub const NOISE_FLOOR_SIGMAS: f64 = 3.0;

const CHUNK: usize = 4096;

/// Where experiment instances come from. `stream` and `trial` name an
/// independent sequence; `index` is the position within it.
pub trait InstanceSource: Sync {
    fn instance(&self, stream: &str, trial: u64, index: u64) -> Result<ProblemInstance>;
}

impl InstanceSource for InstanceDistribution {
    fn instance(&self, stream: &str, trial: u64, index: u64) -> Result<ProblemInstance> {
        generate_instance(&self.reseeded(stream, trial), index)
    }
}

/// A distribution concentrated on one instance.
#[derive(Debug, Clone)]
pub struct FixedInstance(pub ProblemInstance);

impl InstanceSource for FixedInstance {
    fn instance(&self, _: &str, _: u64, _: u64) -> Result<ProblemInstance> {
        Ok(self.0.clone())
    }
}

fn cost_rows(
    source: &dyn InstanceSource,
    stream: &str,
    trial: u64,
    range: std::ops::Range<u64>,
    configs: &[AlgorithmConfig],
    measure: CostMeasure,
    max_iters: usize,
) -> Result<Vec<Vec<f64>>> {
    range
        .into_par_iter()
        .map(|i| Ok(cost_row(&source.instance(stream, trial, i)?, configs, measure, max_iters)))
        .collect()
}

/// Monte-Carlo estimates of each config's expected cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCosts {
    pub samples: usize,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl ReferenceCosts {
    /// `3·std/√N` for config `i`.
    pub fn noise_floor(&self, i: usize) -> f64 {
        let s = self.stds[i];
        if s.is_finite() {
            NOISE_FLOOR_SIGMAS * s / (self.samples as f64).sqrt()
        } else {
            f64::INFINITY
        }
    }

    /// The config with the smallest expected cost.
    pub fn best(&self, configs: &[AlgorithmConfig]) -> Result<usize> {
        argmin_config(configs, &self.means)
    }
}

/// Expected costs from `samples` fresh instances of the `"reference"` stream.
pub fn reference_costs(
    source: &dyn InstanceSource,
    configs: &[AlgorithmConfig],
    measure: CostMeasure,
    max_iters: usize,
    samples: usize,
) -> Result<ReferenceCosts> {
    if samples == 0 {
        return Err(Error::Empty("reference sample"));
    }
    let w = configs.len();
    let (mut sum, mut sq) = (vec![0.0; w], vec![0.0; w]);
    let mut start = 0u64;
    while start < samples as u64 {
        let end = (start + CHUNK as u64).min(samples as u64);
        for row in cost_rows(source, "reference", 0, start..end, configs, measure, max_iters)? {
            for c in 0..w {
                sum[c] += row[c];
                sq[c] += row[c] * row[c];
            }
        }
        start = end;
    }
    let n = samples as f64;
    let means: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let stds = means
        .iter()
        .zip(&sq)
        .map(|(&mu, &q)| {
            if !mu.is_finite() {
                f64::INFINITY
            } else if samples < 2 {
                0.0
            } else {
                ((q - n * mu * mu) / (n - 1.0)).max(0.0).sqrt()
            }
        })
        .collect();
    Ok(ReferenceCosts { samples, means, stds })
}

fn uniform_gap(empirical: &[f64], reference: &[f64]) -> f64 {
    empirical
        .iter()
        .zip(reference)
        .map(|(&e, &r)| if e.is_infinite() && r.is_infinite() { 0.0 } else { (e - r).abs() })
        .fold(0.0, f64::max)
}

/// Per-trial cost rows, grown on demand. Trial `t` always draws the same
/// instance sequence, so different sample sizes share their prefixes.
struct TrialCostCache<'a> {
    source: &'a dyn InstanceSource,
    configs: &'a [AlgorithmConfig],
    measure: CostMeasure,
    max_iters: usize,
    rows: Vec<Vec<Vec<f64>>>,
}

impl<'a> TrialCostCache<'a> {
    fn new(
        source: &'a dyn InstanceSource,
        configs: &'a [AlgorithmConfig],
        measure: CostMeasure,
        max_iters: usize,
        trials: usize,
    ) -> Self {
        Self {
            source,
            configs,
            measure,
            max_iters,
            rows: vec![Vec::new(); trials],
        }
    }

    fn ensure(&mut self, m: usize) -> Result<()> {
        for (t, rows) in self.rows.iter_mut().enumerate() {
            if rows.len() < m {
                let more = cost_rows(
                    self.source,
                    "uc-trial",
                    t as u64,
                    rows.len() as u64..m as u64,
                    self.configs,
                    self.measure,
                    self.max_iters,
                )?;
                rows.extend(more);
            }
        }
        Ok(())
    }

    fn gaps(&mut self, m: usize, reference: &ReferenceCosts) -> Result<Vec<f64>> {
        self.ensure(m)?;
        let w = self.configs.len();
        Ok(self
            .rows
            .iter()
            .map(|rows| uniform_gap(&average_prefix(rows, m, w), &reference.means))
            .collect())
    }
}

/// Outcome of repeated uniform-convergence trials at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformConvergence {
    pub m: usize,
    pub trials: usize,
    pub epsilon: f64,
    /// Fraction of trials with `max_c |empirical mean − reference| < ε`.
    pub fraction_within: f64,
    pub max_gaps: Vec<f64>,
}

fn fraction_below(gaps: &[f64], epsilon: f64) -> f64 {
    gaps.iter().filter(|&&g| g < epsilon).count() as f64 / gaps.len() as f64
}

/// Draws `trials` independent samples of size `m` and records how often the
/// worst deviation of an empirical mean from its reference stays below `ε`.
#[allow(clippy::too_many_arguments)]
pub fn uniform_convergence_trial(
    source: &dyn InstanceSource,
    configs: &[AlgorithmConfig],
    measure: CostMeasure,
    m: usize,
    trials: usize,
    epsilon: f64,
    reference: &ReferenceCosts,
    max_iters: usize,
) -> Result<UniformConvergence> {
    if m == 0 || trials == 0 {
        return Err(invalid("trials", "m and trials must be at least 1"));
    }
    let mut cache = TrialCostCache::new(source, configs, measure, max_iters, trials);
    let max_gaps = cache.gaps(m, reference)?;
    Ok(UniformConvergence {
        m,
        trials,
        epsilon,
        fraction_within: fraction_below(&max_gaps, epsilon),
        max_gaps,
    })
}

/// The empirically sufficient sample size and the constant `k` it implies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub epsilon: f64,
    pub delta: f64,
    pub trials: usize,
    pub pseudo_dimension: f64,
    pub range: f64,
    /// Smallest `m` found with success fraction `≥ 1 − δ`.
    pub m_calibrated: usize,
    /// `m_calibrated / ((R/ε)²·(d + ln(1/δ)))`.
    pub k_calibrated: f64,
    pub fraction_at_calibrated: f64,
    /// `(m, fraction)` pairs evaluated during the search.
    pub probes: Vec<(usize, f64)>,
}

/// Finds the smallest `m` whose uniform-convergence success fraction reaches
/// `1 − δ`, by doubling then bisection, and converts it into `k`.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_k(
    source: &dyn InstanceSource,
    configs: &[AlgorithmConfig],
    measure: CostMeasure,
    ctx: &CertificateContext,
    pseudo_dimension: f64,
    range: f64,
    trials: usize,
    reference: &ReferenceCosts,
    max_iters: usize,
    m_limit: usize,
) -> Result<Calibration> {
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    let target = 1.0 - ctx.delta;
    let mut cache = TrialCostCache::new(source, configs, measure, max_iters, trials);
    let mut probes = Vec::new();
    let mut eval = |m: usize, probes: &mut Vec<(usize, f64)>| -> Result<f64> {
        let f = fraction_below(&cache.gaps(m, reference)?, ctx.epsilon);
        probes.push((m, f));
        Ok(f)
    };

    let mut hi = 1;
    let mut f_hi = eval(hi, &mut probes)?;
    while f_hi < target {
        if hi >= m_limit {
            return Err(invalid(
                "m_limit",
                format!("no sample size up to {m_limit} reached success fraction {target}"),
            ));
        }
        hi = (hi * 2).min(m_limit);
        f_hi = eval(hi, &mut probes)?;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let f = eval(mid, &mut probes)?;
        if f >= target {
            hi = mid;
            f_hi = f;
        } else {
            lo = mid;
        }
    }
    let unit = (range / ctx.epsilon).powi(2) * (pseudo_dimension + (1.0 / ctx.delta).ln());
    Ok(Calibration {
        epsilon: ctx.epsilon,
        delta: ctx.delta,
        trials,
        pseudo_dimension,
        range,
        m_calibrated: hi,
        k_calibrated: hi as f64 / unit,
        fraction_at_calibrated: f_hi,
        probes,
    })
}

/// The `(C, ε, δ)` learning target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    #[serde(rename = "C")]
    pub c: f64,
    pub epsilon: f64,
    pub delta: f64,
}

/// One sample → ERM → holdout cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnOutcome {
    pub trial: usize,
    pub selected_index: usize,
    pub selected_config: AlgorithmConfig,
    /// Per-config average cost over the sample, in net order.
    pub empirical_costs: Vec<f64>,
    pub sample_size_m: usize,
    /// Reference expected cost of the selected config.
    pub holdout_expected_cost: f64,
    /// `holdout_expected_cost − min over the net of the reference cost`.
    pub generalization_gap: f64,
    /// Noise floor of the selected and the best config, summed.
    pub noise_floor: f64,
    pub exceeded: bool,
    pub target: Target,
}

/// Whether the nets carry a spacing certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    Certified,
    EmpiricalOnly,
}

/// Settings of [`learning_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearningOptions {
    pub trials: usize,
    pub reference_samples: usize,
    pub policy: NetPolicy,
    /// Replaces the certified `ρ` spacing.
    pub rho_spacing: Option<f64>,
    /// Replaces the certified `η` spacing (required outside certificate
    /// scope).
    pub eta_spacing: Option<f64>,
    pub pseudo_dimension: PseudoDimensionVariant,
    /// Calibrate `k` before learning; otherwise use `ctx.uc_constant_k`.
    pub calibrate: bool,
    pub calibration_trials: usize,
    pub max_iters: Option<usize>,
    /// Upper limit on any sample size drawn.
    pub max_sample_size: usize,
}

impl Default for LearningOptions {
    fn default() -> Self {
        Self {
            trials: 200,
            reference_samples: REFERENCE_SAMPLES,
            policy: NetPolicy::UniformMin,
            rho_spacing: None,
            eta_spacing: None,
            pseudo_dimension: PseudoDimensionVariant::FiniteClass,
            calibrate: true,
            calibration_trials: 200,
            max_iters: None,
            max_sample_size: 1 << 16,
        }
    }
}

/// The nets a learning experiment ran on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum Nets {
    Gd { rho: ParameterNet },
    Cg(CgNets),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningReport {
    pub method: Method,
    pub measure: CostMeasure,
    pub scope: Scope,
    pub nets: Nets,
    pub configs: Vec<AlgorithmConfig>,
    pub pseudo_dimension: f64,
    pub pseudo_dimension_variant: PseudoDimensionVariant,
    /// Range `R` of the cost: `H` or `Z·H`.
    pub range: f64,
    pub uc_constant_k: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Calibration>,
    pub sample_size_m: usize,
    /// Allowed excess: `C + ε`, or `1 + ε` for the iteration count.
    pub tolerance: f64,
    pub reference: ReferenceCosts,
    pub best_index: usize,
    pub outcomes: Vec<LearnOutcome>,
    pub failures: usize,
    pub failure_frequency: f64,
    pub success_frequency: f64,
    /// `failure_frequency ≤ δ`.
    pub passed: bool,
}

fn experiment_nets(
    ctx: &CertificateContext,
    method: Method,
    measure: CostMeasure,
    opts: &LearningOptions,
) -> Result<(Nets, Scope)> {
    match method {
        Method::Gd => {
            let net = match opts.rho_spacing {
                Some(k) => build_net(Axis::Rho, ctx.rho_interval, k)?,
                None => build_gd_net(ctx, measure)?,
            };
            let scope = if opts.rho_spacing.is_some() {
                Scope::EmpiricalOnly
            } else {
                Scope::Certified
            };
            Ok((Nets::Gd { rho: net }, scope))
        }
        Method::Cg => {
            if measure != CostMeasure::PrimalIntegral {
                log::warn!("conjugate-iteration spacings are certified for the primal integral only");
            }
            match (opts.rho_spacing, opts.eta_spacing) {
                (Some(kr), Some(ke)) => Ok((
                    Nets::Cg(build_cg_nets_with_spacing(ctx, kr, ke)?),
                    Scope::EmpiricalOnly,
                )),
                _ if !ctx.in_certificate_scope() => Err(Error::OutsideCertificateScope(
                    "eta_l <= L; supply rho_spacing and eta_spacing to run empirically".into(),
                )),
                _ => {
                    let nets = build_cg_nets(ctx, opts.policy)?;
                    let scope = if measure == CostMeasure::PrimalIntegral {
                        Scope::Certified
                    } else {
                        Scope::EmpiricalOnly
                    };
                    Ok((Nets::Cg(nets), scope))
                }
            }
        }
    }
}

/// Builds the net(s), sizes the sample from the pseudo-dimension bound
/// (calibrating `k` first when asked), and runs `opts.trials` independent
/// sample → ERM → holdout cycles against Monte-Carlo reference costs.
pub fn learning_experiment(
    source: &dyn InstanceSource,
    ctx: &CertificateContext,
    method: Method,
    measure: CostMeasure,
    opts: &LearningOptions,
) -> Result<LearningReport> {
    ctx.validate()?;
    if opts.trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    let (nets, scope) = experiment_nets(ctx, method, measure, opts)?;
    let (configs, net_size) = match &nets {
        Nets::Gd { rho } => (gd_configs(rho), NetSize::Single(rho.len())),
        Nets::Cg(n) => (
            cg_configs(n),
            NetSize::Product {
                rho: n.rho.len(),
                eta: n.eta.len(),
            },
        ),
    };
    let max_iters = opts.max_iters.unwrap_or_else(|| ctx.default_max_iters());
    let d = pseudo_dimension_bound(net_size, opts.pseudo_dimension, ctx)?;
    let range = cost_upper_bound(ctx, measure);

    let reference = reference_costs(source, &configs, measure, max_iters, opts.reference_samples)?;
    let best_index = reference.best(&configs)?;

    let calibration = if opts.calibrate {
        Some(calibrate_k(
            source,
            &configs,
            measure,
            ctx,
            d,
            range,
            opts.calibration_trials,
            &reference,
            max_iters,
            opts.max_sample_size,
        )?)
    } else {
        None
    };
    let k = calibration.as_ref().map_or(ctx.uc_constant_k, |c| c.k_calibrated);
    let sized = CertificateContext {
        uc_constant_k: k,
        ..ctx.clone()
    };
    let m = sample_complexity(&sized, d, range)? as usize;
    if m > opts.max_sample_size {
        return Err(invalid(
            "max_sample_size",
            format!("sample size {m} exceeds the limit {}", opts.max_sample_size),
        ));
    }

    let tolerance = match (method, measure) {
        (Method::Gd, CostMeasure::IterationCount) => 1.0 + ctx.epsilon,
        _ => ctx.c + ctx.epsilon,
    };
    let target = Target {
        c: ctx.c,
        epsilon: ctx.epsilon,
        delta: ctx.delta,
    };
    let best_cost = reference.means[best_index];
    let w = configs.len();
    let mut outcomes = Vec::with_capacity(opts.trials);
    for t in 0..opts.trials {
        let rows = cost_rows(source, "learn-trial", t as u64, 0..m as u64, &configs, measure, max_iters)?;
        let empirical = average_prefix(&rows, m, w);
        let sel = argmin_config(&configs, &empirical)?;
        let holdout = reference.means[sel];
        let gap = holdout - best_cost;
        let floor = reference.noise_floor(sel) + reference.noise_floor(best_index);
        outcomes.push(LearnOutcome {
            trial: t,
            selected_index: sel,
            selected_config: configs[sel],
            empirical_costs: empirical,
            sample_size_m: m,
            holdout_expected_cost: holdout,
            generalization_gap: gap,
            noise_floor: floor,
            exceeded: gap > tolerance + floor,
            target,
        });
    }
    let failures = outcomes.iter().filter(|o| o.exceeded).count();
    let failure_frequency = failures as f64 / opts.trials as f64;
    Ok(LearningReport {
        method,
        measure,
        scope,
        nets,
        configs,
        pseudo_dimension: d,
        pseudo_dimension_variant: opts.pseudo_dimension,
        range,
        uc_constant_k: k,
        calibration,
        sample_size_m: m,
        tolerance,
        reference,
        best_index,
        outcomes,
        failures,
        failure_frequency,
        success_frequency: 1.0 - failure_frequency,
        passed: failure_frequency <= ctx.delta,
    })
}

/// One row of the plot-ready cost table: the reference expectation and the
/// selection count of every config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTableRow {
    pub config_index: usize,
    pub method: Method,
    pub rho: f64,
    pub eta: f64,
    pub reference_mean: f64,
    pub reference_std: f64,
    pub noise_floor: f64,
    pub times_selected: usize,
    pub mean_empirical_cost: f64,
}

impl LearningReport {
    pub fn cost_table(&self) -> Vec<CostTableRow> {
        self.configs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let picked = self.outcomes.iter().filter(|o| o.selected_index == i).count();
                let mean_emp =
                    self.outcomes.iter().map(|o| o.empirical_costs[i]).sum::<f64>() / self.outcomes.len() as f64;
                CostTableRow {
                    config_index: i,
                    method: c.method,
                    rho: c.rho,
                    eta: c.eta,
                    reference_mean: self.reference.means[i],
                    reference_std: self.reference.stds[i],
                    noise_floor: self.reference.noise_floor(i),
                    times_selected: picked,
                    mean_empirical_cost: mean_emp,
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;
    use crate::learner::erm::erm_select;

    fn ctx() -> CertificateContext {
        CertificateContext {
            l: 1.0,
            z: 1.0,
            nu: 0.01,
            beta: 0.45,
            rho_interval: Interval::new(0.6, 1.2),
            eta_interval: None,
            c: 0.2,
            epsilon: 0.1,
            delta: 0.1,
            uc_constant_k: 0.01,
        }
    }

    fn dist() -> InstanceDistribution {
        InstanceDistribution {
            seed: 5,
            dimension: 1,
            eigenvalue_range: Interval::new(0.8, 1.0),
            initial_norm_range: Interval::new(0.5, 1.0),
            gradient_tolerance_nu: Some(0.01),
        }
    }

    fn small_opts() -> LearningOptions {
        LearningOptions {
            trials: 10,
            reference_samples: 2000,
            calibration_trials: 20,
            ..LearningOptions::default()
        }
    }

    #[test]
    fn concentrated_distribution_always_succeeds() {
        let inst = ProblemInstance::diagonal(vec![0.9], vec![0.8], 0.01, 1.0).unwrap();
        let src = FixedInstance(inst.clone());
        let opts = LearningOptions {
            calibrate: false,
            ..small_opts()
        };
        let report = learning_experiment(&src, &ctx(), Method::Gd, CostMeasure::PrimalIntegral, &opts).unwrap();
        assert_eq!(report.failures, 0);
        assert_eq!(report.success_frequency, 1.0);
        let per_instance = erm_select(&report.configs, &[inst], CostMeasure::PrimalIntegral, ctx().default_max_iters())
            .unwrap();
        assert!(report.outcomes.iter().all(|o| o.selected_index == per_instance.index));
        assert!(report.outcomes.iter().all(|o| o.generalization_gap == 0.0));
    }

    #[test]
    fn single_point_net_succeeds_vacuously() {
        let c = CertificateContext {
            rho_interval: Interval::point(0.9),
            ..ctx()
        };
        let opts = LearningOptions {
            calibrate: false,
            ..small_opts()
        };
        let report = learning_experiment(&dist(), &c, Method::Gd, CostMeasure::PrimalIntegral, &opts).unwrap();
        assert_eq!(report.configs.len(), 1);
        assert_eq!(report.failures, 0);
    }

    #[test]
    fn reports_are_deterministic() {
        let a = learning_experiment(&dist(), &ctx(), Method::Gd, CostMeasure::PrimalIntegral, &small_opts()).unwrap();
        let b = learning_experiment(&dist(), &ctx(), Method::Gd, CostMeasure::PrimalIntegral, &small_opts()).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.calibration.is_some());
        assert_eq!(a.cost_table().len(), a.configs.len());
    }

    #[test]
    fn uniform_convergence_limits() {
        let configs = vec![AlgorithmConfig::gd(0.7), AlgorithmConfig::gd(1.0)];
        let src = dist();
        let reference = reference_costs(&src, &configs, CostMeasure::PrimalIntegral, 200, 20_000).unwrap();
        let big = uniform_convergence_trial(&src, &configs, CostMeasure::PrimalIntegral, 2000, 20, 0.05, &reference, 200)
            .unwrap();
        assert!(big.fraction_within >= 0.95, "{}", big.fraction_within);
        let tiny = uniform_convergence_trial(&src, &configs, CostMeasure::PrimalIntegral, 1, 50, 1e-4, &reference, 200)
            .unwrap();
        assert!(tiny.fraction_within <= 0.05, "{}", tiny.fraction_within);
    }

    #[test]
    fn calibration_reaches_its_target() {
        let configs = vec![AlgorithmConfig::gd(0.7), AlgorithmConfig::gd(1.0)];
        let src = dist();
        let reference = reference_costs(&src, &configs, CostMeasure::PrimalIntegral, 200, 20_000).unwrap();
        let c = ctx();
        let cal = calibrate_k(&src, &configs, CostMeasure::PrimalIntegral, &c, 1.0, 5.0, 40, &reference, 200, 1 << 14)
            .unwrap();
        assert!(cal.fraction_at_calibrated >= 0.9);
        assert!(cal.k_calibrated > 0.0 && cal.k_calibrated.is_finite());
        let check = uniform_convergence_trial(
            &src,
            &configs,
            CostMeasure::PrimalIntegral,
            cal.m_calibrated,
            40,
            c.epsilon,
            &reference,
            200,
        )
        .unwrap();
        assert_eq!(check.fraction_within, cal.fraction_at_calibrated);
    }

    #[test]
    fn cg_outside_scope_needs_explicit_spacing() {
        let c = CertificateContext {
            eta_interval: Some(Interval::new(0.05, 0.15)),
            ..ctx()
        };
        let err = learning_experiment(&dist(), &c, Method::Cg, CostMeasure::PrimalIntegral, &small_opts());
        assert!(matches!(err, Err(Error::OutsideCertificateScope(_))));
        let opts = LearningOptions {
            rho_spacing: Some(0.2),
            eta_spacing: Some(0.05),
            calibrate: false,
            ..small_opts()
        };
        let report = learning_experiment(&dist(), &c, Method::Cg, CostMeasure::PrimalIntegral, &opts).unwrap();
        assert_eq!(report.scope, Scope::EmpiricalOnly);
        assert_eq!(report.configs.len(), 4 * 3);
    }
}
