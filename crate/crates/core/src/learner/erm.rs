//! Empirical risk minimization over a finite set of configurations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::CostMeasure;
use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::iterators::{run_summary, AlgorithmConfig, Termination};

/// Cost of one run under `measure`; `+∞` for a diverging run, and for the
/// iteration count of a run that hit the cap.
pub fn run_cost(inst: &ProblemInstance, config: &AlgorithmConfig, measure: CostMeasure, max_iters: usize) -> f64 {
    match run_summary(inst, config, max_iters) {
        Ok(s) => match measure {
            CostMeasure::PrimalIntegral => s.primal_integral,
            CostMeasure::IterationCount if s.termination == Termination::GradientBelowNu => s.steps as f64,
            CostMeasure::IterationCount => f64::INFINITY,
        },
        Err(_) => f64::INFINITY,
    }
}

/// Costs of every config on every instance, stored instance-major:
/// `rows[i][c]` is config `c` on instance `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTable {
    pub configs: Vec<AlgorithmConfig>,
    pub measure: CostMeasure,
    pub rows: Vec<Vec<f64>>,
}

impl CostTable {
    pub fn compute(
        configs: &[AlgorithmConfig],
        samples: &[ProblemInstance],
        measure: CostMeasure,
        max_iters: usize,
    ) -> Self {
        let rows = samples
            .par_iter()
            .map(|inst| cost_row(inst, configs, measure, max_iters))
            .collect();
        Self {
            configs: configs.to_vec(),
            measure,
            rows,
        }
    }

    /// Per-config averages over the instances (summed in instance order).
    pub fn averages(&self) -> Vec<f64> {
        average_prefix(&self.rows, self.rows.len(), self.configs.len())
    }
}

pub(crate) fn cost_row(
    inst: &ProblemInstance,
    configs: &[AlgorithmConfig],
    measure: CostMeasure,
    max_iters: usize,
) -> Vec<f64> {
    configs.iter().map(|c| run_cost(inst, c, measure, max_iters)).collect()
}

pub(crate) fn average_prefix(rows: &[Vec<f64>], m: usize, width: usize) -> Vec<f64> {
    let mut sums = vec![0.0; width];
    for row in &rows[..m] {
        for (s, v) in sums.iter_mut().zip(row) {
            *s += v;
        }
    }
    sums.iter().map(|s| s / m as f64).collect()
}

/// The ERM choice and the averages it was made from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErmSelection {
    pub index: usize,
    pub config: AlgorithmConfig,
    pub empirical_cost: f64,
    pub empirical_costs: Vec<f64>,
}

/// Index of the smallest finite average; ties go to the smallest `ρ`, then
/// the smallest `η`.
pub fn argmin_config(configs: &[AlgorithmConfig], averages: &[f64]) -> Result<usize> {
    if configs.is_empty() {
        return Err(Error::Empty("configuration net"));
    }
    let mut best: Option<usize> = None;
    for (i, &v) in averages.iter().enumerate() {
        if !v.is_finite() {
            continue;
        }
        best = match best {
            None => Some(i),
            Some(b) => {
                let (cb, ci) = (&configs[b], &configs[i]);
                let better = v < averages[b]
                    || (v == averages[b] && (ci.rho, ci.eta) < (cb.rho, cb.eta));
                Some(if better { i } else { b })
            }
        };
    }
    best.ok_or(Error::AllDiverged)
}

/// Runs every config on every sample and returns the one with the smallest
/// average cost.
pub fn erm_select(
    configs: &[AlgorithmConfig],
    samples: &[ProblemInstance],
    measure: CostMeasure,
    max_iters: usize,
) -> Result<ErmSelection> {
    if samples.is_empty() {
        return Err(Error::Empty("sample"));
    }
    let table = CostTable::compute(configs, samples, measure, max_iters);
    select_from_table(&table)
}

pub fn select_from_table(table: &CostTable) -> Result<ErmSelection> {
    let averages = table.averages();
    let index = argmin_config(&table.configs, &averages)?;
    Ok(ErmSelection {
        index,
        config: table.configs[index],
        empirical_cost: averages[index],
        empirical_costs: averages,
    })
}
