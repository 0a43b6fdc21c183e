use std::path::{Path, PathBuf};

use serde::Serialize;

use steplearn_core::certificate::report::certificate_report;
use steplearn_core::cost::evaluate;
use steplearn_core::instance::{generate_instance, InstanceFile};
use steplearn_core::iterators::run;
use steplearn_core::learner::{learning_experiment, FixedInstance, InstanceSource};
use steplearn_core::verify::{verify, SuiteStatus};
use steplearn_core::{CertificateContext, CostMeasure, Error, Method, ProblemInstance};

use crate::config::{load, resolve, GenConfig, LearnConfig, RunConfig, Seeded, VerifyConfigFile};
use crate::error::CliError;
use crate::output::{sha256_hex, Format, Outputs, RunManifest};

pub struct Global {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub format: Format,
}

/// Loads a config, applies `--seed`, and digests the result.
fn resolved<T>(g: &Global) -> Result<(T, String, u64), CliError>
where
    T: serde::de::DeserializeOwned + Serialize + Seeded,
{
    let mut cfg: T = load(&g.config)?;
    if let Some(s) = g.seed {
        cfg.set_seed(s);
    }
    let digest = sha256_hex(&serde_json::to_vec(&cfg)?);
    let seed = cfg.seed().or(g.seed).unwrap_or(0);
    Ok((cfg, digest, seed))
}

fn instance_name(i: usize) -> String {
    format!("instance-{i:05}.json")
}

fn generate(cfg: &GenConfig) -> Result<Vec<ProblemInstance>, CliError> {
    if cfg.count == 0 {
        return Err(CliError::Config("empty generation request".into()));
    }
    cfg.distribution.validate()?;
    (0..cfg.count as u64)
        .map(|i| generate_instance(&cfg.distribution, i).map_err(CliError::from))
        .collect()
}

pub fn gen(g: &Global) -> Result<RunManifest, CliError> {
    let (cfg, digest, seed) = resolved::<GenConfig>(g)?;
    let instances = generate(&cfg)?;
    let mut out = Outputs::new(&g.out)?;
    for (i, inst) in instances.iter().enumerate() {
        out.write_json(&format!("instances/{}", instance_name(i)), &inst.to_file())?;
    }
    out.finish("gen", digest, seed)
}

fn read_instance(path: &Path) -> Result<ProblemInstance, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read instance {}: {e}", path.display())))?;
    let file: InstanceFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("instance {}: {e}", path.display())))?;
    ProblemInstance::from_file(&file).map_err(|e| CliError::Config(format!("instance {}: {e}", path.display())))
}

fn run_instances(cfg: &RunConfig) -> Result<Vec<ProblemInstance>, CliError> {
    if !cfg.instances.is_empty() {
        return cfg.instances.iter().map(|p| read_instance(p)).collect();
    }
    if let Some(dir) = &cfg.instance_dir {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| CliError::Config(format!("instance_dir {}: {e}", dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        if paths.is_empty() {
            return Err(CliError::Config(format!("instance_dir {} holds no .json files", dir.display())));
        }
        return paths.iter().map(|p| read_instance(p)).collect();
    }
    match &cfg.generate {
        Some(gc) => generate(gc),
        None => Err(CliError::Config(
            "run needs `instances`, `instance_dir` or a `generate` block".into(),
        )),
    }
}

/// One row of the run cost table.
#[derive(Debug, Clone, Serialize)]
struct RunRecord {
    instance_id: usize,
    config_index: usize,
    method: Method,
    rho: f64,
    eta: f64,
    measure: CostMeasure,
    value: Option<f64>,
    #[serde(rename = "M")]
    steps: Option<usize>,
    termination: String,
    error: Option<String>,
}

pub fn run_cmd(g: &Global) -> Result<RunManifest, CliError> {
    let (mut cfg, digest, seed) = resolved::<RunConfig>(g)?;
    cfg.instances = cfg.instances.iter().map(|p| resolve(&g.config, p)).collect();
    cfg.instance_dir = cfg.instance_dir.as_ref().map(|p| resolve(&g.config, p));
    if cfg.configs.is_empty() {
        return Err(CliError::Config("`configs` is empty".into()));
    }
    if cfg.max_iters == 0 {
        return Err(CliError::Config("`max_iters` must be positive".into()));
    }
    let configs: Vec<_> = cfg.configs.iter().map(|c| c.to_config()).collect();
    for c in &configs {
        c.validate()?;
    }
    let instances = run_instances(&cfg)?;

    let mut out = Outputs::new(&g.out)?;
    let mut records = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        for (k, config) in configs.iter().enumerate() {
            let base = |measure| RunRecord {
                instance_id: i,
                config_index: k,
                method: config.method,
                rho: config.rho,
                eta: config.eta,
                measure,
                value: None,
                steps: None,
                termination: String::new(),
                error: None,
            };
            match run(inst, config, cfg.max_iters) {
                Ok(traj) => {
                    if cfg.trajectories {
                        out.write(
                            &format!("trajectories/instance-{i:05}-config-{k:03}.csv"),
                            traj.to_csv().as_bytes(),
                        )?;
                    }
                    let termination = serde_json::to_value(traj.termination)?
                        .as_str()
                        .unwrap_or_default()
                        .to_string();
                    for &m in &cfg.measures {
                        let (value, error) = match evaluate(&traj, m) {
                            Ok(v) => (Some(v.value), None),
                            Err(e) => (None, Some(e.to_string())),
                        };
                        records.push(RunRecord {
                            value,
                            steps: Some(traj.steps()),
                            termination: termination.clone(),
                            error,
                            ..base(m)
                        });
                    }
                }
                Err(e @ Error::Diverged { step, .. }) => {
                    log::warn!("instance {i}, config {k}: {e}");
                    for &m in &cfg.measures {
                        records.push(RunRecord {
                            steps: Some(step),
                            termination: "diverged".into(),
                            error: Some(e.to_string()),
                            ..base(m)
                        });
                    }
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    match g.format {
        Format::Json => out.write_json("costs.json", &records)?,
        Format::Csv => out.write_csv("costs.csv", &records)?,
    }
    out.finish("run", digest, seed)
}

pub fn bounds(g: &Global) -> Result<RunManifest, CliError> {
    let (ctx, digest, seed) = resolved::<CertificateContext>(g)?;
    let report = certificate_report(&ctx)?;
    let mut out = Outputs::new(&g.out)?;
    out.write_report("certificate", &report, g.format)?;
    out.finish("bounds", digest, seed)
}

pub fn learn(g: &Global) -> Result<RunManifest, CliError> {
    let (mut cfg, digest, seed) = resolved::<LearnConfig>(g)?;
    let fixed;
    let source: &dyn InstanceSource = match (&cfg.distribution, &mut cfg.instance) {
        (Some(d), None) => d,
        (None, Some(p)) => {
            *p = resolve(&g.config, p);
            fixed = FixedInstance(read_instance(p)?);
            &fixed
        }
        _ => {
            return Err(CliError::Config(
                "learn needs exactly one of `distribution` and `instance`".into(),
            ))
        }
    };
    let report = learning_experiment(source, &cfg.context, cfg.method, cfg.measure, &cfg.options)?;
    let mut out = Outputs::new(&g.out)?;
    out.write_report("learn-report", &report, Format::Json)?;
    out.write_csv("cost-table.csv", &report.cost_table())?;
    out.finish("learn", digest, seed)
}

/// Per-suite row of the CSV verify summary.
#[derive(Debug, Serialize)]
struct SuiteRow<'a> {
    suite: &'a str,
    status: SuiteStatus,
    draws_requested: usize,
    draws_accepted: usize,
    draws_rejected: usize,
    comparisons: usize,
    violations: usize,
    max_ratio: f64,
}

/// Returns the manifest and the number of violations found.
pub fn verify_cmd(g: &Global) -> Result<(RunManifest, usize), CliError> {
    let (cfg, digest, seed) = resolved::<VerifyConfigFile>(g)?;
    let report = verify(&cfg.0)?;
    let mut out = Outputs::new(&g.out)?;
    out.write_json("verify-report.json", &report)?;
    if g.format == Format::Csv {
        let rows: Vec<_> = report
            .suites
            .iter()
            .map(|s| SuiteRow {
                suite: s.suite.name(),
                status: s.status,
                draws_requested: s.draws_requested,
                draws_accepted: s.draws_accepted,
                draws_rejected: s.draws_rejected,
                comparisons: s.comparisons,
                violations: s.violations,
                max_ratio: s.max_ratio,
            })
            .collect();
        out.write_csv("verify-summary.csv", &rows)?;
    }
    for s in &report.suites {
        log::info!("{}: {:?}, {} violations", s.suite.name(), s.status, s.violations);
    }
    Ok((out.finish("verify", digest, seed)?, report.violations))
}
