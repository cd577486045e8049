//! Experiment runner behind the `bfo-qap` command line.
//!
//! Loads instances, runs seeded replicate batches ("eras") of one solver,
//! writes the CSV report, per-run traces and front files, and checks the
//! results against a known optimum or a reference front.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bfo_qap::io::{self, FrontPoint, Instance, ReportRow};
use bfo_qap::mobfo::{mbfo_baseline_solve, MobfoReport};
use bfo_qap::pareto::BRUTE_FORCE_LIMIT;
use bfo_qap::{
    bfo_baseline_solve, bfo_solve, brute_force_front, fast_nondominated_sort,
    generational_distance, mobfo_solve, BfoConfig, Cost, MobfoConfig, MqapInstance, MutationKind,
    ObjectiveVector, ParetoArchive, QapInstance, RunReport,
};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Instance {
        path: PathBuf,
        #[source]
        source: bfo_qap::Error,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Solver(#[from] bfo_qap::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl BenchError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Bfo,
    BfoBaseline,
    Mobfo,
    MobfoBaseline,
}

impl SolverKind {
    pub fn is_multiobjective(self) -> bool {
        matches!(self, SolverKind::Mobfo | SolverKind::MobfoBaseline)
    }

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Bfo => "bfo",
            SolverKind::BfoBaseline => "bfo-baseline",
            SolverKind::Mobfo => "mobfo",
            SolverKind::MobfoBaseline => "mobfo-baseline",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bfo" => Ok(SolverKind::Bfo),
            "bfo-baseline" => Ok(SolverKind::BfoBaseline),
            "mobfo" => Ok(SolverKind::Mobfo),
            "mobfo-baseline" => Ok(SolverKind::MobfoBaseline),
            other => Err(BenchError::Config(format!("unknown solver '{other}'"))),
        }
    }
}

/// Parameter overrides; unset fields keep the solver defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub population: Option<usize>,
    pub chemotactic_steps: Option<usize>,
    pub reproduction_steps: Option<usize>,
    pub elimination_steps: Option<usize>,
    pub dispersal_prob: Option<f64>,
    pub mutation: Option<MutationKind>,
    pub eras: Option<usize>,
    pub seed: Option<u64>,
    pub tabu_iters: Option<usize>,
    pub pls_budget: Option<u64>,
}

impl Overrides {
    /// Parses a flat `key=value` config file. Keys: S, Nc, Nre, Ned, Ped,
    /// era, seed, mutation, tabu_iters, pls_budget. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut o = Overrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                BenchError::Config(format!(
                    "line {}: expected key=value, got '{line}'",
                    lineno + 1
                ))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| {
                BenchError::Config(format!("line {}: invalid {what} '{value}'", lineno + 1))
            };
            match key {
                "S" => o.population = Some(value.parse().map_err(|_| bad("S"))?),
                "Nc" => o.chemotactic_steps = Some(value.parse().map_err(|_| bad("Nc"))?),
                "Nre" => o.reproduction_steps = Some(value.parse().map_err(|_| bad("Nre"))?),
                "Ned" => o.elimination_steps = Some(value.parse().map_err(|_| bad("Ned"))?),
                "Ped" => o.dispersal_prob = Some(value.parse().map_err(|_| bad("Ped"))?),
                "era" | "eras" => o.eras = Some(value.parse().map_err(|_| bad("era"))?),
                "seed" => o.seed = Some(value.parse().map_err(|_| bad("seed"))?),
                "mutation" => o.mutation = Some(value.parse().map_err(|_| bad("mutation"))?),
                "tabu_iters" => o.tabu_iters = Some(value.parse().map_err(|_| bad("tabu_iters"))?),
                "pls_budget" => o.pls_budget = Some(value.parse().map_err(|_| bad("pls_budget"))?),
                other => {
                    return Err(BenchError::Config(format!(
                        "line {}: unknown key '{other}'",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(o)
    }

    /// Fields set in `other` win.
    pub fn merged_with(&self, other: &Overrides) -> Overrides {
        Overrides {
            population: other.population.or(self.population),
            chemotactic_steps: other.chemotactic_steps.or(self.chemotactic_steps),
            reproduction_steps: other.reproduction_steps.or(self.reproduction_steps),
            elimination_steps: other.elimination_steps.or(self.elimination_steps),
            dispersal_prob: other.dispersal_prob.or(self.dispersal_prob),
            mutation: other.mutation.or(self.mutation),
            eras: other.eras.or(self.eras),
            seed: other.seed.or(self.seed),
            tabu_iters: other.tabu_iters.or(self.tabu_iters),
            pls_budget: other.pls_budget.or(self.pls_budget),
        }
    }

    pub fn bfo_config(&self) -> BfoConfig {
        let d = BfoConfig::default();
        BfoConfig {
            population: self.population.unwrap_or(d.population),
            chemotactic_steps: self.chemotactic_steps.unwrap_or(d.chemotactic_steps),
            reproduction_steps: self.reproduction_steps.unwrap_or(d.reproduction_steps),
            elimination_steps: self.elimination_steps.unwrap_or(d.elimination_steps),
            dispersal_prob: self.dispersal_prob.unwrap_or(d.dispersal_prob),
            mutation: self.mutation.unwrap_or(d.mutation),
            eras: self.eras.unwrap_or(d.eras),
            seed: self.seed.unwrap_or(d.seed),
            tabu_iters: self.tabu_iters,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verification {
    Optimum(Cost),
    ReferenceFront(PathBuf),
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub instances: Vec<PathBuf>,
    pub solver: SolverKind,
    pub overrides: Overrides,
    pub out_dir: PathBuf,
    pub verify: Option<Verification>,
    /// Worker threads for concurrent eras; 0 lets rayon decide.
    pub jobs: usize,
    /// Write `wall_ms = 0` so reruns produce byte-identical reports.
    pub no_timing: bool,
}

/// Per-instance result of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSummary {
    Single {
        name: String,
        best_costs: Vec<Cost>,
        verified: Option<bool>,
    },
    Multi {
        name: String,
        /// GD of each run against the reference (or merged) front.
        gd: Vec<f64>,
        merged_gd: f64,
        relative: bool,
        merged_size: usize,
        verified: Option<bool>,
    },
}

impl InstanceSummary {
    pub fn verified(&self) -> Option<bool> {
        match self {
            InstanceSummary::Single { verified, .. } | InstanceSummary::Multi { verified, .. } => {
                *verified
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub summaries: Vec<InstanceSummary>,
    pub table: String,
}

impl Outcome {
    /// False iff some supplied verification target was missed.
    pub fn passed(&self) -> bool {
        self.summaries.iter().all(|s| s.verified() != Some(false))
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mu = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - mu) * (x - mu)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

fn instance_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| BenchError::io(path, e))
}

pub fn load(path: &Path) -> Result<Instance> {
    io::load_instance(path)
        .map(|(_, inst)| inst)
        .map_err(|source| BenchError::Instance {
            path: path.to_path_buf(),
            source,
        })
}

pub fn load_reference(path: &Path, m: usize) -> Result<Vec<ObjectiveVector>> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    let points = io::read_front(&text, m).map_err(|source| BenchError::Instance {
        path: path.to_path_buf(),
        source,
    })?;
    if points.is_empty() {
        return Err(BenchError::Config(format!(
            "{}: reference front is empty",
            path.display()
        )));
    }
    Ok(points
        .into_iter()
        .map(|p: FrontPoint| p.objectives)
        .collect())
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| BenchError::Config(format!("cannot start worker pool: {e}")))
}

pub fn run_single_eras(
    instance: &QapInstance,
    config: &BfoConfig,
    solver: SolverKind,
    pool: &rayon::ThreadPool,
) -> Result<Vec<RunReport>> {
    pool.install(|| {
        (0..config.eras)
            .into_par_iter()
            .map(|era| {
                let cfg = config.for_era(era);
                match solver {
                    SolverKind::BfoBaseline => bfo_baseline_solve(instance, &cfg),
                    _ => bfo_solve(instance, &cfg),
                }
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(BenchError::from)
    })
}

pub fn run_multi_eras(
    instance: &MqapInstance,
    config: &MobfoConfig,
    solver: SolverKind,
    pool: &rayon::ThreadPool,
) -> Result<Vec<(ParetoArchive, MobfoReport)>> {
    pool.install(|| {
        (0..config.base.eras)
            .into_par_iter()
            .map(|era| {
                let cfg = config.for_era(era);
                match solver {
                    SolverKind::MobfoBaseline => mbfo_baseline_solve(instance, &cfg),
                    _ => mobfo_solve(instance, &cfg),
                }
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(BenchError::from)
    })
}

/// Runs every instance and writes all report files. Every input is loaded
/// and validated before the first run starts.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Outcome> {
    if spec.instances.is_empty() {
        return Err(BenchError::Config("no instances given".into()));
    }
    let base = spec.overrides.bfo_config();
    base.validate()?;

    let mut loaded = Vec::new();
    for path in &spec.instances {
        let inst = load(path)?;
        match (&inst, spec.solver.is_multiobjective()) {
            (Instance::Single(_), true) => {
                return Err(BenchError::Config(format!(
                    "{}: solver {} needs an mQAP instance",
                    path.display(),
                    spec.solver
                )))
            }
            (Instance::Multi(_), false) => {
                return Err(BenchError::Config(format!(
                    "{}: solver {} needs a single-objective instance",
                    path.display(),
                    spec.solver
                )))
            }
            _ => {}
        }
        loaded.push((path.clone(), inst));
    }
    let reference = match &spec.verify {
        Some(Verification::ReferenceFront(p)) => {
            if !spec.solver.is_multiobjective() {
                return Err(BenchError::Config(
                    "--reference-front applies to multiobjective solvers".into(),
                ));
            }
            let m = match &loaded[0].1 {
                Instance::Multi(i) => i.m(),
                Instance::Single(_) => unreachable!("checked above"),
            };
            Some(load_reference(p, m)?)
        }
        Some(Verification::Optimum(_)) if spec.solver.is_multiobjective() => {
            return Err(BenchError::Config(
                "--verify-optimum applies to single-objective solvers".into(),
            ))
        }
        _ => None,
    };
    fs::create_dir_all(&spec.out_dir).map_err(|e| BenchError::io(&spec.out_dir, e))?;

    let pool = thread_pool(spec.jobs)?;
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (path, inst) in &loaded {
        let name = instance_name(path);
        let summary = match inst {
            Instance::Single(qap) => {
                let reports = run_single_eras(qap, &base, spec.solver, &pool)?;
                for (run, r) in reports.iter().enumerate() {
                    rows.push(ReportRow {
                        instance: name.clone(),
                        run,
                        seed: r.seed,
                        best_cost: Some(r.best_cost),
                        evals: r.evaluations.total(),
                        wall_ms: if spec.no_timing {
                            0
                        } else {
                            r.wall_time.as_millis()
                        },
                    });
                    let mut trace = String::new();
                    for (e, c) in &r.trace {
                        let _ = writeln!(trace, "{e} {c}");
                    }
                    write_file(
                        &spec
                            .out_dir
                            .join(format!("{name}.{}.run{run}.trace", spec.solver)),
                        trace.as_bytes(),
                    )?;
                }
                let best_costs: Vec<Cost> = reports.iter().map(|r| r.best_cost).collect();
                let verified = match spec.verify {
                    Some(Verification::Optimum(target)) => {
                        Some(best_costs.iter().min() == Some(&target))
                    }
                    _ => None,
                };
                InstanceSummary::Single {
                    name,
                    best_costs,
                    verified,
                }
            }
            Instance::Multi(mqap) => {
                let mut cfg = MobfoConfig::new(base.clone(), mqap.m());
                cfg.pls_budget = spec.overrides.pls_budget;
                let runs = run_multi_eras(mqap, &cfg, spec.solver, &pool)?;
                let mut merged = ParetoArchive::new(mqap.m());
                for (run, (archive, report)) in runs.iter().enumerate() {
                    rows.push(ReportRow {
                        instance: name.clone(),
                        run,
                        seed: report.seed,
                        best_cost: None,
                        evals: report.evaluations.total(),
                        wall_ms: if spec.no_timing {
                            0
                        } else {
                            report.wall_time.as_millis()
                        },
                    });
                    write_file(
                        &spec
                            .out_dir
                            .join(format!("{name}.{}.run{run}.front", spec.solver)),
                        io::front_to_string(archive)?.as_bytes(),
                    )?;
                    let mut trace = String::new();
                    for (e, size) in &report.trace {
                        let _ = writeln!(trace, "{e} {size}");
                    }
                    write_file(
                        &spec
                            .out_dir
                            .join(format!("{name}.{}.run{run}.trace", spec.solver)),
                        trace.as_bytes(),
                    )?;
                    merged.absorb(archive)?;
                }
                let merged_path = spec.out_dir.join(format!("{name}.{}.front", spec.solver));
                write_file(&merged_path, io::front_to_string(&merged)?.as_bytes())?;

                let (reference_set, relative) = match &reference {
                    Some(r) => (r.clone(), false),
                    None => (relative_reference(&spec.out_dir, &name, &merged)?, true),
                };
                let gd = runs
                    .iter()
                    .map(|(a, _)| generational_distance(&a.objective_set(), &reference_set))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                let merged_gd = generational_distance(&merged.objective_set(), &reference_set)?;
                let verified = reference
                    .as_ref()
                    .map(|_| gd.iter().cloned().fold(f64::INFINITY, f64::min) == 0.0);
                InstanceSummary::Multi {
                    name,
                    gd,
                    merged_gd,
                    relative,
                    merged_size: merged.len(),
                    verified,
                }
            }
        };
        summaries.push(summary);
    }

    let report_path = spec.out_dir.join("report.csv");
    let mut csv = Vec::new();
    io::write_report(&rows, &mut csv)?;
    write_file(&report_path, &csv)?;

    let table = summary_table(spec.solver, &summaries);
    write_file(
        &spec.out_dir.join(format!("summary.{}.txt", spec.solver)),
        table.as_bytes(),
    )?;
    Ok(Outcome { summaries, table })
}

/// Merged nondominated set of every `<name>.<solver>.front` file in `dir`
/// plus `current`; the stand-in reference when the true front is unknown.
fn relative_reference(
    dir: &Path,
    name: &str,
    current: &ParetoArchive,
) -> Result<Vec<ObjectiveVector>> {
    let mut pooled = current.objective_set();
    let prefix = format!("{name}.");
    let entries = fs::read_dir(dir).map_err(|e| BenchError::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let file = p
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default();
            file.starts_with(&prefix) && file.ends_with(".front") && !file.contains(".run")
        })
        .collect();
    paths.sort();
    for p in paths {
        pooled.extend(load_reference(&p, current.objective_count())?);
    }
    let ranks = fast_nondominated_sort(&pooled)?;
    let mut front: Vec<ObjectiveVector> = pooled
        .into_iter()
        .zip(ranks)
        .filter(|(_, r)| *r == 0)
        .map(|(v, _)| v)
        .collect();
    front.sort();
    front.dedup();
    Ok(front)
}

fn summary_table(solver: SolverKind, summaries: &[InstanceSummary]) -> String {
    let mut out = String::new();
    if !solver.is_multiobjective() {
        let _ = writeln!(
            out,
            "{:<16} {:>5} {:>14} {:>16} {:>14}  status",
            "instance", "runs", "best", "mean", "sd"
        );
    } else {
        let _ = writeln!(
            out,
            "{:<16} {:>5} {:>12} {:>12} {:>12} {:>6}  status",
            "instance", "runs", "best GD", "mean GD", "merged GD", "|front|"
        );
    }
    for s in summaries {
        let status = match s.verified() {
            Some(true) => "verified",
            Some(false) => "MISSED",
            None => "-",
        };
        match s {
            InstanceSummary::Single {
                name, best_costs, ..
            } => {
                let xs: Vec<f64> = best_costs.iter().map(|&c| c as f64).collect();
                let _ = writeln!(
                    out,
                    "{:<16} {:>5} {:>14} {:>16.3} {:>14.3}  {}",
                    name,
                    best_costs.len(),
                    best_costs.iter().min().copied().unwrap_or_default(),
                    mean(&xs),
                    sample_sd(&xs),
                    status
                );
            }
            InstanceSummary::Multi {
                name,
                gd,
                merged_gd,
                relative,
                merged_size,
                ..
            } => {
                let best = gd.iter().cloned().fold(f64::INFINITY, f64::min);
                let _ = writeln!(
                    out,
                    "{:<16} {:>5} {:>12.4e} {:>12.4e} {:>12.4e} {:>6}  {}{}",
                    name,
                    gd.len(),
                    best,
                    mean(gd),
                    merged_gd,
                    merged_size,
                    status,
                    if *relative {
                        " (GD relative to merged front)"
                    } else {
                        ""
                    }
                );
            }
        }
    }
    out
}

/// Writes the exact Pareto front of an mQAP instance with `n <= 11`.
pub fn make_reference_front(instance: &Path, out: &Path) -> Result<ParetoArchive> {
    let mqap = match load(instance)? {
        Instance::Multi(m) => m,
        Instance::Single(_) => {
            return Err(BenchError::Config(format!(
                "{}: reference fronts need an mQAP instance",
                instance.display()
            )))
        }
    };
    if mqap.n() > BRUTE_FORCE_LIMIT {
        return Err(BenchError::Config(format!(
            "{}: n = {} exceeds the exhaustive enumeration limit of {}",
            instance.display(),
            mqap.n(),
            BRUTE_FORCE_LIMIT
        )));
    }
    let front = brute_force_front(&mqap)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    }
    write_file(out, io::front_to_string(&front)?.as_bytes())?;
    Ok(front)
}
