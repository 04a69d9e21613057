//! Benchmark sweeps: a worker pool over (point, trial) jobs with results
//! merged by job index, CSV aggregation, and a seed manifest that makes every
//! run reproducible.

use std::error::Error;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use rearrange_core::{solve, validate_plan, SolveStatus, SolverConfig};
use serde::Serialize;

use crate::{generate, Family, ShapeArg};

/// Consecutive seeds tried per trial when the generator rejects one as
/// unpackable; also the stride between trial seed blocks.
const GEN_ATTEMPTS: u64 = 16;

pub struct BenchSpec {
    pub family: Family,
    pub shape: ShapeArg,
    pub ns: Vec<usize>,
    pub rhos: Vec<f64>,
    pub cfgs: Vec<String>,
    pub trials: usize,
    pub time_limit: f64,
    pub base_seed: u64,
}

impl BenchSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        family: Family,
        shape: ShapeArg,
        ns: Vec<usize>,
        rhos: Vec<f64>,
        cfgs: Vec<String>,
        trials: usize,
        time_limit: f64,
        base_seed: u64,
    ) -> Result<Self, String> {
        if trials < 1 {
            return Err("trials must be at least 1".into());
        }
        if !(time_limit > 0.0) {
            return Err("time limit must be positive".into());
        }
        if ns.is_empty() || rhos.is_empty() || cfgs.is_empty() {
            return Err("need at least one n, one rho, and one cfg".into());
        }
        for c in &cfgs {
            c.parse::<SolverConfig>().map_err(|e| format!("bad cfg {c:?}: {e}"))?;
        }
        Ok(BenchSpec { family, shape, ns, rhos, cfgs, trials, time_limit, base_seed })
    }
}

#[derive(Clone)]
struct TrialOutcome {
    solved: bool,
    time_s: f64,
    actions: usize,
    checks: u64,
}

#[derive(Clone)]
struct JobResult {
    /// Seed that produced the instance; None when every candidate failed.
    seed: Option<u64>,
    /// One outcome per configuration, in spec order.
    per_cfg: Vec<TrialOutcome>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    family: &'a str,
    shape: &'a str,
    ns: &'a [usize],
    rhos: &'a [f64],
    cfgs: &'a [String],
    trials: usize,
    time_limit: f64,
    base_seed: u64,
    points: Vec<PointManifest>,
}

#[derive(Serialize)]
struct PointManifest {
    n: usize,
    rho: f64,
    /// Instance seed per trial; null marks a generation failure.
    seeds: Vec<Option<u64>>,
}

fn worker_count() -> usize {
    std::env::var("REARRANGE_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |p| p.get()))
}

/// One trial: generate the instance (skipping unpackable seeds), then solve
/// it once per configuration with the instance seed as the solver seed.
fn run_job(spec: &BenchSpec, n: usize, rho: f64, job_id: usize) -> JobResult {
    let base = spec.base_seed + job_id as u64 * GEN_ATTEMPTS;
    let inst = (0..GEN_ATTEMPTS)
        .map(|k| (base + k, generate(spec.family, n, rho, spec.shape, base + k)))
        .find_map(|(s, r)| r.ok().map(|i| (s, i)));
    let Some((seed, inst)) = inst else {
        return JobResult { seed: None, per_cfg: Vec::new() };
    };
    let per_cfg = spec
        .cfgs
        .iter()
        .map(|cfg| {
            let mut config: SolverConfig = cfg.parse().expect("cfgs validated on entry");
            config.seed = seed;
            config.max_time = spec.time_limit;
            let out = solve(&inst, &config);
            let solved = out.status == SolveStatus::Solved;
            let actions = out.plan.as_ref().map_or(0, |p| {
                validate_plan(p, &inst).unwrap_or_else(|v| {
                    panic!("invalid plan from cfg {cfg} on seed {seed}: {v}")
                });
                p.len()
            });
            TrialOutcome {
                solved,
                time_s: out.stats.time_s,
                actions,
                checks: out.stats.collision_checks,
            }
        })
        .collect();
    JobResult { seed: Some(seed), per_cfg }
}

pub fn run(spec: &BenchSpec, out_csv: &Path) -> Result<(), Box<dyn Error>> {
    let points: Vec<(usize, f64)> = spec
        .ns
        .iter()
        .flat_map(|&n| spec.rhos.iter().map(move |&r| (n, r)))
        .collect();
    let jobs = points.len() * spec.trials;
    let results: Mutex<Vec<Option<JobResult>>> = Mutex::new(vec![None; jobs]);
    let next = AtomicUsize::new(0);
    thread::scope(|s| {
        for _ in 0..worker_count() {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs {
                    break;
                }
                let (n, rho) = points[i / spec.trials];
                let r = run_job(spec, n, rho, i);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    let results: Vec<JobResult> =
        results.into_inner().unwrap().into_iter().map(|r| r.unwrap()).collect();

    let mut csv = String::from("family,n,rho,cfg,success,mean_time,mean_actions_ratio,mean_checks\n");
    for (pi, &(n, rho)) in points.iter().enumerate() {
        let trials = &results[pi * spec.trials..(pi + 1) * spec.trials];
        for (ci, cfg) in spec.cfgs.iter().enumerate() {
            let solved: Vec<&TrialOutcome> = trials
                .iter()
                .filter(|t| t.seed.is_some())
                .map(|t| &t.per_cfg[ci])
                .filter(|o| o.solved)
                .collect();
            let rate = solved.len() as f64 / spec.trials as f64;
            let mean = |f: &dyn Fn(&TrialOutcome) -> f64| -> String {
                if solved.is_empty() {
                    String::new()
                } else {
                    format!("{:.4}", solved.iter().map(|o| f(o)).sum::<f64>() / solved.len() as f64)
                }
            };
            let row = format!(
                "{},{},{},{},{:.4},{},{},{}",
                spec.family.label(),
                n,
                rho,
                cfg,
                rate,
                mean(&|o| o.time_s),
                mean(&|o| o.actions as f64 / n as f64),
                mean(&|o| o.checks as f64),
            );
            println!("{row}");
            csv.push_str(&row);
            csv.push('\n');
        }
    }
    fs::write(out_csv, csv)?;

    let manifest = Manifest {
        family: spec.family.label(),
        shape: match spec.shape {
            ShapeArg::Disc => "disc",
            ShapeArg::Rect => "rect",
        },
        ns: &spec.ns,
        rhos: &spec.rhos,
        cfgs: &spec.cfgs,
        trials: spec.trials,
        time_limit: spec.time_limit,
        base_seed: spec.base_seed,
        points: points
            .iter()
            .enumerate()
            .map(|(pi, &(n, rho))| PointManifest {
                n,
                rho,
                seeds: results[pi * spec.trials..(pi + 1) * spec.trials]
                    .iter()
                    .map(|t| t.seed)
                    .collect(),
            })
            .collect(),
    };
    let manifest_path = out_csv.with_extension("manifest.json");
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    println!("wrote {} and {}", out_csv.display(), manifest_path.display());
    Ok(())
}
