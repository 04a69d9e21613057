//! Command-line front end: instance generation, solving, benchmarking, and
//! SVG rendering for tabletop rearrangement planning.

mod bench;
mod render;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rearrange_core::model::PlanViolation;
use rearrange_core::{
    gen_dense_small, gen_lattice, gen_random, solve, validate_plan, DependencyGraph,
    GenError, Instance, Plan, PlanFile, PlanStats, ShapeFamily, SolveStatus, SolverConfig,
    Workspace,
};

/// All generated instances live in the benchmark workspace.
const WORKSPACE_SIDE: f64 = 10.0;

#[derive(Parser)]
#[command(name = "rearrange", version, about = "Tabletop rearrangement planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    Random,
    Lattice,
    #[value(name = "dense-small")]
    DenseSmall,
}

impl Family {
    fn label(self) -> &'static str {
        match self {
            Family::Random => "random",
            Family::Lattice => "lattice",
            Family::DenseSmall => "dense-small",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ShapeArg {
    Disc,
    Rect,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen {
        /// Instance family.
        #[arg(long, value_enum, default_value_t = Family::Random)]
        family: Family,
        /// Number of objects (lattice uses the most-square rows x cols split).
        #[arg(long)]
        n: usize,
        /// Footprint density (random family only).
        #[arg(long, default_value_t = 0.3)]
        rho: f64,
        /// Object shape (random family only; others are discs).
        #[arg(long, value_enum, default_value_t = ShapeArg::Disc)]
        shape: ShapeArg,
        /// Generator seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output instance file (JSON).
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an instance file and write the plan.
    Solve {
        /// Instance file (JSON).
        #[arg(long)]
        instance: PathBuf,
        /// Solver configuration, e.g. RBM-SP-BST or TBM-OPT-ST-PP.
        #[arg(long, default_value = "RBM-SP-BST")]
        cfg: String,
        /// Solver seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Time limit in seconds.
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
        /// Output plan file (JSON); omit to only report.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the start dependency graph in DOT format.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Run a benchmark sweep and write a CSV plus a seed manifest.
    Bench {
        /// Instance family.
        #[arg(long, value_enum, default_value_t = Family::Random)]
        family: Family,
        /// Comma-separated object counts, e.g. 20,40,60.
        #[arg(long)]
        n: String,
        /// Comma-separated densities (random family only).
        #[arg(long, default_value = "0.3")]
        rho: String,
        /// Comma-separated solver configurations.
        #[arg(long, default_value = "RBM-SP-BST")]
        cfg: String,
        /// Object shape (random family only).
        #[arg(long, value_enum, default_value_t = ShapeArg::Disc)]
        shape: ShapeArg,
        /// Trials per benchmark point.
        #[arg(long, default_value_t = 30)]
        trials: usize,
        /// Time limit per solve in seconds.
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
        /// Base seed; trial seeds derive from it and land in the manifest.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path; the manifest lands next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a solved plan as tiled SVG frames.
    Render {
        /// Instance file (JSON).
        #[arg(long)]
        instance: PathBuf,
        /// Plan file (JSON).
        #[arg(long)]
        plan: PathBuf,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Command) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cmd {
        Command::Gen { family, n, rho, shape, seed, out } => {
            let inst = generate(family, n, rho, shape, seed)?;
            fs::write(&out, inst.to_json())?;
            println!(
                "wrote {} ({} objects, density {:.3}, family {})",
                out.display(),
                inst.n(),
                inst.density(),
                family.label()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve { instance, cfg, seed, time_limit, out, dot } => {
            let inst = Instance::from_json(&fs::read_to_string(&instance)?)?;
            if let Some(path) = dot {
                let counter = rearrange_core::CheckCounter::new();
                let g = DependencyGraph::build(&inst.start, &inst.goal, &inst, &counter);
                fs::write(&path, g.to_dot())?;
            }
            let mut config: SolverConfig = cfg.parse()?;
            config.seed = seed;
            config.max_time = time_limit;
            let outcome = solve(&inst, &config);
            match outcome.status {
                SolveStatus::Solved => {
                    let plan = outcome.plan.expect("solved outcome carries a plan");
                    validate_plan(&plan, &inst).map_err(|v: PlanViolation| v.to_string())?;
                    println!(
                        "solved: {} actions in {:.3}s ({} collision checks)",
                        plan.len(),
                        outcome.stats.time_s,
                        outcome.stats.collision_checks
                    );
                    if let Some(path) = out {
                        let file = PlanFile {
                            actions: plan.actions.clone(),
                            stats: PlanStats {
                                actions: plan.len(),
                                time_s: outcome.stats.time_s,
                                collision_checks: outcome.stats.collision_checks,
                            },
                        };
                        fs::write(&path, file.to_json())?;
                        println!("wrote {}", path.display());
                    }
                    Ok(ExitCode::SUCCESS)
                }
                SolveStatus::Timeout => {
                    println!(
                        "timeout after {:.3}s ({} collision checks)",
                        outcome.stats.time_s, outcome.stats.collision_checks
                    );
                    Ok(ExitCode::from(2))
                }
            }
        }
        Command::Bench { family, n, rho, cfg, shape, trials, time_limit, seed, out } => {
            let spec = bench::BenchSpec::new(
                family,
                shape,
                parse_list(&n)?,
                parse_list(&rho)?,
                cfg.split(',').map(str::to_owned).collect(),
                trials,
                time_limit,
                seed,
            )?;
            bench::run(&spec, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Render { instance, plan, out } => {
            let inst = Instance::from_json(&fs::read_to_string(&instance)?)?;
            let file = PlanFile::from_json(&fs::read_to_string(&plan)?)?;
            let plan = Plan { actions: file.actions };
            validate_plan(&plan, &inst).map_err(|v| v.to_string())?;
            let svg = render::render_svg(&inst, &plan);
            fs::write(&out, svg)?;
            println!("wrote {} ({} frames)", out.display(), plan.len() + 1);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn shape_family(shape: ShapeArg) -> ShapeFamily {
    match shape {
        ShapeArg::Disc => ShapeFamily::Disc,
        ShapeArg::Rect => ShapeFamily::Rect,
    }
}

/// Rows x cols with rows * cols = n and the difference minimized.
fn square_split(n: usize) -> (usize, usize) {
    let mut rows = (n as f64).sqrt() as usize;
    while rows > 1 && n % rows != 0 {
        rows -= 1;
    }
    (rows.max(1), n / rows.max(1))
}

fn generate(
    family: Family,
    n: usize,
    rho: f64,
    shape: ShapeArg,
    seed: u64,
) -> Result<Instance, GenError> {
    let ws = Workspace::new(WORKSPACE_SIDE, WORKSPACE_SIDE);
    match family {
        Family::Random => gen_random(n, rho, shape_family(shape), ws, seed),
        Family::Lattice => {
            let (rows, cols) = square_split(n);
            gen_lattice(rows, cols, ws, seed)
        }
        Family::DenseSmall => gen_dense_small(n, ws, seed),
    }
}

fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|e| format!("bad list item {t:?}: {e}")))
        .collect()
}
