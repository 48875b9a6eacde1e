//! Command-line harness: instance generation, complete-front computation,
//! solver runs with trace capture, and metric reports over the traces.
//!
//! Exit codes: 0 success, 1 usage, 2 i/o or schema errors, 3 solver failure.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use moco_core::engine::{self, Budget, RunOutput, RunStatus};
use moco_core::problems::{self, ProblemClass, ProblemError, ProblemInstance};

#[derive(Parser)]
#[command(
    name = "moco",
    version,
    about = "Exact anytime Pareto front enumeration"
)]
struct Cli {
    /// Base seed for all randomized generation.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Suppress wall-clock timestamps in outputs so identical configurations
    /// produce byte-identical files.
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Kp,
    Ap,
    Ilp,
}

impl From<ClassArg> for ProblemClass {
    fn from(c: ClassArg) -> ProblemClass {
        match c {
            ClassArg::Kp => ProblemClass::Kp,
            ClassArg::Ap => ProblemClass::Ap,
            ClassArg::Ilp => ProblemClass::Ilp,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FrontMethod {
    /// Brute-force enumeration of the feasible set.
    Oracle,
    /// Complete unbudgeted search run.
    Solver,
    /// Both; they must agree exactly.
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    Tpa,
    Fullsplit,
}

impl Algorithm {
    fn name(self) -> &'static str {
        match self {
            Algorithm::Tpa => "tpa",
            Algorithm::Fullsplit => "fullsplit",
        }
    }

    fn run(self, inst: &ProblemInstance, budget: Budget) -> Result<RunOutput, engine::EngineError> {
        match self {
            Algorithm::Tpa => engine::run_tpa(inst, budget),
            Algorithm::Fullsplit => engine::run_fullsplit(inst, budget),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate benchmark instances (seeds seed, seed+1, ..).
    Gen {
        #[arg(long)]
        class: ClassArg,
        /// Number of objectives.
        #[arg(long)]
        p: usize,
        /// Number of items/agents/variables.
        #[arg(long)]
        n: usize,
        /// Number of constraints (ILP class only).
        #[arg(long)]
        m: Option<usize>,
        /// How many instances to write.
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Compute complete Pareto fronts and write front files.
    Front {
        #[arg(required = true)]
        instances: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = FrontMethod::Oracle)]
        method: FrontMethod,
    },
    /// Run a search algorithm, writing one trace CSV and one archive front
    /// per repetition.
    Solve {
        #[arg(required = true)]
        instances: Vec<PathBuf>,
        #[arg(long, value_enum)]
        algorithm: Algorithm,
        /// Wall-clock budget in milliseconds.
        #[arg(long, conflicts_with = "budget_iters")]
        budget_ms: Option<u64>,
        /// Deterministic budget: stop after this many successful solver
        /// iterations (points found).
        #[arg(long)]
        budget_iters: Option<u64>,
        #[arg(long, default_value_t = 1)]
        reps: u32,
    },
    /// Evaluate traces against complete fronts at time cut points and write
    /// the metric report, rank summary and plot series.
    Report {
        /// Directory holding *.trace.csv files from `solve`.
        #[arg(long)]
        traces: PathBuf,
        /// Directory holding *.front.json files from `front`.
        #[arg(long)]
        fronts: PathBuf,
        /// Cut points in milliseconds.
        #[arg(long, value_delimiter = ',', required = true)]
        cuts: Vec<u64>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Solver(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Solver(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<ProblemError> for CliError {
    fn from(e: ProblemError) -> CliError {
        match e {
            ProblemError::Solver(inner) => CliError::Solver(inner.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<engine::EngineError> for CliError {
    fn from(e: engine::EngineError) -> CliError {
        match e {
            engine::EngineError::Problem(inner) => inner.into(),
            engine::EngineError::Geometry(inner) => CliError::Data(inner.to_string()),
            engine::EngineError::ArchiveViolation(m) => CliError::Solver(m),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own rich message; the exit code is ours.
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    std::fs::create_dir_all(&cli.out)?;
    match cli.command {
        Command::Gen {
            class,
            p,
            n,
            m,
            count,
        } => cmd_gen(&cli, class.into(), p, n, m, count),
        Command::Front {
            ref instances,
            method,
        } => cmd_front(&cli, instances, method),
        Command::Solve {
            ref instances,
            algorithm,
            budget_ms,
            budget_iters,
            reps,
        } => {
            let budget = match (budget_ms, budget_iters) {
                (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
                (Some(ms), None) => Budget::Wall(Duration::from_millis(ms)),
                (None, Some(iters)) => Budget::Points(iters),
                (None, None) => Budget::Unlimited,
            };
            cmd_solve(&cli, instances, algorithm, budget, reps)
        }
        Command::Report {
            ref traces,
            ref fronts,
            ref cuts,
        } => report::cmd_report(&cli.out, traces, fronts, cuts),
    }
}

fn cmd_gen(
    cli: &Cli,
    class: ProblemClass,
    p: usize,
    n: usize,
    m: Option<usize>,
    count: usize,
) -> Result<(), CliError> {
    for i in 0..count {
        let seed = cli.seed + i as u64;
        let inst =
            problems::generate(class, p, n, m, seed).map_err(|e| CliError::Usage(e.to_string()))?;
        let path = cli.out.join(format!("{}.json", inst.name));
        problems::save_instance(&inst, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn load_checked(path: &Path) -> Result<ProblemInstance, CliError> {
    let inst = problems::load_instance(path)?;
    inst.check_feasible()?;
    Ok(inst)
}

fn cmd_front(cli: &Cli, instances: &[PathBuf], method: FrontMethod) -> Result<(), CliError> {
    for path in instances {
        let inst = load_checked(path)?;
        let oracle = match method {
            FrontMethod::Oracle | FrontMethod::Both => Some(problems::brute_force_front(&inst)?),
            FrontMethod::Solver => None,
        };
        let solver = match method {
            FrontMethod::Solver | FrontMethod::Both => {
                let run = engine::run_tpa(&inst, Budget::Unlimited)?;
                if run.status != RunStatus::Finished {
                    return Err(CliError::Solver(format!(
                        "{}: run ended with {:?} instead of finishing",
                        inst.name, run.status
                    )));
                }
                Some(run.front(&inst.name, inst.p)?)
            }
            FrontMethod::Oracle => None,
        };
        let mut front = match (&oracle, solver) {
            (Some(a), Some(b)) => {
                if a.points != b.points {
                    return Err(CliError::Solver(format!(
                        "{}: oracle and solver fronts disagree ({} vs {} points)",
                        inst.name,
                        a.points.len(),
                        b.points.len()
                    )));
                }
                b
            }
            (Some(_), None) => oracle.unwrap(),
            (None, Some(b)) => b,
            (None, None) => unreachable!(),
        };
        if front.points.len() == 1 {
            eprintln!(
                "warning: {} has a single nondominated point; a single-objective solve would do",
                inst.name
            );
        }
        // Reference fronts are written without anti-images so that every
        // method produces the identical file.
        front.solutions = None;
        let out = cli.out.join(format!("{}.front.json", inst.name));
        problems::save_front(&front, &out)?;
        println!("wrote {} ({} points)", out.display(), front.points.len());
    }
    Ok(())
}

fn cmd_solve(
    cli: &Cli,
    instances: &[PathBuf],
    algorithm: Algorithm,
    budget: Budget,
    reps: u32,
) -> Result<(), CliError> {
    if reps < 1 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let mut failures = Vec::new();
    for path in instances {
        let inst = load_checked(path)?;
        for rep in 0..reps {
            let run = algorithm.run(&inst, budget)?;
            let stem = format!("{}__{}__rep{}", inst.name, algorithm.name(), rep);
            let trace_path = cli.out.join(format!("{stem}.trace.csv"));
            let file = std::fs::File::create(&trace_path)?;
            engine::write_trace_csv(
                std::io::BufWriter::new(file),
                inst.p,
                &run.trace,
                cli.deterministic,
            )
            .map_err(|e| CliError::Data(e.to_string()))?;
            let front = run.front(&inst.name, inst.p)?;
            let front_path = cli.out.join(format!("{stem}.archive.json"));
            problems::save_front(&front, &front_path)?;
            println!(
                "wrote {} and {} ({} points, {} solves)",
                trace_path.display(),
                front_path.display(),
                run.archive.len(),
                run.solver_calls
            );
            if let RunStatus::Aborted(msg) = &run.status {
                failures.push(format!("{}: {msg}", inst.name));
            }
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Solver(failures.join("; ")))
    }
}
