//! The `gebp` command line. Exit codes: 0 success, 1 verify mismatch,
//! 2 parse or validation error, 3 budget exceeded.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use super::bench::{instance_paths, run_bench, summarize, write_csv};
use super::files::{
    parse_epsilon, write_text, FileError, InstanceFile, OpenedRecord, SolutionFile, TypedInstanceFile,
    VariantSolutionFile,
};
use super::gen::{generate, GenClass, Generated};
use super::{run_algo, Algo, RunError};
use crate::baselines::DEFAULT_BRUTE_BUDGET;
use crate::model::{solution_cost, Epsilon};
use crate::rational::{format_rational, parse_rational};
use crate::variant::{prc_solve, typed_cost, BpucMode, OpenedMachine, VariantError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

const DEFAULT_EPSILON: &str = "1/2";

#[derive(Parser, Debug)]
#[command(name = "gebp", version, about = "Bin packing with overtime: exact cost model, approximation scheme and baselines")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantMode {
    Exact,
    Greedy,
}

impl From<VariantMode> for BpucMode {
    fn from(m: VariantMode) -> Self {
        match m {
            VariantMode::Exact => BpucMode::Exact,
            VariantMode::Greedy => BpucMode::Greedy,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Assign the jobs of an instance file to its machines.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Eptas)]
        algo: Algo,
        /// Accuracy 1/E; overrides the file's value (default 1/2).
        #[arg(long)]
        epsilon: Option<String>,
        /// Solution file; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Node limit for the exhaustive search.
        #[arg(long, default_value_t = DEFAULT_BRUTE_BUDGET)]
        budget: u64,
    },
    /// Open machines of given types for the jobs of a typed instance file.
    Variant {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = VariantMode::Exact)]
        mode: VariantMode,
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a seeded random instance.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        n: usize,
        /// Machines, or machine types for `--class typed`.
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, value_enum, default_value_t = GenClass::General)]
        class: GenClass,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run algorithms over every `*.json` instance in a directory.
    Bench {
        dir: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Algo::Eptas, Algo::Lpt])]
        algos: Vec<Algo>,
        #[arg(long, default_value = DEFAULT_EPSILON)]
        epsilon: String,
        /// CSV output; printed to stdout when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Ratio bound for the summary line, e.g. `5/4`.
        #[arg(long)]
        bound: Option<String>,
        #[arg(long, default_value_t = DEFAULT_BRUTE_BUDGET)]
        budget: u64,
    },
    /// Recompute the cost of a solution file and compare it exactly.
    Verify { instance: PathBuf, solution: PathBuf },
}

struct Failure {
    code: i32,
    message: String,
}

impl From<FileError> for Failure {
    fn from(e: FileError) -> Self {
        Failure { code: EXIT_INPUT, message: e.to_string() }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        let code = match e {
            RunError::Budget(_) => EXIT_BUDGET,
            RunError::Failed(_) => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<VariantError> for Failure {
    fn from(e: VariantError) -> Self {
        let code = match e {
            VariantError::Budget { .. } => EXIT_BUDGET,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INPUT, message: message.into() }
}

fn choose_epsilon(flag: Option<&str>, file: Option<Epsilon>) -> Result<Epsilon, FileError> {
    match (flag, file) {
        (Some(text), _) => parse_epsilon(text),
        (None, Some(e)) => Ok(e),
        (None, None) => parse_epsilon(DEFAULT_EPSILON),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), FileError> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solve(instance: &Path, algo: Algo, epsilon: Option<&str>, out: Option<&Path>, budget: u64) -> Result<i32, Failure> {
    let file = InstanceFile::read(instance)?;
    let inst = file.to_instance()?;
    let eps = choose_epsilon(epsilon, file.epsilon()?)?;
    let run = run_algo(&inst, algo, eps, budget)?;
    let solution = SolutionFile {
        assignment: run.assignment.target,
        cost: run.cost,
        audit: run.audit,
    };
    emit(out, &solution.to_json())?;
    if out.is_some() {
        println!("{algo} cost={}", format_rational(&solution.cost));
    }
    Ok(EXIT_OK)
}

fn variant(instance: &Path, mode: VariantMode, epsilon: Option<&str>, out: Option<&Path>) -> Result<i32, Failure> {
    let file = TypedInstanceFile::read(instance)?;
    let typed = file.to_typed()?;
    let eps = choose_epsilon(epsilon, file.epsilon()?)?;
    let sol = prc_solve(&typed, eps, mode.into())?;
    let mut opened_per_type = vec![0; typed.types.len()];
    for m in &sol.machines {
        opened_per_type[m.type_index] += 1;
    }
    let record = VariantSolutionFile {
        machines: sol
            .machines
            .iter()
            .map(|m| OpenedRecord { type_index: m.type_index, jobs: m.jobs.clone(), dedicated: m.dedicated })
            .collect(),
        opened_per_type,
        cost: sol.cost.clone(),
        audit: serde_json::json!({
            "mode": format!("{mode:?}").to_lowercase(),
            "epsilon": eps.to_string(),
            "normalized_cost": format_rational(&sol.normalized_cost),
            "bpuc_cost": format_rational(&sol.bpuc_cost),
        }),
    };
    emit(out, &record.to_json())?;
    if out.is_some() {
        println!("variant cost={}", format_rational(&record.cost));
    }
    Ok(EXIT_OK)
}

fn gen(seed: u64, n: usize, m: usize, class: GenClass, out: Option<&Path>) -> Result<i32, Failure> {
    let text = match generate(seed, n, m, class) {
        Generated::Instance(i) => InstanceFile::from_instance(&i, None).to_json(),
        Generated::Typed(t) => TypedInstanceFile::from_typed(&t, None).to_json(),
    };
    emit(out, &text)?;
    Ok(EXIT_OK)
}

fn bench(dir: &Path, algos: &[Algo], epsilon: &str, csv: Option<&Path>, bound: Option<&str>, budget: u64) -> Result<i32, Failure> {
    let eps = parse_epsilon(epsilon)?;
    let bound = bound
        .map(|b| parse_rational(b).map_err(|e| input_error(format!("invalid bound `{b}`: {e}"))))
        .transpose()?;
    let paths = instance_paths(dir)?;
    let rows = run_bench(&paths, algos, eps, budget);
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).map_err(|e| input_error(e.to_string()))?;
    let text = String::from_utf8(buf).expect("csv is utf-8");
    match csv {
        Some(p) => write_text(p, &text)?,
        None => print!("{text}"),
    }
    let summary = summarize(&rows, bound.as_ref());
    eprintln!("{}", summary.line());
    if !rows.is_empty() && summary.failed == rows.len() {
        return Ok(EXIT_INPUT);
    }
    Ok(EXIT_OK)
}

fn verify(instance: &Path, solution: &Path) -> Result<i32, Failure> {
    let text = std::fs::read_to_string(instance).map_err(|e| FileError::Io {
        path: instance.display().to_string(),
        message: e.to_string(),
    })?;
    let sol_text = std::fs::read_to_string(solution).map_err(|e| FileError::Io {
        path: solution.display().to_string(),
        message: e.to_string(),
    })?;
    let (stated, recomputed) = if let Ok(file) = InstanceFile::parse(&text) {
        let inst = file.to_instance()?;
        let sol = SolutionFile::parse(&sol_text)?;
        let recomputed = solution_cost(&inst, &sol.assignment()).map_err(|e| Failure {
            code: EXIT_MISMATCH,
            message: format!("assignment rejected: {e}"),
        })?;
        (sol.cost, recomputed)
    } else {
        let typed = TypedInstanceFile::parse(&text)?.to_typed()?;
        let sol = VariantSolutionFile::parse(&sol_text)?;
        let machines: Vec<OpenedMachine> = sol
            .machines
            .iter()
            .map(|m| OpenedMachine { type_index: m.type_index, jobs: m.jobs.clone(), dedicated: m.dedicated })
            .collect();
        let mut seen = vec![0usize; typed.jobs.len()];
        for m in &machines {
            if m.type_index >= typed.types.len() {
                return Err(Failure { code: EXIT_MISMATCH, message: format!("unknown type {}", m.type_index) });
            }
            for &j in &m.jobs {
                if j >= seen.len() {
                    return Err(Failure { code: EXIT_MISMATCH, message: format!("unknown job {j}") });
                }
                seen[j] += 1;
            }
        }
        if seen.iter().any(|&c| c != 1) {
            return Err(Failure { code: EXIT_MISMATCH, message: "jobs are not partitioned".into() });
        }
        (sol.cost, typed_cost(&typed, &machines))
    };
    if stated == recomputed {
        println!("OK cost={}", format_rational(&stated));
        Ok(EXIT_OK)
    } else {
        println!(
            "MISMATCH stated={} recomputed={}",
            format_rational(&stated),
            format_rational(&recomputed)
        );
        Ok(EXIT_MISMATCH)
    }
}

fn dispatch(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Solve { instance, algo, epsilon, out, budget } => {
            solve(&instance, algo, epsilon.as_deref(), out.as_deref(), budget)
        }
        Command::Variant { instance, mode, epsilon, out } => variant(&instance, mode, epsilon.as_deref(), out.as_deref()),
        Command::Gen { seed, n, m, class, out } => gen(seed, n, m, class, out.as_deref()),
        Command::Bench { dir, algos, epsilon, csv, bound, budget } => {
            bench(&dir, &algos, &epsilon, csv.as_deref(), bound.as_deref(), budget)
        }
        Command::Verify { instance, solution } => verify(&instance, &solution),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
