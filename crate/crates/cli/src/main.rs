use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use bfo_qap::MutationKind;
use bfo_qap_cli::{
    make_reference_front, run_experiment, ExperimentSpec, Overrides, SolverKind, Verification,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "bfo-qap",
    version,
    about = "Bacterial foraging optimization for QAP and mQAP"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Run seeded replicate batches of a solver on one or more instances.
    Solve(SolveArgs),
    /// Write the exact Pareto front of a small mQAP instance (n <= 11).
    Front {
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    #[arg(long, default_value = "bfo", value_parser = parse_solver)]
    solver: SolverKind,
    /// key=value parameter file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "S")]
    population: Option<usize>,
    #[arg(long = "Nc")]
    chemotactic_steps: Option<usize>,
    #[arg(long = "Nre")]
    reproduction_steps: Option<usize>,
    #[arg(long = "Ned")]
    elimination_steps: Option<usize>,
    #[arg(long = "Ped")]
    dispersal_prob: Option<f64>,
    #[arg(long, value_parser = parse_mutation)]
    mutation: Option<MutationKind>,
    #[arg(long)]
    eras: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Tabu iterations per local search call (default 10 n^2).
    #[arg(long)]
    tabu_iters: Option<usize>,
    /// Neighbour evaluations per Pareto local search call.
    #[arg(long)]
    pls_budget: Option<u64>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long, conflicts_with = "reference_front")]
    verify_optimum: Option<i64>,
    #[arg(long)]
    reference_front: Option<PathBuf>,
    /// Worker threads for concurrent eras (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Record wall_ms as 0 so repeated runs give byte-identical reports.
    #[arg(long)]
    no_timing: bool,
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    s.parse()
        .map_err(|e: bfo_qap_cli::BenchError| e.to_string())
}

fn parse_mutation(s: &str) -> Result<MutationKind, String> {
    s.parse().map_err(|e: bfo_qap::Error| e.to_string())
}

fn solve(args: SolveArgs) -> Result<ExitCode, bfo_qap_cli::BenchError> {
    let file = match &args.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| bfo_qap_cli::BenchError::Io {
                path: p.clone(),
                source: e,
            })?;
            Overrides::parse(&text)?
        }
        None => Overrides::default(),
    };
    let flags = Overrides {
        population: args.population,
        chemotactic_steps: args.chemotactic_steps,
        reproduction_steps: args.reproduction_steps,
        elimination_steps: args.elimination_steps,
        dispersal_prob: args.dispersal_prob,
        mutation: args.mutation,
        eras: args.eras,
        seed: args.seed,
        tabu_iters: args.tabu_iters,
        pls_budget: args.pls_budget,
    };
    let verify = match (args.verify_optimum, args.reference_front) {
        (Some(v), _) => Some(Verification::Optimum(v)),
        (None, Some(p)) => Some(Verification::ReferenceFront(p)),
        (None, None) => None,
    };
    let spec = ExperimentSpec {
        instances: args.instances,
        solver: args.solver,
        overrides: file.merged_with(&flags),
        out_dir: args.out,
        verify,
        jobs: args.jobs,
        no_timing: args.no_timing,
    };
    let outcome = run_experiment(&spec)?;
    print!("{}", outcome.table);
    Ok(if outcome.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Front { instance, out } => make_reference_front(&instance, &out).map(|front| {
            println!(
                "{} nondominated points written to {}",
                front.len(),
                out.display()
            );
            ExitCode::SUCCESS
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
