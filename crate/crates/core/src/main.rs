use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand};

use bregmin::cli::{
    check_experiment, compare_experiment, echo_config, parse_config, run_experiment, run_seeds, Failure,
    Overrides, ProblemKind,
};
use bregmin::regularizer::RegKind;

#[derive(Parser)]
#[command(name = "bregmin", version, about = "Model BPG experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and write its trace CSV.
    Run(RunArgs),
    /// Run two models on the same instance and compare objectives.
    Compare {
        #[arg(long)]
        config_a: PathBuf,
        #[arg(long)]
        config_b: PathBuf,
        /// Side-by-side CSV destination.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the solver and print certificates only.
    Check(ConfigArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_problem)]
    problem: Option<ProblemKind>,
    #[arg(long, value_parser = parse_reg)]
    reg: Option<RegKind>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    backtracking: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: ConfigArgs,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also emit certificates.
    #[arg(long)]
    certificates: bool,
    /// Comma-separated seeds, each written to its own `-seed<K>` file.
    #[arg(long, value_delimiter = ',', conflicts_with = "seed")]
    seeds: Option<Vec<u64>>,
    /// Worker threads for `--seeds`.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn parse_enum<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|e| e.to_string())
}

fn parse_problem(s: &str) -> Result<ProblemKind, String> {
    parse_enum(s)
}

fn parse_reg(s: &str) -> Result<RegKind, String> {
    parse_enum(s)
}

fn overrides(a: &ConfigArgs) -> Overrides {
    Overrides {
        problem: a.problem,
        reg: a.reg,
        lambda: a.lambda,
        seed: a.seed,
        max_iters: a.max_iters,
        backtracking: a.backtracking,
        ..Overrides::default()
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run(args) => {
            let mut ov = overrides(&args.common);
            ov.output = args.output;
            ov.emit_certificates = args.certificates;
            let cfg = parse_config(args.common.config.as_deref(), &ov)?;
            eprintln!("{}", echo_config(&cfg));
            if args.jobs == 0 {
                return Err(Failure::Config(anyhow!("--jobs must be at least 1")));
            }
            match args.seeds {
                Some(seeds) => run_seeds(&cfg, &seeds, args.jobs),
                None => run_experiment(&cfg).map(|_| ()),
            }
        }
        Command::Check(args) => {
            let cfg = parse_config(args.config.as_deref(), &overrides(&args))?;
            eprintln!("{}", echo_config(&cfg));
            check_experiment(&cfg).map(|_| ())
        }
        Command::Compare {
            config_a,
            config_b,
            output,
        } => {
            let a = parse_config(Some(&config_a), &Overrides::default())?;
            let b = parse_config(Some(&config_b), &Overrides::default())?;
            let summary = compare_experiment(&a, &b, output.as_deref())?;
            print!("{summary}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bregmin: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
