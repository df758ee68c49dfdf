use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ma_eigen::check::{run_check_suite, CheckParams};
use ma_eigen::config::{parse_config, RunConfig};
use ma_eigen::io::{read_field_csv, result_json, to_json_string, write_field_csv, write_history_csv};
use ma_eigen::oracles::{exact_1d_eigenpair, radial_eigenvalue, OracleReport, RadialShootParams};
use ma_eigen::{build_initial_paraboloid, run_inverse_iteration, solve_ma_dirichlet, DiscreteRhs, Grid, SolverError, Status};

const EXIT_NONCONVERGENCE: u8 = 2;
const EXIT_CONFIG: u8 = 3;

/// Monge-Ampère eigenvalues by inverse iteration.
#[derive(Debug, Parser)]
#[command(name = "ma-eigen", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the inverse iteration and write history.csv, result.json and eigenfunction.csv.
    Eigen(RunArgs),
    /// Solve one Dirichlet problem and write solution.csv.
    MaSolve {
        #[command(flatten)]
        run: RunArgs,
        /// Right-hand side: `constant:VALUE` or `file:PATH` (field CSV).
        #[arg(long, default_value = "constant:1")]
        rhs: String,
    },
    /// Print a reference eigenvalue.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Run the invariant suite; exits nonzero if any check fails.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Toggle::Off)]
        parallel: Toggle,
    },
}

#[derive(Debug, Subcommand)]
enum OracleCommand {
    /// Exact eigenvalue of the interval (0, L).
    #[command(name = "1d")]
    OneD {
        #[arg(long, default_value_t = 1.0)]
        length: f64,
    },
    /// Unit-ball eigenvalue by radial shooting.
    Radial {
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
        n: u8,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    parallel: Option<Toggle>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Toggle {
    On,
    Off,
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Exit {
    code: u8,
    error: anyhow::Error,
}

impl Exit {
    fn config(error: impl Into<anyhow::Error>) -> Self {
        Exit {
            code: EXIT_CONFIG,
            error: error.into(),
        }
    }
}

impl From<anyhow::Error> for Exit {
    fn from(error: anyhow::Error) -> Self {
        Exit { code: 1, error }
    }
}

fn load(args: &RunArgs) -> Result<(RunConfig, Grid), Exit> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))
        .map_err(Exit::config)?;
    let mut config = parse_config(&text).map_err(Exit::config)?;
    if let Some(out) = &args.out {
        config.out = out.clone();
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(p) = args.parallel {
        config.parallel = p == Toggle::On;
        config.iteration.solver.parallel = config.parallel;
    }
    let grid = Grid::build(&config.domain, config.h, config.width).map_err(Exit::config)?;
    Ok((config, grid))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("writing {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn eigen(args: &RunArgs) -> Result<(), Exit> {
    let (config, grid) = load(args)?;
    let u0 = build_initial_paraboloid(&grid, config.margin);
    let result = run_inverse_iteration(&grid, &u0, &config.iteration).map_err(|e| match e {
        ma_eigen::iteration::IterationError::Params(_) | ma_eigen::iteration::IterationError::InitialFunction(_) => {
            Exit::config(e)
        }
        other => anyhow::Error::from(other).into(),
    })?;

    let mut history = create(&config.out, "history.csv")?;
    write_history_csv(&result.history, &mut history).context("writing history.csv")?;
    history.flush().context("writing history.csv")?;
    let mut field = create(&config.out, "eigenfunction.csv")?;
    write_field_csv(&grid, &result.eigenfunction, &mut field).context("writing eigenfunction.csv")?;
    field.flush().context("writing eigenfunction.csv")?;
    let mut summary = create(&config.out, "result.json")?;
    let json = to_json_string(&result_json(&result, &config.domain, config.h));
    writeln!(summary, "{json}").context("writing result.json")?;
    summary.flush().context("writing result.json")?;

    println!("{json}");
    match result.status {
        Status::Converged => Ok(()),
        status => Err(Exit {
            code: EXIT_NONCONVERGENCE,
            error: anyhow::anyhow!("iteration stopped without converging ({})", status.as_str()),
        }),
    }
}

fn ma_solve(args: &RunArgs, rhs: &str) -> Result<(), Exit> {
    let (config, grid) = load(args)?;
    let f = match rhs.split_once(':') {
        Some(("constant", v)) => {
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Exit::config(anyhow::anyhow!("--rhs: bad constant `{v}`")))?;
            DiscreteRhs::constant(&grid, v).map_err(Exit::config)?
        }
        Some(("file", path)) => {
            let file = File::open(path)
                .with_context(|| format!("reading {path}"))
                .map_err(Exit::config)?;
            let field = read_field_csv(&grid, BufReader::new(file)).map_err(Exit::config)?;
            DiscreteRhs::new(&grid, field.into_values()).map_err(Exit::config)?
        }
        _ => {
            return Err(Exit::config(anyhow::anyhow!(
                "--rhs must be `constant:VALUE` or `file:PATH`, got `{rhs}`"
            )))
        }
    };
    let report = match solve_ma_dirichlet(&grid, &f, &config.iteration.solver, None) {
        Ok(r) => r,
        Err(e @ SolverError::NonConvergence { .. }) => {
            return Err(Exit {
                code: EXIT_NONCONVERGENCE,
                error: e.into(),
            })
        }
        Err(e) => return Err(anyhow::Error::from(e).into()),
    };
    let mut out = create(&config.out, "solution.csv")?;
    write_field_csv(&grid, &report.field, &mut out).context("writing solution.csv")?;
    out.flush().context("writing solution.csv")?;
    println!(
        "{}",
        to_json_string(&json!({
            "sweeps": report.sweeps,
            "residual": report.residual,
            "tolerance": report.tolerance,
        }))
    );
    Ok(())
}

fn oracle(which: &OracleCommand) -> Result<(), Exit> {
    let json = match *which {
        OracleCommand::OneD { length } => {
            let (lambda, _) = exact_1d_eigenpair(length).map_err(Exit::config)?;
            to_json_string(&json!({ "lambda": lambda }))
        }
        OracleCommand::Radial { n } => {
            let n = n as usize;
            let lambda = radial_eigenvalue(n, &RadialShootParams::default()).map_err(anyhow::Error::from)?;
            to_json_string(&OracleReport {
                n,
                lambda_unit_ball: lambda,
            })
        }
    };
    println!("{json}");
    Ok(())
}

fn check(seed: u64, parallel: Toggle) -> Result<(), Exit> {
    let params = CheckParams {
        seed,
        parallel: parallel == Toggle::On,
        ..CheckParams::default()
    };
    let outcomes = run_check_suite(&params);
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        return Err(anyhow::anyhow!("{failed} of {} checks failed", outcomes.len()).into());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let outcome = match &cli.command {
        Command::Eigen(args) => eigen(args),
        Command::MaSolve { run, rhs } => ma_solve(run, rhs),
        Command::Oracle { which } => oracle(which),
        Command::Check { seed, parallel } => check(*seed, *parallel),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
