use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use stochtopo_cli::config::{ProcessName, RadiusName};
use stochtopo_cli::{CliError, Outcome, Overrides, EXIT_INPUT, EXIT_INVARIANT};

/// Population-driven base-station generation and MEC PoP placement.
#[derive(Debug, Parser)]
#[command(name = "stochtopo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate base stations, place PoPs and write every output file.
    Run(Common),
    /// Generate base stations only (bs.csv).
    GenerateBs(Common),
    /// Place PoPs for the stations in an existing bs.csv.
    PlacePops {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        bs: PathBuf,
    },
    /// Compare Monte-Carlo survivor counts with the expected-count quadratures.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "N")]
        replications: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Also write map.svg.
    #[arg(long)]
    svg: bool,
    /// Candidate PoP sites per km.
    #[arg(long, value_name = "F")]
    resolution: Option<f64>,
    #[arg(long, value_enum)]
    radius_formula: Option<RadiusArg>,
    #[arg(long, value_enum)]
    process: Option<ProcessArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RadiusArg {
    Paper,
    Tiling,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProcessArg {
    Matern1,
    Matern2,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            output_dir: self.out.clone(),
            candidate_resolution: self.resolution,
            radius_formula: self.radius_formula.map(|r| match r {
                RadiusArg::Paper => RadiusName::Paper,
                RadiusArg::Tiling => RadiusName::Tiling,
            }),
            process: self.process.map(|p| match p {
                ProcessArg::Matern1 => ProcessName::Matern1,
                ProcessArg::Matern2 => ProcessName::Matern2,
            }),
            replications: None,
        }
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("STOCHTOPO_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("STOCHTOPO_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(format!("cannot start {n} worker threads: {e}")))
}

fn report(outcome: &Outcome) {
    for f in &outcome.files {
        eprintln!("wrote {}", f.display());
    }
    if outcome.unassignable > 0 {
        eprintln!("{} base station(s) could not be assigned to any PoP", outcome.unassignable);
    }
}

fn execute(cli: Cli) -> Result<Outcome, CliError> {
    init_threads()?;
    match cli.command {
        Command::Run(c) => {
            let s = stochtopo_cli::load_config(&c.config, &c.overrides())?;
            stochtopo_cli::run_full(&s, c.svg)
        }
        Command::GenerateBs(c) => {
            let s = stochtopo_cli::load_config(&c.config, &c.overrides())?;
            stochtopo_cli::generate_bs(&s)
        }
        Command::PlacePops { common, bs } => {
            let s = stochtopo_cli::load_config(&common.config, &common.overrides())?;
            stochtopo_cli::place_pops(&s, &bs, common.svg)
        }
        Command::Validate { common, replications } => {
            let overrides = Overrides { replications, ..common.overrides() };
            let s = stochtopo_cli::load_config(&common.config, &overrides)?;
            let (outcome, rep) = stochtopo_cli::validate(&s)?;
            for r in &rep.reports {
                eprintln!(
                    "cell {} {}: mean {:.4} ± {:.4}, analytic {:.4}, z = {:.2} {}",
                    r.cell,
                    r.process,
                    r.mean,
                    r.std_error,
                    r.analytic,
                    r.z_score,
                    if r.pass { "ok" } else { "FAIL" }
                );
            }
            for sk in &rep.skipped {
                eprintln!("cell {} {}: skipped, {}", sk.cell, sk.process.unwrap_or("all"), sk.reason);
            }
            Ok(outcome)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(outcome) => {
            report(&outcome);
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            debug_assert!(e.exit_code() == EXIT_INPUT || e.exit_code() == EXIT_INVARIANT);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
