use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ttdesign::numerics::Tolerance;
use ttdesign_cli::commands::{self, Output};
use ttdesign_cli::{CliError, CliResult, Config, EXIT_INPUT, Format};

#[derive(Parser)]
#[command(name = "ttdesign", version, about = "Weighted unions of group orbits as (t,t)-designs")]
struct Cli {
    /// Relative tolerance for equality tests.
    #[arg(long, global = true, default_value_t = 1e-9)]
    rel_eq: f64,
    /// Largest denominator accepted when snapping to a rational.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    snap_denom_max: u64,
    /// Decimal digits kept in deduplication keys.
    #[arg(long, global = true, default_value_t = 8)]
    dedup_digits: u32,
    /// Highest order reported or scanned.
    #[arg(long, global = true, default_value_t = ttdesign::designs::DEFAULT_T_MAX)]
    tmax: u32,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Abort group closure beyond this many elements.
    #[arg(long, global = true, default_value_t = ttdesign::groups::DEFAULT_MAX_ORDER)]
    max_order: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Build a group and print its order, dimension and field.
    Group { spec: String },
    /// Orbit of a seed vector, with its strength report.
    Orbit {
        spec: String,
        /// Vector literal such as "1,0,0" or "0.8,0.3+0.5i", or @name from the catalog.
        #[arg(long, allow_hyphen_values = true)]
        seed: String,
        /// Print the line representatives.
        #[arg(long)]
        dump: bool,
    },
    /// Solve for the weighting of two orbits that gives a t-design.
    Union {
        spec: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long)]
        t: u32,
        /// Write the certificate JSON here.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Sample random pairs of orbits and test the two-orbit identity per t.
    Scan {
        spec: String,
        #[arg(long, default_value_t = ttdesign::pairscan::DEFAULT_SAMPLES)]
        samples: usize,
        /// PRNG seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Recompute the residuals of a certificate.
    Verify { path: PathBuf },
    /// Check the antipodal doubling of a real certificate as a spherical design.
    Double { path: PathBuf },
    /// Replay tabulated unions and compare with the transcribed values.
    Reproduce {
        /// a, b, d, c2, h or all.
        table: String,
    },
    /// List catalog groups and named seeds.
    Catalog { spec: Option<String> },
}

fn config(cli: &Cli) -> CliResult<Config> {
    let tol = Tolerance::new(cli.rel_eq, cli.snap_denom_max, cli.dedup_digits)?;
    if cli.tmax == 0 {
        return Err(CliError::Usage("--tmax must be at least 1".into()));
    }
    if cli.max_order == 0 {
        return Err(CliError::Usage("--max-order must be at least 1".into()));
    }
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    }
    let format = match cli.format {
        FormatArg::Table => Format::Table,
        FormatArg::Json => Format::Json,
    };
    Ok(Config { tol, t_max: cli.tmax, format, max_order: cli.max_order })
}

fn run(cli: &Cli) -> CliResult<(Output, Format)> {
    let cfg = config(cli)?;
    let out = match &cli.command {
        Command::Group { spec } => commands::group(spec, &cfg)?,
        Command::Orbit { spec, seed, dump } => commands::orbit(spec, seed, *dump, &cfg)?,
        Command::Union { spec, x, y, t, emit } => commands::union(spec, x, y, *t, emit.as_deref(), &cfg)?,
        Command::Scan { spec, samples, seed } => commands::scan_cmd(spec, *samples, *seed, &cfg)?,
        Command::Verify { path } => commands::verify(path, &cfg)?,
        Command::Double { path } => commands::double(path, &cfg)?,
        Command::Reproduce { table } => commands::reproduce_cmd(table, &cfg)?,
        Command::Catalog { spec } => commands::catalog_cmd(spec.as_deref())?,
    };
    Ok((out, cfg.format))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    match run(&cli) {
        Ok((out, format)) => {
            match format {
                Format::Table => print!("{}", out.text),
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.json).unwrap_or_default()),
            }
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
