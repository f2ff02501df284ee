//! Shared pieces of the `ttdesign` command line: configuration, seed
//! resolution, exit codes and the table-reproduction driver.

pub mod commands;
pub mod reproduce;

use std::fmt;

use ttdesign::groups::{GroupSpec, catalog_lookup};
use ttdesign::numerics::Tolerance;
use ttdesign::orbits::parse_vector;
use ttdesign::{Complex64, Error};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_NO_ROOT: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;
pub const EXIT_NUMERIC: i32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Table,
    Json,
}

#[derive(Clone, Debug)]
pub struct Config {
    pub tol: Tolerance,
    pub t_max: u32,
    pub format: Format,
    pub max_order: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            tol: Tolerance::default(),
            t_max: ttdesign::designs::DEFAULT_T_MAX,
            format: Format::Table,
            max_order: ttdesign::groups::DEFAULT_MAX_ORDER,
        }
    }
}

/// Errors surfaced by the front end, each with a stable exit status.
#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(s) => f.write_str(s),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_INPUT,
            CliError::Core(e) => match e {
                Error::NoRoots(_) => EXIT_NO_ROOT,
                Error::SizeLimit { .. } => EXIT_RESOURCE,
                Error::KeyCollision { .. }
                | Error::Degenerate(_)
                | Error::Inconsistent(_)
                | Error::NumericRange(_) => EXIT_NUMERIC,
                _ => EXIT_INPUT,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Resolves a seed argument: a vector literal or `@name` of a catalog seed.
pub fn resolve_seed(spec: &GroupSpec, arg: &str) -> CliResult<(String, Vec<Complex64>)> {
    let arg = arg.trim();
    let Some(name) = arg.strip_prefix('@') else {
        return Ok((arg.to_string(), parse_vector(arg)?));
    };
    let entry = catalog_lookup(&spec.label)
        .ok_or_else(|| CliError::Usage(format!("no catalog seeds for {}", spec.label)))?;
    let seed = entry
        .seeds
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| {
            let names: Vec<_> = entry.seeds.iter().map(|s| s.name.as_str()).collect();
            CliError::Usage(format!("unknown seed @{name} for {} (have {})", spec.label, names.join(", ")))
        })?;
    Ok((seed.literal.clone(), parse_vector(&seed.literal)?))
}

/// `1-5` style label for the range `lo..=hi`.
pub fn range_label(lo: u32, hi: u32) -> String {
    if lo == hi { lo.to_string() } else { format!("{lo}-{hi}") }
}
