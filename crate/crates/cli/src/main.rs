//! `taut`: verify the master relation and query the underlying calculus.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use taut_core::cache::{load_cache, save_cache, write_atomic};
use taut_core::Error;

#[derive(Parser, Debug)]
#[command(name = "taut", version, about = "Exact tautological-ring checks of the master relation")]
struct Cli {
    /// worker threads (default: available cores)
    #[arg(long, global = true, env = "TAUT_JOBS")]
    jobs: Option<usize>,

    /// psi intersection cache, loaded before and saved after the run
    #[arg(long, global = true, env = "TAUT_CACHE")]
    cache: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table, env = "TAUT_FORMAT")]
    format: Format,

    /// also write the structured document here
    #[arg(long, global = true, env = "TAUT_OUT")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Table,
    Structured,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
enum Command {
    /// Check that the negative u-part of Xi pairs to zero
    Verify(VerifyArgs),
    /// List the pre-stable star rooted trees
    Enumerate(Triple),
    /// Symbolic audit of the localization factors
    Audit(Triple),
    /// A psi intersection number
    Psi {
        #[arg(long, env = "TAUT_G")]
        g: u32,
        /// exponents, comma separated
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        d: Vec<u32>,
    },
    /// A double ramification cycle
    Dr {
        #[arg(long, env = "TAUT_G")]
        g: u32,
        /// parts summing to zero, comma separated
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        parts: Vec<i64>,
    },
    /// Mumford's relation on M(g,n), or on every space within a dimension budget
    Mumford {
        #[arg(long, env = "TAUT_G", requires = "n")]
        g: Option<u32>,
        #[arg(long, env = "TAUT_N")]
        n: Option<usize>,
        #[arg(long, env = "TAUT_DIM_BUDGET", default_value_t = 5)]
        dim_budget: u32,
    },
    /// String and dilaton equations on random psi monomials
    Identities {
        #[arg(long, env = "TAUT_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, env = "TAUT_GMAX", default_value_t = 3)]
        gmax: u32,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
struct Triple {
    #[arg(long, env = "TAUT_G")]
    g: u32,
    #[arg(long, env = "TAUT_N")]
    n: usize,
    #[arg(long, env = "TAUT_M")]
    m: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
struct VerifyArgs {
    #[arg(long, env = "TAUT_G", requires_all = ["n", "m"], conflicts_with = "gmax")]
    g: Option<u32>,
    #[arg(long, env = "TAUT_N")]
    n: Option<usize>,
    #[arg(long, env = "TAUT_M")]
    m: Option<usize>,
    /// every (g,n,m) with g <= gmax within the dimension budget
    #[arg(long, env = "TAUT_GMAX")]
    gmax: Option<u32>,
    /// largest 3g-3+n+m accepted
    #[arg(long, env = "TAUT_DIM_BUDGET", default_value_t = 4)]
    dim_budget: u32,
    /// simplex size of the a-grid
    #[arg(long, env = "TAUT_GRID")]
    grid: Option<u32>,
}

/// Everything that determines a run's output.
#[derive(Debug, Serialize)]
struct RunConfig<'a> {
    #[serde(flatten)]
    command: &'a Command,
    cache: Option<String>,
}

#[derive(Serialize)]
struct Document<'a> {
    schema: &'static str,
    config: RunConfig<'a>,
    ok: bool,
    result: serde_json::Value,
}

pub struct Outcome {
    pub ok: bool,
    pub table: String,
    pub result: serde_json::Value,
}

pub enum Failure {
    Usage(String),
    Environment(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::CacheSchema { .. } => Failure::Environment(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(|e| Failure::Environment(e.to_string()))?;
    }
    if let Some(path) = &cli.cache {
        let loaded = load_cache(path)?;
        eprintln!("cache: loaded {loaded} entries from {}", path.display());
    }
    let outcome = match &cli.command {
        Command::Verify(v) => commands::verify(v)?,
        Command::Enumerate(t) => commands::enumerate(t.g, t.n, t.m)?,
        Command::Audit(t) => commands::audit(t.g, t.n, t.m)?,
        Command::Psi { g, d } => commands::psi(*g, d)?,
        Command::Dr { g, parts } => commands::dr(*g, parts)?,
        Command::Mumford { g, n, dim_budget } => commands::mumford(*g, *n, *dim_budget),
        Command::Identities { seed, cases, gmax } => commands::identities(*seed, *cases, *gmax),
    };
    if let Some(path) = &cli.cache {
        let saved = save_cache(path)?;
        eprintln!("cache: saved {saved} entries to {}", path.display());
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Environment(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(3);
        }
    };
    let doc = Document {
        schema: "taut-run/1",
        config: RunConfig { command: &cli.command, cache: cli.cache.as_ref().map(|p| p.display().to_string()) },
        ok: outcome.ok,
        result: outcome.result,
    };
    let json = serde_json::to_string_pretty(&doc).expect("documents serialize") + "\n";
    match cli.format {
        Format::Table => print!("{}", outcome.table),
        Format::Structured => print!("{json}"),
    }
    if let Some(path) = &cli.out {
        if let Err(e) = write_atomic(path, json.as_bytes()) {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    if outcome.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
