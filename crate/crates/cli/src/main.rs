//! `dclut` command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or I/O error.

mod batch;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "dclut",
    version,
    about = "Lookup-table compression with don't-care entries"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress one table into Verilog, a plan file and a cost report.
    Compress(CompressArgs),
    /// Build a care mask from observed input addresses.
    Mask(MaskArgs),
    /// Compress every `*.tbl` in a directory.
    Batch(BatchArgs),
    /// Check a plan file against its table and mask.
    Verify(VerifyArgs),
    /// Write synthetic tables and masks.
    Generate(GenerateArgs),
}

#[derive(Args, Clone)]
struct SearchArgs {
    /// Output width; inferred from the largest value when omitted.
    #[arg(long)]
    wout: Option<u32>,
    /// Largest dependency count a unique sub-table may have and still be
    /// eliminated.
    #[arg(long, default_value_t = dclut::search::DEFAULT_EXIGUITY)]
    exiguity: usize,
    /// Disable the higher-bit split (store no low output bits plainly).
    #[arg(long)]
    no_hbs: bool,
    /// Disable self-similarity between sub-tables.
    #[arg(long)]
    no_ssc: bool,
    /// Disable the don't-care stage.
    #[arg(long)]
    no_dc: bool,
    /// Smallest sub-table address width to try.
    #[arg(long)]
    min_tsize: Option<u32>,
    /// Largest sub-table address width to try.
    #[arg(long)]
    max_tsize: Option<u32>,
    /// Don't-care passes over the unique sub-tables.
    #[arg(long, default_value_t = 1)]
    passes: usize,
    /// Inputs per physical LUT in the area estimate.
    #[arg(long, default_value_t = dclut::search::DEFAULT_PLUT_INPUTS)]
    plut_inputs: u32,
}

#[derive(Args)]
struct CompressArgs {
    #[arg(long)]
    table: PathBuf,
    /// 0/1 per line; all entries are cares when omitted.
    #[arg(long)]
    mask: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Output file stem and Verilog module name (default: table file stem).
    #[arg(long)]
    name: Option<String>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct MaskArgs {
    /// Observation file: one address per line, binary or 0x hex.
    #[arg(long)]
    obs: PathBuf,
    #[arg(long)]
    win: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BatchArgs {
    /// Directory holding `<stem>.tbl` and optional `<stem>.mask` files.
    #[arg(long)]
    dir: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    out: PathBuf,
    /// Also run all-care mode and report the reduction against it.
    #[arg(long)]
    compare: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    table: PathBuf,
    #[arg(long)]
    mask: Option<PathBuf>,
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    wout: Option<u32>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    /// Uniform random values and masks.
    Random,
    /// Biased shifts of a few base sub-tables, noise in the don't cares.
    Planted,
    /// The four-sub-table example with a single don't care.
    Family,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "planted")]
    kind: Kind,
    #[arg(long, default_value_t = 8)]
    count: usize,
    #[arg(long, default_value_t = 10)]
    win: u32,
    #[arg(long, default_value_t = 6)]
    wout: u32,
    /// Don't-care fraction.
    #[arg(long, default_value_t = 0.5)]
    dc: f64,
    /// Sub-table address width of the planted structure.
    #[arg(long, default_value_t = 3)]
    tsize: u32,
    /// Number of base sub-tables in the planted structure.
    #[arg(long, default_value_t = 3)]
    bases: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Compress(a) => commands::compress(a),
        Command::Mask(a) => commands::mask(a),
        Command::Batch(a) => batch::run(a),
        Command::Verify(a) => commands::verify(a),
        Command::Generate(a) => commands::generate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
