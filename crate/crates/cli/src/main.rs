use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod report;

#[derive(Parser, Debug)]
#[command(name = "pulseforge", version, about = "Pulse schemes for qudit and oscillator networks")]
struct Cli {
    /// Seed for the random models used in self-verification.
    #[arg(long, global = true, env = "PULSEFORGE_SEED", default_value_t = 0)]
    seed: u64,

    /// Encoding of the written artifact.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build and verify a decoupling scheme.
    Decouple(DecoupleArgs),
    /// Build and verify a time-reversal scheme.
    Invert(InvertArgs),
    /// Majorization lower bounds on the time overhead.
    Bound(BoundArgs),
    /// Check a scheme against a model and a target.
    Verify(VerifyArgs),
    /// Qubit sign matrices from a spread or an orthogonal array.
    Signs(SignsArgs),
    /// Emit a verified orthogonal array or difference scheme.
    Design(DesignArgs),
}

#[derive(Args, Debug)]
pub struct DecoupleArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: usize,
    /// Interaction graph JSON; only its edges need to be decoupled.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Product array with d^(2n) intervals instead of the linear array.
    #[arg(long)]
    pub exponential: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InvertArgs {
    #[arg(long)]
    pub n: usize,
    /// Local dimension (qudits) or Fock truncation (oscillators).
    #[arg(long)]
    pub d: Option<usize>,
    /// Oscillator network instead of qudits.
    #[arg(long)]
    pub harmonic: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Bound the inversion `J -> -J`.
    #[arg(long, conflicts_with = "target")]
    pub invert: bool,
    /// Model whose couplings are the simulation target (defaults to the model itself).
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Number of random ±1 rescalings to try.
    #[arg(long)]
    pub rescale_search: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub scheme: PathBuf,
    /// `zero`, `invert`, or a model JSON file.
    #[arg(long, default_value = "zero")]
    pub target: String,
    /// Defaults to the overhead stored in the scheme.
    #[arg(long)]
    pub overhead: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SignsArgs {
    #[arg(long, conflicts_with = "from_oa", required_unless_present = "from_oa")]
    pub m: Option<u32>,
    /// Orthogonal array JSON over four symbols.
    #[arg(long)]
    pub from_oa: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DesignArgs {
    #[arg(value_enum)]
    pub kind: DesignKind,
    /// Number of rows.
    #[arg(long)]
    pub n: usize,
    /// Alphabet size of an orthogonal array.
    #[arg(long, required_if_eq("kind", "oa"))]
    pub s: Option<u32>,
    /// Group order of a difference scheme.
    #[arg(long, required_if_eq("kind", "ds"))]
    pub u: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DesignKind {
    Oa,
    Ds,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let ctx = commands::Context { seed: cli.seed, format: cli.format, args, start: Instant::now() };
    let result = match &cli.command {
        Command::Decouple(a) => commands::decouple(&ctx, a),
        Command::Invert(a) => commands::invert(&ctx, a),
        Command::Bound(a) => commands::bound(&ctx, a),
        Command::Verify(a) => commands::verify(&ctx, a),
        Command::Signs(a) => commands::signs(&ctx, a),
        Command::Design(a) => commands::design(&ctx, a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
