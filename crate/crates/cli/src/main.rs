mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use config::{ConfigFlags, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "heckelab", version, about = "Hecke characters of imaginary quadratic fields: central values, root numbers, twist families and p-adic counts")]
struct Cli {
    #[command(flatten)]
    config: ConfigFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Field invariants and class groups
    Field {
        #[command(subcommand)]
        action: FieldAction,
    },
    /// Build or check a Hecke character
    Char {
        #[command(subcommand)]
        action: CharAction,
    },
    /// Smoothed central value L(1) or L'(1)
    Lvalue(LvalueArgs),
    /// Root number by the Gauss sum and by the functional equation
    Rootnumber(CharArgs),
    /// Twist families
    Family {
        #[command(subcommand)]
        action: FamilyAction,
    },
    /// Count ideals with nonzero twist-orbit average
    CountN(CountNArgs),
    /// Count lattice points M(q, t)
    CountM(CountMArgs),
    /// Exhaustive search for solutions of the p-adic Ridout inequality
    Ridout(RidoutArgs),
    /// Vanishing of traces of roots of unity
    Lemma1(Lemma1Args),
    /// Conductor exponents and the Main Lemma bound
    Mainlemma(MainlemmaArgs),
}

#[derive(Debug, Subcommand)]
enum FieldAction {
    Info {
        #[arg(short = 'D', long = "disc", allow_hyphen_values = true)]
        d: i64,
        /// also report Pic(O_c) for this conductor
        #[arg(long)]
        ring_conductor: Option<i64>,
    },
}

#[derive(Debug, Subcommand)]
enum CharAction {
    Build(CharArgs),
    Check {
        #[command(flatten)]
        chi: CharArgs,
        /// norm bound for the checks
        #[arg(long, default_value_t = 1000.0)]
        bound: f64,
    },
}

/// Selects `phi rho`: the canonical character (or a descriptor file) twisted
/// by an optional ring class character.
#[derive(Debug, Clone, Args)]
pub struct CharArgs {
    #[arg(short = 'D', long = "disc", allow_hyphen_values = true)]
    pub d: i64,
    /// use the canonical finite part (the default)
    #[arg(long)]
    pub canonical: bool,
    /// JSON character descriptor instead of the canonical character
    #[arg(long, conflicts_with = "canonical")]
    pub descriptor: Option<PathBuf>,
    /// conductor c of a ring class twist
    #[arg(long)]
    pub twist_c: Option<i64>,
    /// exponents of the twist on the generators of Pic(O_c)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "twist_c")]
    pub twist_exp: Vec<i64>,
    /// lift indices on the class group generators
    #[arg(long, value_delimiter = ',')]
    pub lifts: Option<Vec<i64>>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Derivative {
    Auto,
    #[value(name = "0")]
    Zero,
    #[value(name = "1")]
    One,
}

#[derive(Debug, Args)]
struct LvalueArgs {
    #[command(flatten)]
    chi: CharArgs,
    #[arg(long = "v", value_enum, default_value = "auto")]
    v: Derivative,
}

#[derive(Debug, Subcommand)]
enum FamilyAction {
    Scan(ScanArgs),
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(short = 'D', long = "disc", allow_hyphen_values = true)]
    pub d: i64,
    /// primes supporting the twist conductors
    #[arg(short = 'P', long = "primes", value_delimiter = ',')]
    pub primes: Vec<i64>,
    #[arg(long)]
    pub c_max: i64,
    /// keep only records whose ramified primes are exactly these
    #[arg(long, value_delimiter = ',')]
    pub ramification: Option<Vec<i64>>,
}

#[derive(Debug, Args)]
pub struct CountNArgs {
    #[command(flatten)]
    pub chi: CharArgs,
    /// count up to t
    #[arg(long, conflicts_with = "f_exponent")]
    pub t: Option<f64>,
    /// count up to f(chi)^a
    #[arg(long)]
    pub f_exponent: Option<f64>,
    /// restrict to the class of the given anchor (index into the class list)
    #[arg(long)]
    pub class: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CountMArgs {
    /// JSON Ridout instance; the sqrt(2) in Z_7 instance when omitted
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["k", "c"])]
    pub q: Option<i128>,
    #[arg(long, requires = "q")]
    pub t: Option<f64>,
    /// q = p^k for each k in the list (single-prime instances)
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<u32>,
    /// t = q^c
    #[arg(long)]
    pub c: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RidoutArgs {
    /// JSON Ridout instance: primes, polynomials, seeds, kappa, height
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub height: Option<i64>,
}

#[derive(Debug, Args)]
pub struct Lemma1Args {
    /// base field: 1 for Q, or a fundamental discriminant for a quadratic field
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub field: i64,
    #[arg(short = 'p', long)]
    pub p: i64,
    #[arg(long, default_value_t = 2000)]
    pub n_max: usize,
}

#[derive(Debug, Args)]
pub struct MainlemmaArgs {
    #[command(flatten)]
    pub chi: CharArgs,
    #[arg(short = 'P', long = "primes", value_delimiter = ',')]
    pub primes: Vec<i64>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&cli.config)?;
    if let Some(n) = cfg.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
    }
    match cli.command {
        Command::Field { action: FieldAction::Info { d, ring_conductor } } => {
            commands::field_info(&cfg, d, ring_conductor)
        }
        Command::Char { action: CharAction::Build(a) } => commands::char_build(&cfg, &a),
        Command::Char { action: CharAction::Check { chi, bound } } => commands::char_check(&cfg, &chi, bound),
        Command::Lvalue(a) => commands::lvalue(&cfg, &a.chi, a.v),
        Command::Rootnumber(a) => commands::rootnumber(&cfg, &a),
        Command::Family { action: FamilyAction::Scan(a) } => commands::family_scan(&cfg, &a),
        Command::CountN(a) => commands::count_n(&cfg, &a),
        Command::CountM(a) => commands::count_m(&cfg, &a),
        Command::Ridout(a) => commands::ridout(&cfg, &a),
        Command::Lemma1(a) => commands::lemma1(&cfg, &a),
        Command::Mainlemma(a) => commands::mainlemma(&cfg, &a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Usage(_) = e {
                eprintln!("\n{}", Cli::command().render_usage());
                eprintln!("Run `heckelab <command> --help` for the valid flags.");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
