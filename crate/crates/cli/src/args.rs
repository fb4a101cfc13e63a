use std::path::PathBuf;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use gptlab_core::ScalarMode;

#[derive(Debug, Parser)]
#[command(
    name = "gpt-lab",
    version,
    about = "Generalized probabilistic theories on polyhedral cones"
)]
pub struct Cli {
    /// Arithmetic: exact rationals or f64 with tolerance --eps
    #[arg(long, global = true, value_enum, default_value_t = Mode::Exact)]
    pub scalar: Mode,
    /// Floating-mode tolerance; `verify` accepts it several times for a sweep
    #[arg(long, global = true)]
    pub eps: Vec<f64>,
    /// Seed for randomized steps
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Search budget (simplex size for broadcast, ray count for isomorphism searches)
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Write the output document here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Record wall-clock time in reports (makes output run-dependent)
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Float,
}

impl From<Mode> for ScalarMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Exact => ScalarMode::Exact,
            Mode::Float => ScalarMode::Float,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TensorKind {
    Min,
    Max,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a state space file: `classical N`, `polygon N`, `square`, `foil`, `custom FILE`
    Space {
        kind: String,
        param: Option<String>,
        /// Write the dual space instead (unit: barycenter of the state polytope)
        #[arg(long)]
        dual: bool,
    },
    /// Minimal or maximal tensor product of two spaces
    Tensor {
        a: String,
        b: String,
        #[arg(long, value_enum, default_value_t = TensorKind::Min)]
        kind: TensorKind,
        /// Classify every extreme state as separable or entangled
        #[arg(long)]
        entanglement: bool,
    },
    /// Joint distinguishability of states (`vK`, `center`, or coordinates)
    Distinguish {
        space: String,
        #[arg(required = true, allow_negative_numbers = true)]
        states: Vec<String>,
    },
    /// Whether a set of states can be broadcast
    Broadcast {
        space: String,
        #[arg(required = true, allow_negative_numbers = true)]
        states: Vec<String>,
        /// Additional candidate simplex vertices
        #[arg(long, allow_hyphen_values = true)]
        extra: Vec<String>,
    },
    /// Irreducible decomposition and nondisturbing maps of a cone
    Nondisturb {
        space: String,
        /// A map to classify: rows separated by `;`, entries by `,`, or a JSON file
        #[arg(long, allow_hyphen_values = true)]
        map: Option<String>,
    },
    /// Bit commitment from a double decomposition
    Bitcommit {
        space: String,
        /// Range of n for the binding series, `a..b`
        #[arg(long, default_value = "1..10")]
        n: String,
        /// Seeded honest runs per bit
        #[arg(long, default_value_t = 10_000)]
        runs: usize,
        /// Subsystems per honest run
        #[arg(long, default_value_t = 8)]
        subsystems: usize,
        /// Check hiding for n up to this value
        #[arg(long, default_value_t = 4)]
        hiding: usize,
        /// Write the binding series as CSV (`-` for stdout)
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Teleportation: group-built deterministic, conclusive, or the
    /// weak self-duality search
    #[command(group(ArgGroup::new("mode").required(true)))]
    Teleport {
        space: String,
        /// Deterministic protocol from a transitive group: `Zn`, `Dn`, `S3`
        #[arg(long, group = "mode")]
        group: Option<String>,
        /// Conclusive protocol through a copy of the space
        #[arg(long, group = "mode")]
        conclusive: bool,
        /// Compare weak self-duality with the existence of a conclusive protocol
        #[arg(long, group = "mode")]
        necessity: bool,
    },
    /// Re-check a report or space file
    Verify { file: PathBuf },
}
