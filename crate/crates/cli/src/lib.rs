//! Command-line front end for `truncent`: state files, demos of the
//! explicit constructions, measure evaluation and continuity tables.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod config;
pub mod statefile;

pub use commands::{run, Output};
pub use config::{Format, RunConfig, Settings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 2;
pub const EXIT_CONSTRUCTION: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;
pub const EXIT_DISPATCH: i32 = 5;
pub const EXIT_CAP: i32 = 6;

/// Environment variable holding the default config path.
pub const CONFIG_ENV: &str = "TRUNCENT_CONFIG";

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
    /// Extra machine-readable context, printed to stderr as JSON.
    pub detail: Option<serde_json::Value>,
}

impl CliError {
    fn with_code(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            detail: None,
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::with_code(EXIT_IO, message)
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::with_code(EXIT_IO, message)
    }

    pub fn construction(message: impl Into<String>) -> Self {
        Self::with_code(EXIT_CONSTRUCTION, message)
    }

    pub fn dispatch(message: impl Into<String>) -> Self {
        Self::with_code(EXIT_DISPATCH, message)
    }

    pub fn context(mut self, what: &str) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<truncent::Error> for CliError {
    fn from(e: truncent::Error) -> Self {
        use truncent::Error as E;
        match e {
            E::BudgetViolation { energy, budget } => Self::with_code(
                EXIT_BUDGET,
                format!("state outside the energy budget: mean energy {energy} is not below {budget}"),
            ),
            E::ResourceLimit { what, requested, cap } => Self::with_code(
                EXIT_CAP,
                format!("cap exceeded: {what} {requested} is above the cap {cap}"),
            ),
            E::ConstructionFailed { scan_log } => Self {
                code: EXIT_CONSTRUCTION,
                message: format!("construction failed after {} scan steps", scan_log.len()),
                detail: Some(serde_json::json!({ "scan_log": scan_log })),
            },
            other => Self::with_code(EXIT_IO, other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "truncent", version, about = "Entanglement measures on energy-truncated bipartite systems")]
pub struct Cli {
    /// JSON run config; flags override its fields.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Leave out the metadata block (timestamp, version) so reports compare
    /// byte for byte.
    #[arg(long, global = true)]
    pub no_metadata: bool,
    #[command(flatten)]
    pub flags: Flags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// Local cutoffs `dA,dB`, or a single value for both.
    #[arg(long, global = true, value_delimiter = ',', num_args = 1..=2)]
    pub cutoff: Option<Vec<usize>>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Mean-energy budget M (strict: energy < M).
    #[arg(long, global = true)]
    pub budget: Option<f64>,
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Optimizer gap tolerance in bits.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl Flags {
    pub fn to_config(&self) -> Result<RunConfig, CliError> {
        let cutoff = match self.cutoff.as_deref() {
            None => None,
            Some([d]) => Some([*d, *d]),
            Some([a, b]) => Some([*a, *b]),
            Some(other) => return Err(CliError::usage(format!("bad --cutoff {other:?}"))),
        };
        Ok(RunConfig {
            cutoff,
            beta: self.beta,
            budget: self.budget,
            eps: self.eps,
            tol: self.tol,
            seed: self.seed,
            restarts: self.restarts,
            max_iter: self.max_iter,
            format: self.format,
            out: self.out.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    /// `|0,0⟩`.
    Ground,
    /// Product Gibbs state at `--beta`.
    Gibbs,
    /// `(|0,0⟩ + |1,1⟩)/√2`.
    Bell,
}

#[derive(Debug, Default, Args)]
pub struct Source {
    /// State file (JSON).
    #[arg(long, conflicts_with = "builtin")]
    pub state: Option<PathBuf>,
    /// Built-in state on the `--cutoff` truncation.
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    /// Von Neumann entropy of the whole state.
    #[value(name = "S")]
    S,
    /// Entropy of entanglement (pure states only).
    #[value(name = "E")]
    E,
    /// Entanglement of formation (upper bound).
    #[value(name = "EF")]
    Ef,
    /// Relative entropy of entanglement over separable states (upper bound).
    #[value(name = "ER")]
    Er,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Entropy of entanglement along an energy-bounded pure-state sequence.
    Prop3,
    /// Per-copy entropy-of-entanglement gaps on tensor powers.
    Prop4,
    /// Relative entropy of entanglement under mixing with the identity.
    Prop8,
    /// Per-copy relative entropy of entanglement gaps on tensor powers.
    Prop9,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Near-product family with divergent energy: CSV scan over k = kmin, 2 kmin, ... <= kmax.
    DemoExample1 {
        #[arg(long, default_value_t = 16)]
        kmin: u64,
        #[arg(long, default_value_t = 4096)]
        kmax: u64,
    },
    /// Entangled state within `--eps` of the input and inside `--budget`.
    DemoNeighbor {
        #[command(flatten)]
        source: Source,
        /// First block level to try.
        #[arg(long)]
        k_min: Option<usize>,
        /// Fixed weight of the entangled block in the mixture branch.
        #[arg(long)]
        weight: Option<f64>,
        /// Also write the neighbouring state to this state file.
        #[arg(long)]
        rho_out: Option<PathBuf>,
    },
    /// Evaluate one measure and print a JSON report.
    Measure {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, ignore_case = true)]
        which: Which,
    },
    /// Distance against measure-gap table.
    Continuity {
        #[arg(long, value_enum)]
        mode: Mode,
        #[command(flatten)]
        source: Source,
        /// Perturbation scale (prop4: Schmidt weight moved at n = 1; prop9: identity weight at n = 1).
        #[arg(long)]
        scale: Option<f64>,
        /// Mixing weights for prop8.
        #[arg(long, value_delimiter = ',')]
        scales: Option<Vec<f64>>,
        /// Largest number of copies (prop4, prop9).
        #[arg(long)]
        copies: Option<usize>,
        /// Sequence length (prop3).
        #[arg(long)]
        steps: Option<usize>,
        /// How far the prop3 target moves toward the uniform weights; 0 gives the unperturbed sequence.
        #[arg(long)]
        strength: Option<f64>,
    },
}
