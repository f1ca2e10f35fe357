use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "ioncavity",
    version,
    about = "Ion chains in a pumped optical cavity"
)]
pub struct Cli {
    /// Parameter file, TOML or JSON.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output files. Without it the main table goes to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Also write SVG plots (needs --out).
    #[arg(long, global = true)]
    pub plot: bool,
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum SeedArg {
    Linear,
    #[value(name = "zigzag+")]
    ZigzagUp,
    #[value(name = "zigzag-")]
    ZigzagDown,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Solve {
    /// Starting structure.
    #[arg(long, value_enum)]
    pub seed: Option<SeedArg>,
    /// Pump power in units of kappa omega_x^2 / omega_R; overrides the config.
    #[arg(long)]
    pub power: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PowerGrid {
    #[arg(long, default_value_t = 0.01)]
    pub p_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub p_max: f64,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// Evenly spaced instead of log-spaced powers.
    #[arg(long)]
    pub linear: bool,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
pub enum Command {
    /// Solve for one equilibrium configuration (default seed: linear).
    Equilibrium(Solve),
    /// Transverse frequency below which the linear chain buckles.
    Critical,
    /// Soft-mode potential curves.
    Landau {
        /// Stiffness parameter of the uniform chain.
        #[arg(long, default_value_t = 0.22)]
        theta: f64,
        /// Cooperativity of the uniform chain; defaults to the config's.
        #[arg(long)]
        coop: Option<f64>,
        /// Comma-separated pump powers.
        #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.1,0.15,0.2,0.3")]
        powers: Vec<f64>,
        /// Project the full potential of the configured chain on its soft mode
        /// instead of using the uniform-chain formula.
        #[arg(long)]
        projected: bool,
    },
    /// Branch table over a power grid, plus up and down hysteresis traces.
    Sweep {
        #[command(flatten)]
        grid: PowerGrid,
        /// Also compute the logarithmic negativity on stable zigzags.
        #[arg(long)]
        entanglement: bool,
    },
    /// Normal modes and their cavity couplings (default seed: zigzag+).
    Modes(Solve),
    /// Stationary mode occupations (default seed: zigzag+).
    Steadystate(Solve),
    /// Output spectrum of the cavity field (default seed: zigzag+).
    Spectrum {
        #[command(flatten)]
        solve: Solve,
        #[arg(long, default_value_t = 20001)]
        points: usize,
        /// Half-width of the grid in units of the highest mode frequency.
        #[arg(long, default_value_t = 1.5)]
        extent: f64,
    },
    /// Logarithmic negativity along the zigzag branch.
    Entangle {
        #[command(flatten)]
        grid: PowerGrid,
    },
    /// Run the bundled recipe for one figure.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}
