//! `cartan`: traces, transports and verification runs on Cartan geometries.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "cartan",
    version,
    about = "Numerical Cartan geometry on matrix Lie groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ModelArg {
    /// Catalog name (see `cartan catalog`) or path to a geometry JSON file.
    #[arg(long)]
    model: String,
}

#[derive(Args, Debug, Clone)]
struct OutArg {
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct StartArg {
    /// Start point in chart coordinates (chart models only).
    #[arg(long, allow_hyphen_values = true)]
    at: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trace a geodesic and write it as CSV.
    TraceGeodesic {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        start: StartArg,
        /// Initial velocity, comma-separated m-coordinates.
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
        #[arg(long, default_value_t = 1.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Parallel-transport a vector along a (possibly twisted) geodesic lift.
    Transport {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        start: StartArg,
        /// Direction of the geodesic.
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
        /// Structure-algebra rate at which the lift is rotated.
        #[arg(long, allow_hyphen_values = true)]
        twist: Option<String>,
        /// The m-coordinates to transport.
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
        #[arg(long, default_value_t = 1.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.001)]
        step: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Develop a (possibly twisted) geodesic lift into the model group; CSV.
    Develop {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        start: StartArg,
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
        #[arg(long, allow_hyphen_values = true)]
        twist: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Integrate a Jacobi field along a geodesic; CSV.
    Jacobi {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
        /// Initial value of the field.
        #[arg(long, allow_hyphen_values = true)]
        j0: String,
        /// Initial covariant derivative of the field.
        #[arg(long, allow_hyphen_values = true)]
        j1: String,
        #[arg(long, default_value_t = 1.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Curvature on the m-basis at the start point plus a constancy probe; JSON.
    Curvature {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        start: StartArg,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, env = "CARTAN_SEED", default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run verification suites; exits 1 if any fails.
    Verify {
        /// Suite name, comma-separated names, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, env = "CARTAN_SEED", default_value_t = 0)]
        seed: u64,
        /// Run suites one after another.
        #[arg(long)]
        sequential: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Search for a geodesic from the start to a target in a Klein model; exits 1 if none is found.
    Connect {
        #[command(flatten)]
        model: ModelArg,
        /// Target group element, rows separated by `;`. A block of base
        /// coordinates is accepted where the model has one.
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        /// Start group element; identity by default.
        #[arg(long, allow_hyphen_values = true)]
        from: Option<String>,
        #[command(flatten)]
        out: OutArg,
    },
    /// List catalog models, or print one as geometry JSON.
    Catalog {
        #[arg(long)]
        model: Option<String>,
        #[command(flatten)]
        out: OutArg,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli.command) {
        Ok(commands::Outcome::Success) => ExitCode::SUCCESS,
        Ok(commands::Outcome::Failed) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
