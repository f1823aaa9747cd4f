mod output;
mod run;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use settings::{Grid, Settings};

#[derive(Parser)]
#[command(name = "ere", version, about = "Maslov-type indices, collision indices and stability of elliptic relative equilibria")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML file; top-level keys apply to every command, `[command]`
    /// sections to one. Flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output file (default: standard output).
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// csv or json (one object per line).
    #[arg(long, global = true)]
    format: Option<String>,
    /// Worker threads (default: $ERE_JOBS, else all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    tol_abs: Option<f64>,
    #[arg(long, global = true)]
    tol_rel: Option<f64>,
    /// Truncation time for the collision indices.
    #[arg(long, global = true)]
    tmax: Option<f64>,
    /// Leave wall_ms empty so that repeated runs are byte-identical.
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// i₁, i₋₁, Morse indices and the spectral class at single points.
    Index(PointArgs),
    /// l₀ tables, l₊ indices, brake split and nondegeneracy probe.
    Collision(CollisionArgs),
    /// A (parameter, e) grid, one row per cell.
    Sweep(PointArgs),
    /// Degenerate curves of the Euler family.
    TraceCurves(TraceArgs),
    /// The acceptance battery.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct PointArgs {
    /// euler, lagrange or ring3.
    #[arg(long)]
    family: Option<String>,
    /// Parameter value(s): `a,b,c` or `lo:hi:n`.
    #[arg(long)]
    param: Option<Grid>,
    /// Eccentricity value(s): `a,b,c` or `lo:hi:n`.
    #[arg(long)]
    e: Option<Grid>,
}

#[derive(Args)]
struct CollisionArgs {
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    param: Option<Grid>,
    /// Exit with status 4 when the probe detects an index jump.
    #[arg(long)]
    strict: bool,
    /// Write `(τ, ŷ₆/‖ŷ‖)` samples of the exterior run on l₊ to FILE.
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    e: Option<Grid>,
    /// Upper end of the δ scan (default 7, or 1/8 − 10⁻⁴ when 1 − e < 10⁻³).
    #[arg(long)]
    delta_max: Option<f64>,
    /// Scan cells on the δ interval.
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    j_max: Option<usize>,
    /// Final bracket width.
    #[arg(long)]
    width: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// fast or full.
    #[arg(long)]
    level: Option<String>,
    /// Criterion ids to run, e.g. `1,2,9` (default: all).
    #[arg(long, value_delimiter = ',')]
    criteria: Option<Vec<u8>>,
}

fn flag(b: bool) -> Option<bool> {
    b.then_some(true)
}

impl Cli {
    fn name(&self) -> &'static str {
        match self.command {
            Command::Index(_) => "index",
            Command::Collision(_) => "collision",
            Command::Sweep(_) => "sweep",
            Command::TraceCurves(_) => "trace-curves",
            Command::Verify(_) => "verify",
        }
    }

    fn settings(self) -> Settings {
        let c = self.common;
        let mut s = Settings {
            out: c.out,
            format: c.format,
            jobs: c.jobs,
            tol_abs: c.tol_abs,
            tol_rel: c.tol_rel,
            tmax: c.tmax,
            no_timing: flag(c.no_timing),
            ..Settings::default()
        };
        match self.command {
            Command::Index(a) | Command::Sweep(a) => {
                s.family = a.family;
                s.param = a.param;
                s.e = a.e;
            }
            Command::Collision(a) => {
                s.family = a.family;
                s.param = a.param;
                s.strict = flag(a.strict);
                s.trace = a.trace;
            }
            Command::TraceCurves(a) => {
                s.e = a.e;
                s.delta_max = a.delta_max;
                s.cells = a.cells;
                s.j_max = a.j_max;
                s.width = a.width;
            }
            Command::Verify(a) => {
                s.level = a.level;
                s.criteria = a.criteria;
            }
        }
        s
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = cli.name();
    let config = cli.common.config.clone();
    let flags = cli.settings();
    let merged = match config {
        Some(p) => match Settings::load(&p, command) {
            Ok(file) => flags.or(file),
            Err(msg) => return run::Failure::usage(msg).report(),
        },
        None => flags,
    };
    match run::dispatch(command, merged) {
        Ok(code) => code,
        Err(f) => f.report(),
    }
}
