use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use conic_rigidity::commands::{self, FlexDemo, Output, Settings, EXIT_ERROR};
use conic_rigidity::numeric::{TolerancePolicy, DEFAULT_REL_TOL};

#[derive(Parser)]
#[command(
    name = "conic-rigidity",
    version,
    about = "Rigidity of pseudo-range frameworks"
)]
struct Cli {
    /// Relative SVD rank tolerance
    #[arg(long, global = true, default_value_t = DEFAULT_REL_TOL)]
    tol: f64,
    /// Number of random configurations for generic rank
    #[arg(long, global = true, default_value_t = 5)]
    seeds: usize,
    /// Base RNG seed
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide infinitesimal rigidity of a framework file
    Check { file: PathBuf },
    /// Split a conic graph into a rigid part and a spanning tree
    Decompose {
        graph: PathBuf,
        #[arg(long)]
        d: Option<usize>,
        /// Write the full decomposition trace as JSON
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Emit a minimally rigid conic graph with suggested arcs
    Design {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measurement counts against two-way ranging
    Compare {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
    },
    /// Sample the flex of the small planar examples
    FlexDemo {
        #[arg(value_enum)]
        which: DemoKind,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random framework with m arcs
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoKind {
    Hyperbola,
    Ellipse,
    Intersection,
}

fn run(cli: Cli) -> conic_rigidity::Result<Output> {
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        return Err(conic_rigidity::Error::InvalidArgument(
            "--tol must be positive".into(),
        ));
    }
    let settings = Settings {
        policy: TolerancePolicy { rel_tol: cli.tol },
        trials: cli.seeds,
        seed: cli.seed,
    };
    match cli.command {
        Command::Check { file } => commands::cmd_check(&file, &settings),
        Command::Decompose { graph, d, trace } => {
            commands::cmd_decompose(&graph, d, trace.as_deref(), &settings)
        }
        Command::Design { n, d, out } => commands::cmd_design(n, d, out.as_deref(), &settings),
        Command::Compare { n, d } => commands::cmd_compare(n, d),
        Command::FlexDemo {
            which,
            samples,
            out,
        } => {
            let which = match which {
                DemoKind::Hyperbola => FlexDemo::Hyperbola,
                DemoKind::Ellipse => FlexDemo::Ellipse,
                DemoKind::Intersection => FlexDemo::Intersection,
            };
            commands::cmd_flex_demo(which, samples, out.as_deref())
        }
        Command::Random { n, d, m, out } => {
            commands::cmd_random(n, d, m, out.as_deref(), &settings)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CONIC_RIGIDITY_LOG", "warn"))
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
