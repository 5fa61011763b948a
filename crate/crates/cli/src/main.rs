use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use platoon_offload::sim::{Axis, SchemeKind};
use platoon_sim::commands;
use platoon_sim::settings::SEED_ENV;
use platoon_sim::{CliError, CliResult, Settings};

const FIGURES: &str = "\
Figure map:
  Fig. 2   convergence                      (O2 trace per V)
  Fig. 3   run --scheme <s>                 (avg_queue_bits over slots)
  Fig. 4   distribution                     (queue-length histogram)
  Fig. 5   sweep-velocity                   (avg_queue_bits column)
  Fig. 6   sweep-velocity                   (avg_energy_j column)
  Fig. 7   sweep-velocity                   (weighted_metric column)
  Fig. 8   sweep-weight                     (avg_queue_bits column)
  Fig. 9   sweep-weight                     (avg_energy_j column)
  Fig. 10  sweep-weight                     (weighted_metric column)

Precedence: flags > OFFLOAD_SIM_SEED > --config file > defaults.
Exit codes: 0 success, 1 configuration error, 2 runtime error.";

#[derive(Parser, Debug)]
#[command(name = "platoon-sim", version, about = "NOMA computation offloading in a vehicular platoon", after_help = FIGURES)]
struct Cli {
    #[command(flatten)]
    shared: Shared,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Shared {
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override any config key, e.g. `--set arrival_rate=0.05`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Platoon velocity in km/h.
    #[arg(long, global = true)]
    velocity_kmh: Option<String>,
    /// Energy weight V.
    #[arg(long, global = true)]
    weight_v: Option<String>,
    /// Channel-estimation error variance.
    #[arg(long, global = true)]
    est_error_var: Option<String>,
    /// noma, oma or local.
    #[arg(long, global = true)]
    scheme: Option<String>,
    /// Number of slots T.
    #[arg(long, global = true)]
    slots: Option<String>,
    /// Base seed.
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Output CSV path; stdout when absent.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    /// Print the effective configuration to stderr before running.
    #[arg(long, global = true)]
    show_config: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one scheme and write the per-slot trace.
    Run {
        /// One row per vehicle and slot instead of platoon means.
        #[arg(long)]
        per_vehicle: bool,
    },
    /// Sweep the velocity (km/h) for several schemes and seeds.
    SweepVelocity(SweepArgs),
    /// Sweep the energy weight V for several schemes and seeds.
    SweepWeight(SweepArgs),
    /// BSUM objective trace from one slot state, one column per V.
    Convergence {
        #[arg(long, value_delimiter = ',', default_value = "1e12,1.5e12,2e12")]
        weights: Vec<f64>,
    },
    /// Monte Carlo outage probability of the robust rate.
    OutageCheck {
        #[arg(long, default_value_t = 50)]
        instances: usize,
        #[arg(long, default_value_t = 100_000)]
        draws: usize,
    },
    /// Queue-length histogram per scheme.
    Distribution {
        #[arg(long, value_delimiter = ',', default_value = "noma,oma,local")]
        schemes: Vec<String>,
        #[arg(long, default_value_t = 5e4)]
        bin_width: f64,
    },
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Sweep points; defaults to 72..144 km/h or 0.5e12..2e12.
    #[arg(long, value_delimiter = ',')]
    points: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "noma,oma,local")]
    schemes: Vec<String>,
    /// Number of seeds, starting from the configured seed.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
}

fn resolve(shared: &Shared) -> CliResult<Settings> {
    let mut s = Settings::default();
    if let Some(path) = &shared.config {
        s.apply_file(path)?;
    }
    s.apply_env_seed(std::env::var(SEED_ENV).ok().as_deref())?;
    for item in &shared.overrides {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{item}`")))?;
        s.set(k, v)?;
    }
    let flags = [
        ("velocity_kmh", &shared.velocity_kmh),
        ("weight_v", &shared.weight_v),
        ("est_error_var", &shared.est_error_var),
        ("scheme", &shared.scheme),
        ("slots", &shared.slots),
        ("seed", &shared.seed),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            s.set(key, v)?;
        }
    }
    Ok(s)
}

fn schemes(names: &[String]) -> CliResult<Vec<SchemeKind>> {
    names
        .iter()
        .map(|n| n.parse().map_err(|e: platoon_offload::Error| CliError::Config(e.to_string())))
        .collect()
}

fn execute(cli: Cli) -> CliResult<()> {
    let settings = resolve(&cli.shared)?;
    if cli.shared.show_config {
        eprint!("{}", settings.emit());
    }
    let cfg = settings.to_run_config()?;
    let out: Box<dyn Write> = match &cli.shared.out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match cli.command {
        Command::Run { per_vehicle } => commands::run(&cfg, per_vehicle, out),
        Command::SweepVelocity(a) | Command::SweepWeight(a)
            if a.seeds == 0 =>
        {
            Err(CliError::Config("--seeds must be at least 1".into()))
        }
        Command::SweepVelocity(a) => {
            let points = if a.points.is_empty() { vec![72.0, 90.0, 108.0, 126.0, 144.0] } else { a.points };
            let seeds: Vec<u64> = (0..a.seeds).map(|i| cfg.seed + i).collect();
            commands::sweep_table(&cfg, Axis::VelocityKmh, &points, &schemes(&a.schemes)?, &seeds, out)
        }
        Command::SweepWeight(a) => {
            let points = if a.points.is_empty() { vec![0.5e12, 1e12, 1.5e12, 2e12] } else { a.points };
            let seeds: Vec<u64> = (0..a.seeds).map(|i| cfg.seed + i).collect();
            commands::sweep_table(&cfg, Axis::Weight, &points, &schemes(&a.schemes)?, &seeds, out)
        }
        Command::Convergence { weights } => commands::convergence(&cfg, &weights, out),
        Command::OutageCheck { instances, draws } => commands::outage_check(&cfg, instances, draws, out),
        Command::Distribution { schemes: names, bin_width } => {
            if bin_width.is_nan() || bin_width <= 0.0 {
                return Err(CliError::Config("--bin-width must be positive".into()));
            }
            commands::distribution(&cfg, &schemes(&names)?, bin_width, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
