mod commands;
mod config;
mod error;
mod format;
mod validate;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::ShootArgs;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Time-optimal path planning in time-varying current fields.
#[derive(Parser)]
#[command(name = "tvplan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan one path; writes path.csv and counters.csv.
    Plan {
        config: PathBuf,
        /// Override the configured preset.
        #[arg(long)]
        preset: Option<String>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Counters and timings over starts, grid sizes and presets; writes bench.csv.
    Bench {
        config: PathBuf,
        /// Comma-separated presets, overriding [bench].presets.
        #[arg(long, value_delimiter = ',')]
        presets: Option<Vec<String>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimal departure time; writes departure_curve.csv and departure_summary.csv.
    Departure {
        config: PathBuf,
        /// Comma-separated minimizers, overriding [departure].methods.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a time-optimal trajectory; writes trajectory.csv.
    ///
    /// Without --theta0 the shooting reference from start to goal is computed.
    Shoot {
        config: PathBuf,
        /// Initial heading in radians.
        #[arg(long, allow_hyphen_values = true)]
        theta0: Option<f64>,
        /// End time when shooting a fixed heading.
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Longest mission considered by the reference search.
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the oracle checks on a bundled jet fixture.
    Validate {
        #[arg(long, default_value = "SP1")]
        fixture: String,
    },
    /// Print vertex and edge counts of the configured graph.
    GraphStats { config: PathBuf },
    /// Sample the configured field on a lattice; writes x,y,t,u,v CSV.
    FieldExport {
        config: PathBuf,
        #[arg(long, default_value_t = 31)]
        nx: usize,
        #[arg(long, default_value_t = 21)]
        ny: usize,
        /// Comma-separated sample times (default: the configured t0).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        times: Option<Vec<f64>>,
        /// Output file (default: <output_dir>/field.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn out_dir(cfg: &RunConfig, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| cfg.output_dir.clone())
}

fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Plan { config, preset, out } => {
            let cfg = commands::with_preset(RunConfig::load(&config)?, preset.as_deref())?;
            let dir = out_dir(&cfg, out);
            commands::plan(cfg, &dir)
        }
        Command::Bench { config, presets, out } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(p) = presets {
                cfg.bench.get_or_insert_with(|| config::BenchSpec {
                    presets: Vec::new(),
                    starts: Vec::new(),
                    grid_sizes: Vec::new(),
                });
                cfg.bench.as_mut().unwrap().presets = p;
                cfg.validate()?;
            }
            let dir = out_dir(&cfg, out);
            commands::bench(cfg, &dir)
        }
        Command::Departure { config, methods, out } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(m) = methods {
                cfg.departure
                    .as_mut()
                    .ok_or_else(|| CliError::config("missing [departure] section"))?
                    .methods = m;
                cfg.validate()?;
            }
            let dir = out_dir(&cfg, out);
            commands::departure(cfg, &dir)
        }
        Command::Shoot {
            config,
            theta0,
            t_end,
            dt,
            t_max,
            out,
        } => {
            let cfg = RunConfig::load(&config)?;
            let dir = out_dir(&cfg, out);
            commands::shoot(cfg, ShootArgs { theta0, t_end, dt, t_max }, &dir)
        }
        Command::Validate { fixture } => {
            let checks = validate::run_checks(&fixture)?;
            let lines: Vec<String> = checks.iter().map(|c| c.to_string()).collect();
            let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
            if failed.is_empty() {
                Ok(lines.join("\n"))
            } else {
                let _ = writeln!(io::stdout(), "{}", lines.join("\n"));
                Err(CliError::Validation(failed.join(", ")))
            }
        }
        Command::GraphStats { config } => commands::graph_stats(&RunConfig::load(&config)?),
        Command::FieldExport {
            config,
            nx,
            ny,
            times,
            out,
        } => {
            let cfg = RunConfig::load(&config)?;
            let times = times.unwrap_or_else(|| vec![cfg.search.t0]);
            let file = out.unwrap_or_else(|| cfg.output_dir.join("field.csv"));
            commands::field_export(&cfg, nx, ny, &times, &file)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(msg) => {
            // A closed pipe (e.g. `| head`) is not an error.
            let _ = writeln!(io::stdout(), "{}", msg.trim_end());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
