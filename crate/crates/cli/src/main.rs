//! `t5drive` command-line runner.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use t5drive::config::ConfigFile;

use commands::Overrides;
use error::CliError;
use output::{config_digest, OutputDir, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "t5drive", version, about = "Torque-converter drivetrain studies for Type-5 wind turbines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Frequency response and torque-ratio curve of the automotive converter.
    ValidateHonda(Common),
    /// Search the scale factor and blade-angle adjustments; writes the scaled parameters.
    Scale(Common),
    /// Steady-state initialization sweep over the speed ratio.
    InitSweep(Common),
    /// Closed-loop drivetrain simulation.
    Simulate(Common),
    /// Impeller-torque frequency sweep of the converter alone.
    FreqSweep(Common),
    /// Steady torque ratio against speed ratio.
    TorqueCurve(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write gnuplot scripts next to the CSV files.
    #[arg(long)]
    emit_plots: bool,
    /// Lower end of the speed-ratio grid
    #[arg(long)]
    nu_lo: Option<f64>,
    /// Upper end of the speed-ratio grid
    #[arg(long)]
    nu_hi: Option<f64>,
    /// Speed-ratio grid spacing
    #[arg(long)]
    nu_step: Option<f64>,
    /// Step size override (s).
    #[arg(long)]
    dt: Option<f64>,
    /// Simulated time override (s).
    #[arg(long)]
    duration: Option<f64>,
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::ValidateHonda(c) => ("validate-honda", c),
            Command::Scale(c) => ("scale", c),
            Command::InitSweep(c) => ("init-sweep", c),
            Command::Simulate(c) => ("simulate", c),
            Command::FreqSweep(c) => ("freq-sweep", c),
            Command::TorqueCurve(c) => ("torque-curve", c),
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let (name, common) = cli.command.parts();
    let mut cfg = ConfigFile::load(&common.config)?;
    let overrides = Overrides {
        nu_lo: common.nu_lo,
        nu_hi: common.nu_hi,
        nu_step: common.nu_step,
        dt: common.dt,
        duration: common.duration,
    };
    overrides.apply(&mut cfg)?;
    let digest = config_digest(&cfg)?;

    let mut out = OutputDir::create(&common.out, common.emit_plots)?;
    let summary = match cli.command {
        Command::ValidateHonda(_) => commands::validate_honda(&cfg, &mut out)?,
        Command::Scale(_) => commands::scale(&cfg, &mut out)?,
        Command::InitSweep(_) => commands::init_sweep(&cfg, &mut out)?,
        Command::Simulate(_) => commands::simulate(&cfg, &mut out)?,
        Command::FreqSweep(_) => commands::freq_sweep(&cfg, &mut out)?,
        Command::TorqueCurve(_) => commands::torque_curve(&cfg, &mut out)?,
    };

    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: name.to_string(),
        config_path: common.config.display().to_string(),
        config_digest: digest,
        parameters: json!({
            "overrides": {
                "nu_lo": common.nu_lo,
                "nu_hi": common.nu_hi,
                "nu_step": common.nu_step,
                "dt": common.dt,
                "duration": common.duration,
            },
            "emit_plots": common.emit_plots,
            "summary": summary,
        }),
        wall_time_s: started.elapsed().as_secs_f64(),
        outputs: out.files().to_vec(),
    };
    manifest.write(&common.out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
