use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cavity_qe::cli::{self, Command, RunConfig};
use cavity_qe::Error;

/// Quantum efficiency and pulse shape of cavity-QED single-photon sources.
///
/// Rates are linear frequencies in GHz (rate / 2π), times in ns. Flags
/// override the values read from --config.
#[derive(Parser, Debug)]
#[command(name = "cavity-qe", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Quantum, coupling and extraction efficiencies, regime labels and the Law-Kimble estimate.
    Efficiency(Common),
    /// Integrate the amplitude equations and write the trajectory.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Add closed-form reference amplitudes (resonant only).
        #[arg(long)]
        reference: bool,
    },
    /// Evaluate efficiency and pulse metrics along one parameter axis.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Axis to sweep: g0 | kappa | gamma | delta.
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated axis values in GHz.
        #[arg(long)]
        values: Option<String>,
        /// analytic | numeric.
        #[arg(long)]
        route: Option<String>,
    },
    /// Find the cavity decay rate that maximizes the quantum efficiency.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kappa_lo_ghz: Option<String>,
        #[arg(long)]
        kappa_hi_ghz: Option<String>,
        /// analytic | numeric.
        #[arg(long)]
        route: Option<String>,
    },
    /// Output-photon spectrum on a detuning grid.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        delta_min_ghz: Option<String>,
        #[arg(long)]
        delta_max_ghz: Option<String>,
        #[arg(long)]
        delta_points: Option<String>,
        /// analytic | numeric.
        #[arg(long)]
        route: Option<String>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted. A `<out>.meta.json` sidecar is written alongside.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    g0_ghz: Option<String>,
    #[arg(long)]
    kappa_ghz: Option<String>,
    #[arg(long)]
    gamma_ghz: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta_ghz: Option<String>,
    #[arg(long)]
    gamma0_ghz: Option<String>,
    #[arg(long)]
    t_max_ns: Option<String>,
    #[arg(long)]
    dt_ns: Option<String>,
    /// No random numbers are drawn anywhere; output depends only on the configuration.
    #[arg(long)]
    seedless: bool,
}

fn build_config(common: &Common, extra: &[(&str, Option<&String>)]) -> Result<RunConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let overrides = [
        ("g0_ghz", common.g0_ghz.as_ref()),
        ("kappa_ghz", common.kappa_ghz.as_ref()),
        ("gamma_ghz", common.gamma_ghz.as_ref()),
        ("delta_ghz", common.delta_ghz.as_ref()),
        ("gamma0_ghz", common.gamma0_ghz.as_ref()),
        ("t_max_ns", common.t_max_ns.as_ref()),
        ("dt_ns", common.dt_ns.as_ref()),
        ("format", common.format.as_ref()),
    ];
    for (key, value) in overrides.iter().chain(extra) {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<bool, Error> {
    let true_str = "true".to_string();
    let (command, cfg) = match &cli.command {
        Cmd::Efficiency(common) => (Command::Efficiency, build_config(common, &[])?),
        Cmd::Simulate { common, reference } => (
            Command::Simulate,
            build_config(common, &[("reference", reference.then_some(&true_str))])?,
        ),
        Cmd::Sweep {
            common,
            axis,
            values,
            route,
        } => (
            Command::Sweep,
            build_config(
                common,
                &[
                    ("sweep_axis", axis.as_ref()),
                    ("sweep_values", values.as_ref()),
                    ("route", route.as_ref()),
                ],
            )?,
        ),
        Cmd::Optimize {
            common,
            kappa_lo_ghz,
            kappa_hi_ghz,
            route,
        } => (
            Command::Optimize,
            build_config(
                common,
                &[
                    ("kappa_lo_ghz", kappa_lo_ghz.as_ref()),
                    ("kappa_hi_ghz", kappa_hi_ghz.as_ref()),
                    ("route", route.as_ref()),
                ],
            )?,
        ),
        Cmd::Spectrum {
            common,
            delta_min_ghz,
            delta_max_ghz,
            delta_points,
            route,
        } => (
            Command::Spectrum,
            build_config(
                common,
                &[
                    ("delta_min_ghz", delta_min_ghz.as_ref()),
                    ("delta_max_ghz", delta_max_ghz.as_ref()),
                    ("delta_points", delta_points.as_ref()),
                    ("route", route.as_ref()),
                ],
            )?,
        ),
    };
    let output = cli::run(command, &cfg)?;
    cli::emit(&output, cfg.out.as_deref())?;
    Ok(output.partial_failure)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("cavity-qe: some sweep points failed; see the error column");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("cavity-qe: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
