use clap::{Parser, Subcommand};
use magnon_sensor::cli::{
    cmd_montecarlo, cmd_reproduce, cmd_spectrum, cmd_stability, cmd_sweep, parse_grid_param,
    StabilityAxes,
};
use magnon_sensor::config::{load_config, RunConfig};
use magnon_sensor::error::{Error, Result};
use std::path::PathBuf;

/// Dual-frequency-modulated cavity-magnon weak-magnetic-field sensor
/// simulator. Exit codes: 0 success, 1 config error, 2 physics precondition
/// failure (instability, stiffness).
#[derive(Parser)]
#[command(name = "magnon-sensor", version)]
struct Cli {
    /// JSON config path (defaults to the built-in operating point).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides config output.directory).
    #[arg(long, global = true)]
    outdir: Option<PathBuf>,
    /// RNG seed override for stochastic commands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Frequency scan of Y_out, R_B, N_ad with SQL flags.
    Spectrum,
    /// One-parameter sweep (lambda2_ratio | temperature | cooperativity | detuning).
    Sweep,
    /// Routh-Hurwitz report plus a two-parameter stability map.
    Stability {
        /// lambda1 | lambda2 | delta_a | delta_m | g (delta/g axes in kappa_m).
        #[arg(long, default_value = "lambda1")]
        x_param: String,
        #[arg(long, default_value_t = 0.0)]
        x_min: f64,
        #[arg(long, default_value_t = 2.0)]
        x_max: f64,
        #[arg(long, default_value_t = 41)]
        x_points: usize,
        #[arg(long, default_value = "lambda2")]
        y_param: String,
        #[arg(long, default_value_t = 0.0)]
        y_min: f64,
        #[arg(long, default_value_t = 2.0)]
        y_max: f64,
        #[arg(long, default_value_t = 41)]
        y_points: usize,
    },
    /// Euler-Maruyama run with Welch PSD and analytic comparison.
    Montecarlo,
    /// Emit figure data and the MATCH/DISCREPANCY reproduction report.
    Reproduce {
        /// fig2a | fig2b | fig3a | fig3b | fig4a | fig4b | fig7a | fig7b | all.
        #[arg(long, default_value = "all")]
        figure: String,
    },
}

fn axis(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 1 || !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(Error::Config(format!("bad axis range [{lo}, {hi}] with {n} points")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

fn run(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.outdir {
        config.output.directory = dir.clone();
    }
    if let Some(seed) = cli.seed {
        config.montecarlo.get_or_insert_with(Default::default).seed = seed;
    }

    let written = match &cli.command {
        Command::Spectrum => cmd_spectrum(&config)?,
        Command::Sweep => cmd_sweep(&config)?,
        Command::Stability {
            x_param,
            x_min,
            x_max,
            x_points,
            y_param,
            y_min,
            y_max,
            y_points,
        } => {
            let axes = StabilityAxes {
                x_param: parse_grid_param(x_param)?,
                x: axis(*x_min, *x_max, *x_points)?,
                y_param: parse_grid_param(y_param)?,
                y: axis(*y_min, *y_max, *y_points)?,
            };
            cmd_stability(&config, &axes)?
        }
        Command::Montecarlo => cmd_montecarlo(&config)?,
        Command::Reproduce { figure } => cmd_reproduce(figure, &config.output.directory)?,
    };
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
