use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nfwpt::cli::{run, write_outputs, Command, RunError, EXIT_VALIDATION};
use nfwpt::{Precoder, ScenarioConfig};

#[derive(Parser)]
#[command(name = "nfwpt", version, about = "Near-field WPT path-gain simulator")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file, or a manifest.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Grid spacing as a fraction of the wavelength.
    #[arg(long)]
    spacing_wavelength_frac: Option<f64>,
}

#[derive(Subcommand)]
enum Sub {
    /// Path gain on a horizontal cutting plane through the device.
    Plane {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "mrt-full")]
        precoder: Precoder,
        #[arg(long, default_value_t = 1)]
        n_realizations: usize,
    },
    /// Path gain on the focal disc around the device.
    Disc {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "mrt-full")]
        precoder: Precoder,
        #[arg(long, default_value_t = 1)]
        n_realizations: usize,
        /// Also write the running maximum after every realization.
        #[arg(long)]
        per_realization: bool,
    },
    /// Empirical CDFs on the focal disc; add --outage for a margin report.
    Cdf {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "mrt-full,beam-diversity")]
        precoder: Vec<Precoder>,
        /// Realization counts (defaults to the config's list).
        #[arg(long, value_delimiter = ',')]
        n_realizations: Vec<usize>,
        #[arg(long)]
        outage: Option<f64>,
    },
    /// Same as `cdf` with the margin report always written.
    Margin {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "mrt-full,beam-diversity")]
        precoder: Vec<Precoder>,
        #[arg(long, value_delimiter = ',')]
        n_realizations: Vec<usize>,
        /// Outage probability (defaults to the config's value).
        #[arg(long)]
        outage: Option<f64>,
    },
}

fn load(common: &Common) -> Result<ScenarioConfig, RunError> {
    let mut cfg = match &common.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(f) = common.spacing_wavelength_frac {
        cfg.evaluation.spacing_wavelength_frac = f;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<(), RunError> {
    let (common, cfg, command) = match cli.command {
        Sub::Plane {
            common,
            precoder,
            n_realizations,
        } => {
            let cfg = load(&common)?;
            (
                common,
                cfg,
                Command::Plane {
                    precoder,
                    n_realizations,
                },
            )
        }
        Sub::Disc {
            common,
            precoder,
            n_realizations,
            per_realization,
        } => {
            let cfg = load(&common)?;
            let cmd = Command::Disc {
                precoder,
                n_realizations,
                per_realization,
            };
            (common, cfg, cmd)
        }
        Sub::Cdf {
            common,
            precoder,
            n_realizations,
            outage,
        } => {
            let cfg = load(&common)?;
            let n = if n_realizations.is_empty() {
                cfg.evaluation.n_realizations.clone()
            } else {
                n_realizations
            };
            let cmd = Command::Cdf {
                precoders: precoder,
                n_realizations: n,
                outage,
            };
            (common, cfg, cmd)
        }
        Sub::Margin {
            common,
            precoder,
            n_realizations,
            outage,
        } => {
            let cfg = load(&common)?;
            let n = if n_realizations.is_empty() {
                cfg.evaluation.n_realizations.clone()
            } else {
                n_realizations
            };
            let cmd = Command::Cdf {
                precoders: precoder,
                n_realizations: n,
                outage: Some(outage.unwrap_or(cfg.evaluation.outage)),
            };
            (common, cfg, cmd)
        }
    };
    let output = run(&cfg, &command, common.threads)?;
    write_outputs(&common.out, &output)?;
    if let Some(report) = &output.margin {
        for e in &report.entries {
            println!(
                "{:<24} PG@{:.0e} = {:8.2} dB   reduction vs {} = {:+6.2} dB{}",
                e.strategy,
                report.outage,
                e.pg_at_outage_db,
                report.reference,
                e.reduction_db,
                if e.resolution_warning {
                    "  (below grid resolution)"
                } else {
                    ""
                }
            );
        }
    }
    eprintln!(
        "wrote {} files to {} in {:.2} s",
        output.files.len() + 1,
        common.out.display(),
        output.manifest.elapsed_s
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            ExitCode::from(u8::try_from(code).unwrap_or(EXIT_VALIDATION as u8))
        }
    }
}
