use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tband_core::experiment::{
    emit_report, run_all, run_band_agreement, run_basis_check, run_g_identity, run_low_band_decay, run_scaling_limit,
    run_smoothed_decay, run_spectrum, run_weyl_law, ExperimentConfig, ExperimentReport, SymbolChoice, DEFAULT_G_OFFSETS,
};
use tband_core::normalization;

/// Spectral projector experiments for Toeplitz operators on the projective line.
#[derive(Debug, Parser)]
#[command(name = "tband", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML experiment configuration; flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (also settable through TBAND_OUT_DIR).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    symbol: Option<Symbol>,
    /// Levels to sweep, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    k_list: Option<Vec<u32>>,
    /// Use the 13-point acceptance sweep 64·2^{i/4}.
    #[arg(long, global = true, conflicts_with = "k_list")]
    fit_sweep: bool,
    /// Base point as `re,im`.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    base_point: Option<Vec<f64>>,
    #[arg(long, global = true)]
    xi: Option<f64>,
    #[arg(long, global = true)]
    varpi: Option<f64>,
    /// Shrink constant `c` in `e_k = c·k^{−ξ}`.
    #[arg(long, global = true)]
    shrink: Option<f64>,
    #[arg(long, global = true)]
    margin: Option<f64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Symbol {
    Height,
    SphereX,
    SphereZ,
    SphereXSquared,
    FirstHarmonic,
    Constant,
}

impl From<Symbol> for SymbolChoice {
    fn from(s: Symbol) -> Self {
        match s {
            Symbol::Height => SymbolChoice::Height,
            Symbol::SphereX => SymbolChoice::SphereX,
            Symbol::SphereZ => SymbolChoice::SphereZ,
            Symbol::SphereXSquared => SymbolChoice::SphereXSquared,
            Symbol::FirstHarmonic => SymbolChoice::FirstHarmonic,
            Symbol::Constant => SymbolChoice::Constant,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gram matrices, closed-form kernel, equivariance and projector checks.
    BasisCheck,
    /// Zero-order eigenvalues against their bounds and the exact spectrum.
    Spectrum {
        #[arg(long, default_value_t = 2)]
        k_min: u32,
        /// Defaults to the largest entry of the k-list.
        #[arg(long)]
        k_max: Option<u32>,
    },
    /// Eigenvalue counts against phase-space volume.
    Weyl {
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 2.0], allow_negative_numbers = true)]
        lambda: Vec<f64>,
    },
    /// Spectral function below the symbol value.
    LowBand,
    /// Band kernel against the Szegő kernel.
    BandAgree,
    /// Rescaled spectral function against its universal limit.
    Scaling,
    /// Decay of the smoothed spectral kernel off the symbol value.
    Smoothed {
        /// Offset `C` of the excluded window `C·k^{−ξ}`.
        #[arg(long, default_value_t = 0.3)]
        c_off: f64,
    },
    /// Both sides of the b-integrated smoothed-kernel identity.
    GIdentity {
        /// Offsets of the tested levels from the symbol value.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        lambda_offsets: Option<Vec<f64>>,
    },
    /// Every experiment in sequence.
    All,
}

fn resolve(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.symbol {
        cfg.symbol = s.into();
    }
    if let Some(ks) = &common.k_list {
        cfg.k_list = ks.clone();
    }
    if common.fit_sweep {
        cfg.k_list = ExperimentConfig::fit_sweep();
    }
    if let Some(m) = &common.base_point {
        anyhow::ensure!(m.len() == 2, "--base-point takes `re,im`");
        cfg.base_point = [m[0], m[1]];
    }
    if let Some(x) = common.xi {
        cfg.band.xi = x;
    }
    if let Some(x) = common.varpi {
        cfg.band.varpi = x;
    }
    if let Some(x) = common.shrink {
        cfg.band.c = x;
    }
    if let Some(x) = common.margin {
        cfg.margin = x;
    }
    if let Some(x) = common.epsilon {
        cfg.chi.epsilon = x;
    }
    if let Some(x) = common.seed {
        cfg.seed = x;
    }
    if let Some(o) = &common.out {
        cfg.output_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(command: &Command, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let report = match command {
        Command::BasisCheck => run_basis_check(cfg)?,
        Command::Spectrum { k_min, k_max } => {
            let hi = k_max.unwrap_or_else(|| *cfg.k_list.iter().max().unwrap());
            let ks: Vec<u32> = (*k_min.max(&1)..=hi).collect();
            anyhow::ensure!(!ks.is_empty(), "empty k range {k_min}..={hi}");
            run_spectrum(cfg, &ks)?
        }
        Command::Weyl { lambda } => run_weyl_law(cfg, lambda)?,
        Command::LowBand => run_low_band_decay(cfg)?,
        Command::BandAgree => run_band_agreement(cfg)?,
        Command::Scaling => run_scaling_limit(cfg)?,
        Command::Smoothed { c_off } => run_smoothed_decay(cfg, *c_off)?,
        Command::GIdentity { lambda_offsets } => {
            run_g_identity(cfg, lambda_offsets.as_deref().unwrap_or(&DEFAULT_G_OFFSETS))?
        }
        Command::All => run_all(cfg)?,
    };
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> Result<u8> {
    let cfg = resolve(&cli.common)?;
    if cli.common.print_config {
        print!("{}", cfg.to_toml_string());
        return Ok(0);
    }
    normalization::ensure().context("normalization self-test")?;
    let report = run(&cli.command, &cfg)?;
    // an explicit flag beats the environment
    let dir = match &cli.common.out {
        Some(o) => o.clone(),
        None => cfg.resolved_output_dir(),
    };
    emit_report(&report, &dir).with_context(|| format!("writing to {}", dir.display()))?;
    print!("{}", report.summary());
    println!("output: {}", dir.display());
    Ok(report.exit_code() as u8)
}
