use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kaonlab::NamedState;

#[derive(Debug, Parser)]
#[command(
    name = "kaonlab",
    version,
    about = "Entangled neutral kaons: Bell inequalities, CP violation and decoherence"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML config file.
    #[arg(long, global = true, env = "KAONLAB_CONFIG")]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Append run metadata (version, arguments, wall-clock time).
    #[arg(long, global = true)]
    pub with_metadata: bool,

    #[command(flatten)]
    pub constants: ConstantsArgs,
}

#[derive(Debug, Args, Default)]
pub struct ConstantsArgs {
    /// tau_S in seconds.
    #[arg(long, global = true)]
    pub tau_s: Option<f64>,

    /// tau_L in seconds.
    #[arg(long, global = true)]
    pub tau_l: Option<f64>,

    /// Mass difference in hbar/s.
    #[arg(long, global = true)]
    pub delta_m: Option<f64>,

    #[arg(long, global = true)]
    pub epsilon_abs: Option<f64>,

    #[arg(long, global = true)]
    pub epsilon_arg_deg: Option<f64>,

    #[arg(long, global = true, value_enum)]
    pub decay: Option<Decay>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[allow(clippy::enum_variant_names)]
pub enum Decay {
    Full,
    StableLong,
    NoDecay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Mass,
    Strangeness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitModeArg {
    /// Scale the published corrected prediction.
    Scaled,
    /// Compare against the bare model.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SystemArg {
    Photon,
    Kaon,
    /// Probability form with every state K0bar, over four times.
    Generalized,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stored and derived constants.
    Constants,

    /// Asymmetry against the time difference for several zeta.
    AsymmetryScan {
        #[arg(long, default_value_t = 5.0)]
        dt_max: f64,

        #[arg(long, default_value_t = 101)]
        steps: usize,

        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.13, 1.0])]
        zeta: Vec<f64>,

        #[arg(long, value_enum, default_value_t = BasisArg::Mass)]
        basis: BasisArg,

        /// Left time; the right time is t_l + dt.
        #[arg(long, default_value_t = 0.0)]
        t_l: f64,
    },

    /// Maximize a CHSH function.
    ChshMax {
        #[arg(long, value_enum, default_value_t = SystemArg::Photon)]
        system: SystemArg,

        /// Box as lo:hi per parameter, comma separated; a bare number pins it.
        #[arg(long)]
        bounds: Option<String>,

        #[arg(long)]
        grid_steps: Option<usize>,

        #[arg(long)]
        refine_iters: Option<usize>,

        #[arg(long)]
        seeds: Option<usize>,
    },

    /// Fit the decoherence parameter to asymmetry data.
    FitZeta {
        /// CSV with header label,t_l,t_r,measured,sigma,corrected_theory.
        /// Defaults to the bundled CPLEAR points.
        #[arg(long)]
        data: Option<PathBuf>,

        #[arg(long, value_enum, default_value_t = BasisArg::Mass)]
        basis: BasisArg,

        #[arg(long, value_enum, default_value_t = FitModeArg::Scaled)]
        mode: FitModeArg,
    },

    /// Wigner-type inequality and CP violation.
    Wigner {
        #[command(subcommand)]
        scenario: WignerCommand,
    },

    /// Joint yes/no probabilities for one pair of measurements.
    Probe {
        #[arg(long, default_value = "K0")]
        left: NamedState,

        #[arg(long, default_value_t = 0.0)]
        t_l: f64,

        #[arg(long, default_value = "K0")]
        right: NamedState,

        #[arg(long, default_value_t = 0.0)]
        t_r: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum WignerCommand {
    T0,
    EqualTimes {
        #[arg(long)]
        t: f64,
    },
    TwoTimes {
        #[arg(long)]
        t_a: f64,
        #[arg(long)]
        t_b: f64,
    },
    Threshold {
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    ZetaBound,
    /// Grid over t_a <= t_b.
    RegionScan {
        #[arg(long, default_value_t = 6.0)]
        t_max: f64,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Largest t_b still violated at the given t_a.
    Boundary {
        #[arg(long, default_value_t = 0.0)]
        t_a: f64,
        #[arg(long, default_value_t = 10.0)]
        t_b_max: f64,
    },
}
