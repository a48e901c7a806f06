//! Command-line and config-file options.
//!
//! Every option is optional at parse time so that values can be layered:
//! command-line flags (and `SPINSTAR_SEED` for the seed) win over the
//! subcommand's table in the `--config` TOML file, which wins over the
//! built-in defaults applied by each command.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::CliError;

/// Seed used when neither `--seed`, `SPINSTAR_SEED` nor the config sets one.
pub const DEFAULT_SEED: u64 = 24_301;

#[derive(Debug, Parser)]
#[command(
    name = "spinstar",
    version,
    about = "Disordered spin-star simulator: exact dynamics, conditional W-like and Dicke state preparation, coupling estimation",
    after_help = "Exit codes: 0 success, 2 usage or configuration error, 3 model assumption violated, 4 numerical failure.\n\
                  Seed precedence: --seed, then SPINSTAR_SEED, then the config file, then 24301."
)]
pub struct Cli {
    /// TOML file with one table per subcommand, e.g. [wstate] seed = 7
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form amplitudes and probabilities on a time grid
    Simulate(SimulateArgs),
    /// Conditional W-like state preparation, Monte Carlo trajectories
    Wstate(WstateArgs),
    /// Iterated measurement ladder towards the Dicke state |N/2, -N/2+k>
    Ladder(LadderArgs),
    /// Pairwise concurrence: closed form against the Wootters oracle
    Concurrence(ConcurrenceArgs),
    /// Recover Omega (and coupling ratios) from survival-probability data
    Estimate(EstimateArgs),
    /// Success probability versus relative timing error x = delta/t_n
    Robustness(RobustnessArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Fills every unset option of `self` from `lower`.
pub trait Layered: Sized {
    fn layer(self, lower: Self) -> Self;
    /// Resolves relative paths against `base`.
    fn rebase(self, base: &Path) -> Self;
}

macro_rules! layered {
    ($ty:ty { $($opt:ident),* } paths { $($path:ident),* } flags { $($flag:ident),* }) => {
        impl Layered for $ty {
            fn layer(mut self, lower: Self) -> Self {
                $( if self.$opt.is_none() { self.$opt = lower.$opt; } )*
                $( if self.$path.is_none() { self.$path = lower.$path; } )*
                $( self.$flag = self.$flag || lower.$flag; )*
                self
            }

            fn rebase(mut self, base: &Path) -> Self {
                $( self.$path = self.$path.map(|p| base.join(p)); )*
                self
            }
        }
    };
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateArgs {
    /// Model parameters, JSON {n_spins, couplings, omega, omega0}
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    /// Write here instead of standard output
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Grid start [default: 0]
    #[arg(long)]
    pub t_min: Option<f64>,
    /// Grid end [default: 10]
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Grid size [default: 101]
    #[arg(long)]
    pub points: Option<usize>,
    /// Add sector-evolution columns and a max-deviation footer
    #[arg(long)]
    pub with_oracle: bool,
}
layered!(SimulateArgs { format, t_min, t_max, points } paths { params, output } flags { with_oracle });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WstateArgs {
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Output format [default: json]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Measurement time [default: optimal time t_n]
    #[arg(long)]
    pub time: Option<f64>,
    /// Branch index n of the optimal time t_n [default: 0]
    #[arg(long)]
    pub n: Option<u32>,
    /// Number of trajectories [default: 1000]
    #[arg(long)]
    pub trajectories: Option<u64>,
    #[arg(long, env = "SPINSTAR_SEED")]
    pub seed: Option<u64>,
    /// Emit only the summary record
    #[arg(long)]
    pub summary_only: bool,
}
layered!(WstateArgs { format, time, n, trajectories, seed } paths { params, output } flags { summary_only });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LadderArgs {
    /// Parameters with uniform couplings and zero detuning
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Output format [default: json]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Number of ladder steps (target excitation number)
    #[arg(long)]
    pub k: Option<usize>,
    /// Comma-separated measurement intervals [default: optimal times]
    #[arg(long, value_delimiter = ',')]
    pub schedule: Option<Vec<f64>>,
    /// Branch index n of the optimal step times [default: 0]
    #[arg(long)]
    pub n: Option<u32>,
    /// Number of trajectories [default: 1000]
    #[arg(long)]
    pub trajectories: Option<u64>,
    #[arg(long, env = "SPINSTAR_SEED")]
    pub seed: Option<u64>,
    /// Emit only the summary record
    #[arg(long)]
    pub summary_only: bool,
}
layered!(LadderArgs { format, k, schedule, n, trajectories, seed } paths { params, output } flags { summary_only });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcurrenceArgs {
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// First bath spin (1-based)
    #[arg(long)]
    pub i: Option<usize>,
    /// Second bath spin, greater than i
    #[arg(long)]
    pub j: Option<usize>,
    /// Grid start [default: 0]
    #[arg(long)]
    pub t_min: Option<f64>,
    /// Grid end [default: 10]
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Grid size [default: 200]
    #[arg(long)]
    pub points: Option<usize>,
}
layered!(ConcurrenceArgs { format, i, j, t_min, t_max, points } paths { params, output } flags {});

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateArgs {
    /// Parameters used to synthesize data
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Output format [default: json]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Fit a survival series read from CSV (t,p_hat,shots)
    #[arg(long, value_name = "FILE", conflicts_with = "synthesize")]
    pub from_file: Option<PathBuf>,
    /// Generate the series (and ratio counts) from --params
    #[arg(long)]
    pub synthesize: bool,
    /// Shots per time point; omit for noiseless data
    #[arg(long)]
    pub shots: Option<u64>,
    /// Grid start [default: 0]
    #[arg(long)]
    pub t_min: Option<f64>,
    /// Grid end [default: three periods, 3 pi / Omega]
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Grid size [default: 64]
    #[arg(long)]
    pub points: Option<usize>,
    /// Also fit the floor Delta^2/Omega^2 (off-resonant data)
    #[arg(long)]
    pub fit_floor: bool,
    /// Upper estimate of Omega for the aliasing check
    #[arg(long)]
    pub omega_hint: Option<f64>,
    /// W-like preparations for the per-spin ratio estimate (synthesize mode)
    #[arg(long)]
    pub ratio_shots: Option<u64>,
    /// Comma-separated which-spin-is-up counts to turn into ratios
    #[arg(long, value_delimiter = ',')]
    pub counts: Option<Vec<u64>>,
    /// Where to write the synthesized series
    #[arg(long, value_name = "FILE")]
    pub series_out: Option<PathBuf>,
    #[arg(long, env = "SPINSTAR_SEED")]
    pub seed: Option<u64>,
}
layered!(EstimateArgs { format, shots, t_min, t_max, points, omega_hint, ratio_shots, counts, seed }
    paths { params, output, from_file, series_out } flags { synthesize, fit_floor });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobustnessArgs {
    /// Model parameters [default: one spin, alpha = 1, Delta = 0]
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Branch index n of t_n [default: 100]
    #[arg(long)]
    pub n: Option<u32>,
    /// Half-width of the x range [default: 0.004]
    #[arg(long)]
    pub x_max: Option<f64>,
    /// Grid size [default: 161]
    #[arg(long)]
    pub points: Option<usize>,
}
layered!(RobustnessArgs { format, n, x_max, points } paths { params, output } flags {});

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub simulate: Option<SimulateArgs>,
    pub wstate: Option<WstateArgs>,
    pub ladder: Option<LadderArgs>,
    pub concurrence: Option<ConcurrenceArgs>,
    pub estimate: Option<EstimateArgs>,
    pub robustness: Option<RobustnessArgs>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

/// Applies the config-file table (if any) beneath the command-line values.
pub fn resolve<A: Layered + Default>(flags: A, table: Option<A>, config_path: Option<&Path>) -> A {
    let base = config_path
        .and_then(Path::parent)
        .map(Path::to_path_buf)
        .unwrap_or_default();
    flags.layer(table.unwrap_or_default().rebase(&base))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_config() {
        let flags = WstateArgs {
            seed: Some(1),
            ..Default::default()
        };
        let table: WstateArgs =
            toml::from_str("seed = 9\ntrajectories = 5\nparams = \"p.json\"").unwrap();
        let merged = resolve(flags, Some(table), Some(Path::new("cfg/run.toml")));
        assert_eq!(merged.seed, Some(1));
        assert_eq!(merged.trajectories, Some(5));
        assert_eq!(merged.params, Some(PathBuf::from("cfg/p.json")));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<ConfigFile>("[wstate]\nsed = 1").is_err());
        assert!(toml::from_str::<ConfigFile>("[plot]\n").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
