use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "races", version, about = "Prime and semiprime races in arithmetic progressions")]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Manifest path (default: `<out>.manifest.json`, or `<command>-manifest.json`).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sieve and write normalized Δ, Δ2 and Σ on a log grid.
    Race(RaceArgs),
    /// Compute L-function zeros for a built-in character and write a zero file.
    Zeros(ZerosArgs),
    /// Monte Carlo estimate of δ(q;a,b) or δ2(q;a,b).
    Density(DensityArgs),
    /// First x with Δ < 0 or Δ2 > 0.
    Signchange(SignchangeArgs),
    /// Truncated explicit formulas against sieved data.
    Compare(CompareArgs),
}

/// Accepts `100000`, `100_000` and `1e5`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let clean = s.replace('_', "");
    if let Ok(v) = clean.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = clean.parse().map_err(|_| format!("`{s}` is not a non-negative integer"))?;
    if f.is_finite() && f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64 {
        Ok(f as u64)
    } else {
        Err(format!("`{s}` is not a non-negative integer"))
    }
}

#[derive(Debug, Clone, Args)]
pub struct RaceSelect {
    #[arg(long, default_value_t = 4)]
    pub q: u64,
    #[arg(long, default_value_t = 3)]
    pub a: u64,
    #[arg(long, default_value_t = 1)]
    pub b: u64,
}

#[derive(Debug, Clone, Args)]
pub struct CacheArgs {
    /// Count cache directory (default: $RACES_CACHE_DIR; unset disables caching).
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long)]
    pub no_cache: bool,
}

#[derive(Debug, Args)]
pub struct RaceArgs {
    #[command(flatten)]
    pub race: RaceSelect,
    #[arg(long, value_parser = parse_count, default_value = "100000")]
    pub limit: u64,
    #[arg(long, value_parser = parse_count, default_value = "1000")]
    pub grid_start: u64,
    #[arg(long, value_parser = parse_count, default_value = "400")]
    pub grid_points: u64,
    /// Output CSV (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub cache: CacheArgs,
}

#[derive(Debug, Args)]
pub struct ZerosArgs {
    #[arg(long, default_value_t = 4)]
    pub q: u64,
    /// Character index (default: the real nonprincipal character).
    #[arg(long)]
    pub chi: Option<usize>,
    #[arg(long = "T", alias = "height", default_value_t = 100.0)]
    pub height: f64,
    #[arg(long, default_value_t = races_core::zeros::DEFAULT_STEP)]
    pub step: f64,
    /// Output zero file (default: q<q>_chi<chi>.zeros).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Delta,
    Delta2,
}

#[derive(Debug, Clone, Args)]
pub struct ZeroSourceArgs {
    /// Zero file for a nonprincipal character; repeat once per character.
    /// Without files, zeros are computed (q = 3 or 4 only).
    #[arg(long = "zeros")]
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub race: RaceSelect,
    #[arg(long, value_enum, default_value_t = Which::Delta)]
    pub which: Which,
    /// Zero height (default: 300 computed, or the file height when ingesting).
    #[arg(long = "T", alias = "height")]
    pub height: Option<f64>,
    #[arg(long, value_parser = parse_count, default_value = "2000000")]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = races_core::zeros::DEFAULT_STEP)]
    pub step: f64,
    #[command(flatten)]
    pub zeros: ZeroSourceArgs,
    /// Report CSV (stdout gets a one-line summary either way).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WhichChange {
    DeltaNegative,
    Delta2Positive,
}

#[derive(Debug, Args)]
pub struct SignchangeArgs {
    #[command(flatten)]
    pub race: RaceSelect,
    #[arg(long, value_enum, default_value_t = WhichChange::Delta2Positive)]
    pub which: WhichChange,
    #[arg(long, value_parser = parse_count, default_value = "100000")]
    pub limit: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KappaArg {
    /// Pick by smaller RMS against the sieved prime race.
    Auto,
    InversePhi,
    One,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub race: RaceSelect,
    #[arg(long = "T0", alias = "t0", default_value_t = 100.0)]
    pub t0: f64,
    #[arg(long, value_parser = parse_count, default_value = "10000000")]
    pub limit: u64,
    #[arg(long, value_parser = parse_count, default_value = "10000")]
    pub grid_start: u64,
    #[arg(long, value_parser = parse_count, default_value = "200")]
    pub grid_points: u64,
    #[arg(long, value_enum, default_value_t = KappaArg::Auto)]
    pub kappa: KappaArg,
    #[arg(long, default_value_t = races_core::zeros::DEFAULT_STEP)]
    pub step: f64,
    #[command(flatten)]
    pub zeros: ZeroSourceArgs,
    /// Output CSV (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub cache: CacheArgs,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(parse_count("100000"), Ok(100_000));
        assert_eq!(parse_count("1_000"), Ok(1000));
        assert_eq!(parse_count("1e8"), Ok(100_000_000));
        assert_eq!(parse_count("2e6"), Ok(2_000_000));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("abc").is_err());
    }

    #[test]
    fn cli_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    proptest::proptest! {
        #[test]
        fn plain_integers_parse(n in 0u64..u64::MAX) {
            proptest::prop_assert_eq!(parse_count(&n.to_string()), Ok(n));
        }
    }
}
