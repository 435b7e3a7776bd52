mod commands;
mod input;
mod manifest;

use std::path::PathBuf;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use plcoh::{BoxStep, Method, MethodConfig, Preset, ScaleSpacing};

#[derive(Parser)]
#[command(name = "plcoh", version, about = "Power-law coherency estimation and Monte Carlo studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a mixed-correlated ARFIMA pair and write it as `x,y` CSV.
    Generate(GenerateArgs),
    /// Estimate H_rho (with H_x, H_y, H_xy) from a two-column CSV.
    Estimate(EstimateArgs),
    /// Write the detrended fluctuation function of a CSV pair as `scale,value`.
    Fluctuation(FluctuationArgs),
    /// Run a Monte Carlo table (bias / SD / MSE per cell).
    Mc(McArgs),
    /// Run a series-length sweep and fit variance decay exponents.
    Sweep(McArgs),
}

#[derive(Args, Debug, serde::Serialize)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 0.4, allow_hyphen_values = true)]
    pub d1: f64,
    #[arg(long, default_value_t = 0.2, allow_hyphen_values = true)]
    pub d2: f64,
    #[arg(long, default_value_t = 0.2, allow_hyphen_values = true)]
    pub d3: f64,
    #[arg(long, default_value_t = 0.4, allow_hyphen_values = true)]
    pub d4: f64,
    /// Correlation between the second and third innovations.
    #[arg(long, default_value_t = 0.9, allow_hyphen_values = true)]
    pub rho: f64,
    #[arg(long, default_value_t = 1000)]
    pub length: usize,
    /// MA truncation order [default: max(1000, length), at most 100000].
    #[arg(long)]
    pub ntrunc: Option<usize>,
    /// Repetition index (independent substream for the same seed).
    #[arg(long, default_value_t = 0)]
    pub rep: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Dcca,
    Dmca,
    Hxa,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Dcca => Method::Dcca,
            MethodArg::Dmca => Method::Dmca,
            MethodArg::Hxa => Method::Hxa,
        }
    }
}

fn parse_box_step(s: &str) -> Result<BoxStep, String> {
    match s {
        "auto" | "non-overlapping" => Ok(BoxStep::NonOverlapping),
        _ => match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("expected a positive stride or `non-overlapping`, got {s:?}")),
            Ok(n) => Ok(BoxStep::Fixed(n)),
        },
    }
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct MethodArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// DCCA: smallest box size.
    #[arg(long, default_value_t = 10)]
    pub smin: usize,
    /// DCCA: largest box size [default: T/5].
    #[arg(long)]
    pub smax: Option<usize>,
    /// DCCA: increment between box sizes.
    #[arg(long, default_value_t = 10)]
    pub scale_step: usize,
    /// DCCA: use log-spaced box sizes with this many per decade instead.
    #[arg(long)]
    pub scales_per_decade: Option<usize>,
    /// DCCA: box stride, or `non-overlapping`.
    #[arg(long, default_value = "non-overlapping", value_parser = parse_box_step)]
    #[serde(skip)]
    pub boxstep: BoxStep,
    /// DMCA: smallest moving-average window (odd).
    #[arg(long, default_value_t = 3)]
    pub kmin: usize,
    /// DMCA: largest moving-average window (odd).
    #[arg(long, default_value_t = 21)]
    pub kmax: usize,
    /// HXA: largest lag.
    #[arg(long, default_value_t = 20)]
    pub taumax: usize,
    /// HXA: single fit over 1..=taumax instead of the jackknife average.
    #[arg(long)]
    pub no_jackknife: bool,
}

impl MethodArgs {
    pub fn config(&self) -> MethodConfig {
        match self.method {
            MethodArg::Dcca => MethodConfig::Dcca {
                s_min: self.smin,
                s_max: self.smax,
                spacing: match self.scales_per_decade {
                    Some(per_decade) => ScaleSpacing::Log { per_decade },
                    None => ScaleSpacing::Linear {
                        step: self.scale_step,
                    },
                },
                box_step: self.boxstep,
            },
            MethodArg::Dmca => MethodConfig::Dmca {
                kappa_min: self.kmin,
                kappa_max: self.kmax,
            },
            MethodArg::Hxa => MethodConfig::Hxa {
                tau_max: self.taumax,
                jackknife: !self.no_jackknife,
            },
        }
    }
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Write the `scale,rho2` profile here.
    #[arg(long)]
    pub emit_profile: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Xy,
    Xx,
    Yy,
}

#[derive(Args, Debug)]
pub struct FluctuationArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Which detrended moment to write.
    #[arg(long, value_enum, default_value_t = Component::Xy)]
    pub component: Component,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: plcoh::Error| e.to_string())
}

#[derive(Args, Debug, Clone)]
pub struct McArgs {
    /// table1 (DCCA), table2 (HXA), table3 (DMCA) or figure1 (length sweep).
    #[arg(long, value_parser = parse_preset)]
    pub preset: Option<Preset>,
    /// Reduced preset: 100 repetitions, lengths up to 5000.
    #[arg(long)]
    pub quick: bool,
    /// Method for an explicit (non-preset) run.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Options for an explicit run: s_min, kappa_max or tau_max values.
    #[arg(long, value_delimiter = ',')]
    pub options: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub lengths: Vec<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub rho: Vec<f64>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub ntrunc: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "PLCOH_JOBS", default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, default_value = ".")]
    pub outdir: PathBuf,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => commands::generate(&args),
        Command::Estimate(args) => commands::estimate(&args),
        Command::Fluctuation(args) => commands::fluctuation(&args),
        Command::Mc(args) => commands::monte_carlo(&args, false),
        Command::Sweep(args) => commands::monte_carlo(&args, true),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

/// Formats with 6 significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&magnitude) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn method_config_for(method: Method, option: usize) -> MethodConfig {
    match method {
        Method::Dcca => MethodConfig::dcca(option),
        Method::Dmca => MethodConfig::dmca(option),
        Method::Hxa => MethodConfig::hxa_jackknife(option),
    }
}

pub fn flag_error(err: plcoh::Error) -> anyhow::Error {
    match err {
        plcoh::Error::DomainError { name, .. } => anyhow!("--{name}: {err}"),
        other => anyhow!(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(-0.0903456789), "-0.0903457");
        assert_eq!(sig6(1.0), "1.00000");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(1234567.8), "1.23457e6");
        assert_eq!(sig6(0.000012345678), "1.23457e-5");
        assert_eq!(sig6(0.0), "0");
    }

    #[test]
    fn box_step_parsing() {
        assert_eq!(parse_box_step("10"), Ok(BoxStep::Fixed(10)));
        assert_eq!(parse_box_step("non-overlapping"), Ok(BoxStep::NonOverlapping));
        assert!(parse_box_step("0").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
