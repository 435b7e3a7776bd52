//! Finite-sample study: repeated generation of mixed-correlated ARFIMA pairs,
//! estimation of `H_rho`, and bias / SD / MSE summaries per cell.
//!
//! Repetition `r` of every cell draws from the substream `(seed, r)`, so the
//! cells of one table share innovations (common random numbers) and results
//! do not depend on the number of worker threads. Per-repetition estimates
//! are collected in repetition order and folded sequentially.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coherency::{estimate_h_rho, MethodConfig};
use crate::error::{Error, Result};
use crate::generators::{default_truncation, McArfimaGenerator, MCArfimaParams};
use crate::series::{loglog_fit, CompensatedSum, Method};

/// Memory parameters of the reference design: `d1 = d4 = 0.4`, `d2 = d3 = 0.2`.
pub const BASELINE_D: [f64; 4] = [0.4, 0.2, 0.2, 0.4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub d: [f64; 4],
    pub rho23: Vec<f64>,
    pub lengths: Vec<usize>,
    /// Method settings used for every length without an override.
    pub options: Vec<MethodConfig>,
    /// Per-length replacement for `options`.
    #[serde(default)]
    pub options_by_length: BTreeMap<usize, Vec<MethodConfig>>,
    pub repetitions: usize,
    pub seed: u64,
    /// Fixed truncation order; `None` uses the generator default for each length.
    pub n_trunc: Option<usize>,
    /// Worker threads; 0 lets the thread pool decide.
    pub jobs: usize,
}

impl ExperimentConfig {
    pub fn new(options: Vec<MethodConfig>) -> Self {
        Self {
            d: BASELINE_D,
            rho23: vec![0.1, 0.5, 0.9],
            lengths: vec![500, 1000, 5000],
            options,
            options_by_length: BTreeMap::new(),
            repetitions: 1000,
            seed: 1,
            n_trunc: None,
            jobs: 0,
        }
    }

    pub fn options_for(&self, length: usize) -> &[MethodConfig] {
        self.options_by_length
            .get(&length)
            .map(Vec::as_slice)
            .unwrap_or(&self.options)
    }

    pub fn n_trunc_for(&self, length: usize) -> usize {
        self.n_trunc.unwrap_or_else(|| default_truncation(length))
    }

    /// `H_rho` implied by the memory parameters.
    pub fn h_rho_true(&self) -> f64 {
        MCArfimaParams::new(self.d, 0.0, 2, 0).implied_exponents().h_rho
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::InvalidParameter("repetitions must be at least 1".into()));
        }
        if self.rho23.is_empty() || self.lengths.is_empty() {
            return Err(Error::InvalidParameter(
                "correlation and length lists must be non-empty".into(),
            ));
        }
        if self.lengths.iter().any(|&t| self.options_for(t).is_empty()) {
            return Err(Error::InvalidParameter("every length needs at least one method option".into()));
        }
        for &rho in &self.rho23 {
            MCArfimaParams::new(self.d, rho, 2, 0).validate()?;
        }
        Ok(())
    }

    fn params(&self, length: usize, rho23: f64) -> MCArfimaParams {
        MCArfimaParams::new(self.d, rho23, length, self.seed).with_truncation(self.n_trunc_for(length))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub method: Method,
    pub length: usize,
    pub option_name: String,
    pub option: usize,
    pub rho23: f64,
    pub h_rho_true: f64,
    pub mean: f64,
    pub bias: f64,
    /// Sample standard deviation, divisor `n - 1`; 0 when only one
    /// repetition succeeded.
    pub sd: f64,
    /// `bias^2 + sd^2`.
    pub mse: f64,
    pub n_effective: usize,
    pub failures: usize,
    /// Fewer than two successful repetitions, so `sd` carries no information.
    pub degenerate: bool,
}

impl CellResult {
    pub fn variance(&self) -> f64 {
        self.sd * self.sd
    }
}

/// A cell that could not be summarized; the rest of the table still runs.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub method: Method,
    pub length: usize,
    pub option: usize,
    pub rho23: f64,
    pub error: Error,
}

pub type CellOutcome = std::result::Result<CellResult, CellFailure>;

fn summarize(config: &MethodConfig, length: usize, rho23: f64, h_true: f64, estimates: &[Result<f64>]) -> Result<CellResult> {
    let ok: Vec<f64> = estimates.iter().filter_map(|e| e.as_ref().ok().copied()).collect();
    let failures = estimates.len() - ok.len();
    if ok.is_empty() {
        return Err(Error::AllRepetitionsFailed { failures });
    }
    let n = ok.len();
    let mut sum = CompensatedSum::new();
    ok.iter().for_each(|&v| sum.add(v));
    let mean = sum.value() / n as f64;
    let sd = if n > 1 {
        let mut ss = CompensatedSum::new();
        ok.iter().for_each(|&v| ss.add((v - mean) * (v - mean)));
        (ss.value() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let bias = mean - h_true;
    Ok(CellResult {
        method: config.method(),
        length,
        option_name: config.option_name().to_string(),
        option: config.option_value(),
        rho23,
        h_rho_true: h_true,
        mean,
        bias,
        sd,
        mse: bias * bias + sd * sd,
        n_effective: n,
        failures,
        degenerate: n < 2,
    })
}

fn with_pool<T: Send>(jobs: usize, work: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(work))
}

/// Runs every method option on the same repetitions of one `(T, rho23)`
/// design point. Results are in `configs` order.
pub fn run_design_point(
    experiment: &ExperimentConfig,
    length: usize,
    rho23: f64,
    configs: &[MethodConfig],
) -> Result<Vec<CellOutcome>> {
    experiment.validate()?;
    let generator = McArfimaGenerator::new(experiment.params(length, rho23))?;
    let h_true = experiment.h_rho_true();
    log::info!(
        "T = {length}, rho = {rho23}: {} repetitions x {} options",
        experiment.repetitions,
        configs.len()
    );
    let per_rep: Vec<Vec<Result<f64>>> = with_pool(experiment.jobs, || {
        (0..experiment.repetitions as u64)
            .into_par_iter()
            .map(|rep| match generator.generate(rep) {
                Ok(pair) => configs
                    .iter()
                    .map(|c| estimate_h_rho(&pair, c).map(|e| e.value))
                    .collect(),
                Err(e) => vec![Err(e); configs.len()],
            })
            .collect()
    })?;
    Ok(configs
        .iter()
        .enumerate()
        .map(|(k, config)| {
            let estimates: Vec<Result<f64>> = per_rep.iter().map(|r| r[k].clone()).collect();
            summarize(config, length, rho23, h_true, &estimates).map_err(|error| CellFailure {
                method: config.method(),
                length,
                option: config.option_value(),
                rho23,
                error,
            })
        })
        .collect())
}

/// One table cell.
pub fn run_cell(experiment: &ExperimentConfig, length: usize, rho23: f64, config: &MethodConfig) -> Result<CellResult> {
    let mut out = run_design_point(experiment, length, rho23, std::slice::from_ref(config))?;
    out.pop()
        .expect("one outcome per config")
        .map_err(|f| f.error)
}

/// Cartesian product of lengths, options and correlations, ordered by
/// length, then option, then correlation (the row/column layout of the
/// published tables, flattened).
pub fn run_table(experiment: &ExperimentConfig) -> Result<Vec<CellOutcome>> {
    experiment.validate()?;
    let mut cells = Vec::new();
    for &length in &experiment.lengths {
        let configs = experiment.options_for(length);
        let mut by_rho = Vec::with_capacity(experiment.rho23.len());
        for &rho in &experiment.rho23 {
            by_rho.push(run_design_point(experiment, length, rho, configs)?);
        }
        for k in 0..configs.len() {
            for outcomes in &by_rho {
                cells.push(outcomes[k].clone());
            }
        }
    }
    Ok(cells)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub method: Method,
    /// Slope of `ln(variance)` against `ln(T)`.
    pub exponent: f64,
    pub intercept: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub cells: Vec<CellOutcome>,
    pub decay: Vec<std::result::Result<DecayFit, CellFailure>>,
}

impl SweepResult {
    pub fn cells_for(&self, method: Method) -> Vec<&CellResult> {
        self.cells
            .iter()
            .filter_map(|c| c.as_ref().ok())
            .filter(|c| c.method == method)
            .collect()
    }

    pub fn decay_for(&self, method: Method) -> Option<&DecayFit> {
        self.decay
            .iter()
            .filter_map(|d| d.as_ref().ok())
            .find(|d| d.method == method)
    }
}

/// Time-series-length sweep: every option in `experiment.options` at every
/// length (with the first correlation in `rho23`), plus the variance decay
/// exponent of each option across lengths.
pub fn run_length_sweep(experiment: &ExperimentConfig) -> Result<SweepResult> {
    experiment.validate()?;
    let rho = experiment.rho23[0];
    let mut cells = Vec::new();
    for &length in &experiment.lengths {
        cells.extend(run_design_point(experiment, length, rho, &experiment.options)?);
    }
    let decay = experiment
        .options
        .iter()
        .map(|config| {
            let method = config.method();
            let points: Vec<(f64, f64)> = cells
                .iter()
                .filter_map(|c| c.as_ref().ok())
                .filter(|c| c.method == method && c.option == config.option_value())
                .map(|c| (c.length as f64, c.variance()))
                .collect();
            loglog_fit(points)
                .map(|fit| DecayFit {
                    method,
                    exponent: fit.slope,
                    intercept: fit.intercept,
                    n_points: fit.n_points,
                })
                .map_err(|error| CellFailure {
                    method,
                    length: 0,
                    option: config.option_value(),
                    rho23: rho,
                    error,
                })
        })
        .collect();
    Ok(SweepResult { cells, decay })
}

pub const CELL_CSV_HEADER: &str = "method,T,option,rho,bias,sd,mse,n_effective,failures";

/// One line per cell; failed cells carry `NaN` statistics.
pub fn write_cells_csv<W: Write>(mut out: W, cells: &[CellOutcome], repetitions: usize) -> io::Result<()> {
    writeln!(out, "{CELL_CSV_HEADER}")?;
    for cell in cells {
        match cell {
            Ok(c) => writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                c.method, c.length, c.option, c.rho23, c.bias, c.sd, c.mse, c.n_effective, c.failures
            )?,
            Err(f) => writeln!(
                out,
                "{},{},{},{},NaN,NaN,NaN,0,{}",
                f.method, f.length, f.option, f.rho23, repetitions
            )?,
        }
    }
    Ok(())
}

pub fn write_decay_csv<W: Write>(mut out: W, sweep: &SweepResult) -> io::Result<()> {
    writeln!(out, "method,variance_decay_exponent,intercept,n_points")?;
    for d in &sweep.decay {
        match d {
            Ok(d) => writeln!(out, "{},{},{},{}", d.method, d.exponent, d.intercept, d.n_points)?,
            Err(f) => writeln!(out, "{},NaN,NaN,0", f.method)?,
        }
    }
    Ok(())
}

/// `T,mean,variance` for one method, ready for plotting.
pub fn write_series_csv<W: Write>(mut out: W, cells: &[&CellResult]) -> io::Result<()> {
    writeln!(out, "T,mean,variance")?;
    for c in cells {
        writeln!(out, "{},{},{}", c.length, c.mean, c.variance())?;
    }
    Ok(())
}

/// Experiment layouts of the reference study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// DCCA, `s_min` in {10, 20, 50} at T = 500 and {10, 50, 100} otherwise.
    Table1,
    /// HXA jackknife, `tau_max` in {20, 50, 100}.
    Table2,
    /// DMCA, `kappa_max` in {21, 51, 101}.
    Table3,
    /// Length sweep at perfectly correlated innovations with the best
    /// option per method.
    Figure1,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Table1 => "table1",
            Preset::Table2 => "table2",
            Preset::Table3 => "table3",
            Preset::Figure1 => "figure1",
        }
    }

    pub fn is_sweep(self) -> bool {
        self == Preset::Figure1
    }

    /// Full-size configuration, or with `quick` a reduced one
    /// (100 repetitions, lengths up to 5000).
    pub fn experiment(self, quick: bool) -> ExperimentConfig {
        let mut config = match self {
            Preset::Table1 => {
                let mut c = ExperimentConfig::new(
                    [10, 50, 100].into_iter().map(MethodConfig::dcca).collect(),
                );
                c.options_by_length
                    .insert(500, [10, 20, 50].into_iter().map(MethodConfig::dcca).collect());
                c
            }
            Preset::Table2 => ExperimentConfig::new(
                [20, 50, 100].into_iter().map(MethodConfig::hxa_jackknife).collect(),
            ),
            Preset::Table3 => ExperimentConfig::new(
                [21, 51, 101].into_iter().map(MethodConfig::dmca).collect(),
            ),
            Preset::Figure1 => {
                let mut c = ExperimentConfig::new(vec![
                    MethodConfig::dcca(10),
                    MethodConfig::dmca(21),
                    MethodConfig::hxa_jackknife(20),
                ]);
                c.rho23 = vec![1.0];
                c.lengths = if quick {
                    vec![500, 1000, 2000, 5000]
                } else {
                    vec![500, 1000, 2000, 5000, 10_000, 20_000, 50_000, 100_000]
                };
                c
            }
        };
        if quick {
            config.repetitions = 100;
        }
        config
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "table1" => Ok(Preset::Table1),
            "table2" => Ok(Preset::Table2),
            "table3" => Ok(Preset::Table3),
            "figure1" => Ok(Preset::Figure1),
            other => Err(Error::InvalidParameter(format!(
                "unknown preset {other:?}, expected table1, table2, table3 or figure1"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(options: Vec<MethodConfig>) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(options);
        c.lengths = vec![300];
        c.rho23 = vec![0.9];
        c.repetitions = 8;
        c.n_trunc = Some(300);
        c.jobs = 1;
        c
    }

    #[test]
    fn mse_is_bias_squared_plus_variance() {
        let c = small(vec![MethodConfig::dmca(21)]);
        let cell = run_cell(&c, 300, 0.9, &c.options[0]).unwrap();
        assert_eq!(cell.n_effective, 8);
        assert!((cell.mse - (cell.bias * cell.bias + cell.sd * cell.sd)).abs() <= 1e-12 * cell.mse);
        assert!((cell.h_rho_true + 0.2).abs() < 1e-15);
    }

    #[test]
    fn single_repetition_is_degenerate() {
        let mut c = small(vec![MethodConfig::dmca(21)]);
        c.repetitions = 1;
        let cell = run_cell(&c, 300, 0.9, &c.options[0]).unwrap();
        assert_eq!(cell.sd, 0.0);
        assert_eq!(cell.n_effective, 1);
        assert!(cell.degenerate);
    }

    #[test]
    fn failing_cell_does_not_abort_table() {
        // s_min above T/5 cannot form a grid at T = 300
        let c = small(vec![MethodConfig::dcca(100), MethodConfig::dcca(10)]);
        let table = run_table(&c).unwrap();
        assert_eq!(table.len(), 2);
        let failure = table[0].as_ref().unwrap_err();
        assert!(matches!(failure.error, Error::AllRepetitionsFailed { failures: 8 }));
        assert!(table[1].is_ok());

        let mut buf = Vec::new();
        write_cells_csv(&mut buf, &table, 8).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(1).unwrap().starts_with("dcca,300,100,0.9,NaN"));
    }

    #[test]
    fn single_cell_table_matches_run_cell() {
        let c = small(vec![MethodConfig::hxa_jackknife(20)]);
        let table = run_table(&c).unwrap();
        let cell = run_cell(&c, 300, 0.9, &c.options[0]).unwrap();
        assert_eq!(table, vec![Ok(cell)]);
    }

    #[test]
    fn preset_shapes() {
        let t1 = Preset::Table1.experiment(false);
        assert_eq!(t1.options_for(500).iter().map(|c| c.option_value()).collect::<Vec<_>>(), [10, 20, 50]);
        assert_eq!(t1.options_for(5000).iter().map(|c| c.option_value()).collect::<Vec<_>>(), [10, 50, 100]);
        assert_eq!(t1.repetitions, 1000);
        let f1 = Preset::Figure1.experiment(true);
        assert_eq!(f1.rho23, vec![1.0]);
        assert_eq!(f1.repetitions, 100);
        assert!(f1.lengths.iter().all(|&t| t <= 5000));
        assert_eq!("TABLE3".parse::<Preset>().unwrap(), Preset::Table3);
    }

    #[test]
    fn invalid_config_rejected() {
        let mut c = small(vec![MethodConfig::dmca(21)]);
        c.repetitions = 0;
        assert!(run_table(&c).is_err());
        let mut c = small(vec![MethodConfig::dmca(21)]);
        c.rho23 = vec![];
        assert!(run_table(&c).is_err());
        let mut c = small(vec![MethodConfig::dmca(21)]);
        c.d[0] = 0.7;
        assert!(matches!(run_table(&c), Err(Error::DomainError { name: "d1", .. })));
    }
}
