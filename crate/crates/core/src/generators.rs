//! Mixed-correlated ARFIMA(0,d,0) pairs.
//!
//! Each output series is the sum of two truncated MA(inf) filters applied to
//! Gaussian innovations:
//!
//! ```text
//! x_t = sum_{n=0}^{N} a_n(d1) e1_{t-n} + sum_{n=0}^{N} a_n(d2) e2_{t-n}
//! y_t = sum_{n=0}^{N} a_n(d3) e3_{t-n} + sum_{n=0}^{N} a_n(d4) e4_{t-n}
//! ```
//!
//! with `a_n(d) = Gamma(n+d) / (Gamma(n+1) Gamma(d))`. Innovations are
//! contemporaneously correlated through a 4x4 correlation matrix (by default
//! only `e2`/`e3` are correlated) and uncorrelated at every non-zero lag.
//! `T + N` innovations are drawn so that every output point sees the full
//! kernel; nothing is discarded as burn-in.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::SeriesPair;

/// Truncation order used when none is given: `max(1000, T)`, capped at 10^5.
pub fn default_truncation(length: usize) -> usize {
    length.clamp(1000, 100_000)
}

fn check_memory(name: &'static str, d: f64) -> Result<()> {
    if !d.is_finite() || d.abs() >= 0.5 {
        return Err(Error::DomainError { name, value: d });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub d: f64,
    pub coeffs: Vec<f64>,
}

/// `a_0 ..= a_{n_max}` of the fractional-integration filter, by the forward
/// recursion `a_n = a_{n-1} (n - 1 + d) / n`.
pub fn arfima_coefficients(d: f64, n_max: usize) -> Result<CoefficientTable> {
    check_memory("d", d)?;
    let mut coeffs = Vec::with_capacity(n_max + 1);
    coeffs.push(1.0);
    let mut prev = 1.0;
    for n in 1..=n_max {
        let nf = n as f64;
        prev *= (nf - 1.0 + d) / nf;
        coeffs.push(prev);
    }
    Ok(CoefficientTable { d, coeffs })
}

/// Theoretical exponents implied by the memory parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpliedExponents {
    pub hx: f64,
    pub hy: f64,
    pub hxy: f64,
    pub h_rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCArfimaParams {
    /// Memory parameters `d1..d4`.
    pub d: [f64; 4],
    /// Innovation standard deviations.
    pub sigma_eps: [f64; 4],
    /// Contemporaneous innovation correlation matrix.
    pub correlation: [[f64; 4]; 4],
    pub length: usize,
    pub n_trunc: usize,
    pub seed: u64,
}

impl MCArfimaParams {
    /// Unit-variance innovations, only `e2`/`e3` correlated (with `rho23`),
    /// default truncation.
    pub fn new(d: [f64; 4], rho23: f64, length: usize, seed: u64) -> Self {
        let mut correlation = [[0.0; 4]; 4];
        for (i, row) in correlation.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        correlation[1][2] = rho23;
        correlation[2][1] = rho23;
        Self {
            d,
            sigma_eps: [1.0; 4],
            correlation,
            length,
            n_trunc: default_truncation(length),
            seed,
        }
    }

    /// `d1 = d4 = 0.4`, `d2 = d3 = 0.2`.
    pub fn baseline(rho23: f64, length: usize, seed: u64) -> Self {
        Self::new([0.4, 0.2, 0.2, 0.4], rho23, length, seed)
    }

    pub fn with_truncation(mut self, n_trunc: usize) -> Self {
        self.n_trunc = n_trunc;
        self
    }

    pub fn with_sigma(mut self, sigma_eps: [f64; 4]) -> Self {
        self.sigma_eps = sigma_eps;
        self
    }

    pub fn rho23(&self) -> f64 {
        self.correlation[1][2]
    }

    pub fn implied_exponents(&self) -> ImpliedExponents {
        let hx = self.d[0] + 0.5;
        let hy = self.d[3] + 0.5;
        let hxy = 0.5 + (self.d[1] + self.d[2]) / 2.0;
        ImpliedExponents {
            hx,
            hy,
            hxy,
            h_rho: hxy - (hx + hy) / 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        const NAMES: [&str; 4] = ["d1", "d2", "d3", "d4"];
        for (name, &d) in NAMES.iter().zip(&self.d) {
            check_memory(name, d)?;
        }
        if self.length < 2 {
            return Err(Error::EmptyOrTooShort { len: self.length });
        }
        if self.n_trunc < 1 {
            return Err(Error::InvalidParameter("n_trunc must be at least 1".into()));
        }
        if let Some(s) = self.sigma_eps.iter().find(|s| !s.is_finite() || **s < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "innovation standard deviation {s} must be finite and non-negative"
            )));
        }
        for i in 0..4 {
            if self.correlation[i][i] != 1.0 {
                return Err(Error::InvalidParameter(
                    "correlation matrix must have a unit diagonal".into(),
                ));
            }
            for j in 0..4 {
                let c = self.correlation[i][j];
                if !(-1.0..=1.0).contains(&c) || c != self.correlation[j][i] {
                    return Err(Error::InvalidParameter(format!(
                        "correlation entry ({},{}) = {c} must be symmetric and within [-1, 1]",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        cholesky(&self.correlation)?;
        Ok(())
    }
}

/// Lower-triangular factor of a positive semi-definite 4x4 matrix.
fn cholesky(m: &[[f64; 4]; 4]) -> Result<[[f64; 4]; 4]> {
    const TOL: f64 = 1e-12;
    let mut l = [[0.0; 4]; 4];
    for j in 0..4 {
        let pivot = m[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        if pivot < -TOL {
            return Err(Error::InvalidParameter(
                "innovation correlation matrix is not positive semi-definite".into(),
            ));
        }
        l[j][j] = pivot.max(0.0).sqrt();
        for i in j + 1..4 {
            let r = m[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if l[j][j] > 0.0 {
                l[i][j] = r / l[j][j];
            } else if r.abs() > TOL {
                return Err(Error::InvalidParameter(
                    "innovation correlation matrix is not positive semi-definite".into(),
                ));
            }
        }
    }
    Ok(l)
}

fn repetition_rng(seed: u64, rep_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep_index);
    rng
}

/// Four innovation sequences of length `T + n_trunc`, deterministic in
/// `(seed, rep_index)`.
pub fn generate_innovations(params: &MCArfimaParams, rep_index: u64) -> Result<[Vec<f64>; 4]> {
    params.validate()?;
    let chol = cholesky(&params.correlation)?;
    Ok(draw_innovations(params, &chol, rep_index))
}

fn draw_innovations(params: &MCArfimaParams, chol: &[[f64; 4]; 4], rep_index: u64) -> [Vec<f64>; 4] {
    let len = params.length + params.n_trunc;
    let mut rng = repetition_rng(params.seed, rep_index);
    let z: [Vec<f64>; 4] = std::array::from_fn(|_| {
        (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
    });
    std::array::from_fn(|i| {
        let sigma = params.sigma_eps[i];
        let row = chol[i];
        if (0..4).all(|k| k == i || row[k] == 0.0) {
            return z[i].iter().map(|v| sigma * row[i] * v).collect();
        }
        (0..len)
            .map(|t| sigma * (0..=i).map(|k| row[k] * z[k][t]).sum::<f64>())
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvolutionMethod {
    /// FFT when `T * n_trunc` is large, direct otherwise.
    #[default]
    Auto,
    Direct,
    Fft,
}

const FFT_THRESHOLD: usize = 1 << 17;

struct FftPlan {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Transformed kernels for d1..d4.
    kernels: [Vec<Complex<f64>>; 4],
}

/// Reusable generator: coefficient tables (and FFT plans) are built once and
/// shared across repetitions.
pub struct McArfimaGenerator {
    params: MCArfimaParams,
    chol: [[f64; 4]; 4],
    coeffs: [Vec<f64>; 4],
    fft: Option<FftPlan>,
}

impl McArfimaGenerator {
    pub fn new(params: MCArfimaParams) -> Result<Self> {
        Self::with_method(params, ConvolutionMethod::Auto)
    }

    pub fn with_method(params: MCArfimaParams, method: ConvolutionMethod) -> Result<Self> {
        params.validate()?;
        let chol = cholesky(&params.correlation)?;
        let mut coeffs: [Vec<f64>; 4] = Default::default();
        for (slot, &d) in coeffs.iter_mut().zip(&params.d) {
            *slot = arfima_coefficients(d, params.n_trunc)?.coeffs;
        }
        let use_fft = match method {
            ConvolutionMethod::Direct => false,
            ConvolutionMethod::Fft => true,
            ConvolutionMethod::Auto => {
                params.length.saturating_mul(params.n_trunc + 1) > FFT_THRESHOLD
            }
        };
        let fft = use_fft.then(|| {
            let size = (params.length + params.n_trunc).next_power_of_two();
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(size);
            let inverse = planner.plan_fft_inverse(size);
            let kernels = std::array::from_fn(|i| {
                let mut buf = to_complex(&coeffs[i], size);
                forward.process(&mut buf);
                buf
            });
            FftPlan {
                size,
                forward,
                inverse,
                kernels,
            }
        });
        Ok(Self {
            params,
            chol,
            coeffs,
            fft,
        })
    }

    pub fn params(&self) -> &MCArfimaParams {
        &self.params
    }

    pub fn uses_fft(&self) -> bool {
        self.fft.is_some()
    }

    pub fn generate(&self, rep_index: u64) -> Result<SeriesPair> {
        let eps = draw_innovations(&self.params, &self.chol, rep_index);
        let (x, y) = match &self.fft {
            Some(plan) => (
                self.filter_fft(plan, [(0, &eps[0]), (1, &eps[1])]),
                self.filter_fft(plan, [(2, &eps[2]), (3, &eps[3])]),
            ),
            None => (
                self.filter_direct([(0, &eps[0]), (1, &eps[1])]),
                self.filter_direct([(2, &eps[2]), (3, &eps[3])]),
            ),
        };
        SeriesPair::new(x, y)
    }

    fn filter_direct(&self, parts: [(usize, &Vec<f64>); 2]) -> Vec<f64> {
        let n_trunc = self.params.n_trunc;
        (0..self.params.length)
            .map(|t| {
                parts
                    .iter()
                    .map(|&(k, e)| convolve_at(&self.coeffs[k], e, n_trunc + t))
                    .sum()
            })
            .collect()
    }

    fn filter_fft(&self, plan: &FftPlan, parts: [(usize, &Vec<f64>); 2]) -> Vec<f64> {
        let mut acc = vec![Complex::new(0.0, 0.0); plan.size];
        for (k, e) in parts {
            let mut buf = to_complex(e, plan.size);
            plan.forward.process(&mut buf);
            for ((a, b), h) in acc.iter_mut().zip(&buf).zip(&plan.kernels[k]) {
                *a += b * h;
            }
        }
        plan.inverse.process(&mut acc);
        // Indices >= n_trunc never wrap, so the circular result equals the
        // linear convolution there.
        let scale = 1.0 / plan.size as f64;
        let start = self.params.n_trunc;
        acc[start..start + self.params.length]
            .iter()
            .map(|c| c.re * scale)
            .collect()
    }
}

#[inline]
fn convolve_at(coeffs: &[f64], e: &[f64], t: usize) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(n, a)| a * e[t - n])
        .sum()
}

fn to_complex(values: &[f64], size: usize) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(size, Complex::new(0.0, 0.0));
    buf
}

/// One pair from the mixed-correlated process. Builds a fresh generator; use
/// [`McArfimaGenerator`] when drawing many repetitions.
pub fn generate_mc_arfima(params: &MCArfimaParams, rep_index: u64) -> Result<SeriesPair> {
    McArfimaGenerator::new(params.clone())?.generate(rep_index)
}

/// Applies the filter to explicit innovations (each of length `T + n_trunc`).
pub fn filter_innovations(
    d: [f64; 4],
    innovations: &[Vec<f64>; 4],
    length: usize,
    n_trunc: usize,
) -> Result<SeriesPair> {
    for e in innovations {
        if e.len() != length + n_trunc {
            return Err(Error::InvalidParameter(format!(
                "innovation length {} != T + n_trunc = {}",
                e.len(),
                length + n_trunc
            )));
        }
    }
    let coeffs: Vec<Vec<f64>> = d
        .iter()
        .map(|&d| arfima_coefficients(d, n_trunc).map(|t| t.coeffs))
        .collect::<Result<_>>()?;
    let series = |a: usize, b: usize| -> Vec<f64> {
        (0..length)
            .map(|t| {
                convolve_at(&coeffs[a], &innovations[a], n_trunc + t)
                    + convolve_at(&coeffs[b], &innovations[b], n_trunc + t)
            })
            .collect()
    };
    SeriesPair::new(series(0, 1), series(2, 3))
}
