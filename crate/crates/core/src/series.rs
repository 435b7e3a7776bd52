//! Shared domain types: aligned series pairs, profiles, scale grids and the
//! log-log regression every estimator reads its exponent from.
//!
//! Profiles are indexed from 1 in the usual notation (`X_1 .. X_T`); storage
//! here is zero-based, so `values[t - 1]` holds `X_t`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub fn compensated_mean(values: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.value() / values.len() as f64
}

fn validate_series(values: &[f64]) -> Result<()> {
    if values.len() < 2 {
        return Err(Error::EmptyOrTooShort { len: values.len() });
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { index });
    }
    Ok(())
}

/// Two simultaneously recorded series of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPair {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl SeriesPair {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                x_len: x.len(),
                y_len: y.len(),
            });
        }
        validate_series(&x)?;
        validate_series(&y)?;
        Ok(Self { x, y })
    }

    /// Pair of a series with itself.
    pub fn diagonal(series: Vec<f64>) -> Result<Self> {
        Self::new(series.clone(), series)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn swapped(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.x, self.y)
    }
}

/// Cumulative sum of a demeaned series.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    values: Vec<f64>,
}

impl Profile {
    /// Wraps precomputed profile values without demeaning. Used for detrending
    /// checks on synthetic profiles.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        validate_series(&values)?;
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `X_t = sum_{i<=t} (x_i - mean(x))`, accumulated with compensated summation.
pub fn build_profile(series: &[f64]) -> Result<Profile> {
    validate_series(series)?;
    let mean = compensated_mean(series);
    let mut acc = CompensatedSum::new();
    let values = series
        .iter()
        .map(|&v| {
            acc.add(v - mean);
            acc.value()
        })
        .collect();
    Ok(Profile { values })
}

/// What a scale measures for a given method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleKind {
    /// DCCA box size `s`.
    BoxSize,
    /// DMCA centered moving-average window `kappa`.
    Window,
    /// HXA lag `tau`.
    Lag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleGrid {
    scales: Vec<usize>,
    kind: ScaleKind,
}

impl ScaleGrid {
    pub fn new(scales: Vec<usize>, kind: ScaleKind) -> Result<Self> {
        if scales.len() < 3 {
            return Err(Error::InvalidGrid(format!(
                "{} scales given, at least 3 are required",
                scales.len()
            )));
        }
        if scales[0] == 0 {
            return Err(Error::InvalidGrid("scales must be positive".into()));
        }
        if scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(
                "scales must be strictly increasing".into(),
            ));
        }
        if kind == ScaleKind::Window {
            if let Some(&window) = scales.iter().find(|&&k| k % 2 == 0) {
                return Err(Error::EvenWindow { window });
            }
        }
        Ok(Self { scales, kind })
    }

    /// Integer scales spaced evenly in log between `min` and `max`
    /// (both included), `per_decade` candidates per factor of ten, rounded and
    /// deduplicated.
    pub fn log_spaced(min: usize, max: usize, per_decade: usize, kind: ScaleKind) -> Result<Self> {
        if min == 0 || max < min || per_decade == 0 {
            return Err(Error::InvalidGrid(format!(
                "log-spaced grid needs 0 < min <= max and per_decade > 0 (got {min}..{max}, {per_decade})"
            )));
        }
        let ratio = (max as f64 / min as f64).log10();
        let steps = (ratio * per_decade as f64).floor() as usize;
        let mut scales: Vec<usize> = (0..=steps)
            .map(|k| (min as f64 * 10f64.powf(k as f64 / per_decade as f64)).round() as usize)
            .map(|s| s.clamp(min, max))
            .collect();
        scales.push(max);
        scales.dedup();
        Self::new(scales, kind)
    }

    /// All odd windows in `min..=max`.
    pub fn odd_windows(min: usize, max: usize) -> Result<Self> {
        if min.is_multiple_of(2) {
            return Err(Error::EvenWindow { window: min });
        }
        if max.is_multiple_of(2) {
            return Err(Error::EvenWindow { window: max });
        }
        Self::new((min..=max).step_by(2).collect(), ScaleKind::Window)
    }

    /// All lags in `min..=max`.
    pub fn lags(min: usize, max: usize) -> Result<Self> {
        Self::new((min..=max).collect(), ScaleKind::Lag)
    }

    pub fn scales(&self) -> &[usize] {
        &self.scales
    }

    pub fn kind(&self) -> ScaleKind {
        self.kind
    }

    pub fn min(&self) -> usize {
        self.scales[0]
    }

    pub fn max(&self) -> usize {
        *self.scales.last().expect("grid has at least 3 scales")
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    /// Subgrid of scales `<= max`, if it still has at least 3 entries.
    pub fn truncated(&self, max: usize) -> Result<Self> {
        Self::new(
            self.scales.iter().copied().filter(|&s| s <= max).collect(),
            self.kind,
        )
    }
}

/// Ordinary least squares of `ln(value)` on `ln(scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    /// Intercept in natural-log units.
    pub intercept: f64,
    pub n_points: usize,
    pub residual_sse: f64,
}

/// Fits a power law through `(scale, value)` points. Points with non-positive
/// scale or value are skipped.
pub fn loglog_fit<I>(points: I) -> Result<LogLogFit>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let logs: Vec<(f64, f64)> = points
        .into_iter()
        .filter(|&(s, v)| s > 0.0 && v > 0.0 && s.is_finite() && v.is_finite())
        .map(|(s, v)| (s.ln(), v.ln()))
        .collect();
    let n = logs.len();
    if n < 3 {
        return Err(Error::InsufficientPoints { found: n });
    }
    let nf = n as f64;
    let mean_u = logs.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_v = logs.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut suu, mut suv) = (0.0, 0.0);
    for &(u, v) in &logs {
        let du = u - mean_u;
        suu += du * du;
        suv += du * (v - mean_v);
    }
    if suu == 0.0 {
        // every point at a single scale
        return Err(Error::InsufficientPoints { found: 1 });
    }
    let slope = suv / suu;
    let intercept = mean_v - slope * mean_u;
    let residual_sse = logs
        .iter()
        .map(|&(u, v)| {
            let r = v - (intercept + slope * u);
            r * r
        })
        .sum();
    Ok(LogLogFit {
        slope,
        intercept,
        n_points: n,
        residual_sse,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dcca,
    Dmca,
    Hxa,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Dcca, Method::Dmca, Method::Hxa];

    pub fn scale_kind(self) -> ScaleKind {
        match self {
            Method::Dcca => ScaleKind::BoxSize,
            Method::Dmca => ScaleKind::Window,
            Method::Hxa => ScaleKind::Lag,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Dcca => "dcca",
            Method::Dmca => "dmca",
            Method::Hxa => "hxa",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dcca" | "dfa" => Ok(Method::Dcca),
            "dmca" | "dma" => Ok(Method::Dmca),
            "hxa" | "hhca" => Ok(Method::Hxa),
            other => Err(Error::InvalidParameter(format!(
                "unknown method {other:?}, expected dcca, dmca or hxa"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HurstKind {
    Hx,
    Hy,
    Hxy,
    HRho,
}

/// An estimated exponent. Coherency estimates above zero are recorded as-is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstEstimate {
    pub value: f64,
    pub kind: HurstKind,
    pub method: Method,
    pub grid_used: ScaleGrid,
    /// Regression behind the estimate; `None` for averaged (jackknife) estimates.
    pub fit: Option<LogLogFit>,
}
