//! Scale-dependent detrended covariances.
//!
//! * DCCA: least-squares linear trend removed from the profiles in boxes of
//!   size `s`. Boxes are non-overlapping by default; a fixed stride is also
//!   supported (stride 1 gives the fully overlapping variant). Per-box
//!   covariances use the `s - 1` divisor and are averaged over the boxes
//!   actually evaluated.
//! * DMCA: residuals of the profiles around a centered, unweighted moving
//!   average of odd window `kappa`, averaged over the `T - kappa + 1` centers.
//! * HXA: mean product of `tau`-lag profile increments (time resolution 1).
//!
//! With `x = y` these reduce to DFA, DMA and HHCA respectively.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{
    build_profile, loglog_fit, CompensatedSum, HurstEstimate, HurstKind, Method, Profile,
    ScaleGrid, SeriesPair,
};

/// Placement of consecutive DCCA boxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxStep {
    /// Box starts advance by the box size.
    #[default]
    NonOverlapping,
    /// Box starts advance by a fixed stride.
    Fixed(usize),
}

impl BoxStep {
    pub fn stride(self, box_size: usize) -> usize {
        match self {
            BoxStep::NonOverlapping => box_size,
            BoxStep::Fixed(step) => step,
        }
    }
}

impl std::fmt::Display for BoxStep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoxStep::NonOverlapping => f.write_str("non-overlapping"),
            BoxStep::Fixed(step) => write!(f, "{step}"),
        }
    }
}

/// Detrended covariance and the two detrended variances at one scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossMoments {
    pub xy: f64,
    pub xx: f64,
    pub yy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationMeta {
    pub series_len: usize,
    pub grid: ScaleGrid,
    /// DCCA box placement; `None` for the other methods.
    pub box_step: Option<BoxStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationProfile {
    pub method: Method,
    /// `(scale, value)`; cross values may be negative.
    pub entries: Vec<(usize, f64)>,
    pub meta: FluctuationMeta,
}

fn check_grid(method: Method, grid: &ScaleGrid, len: usize, box_step: BoxStep) -> Result<()> {
    if grid.kind() != method.scale_kind() {
        return Err(Error::InvalidGrid(format!(
            "{method} needs a {:?} grid, got {:?}",
            method.scale_kind(),
            grid.kind()
        )));
    }
    match method {
        Method::Dcca => {
            if box_step == BoxStep::Fixed(0) {
                return Err(Error::InvalidParameter("box step must be positive".into()));
            }
            for &s in grid.scales() {
                if s < 4 {
                    return Err(Error::DegenerateBox { scale: s });
                }
                if s > len {
                    return Err(Error::ScaleTooLarge { scale: s, len });
                }
            }
            if grid.max() > len / 5 {
                log::warn!(
                    "largest box size {} exceeds T/5 = {}; estimates at large scales are unreliable",
                    grid.max(),
                    len / 5
                );
            }
        }
        Method::Dmca => {
            for &k in grid.scales() {
                if k % 2 == 0 {
                    return Err(Error::EvenWindow { window: k });
                }
                if k > len {
                    return Err(Error::WindowTooLarge { window: k, len });
                }
            }
        }
        Method::Hxa => {
            for &tau in grid.scales() {
                if tau == 0 || tau >= len {
                    return Err(Error::LagOutOfRange {
                        lag: tau,
                        max: len.saturating_sub(1),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Detrended cross moments of two profiles at every scale of `grid`.
/// `box_step` is only used by DCCA.
pub fn cross_moments(
    method: Method,
    px: &Profile,
    py: &Profile,
    grid: &ScaleGrid,
    box_step: BoxStep,
) -> Result<Vec<CrossMoments>> {
    if px.len() != py.len() {
        return Err(Error::LengthMismatch {
            x_len: px.len(),
            y_len: py.len(),
        });
    }
    check_grid(method, grid, px.len(), box_step)?;
    let (x, y) = (px.values(), py.values());
    let moments = grid
        .scales()
        .iter()
        .map(|&scale| match method {
            Method::Dcca => dcca_at(x, y, scale, box_step.stride(scale)),
            Method::Dmca => dmca_at(x, y, scale),
            Method::Hxa => hxa_at(x, y, scale),
        })
        .collect();
    Ok(moments)
}

fn dcca_at(x: &[f64], y: &[f64], s: usize, step: usize) -> CrossMoments {
    let len = x.len();
    let centre = (s as f64 - 1.0) / 2.0;
    let t: Vec<f64> = (0..s).map(|k| k as f64 - centre).collect();
    let stt = t.iter().map(|v| v * v).sum::<f64>();
    let mut rx = vec![0.0; s];
    let mut ry = vec![0.0; s];
    let (mut sxy, mut sxx, mut syy) = (
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    );
    let mut boxes = 0usize;
    let mut start = 0usize;
    while start + s <= len {
        detrend_box(&x[start..start + s], &t, stt, &mut rx);
        detrend_box(&y[start..start + s], &t, stt, &mut ry);
        let (mut bxy, mut bxx, mut byy) = (0.0, 0.0, 0.0);
        for (a, b) in rx.iter().zip(&ry) {
            bxy += a * b;
            bxx += a * a;
            byy += b * b;
        }
        let denom = s as f64 - 1.0;
        sxy.add(bxy / denom);
        sxx.add(bxx / denom);
        syy.add(byy / denom);
        boxes += 1;
        start += step;
    }
    let n = boxes as f64;
    CrossMoments {
        xy: sxy.value() / n,
        xx: sxx.value() / n,
        yy: syy.value() / n,
    }
}

/// Residuals of `values` around their least-squares line; `t` are centered
/// time indices with `sum(t) = 0` and `sum(t^2) = stt`.
#[inline]
fn detrend_box(values: &[f64], t: &[f64], stt: f64, out: &mut [f64]) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let slope = values.iter().zip(t).map(|(v, tk)| v * tk).sum::<f64>() / stt;
    for ((o, v), tk) in out.iter_mut().zip(values).zip(t) {
        *o = v - mean - slope * tk;
    }
}

fn dmca_at(x: &[f64], y: &[f64], window: usize) -> CrossMoments {
    let terms = x.len() - window + 1;
    let rx = moving_average_residuals(x, window);
    let ry = moving_average_residuals(y, window);
    let (mut sxy, mut sxx, mut syy) = (
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    );
    for (a, b) in rx.iter().zip(&ry) {
        sxy.add(a * b);
        sxx.add(a * a);
        syy.add(b * b);
    }
    let n = terms as f64;
    CrossMoments {
        xy: sxy.value() / n,
        xx: sxx.value() / n,
        yy: syy.value() / n,
    }
}

/// `X_i - MA_window(X)_i` for every center `i` whose window fits.
fn moving_average_residuals(values: &[f64], window: usize) -> Vec<f64> {
    if window == 1 {
        return vec![0.0; values.len()];
    }
    // centers run over zero-based [half, len - half), i.e. len - window + 1 terms
    let half = window / 2;
    let w = window as f64;
    let mut sum = CompensatedSum::new();
    for &v in &values[..window] {
        sum.add(v);
    }
    let mut out = Vec::with_capacity(values.len() - window + 1);
    for centre in half..values.len() - half {
        if centre > half {
            sum.add(values[centre + half] - values[centre - half - 1]);
        }
        out.push(values[centre] - sum.value() / w);
    }
    out
}

fn hxa_at(x: &[f64], y: &[f64], lag: usize) -> CrossMoments {
    let terms = x.len() - lag;
    let (mut sxy, mut sxx, mut syy) = (
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    );
    for t in 0..terms {
        let dx = x[t + lag] - x[t];
        let dy = y[t + lag] - y[t];
        sxy.add(dx * dy);
        sxx.add(dx * dx);
        syy.add(dy * dy);
    }
    let n = terms as f64;
    CrossMoments {
        xy: sxy.value() / n,
        xx: sxx.value() / n,
        yy: syy.value() / n,
    }
}

/// Cross fluctuation function of a pair for any method.
pub fn fluctuation_profile(
    method: Method,
    pair: &SeriesPair,
    grid: &ScaleGrid,
    box_step: BoxStep,
) -> Result<FluctuationProfile> {
    let px = build_profile(pair.x())?;
    let py = build_profile(pair.y())?;
    let moments = cross_moments(method, &px, &py, grid, box_step)?;
    Ok(FluctuationProfile {
        method,
        entries: grid
            .scales()
            .iter()
            .zip(&moments)
            .map(|(&s, m)| (s, m.xy))
            .collect(),
        meta: FluctuationMeta {
            series_len: pair.len(),
            grid: grid.clone(),
            box_step: (method == Method::Dcca).then_some(box_step),
        },
    })
}

/// `F^2_DCCA(s)`.
pub fn dcca_profile(pair: &SeriesPair, grid: &ScaleGrid, box_step: BoxStep) -> Result<FluctuationProfile> {
    fluctuation_profile(Method::Dcca, pair, grid, box_step)
}

/// DFA fluctuation `F^2_DFA(s)`: DCCA of the series with itself.
pub fn dfa_profile(series: &[f64], grid: &ScaleGrid, box_step: BoxStep) -> Result<FluctuationProfile> {
    dcca_profile(&SeriesPair::diagonal(series.to_vec())?, grid, box_step)
}

/// `F^2_DMCA(kappa)`.
pub fn dmca_profile(pair: &SeriesPair, grid: &ScaleGrid) -> Result<FluctuationProfile> {
    fluctuation_profile(Method::Dmca, pair, grid, BoxStep::default())
}

pub fn dma_profile(series: &[f64], grid: &ScaleGrid) -> Result<FluctuationProfile> {
    dmca_profile(&SeriesPair::diagonal(series.to_vec())?, grid)
}

/// Height-height covariance `K_xy(tau)`.
pub fn hxa_profile(pair: &SeriesPair, grid: &ScaleGrid) -> Result<FluctuationProfile> {
    fluctuation_profile(Method::Hxa, pair, grid, BoxStep::default())
}

pub fn hhca_profile(series: &[f64], grid: &ScaleGrid) -> Result<FluctuationProfile> {
    hxa_profile(&SeriesPair::diagonal(series.to_vec())?, grid)
}

/// Exponent from a fluctuation profile: half the log-log slope of `|value|`
/// against scale, zero values excluded.
pub fn hurst_from_profile(profile: &FluctuationProfile, kind: HurstKind) -> Result<HurstEstimate> {
    let fit = loglog_fit(
        profile
            .entries
            .iter()
            .map(|&(s, v)| (s as f64, v.abs())),
    )?;
    Ok(HurstEstimate {
        value: fit.slope / 2.0,
        kind,
        method: profile.method,
        grid_used: profile.meta.grid.clone(),
        fit: Some(fit),
    })
}

/// Bivariate Hurst exponent `H_xy`.
pub fn estimate_hxy(
    method: Method,
    pair: &SeriesPair,
    grid: &ScaleGrid,
    box_step: BoxStep,
) -> Result<HurstEstimate> {
    hurst_from_profile(&fluctuation_profile(method, pair, grid, box_step)?, HurstKind::Hxy)
}

/// Univariate Hurst exponent (DFA, DMA or HHCA).
pub fn estimate_hurst(
    method: Method,
    series: &[f64],
    grid: &ScaleGrid,
    box_step: BoxStep,
) -> Result<HurstEstimate> {
    let pair = SeriesPair::diagonal(series.to_vec())?;
    hurst_from_profile(&fluctuation_profile(method, &pair, grid, box_step)?, HurstKind::Hx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::ScaleKind;

    fn lcg_series(len: usize, seed: u64) -> Vec<f64> {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (0..len)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect()
    }

    #[test]
    fn linear_profile_is_annihilated() {
        let profile = Profile::from_values((0..200).map(|t| 3.0 * t as f64 - 7.0).collect()).unwrap();
        let grid = ScaleGrid::new(vec![4, 10, 25, 40], ScaleKind::BoxSize).unwrap();
        for m in cross_moments(Method::Dcca, &profile, &profile, &grid, BoxStep::Fixed(1)).unwrap() {
            assert!(m.xy.abs() < 1e-18, "{}", m.xy);
        }
    }

    #[test]
    fn constant_series_gives_zero_everywhere() {
        let series = vec![2.5; 100];
        let boxes = ScaleGrid::new(vec![4, 8, 16], ScaleKind::BoxSize).unwrap();
        assert!(dfa_profile(&series, &boxes, BoxStep::Fixed(10)).unwrap().entries.iter().all(|e| e.1 == 0.0));
        let windows = ScaleGrid::odd_windows(3, 9).unwrap();
        assert!(dma_profile(&series, &windows).unwrap().entries.iter().all(|e| e.1 == 0.0));
        let lags = ScaleGrid::lags(1, 5).unwrap();
        let p = hhca_profile(&series, &lags).unwrap();
        assert!(p.entries.iter().all(|e| e.1 == 0.0));
        assert_eq!(
            hurst_from_profile(&p, HurstKind::Hx),
            Err(Error::InsufficientPoints { found: 0 })
        );
    }

    #[test]
    fn unit_window_gives_zero() {
        let pair = SeriesPair::new(lcg_series(30, 1), lcg_series(30, 2)).unwrap();
        let grid = ScaleGrid::new(vec![1, 3, 5], ScaleKind::Window).unwrap();
        let p = dmca_profile(&pair, &grid).unwrap();
        assert_eq!(p.entries[0], (1, 0.0));
    }

    #[test]
    fn grid_errors() {
        let pair = SeriesPair::new(lcg_series(30, 1), lcg_series(30, 2)).unwrap();
        let g = ScaleGrid::new(vec![3, 5, 8], ScaleKind::BoxSize).unwrap();
        assert_eq!(dcca_profile(&pair, &g, BoxStep::Fixed(1)), Err(Error::DegenerateBox { scale: 3 }));
        let g = ScaleGrid::new(vec![4, 5, 31], ScaleKind::BoxSize).unwrap();
        assert_eq!(dcca_profile(&pair, &g, BoxStep::Fixed(1)), Err(Error::ScaleTooLarge { scale: 31, len: 30 }));
        let g = ScaleGrid::odd_windows(3, 31).unwrap();
        assert_eq!(dmca_profile(&pair, &g), Err(Error::WindowTooLarge { window: 31, len: 30 }));
        let g = ScaleGrid::lags(28, 30).unwrap();
        assert_eq!(hxa_profile(&pair, &g), Err(Error::LagOutOfRange { lag: 30, max: 29 }));
        let g = ScaleGrid::lags(1, 5).unwrap();
        assert!(matches!(dcca_profile(&pair, &g, BoxStep::Fixed(1)), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn diagonal_reduction_is_exact() {
        let x = lcg_series(120, 7);
        let pair = SeriesPair::diagonal(x.clone()).unwrap();
        let boxes = ScaleGrid::new(vec![4, 9, 20], ScaleKind::BoxSize).unwrap();
        assert_eq!(dcca_profile(&pair, &boxes, BoxStep::Fixed(3)).unwrap(), dfa_profile(&x, &boxes, BoxStep::Fixed(3)).unwrap());
        let px = build_profile(&x).unwrap();
        let m = cross_moments(Method::Dcca, &px, &px, &boxes, BoxStep::Fixed(3)).unwrap();
        assert!(m.iter().all(|m| m.xy == m.xx && m.xx == m.yy && m.xx >= 0.0));
    }

    #[test]
    fn exact_power_law_profile() {
        let grid = ScaleGrid::lags(1, 30).unwrap();
        let profile = FluctuationProfile {
            method: Method::Hxa,
            entries: grid.scales().iter().map(|&s| (s, (s as f64).powf(1.4))).collect(),
            meta: FluctuationMeta {
                series_len: 100,
                grid,
                box_step: None,
            },
        };
        let est = hurst_from_profile(&profile, HurstKind::Hxy).unwrap();
        assert!((est.value - 0.7).abs() < 1e-10);
    }
}
