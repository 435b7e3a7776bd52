//! Scale-specific squared correlations and the power-law coherency exponent.
//!
//! At every scale the squared correlation is
//! `rho2 = F_xy^2 / (F_xx F_yy)` using the detrended covariance and variances
//! of one method. Under power-law cross-correlations `rho2 ~ scale^(4 H_rho)`,
//! so `H_rho` is a quarter of the log-log slope.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluctuation::{cross_moments, BoxStep, CrossMoments};
use crate::series::{
    build_profile, loglog_fit, HurstEstimate, HurstKind, LogLogFit, Method, ScaleGrid, ScaleKind,
    SeriesPair,
};

/// Increment between consecutive box sizes in default DCCA grids.
pub const DEFAULT_SCALE_STEP: usize = 10;

/// Smallest `tau*_max` in the HXA jackknife family.
pub const JACKKNIFE_MIN_TAU: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherencyMeta {
    pub series_len: usize,
    pub grid: ScaleGrid,
    pub box_step: Option<BoxStep>,
    /// Scales dropped because a detrended variance was zero there.
    pub dropped: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherencyProfile {
    pub method: Method,
    /// `(scale, rho2)`.
    pub entries: Vec<(usize, f64)>,
    pub meta: CoherencyMeta,
}

/// How DCCA box sizes are laid out between `s_min` and `s_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleSpacing {
    /// `s_min, s_min + step, ...` up to `s_max`.
    Linear { step: usize },
    /// Rounded log-spaced sizes, both ends included.
    Log { per_decade: usize },
}

impl Default for ScaleSpacing {
    fn default() -> Self {
        ScaleSpacing::Linear {
            step: DEFAULT_SCALE_STEP,
        }
    }
}

/// Estimation settings for one method, including how its scale grid is
/// derived from the series length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum MethodConfig {
    /// Box sizes from `s_min` to `s_max` (default `T/5`).
    Dcca {
        s_min: usize,
        s_max: Option<usize>,
        spacing: ScaleSpacing,
        box_step: BoxStep,
    },
    /// Every odd window from `kappa_min` to `kappa_max`.
    Dmca { kappa_min: usize, kappa_max: usize },
    /// Lags `1..=tau_max`; with `jackknife` the estimate is averaged over the
    /// fit ranges `1..=k`, `k = 5..=tau_max`.
    Hxa { tau_max: usize, jackknife: bool },
}

impl MethodConfig {
    pub fn dcca(s_min: usize) -> Self {
        MethodConfig::Dcca {
            s_min,
            s_max: None,
            spacing: ScaleSpacing::default(),
            box_step: BoxStep::default(),
        }
    }

    pub fn dmca(kappa_max: usize) -> Self {
        MethodConfig::Dmca {
            kappa_min: 3,
            kappa_max,
        }
    }

    pub fn hxa_jackknife(tau_max: usize) -> Self {
        MethodConfig::Hxa {
            tau_max,
            jackknife: true,
        }
    }

    pub fn method(&self) -> Method {
        match self {
            MethodConfig::Dcca { .. } => Method::Dcca,
            MethodConfig::Dmca { .. } => Method::Dmca,
            MethodConfig::Hxa { .. } => Method::Hxa,
        }
    }

    /// The option varied across table rows: `s_min`, `kappa_max` or `tau_max`.
    pub fn option_value(&self) -> usize {
        match *self {
            MethodConfig::Dcca { s_min, .. } => s_min,
            MethodConfig::Dmca { kappa_max, .. } => kappa_max,
            MethodConfig::Hxa { tau_max, .. } => tau_max,
        }
    }

    pub fn option_name(&self) -> &'static str {
        match self {
            MethodConfig::Dcca { .. } => "s_min",
            MethodConfig::Dmca { .. } => "kappa_max",
            MethodConfig::Hxa { .. } => "tau_max",
        }
    }

    pub fn box_step(&self) -> BoxStep {
        match *self {
            MethodConfig::Dcca { box_step, .. } => box_step,
            _ => BoxStep::default(),
        }
    }

    pub fn grid(&self, len: usize) -> Result<ScaleGrid> {
        match *self {
            MethodConfig::Dcca {
                s_min,
                s_max,
                spacing,
                ..
            } => {
                let s_max = s_max.unwrap_or(len / 5);
                if s_max < s_min {
                    return Err(Error::InvalidGrid(format!(
                        "s_max = {s_max} is below s_min = {s_min} for T = {len}"
                    )));
                }
                match spacing {
                    ScaleSpacing::Linear { step } if step > 0 => ScaleGrid::new(
                        (s_min..=s_max).step_by(step).collect(),
                        ScaleKind::BoxSize,
                    ),
                    ScaleSpacing::Linear { .. } => {
                        Err(Error::InvalidGrid("scale step must be positive".into()))
                    }
                    ScaleSpacing::Log { per_decade } => {
                        ScaleGrid::log_spaced(s_min, s_max, per_decade, ScaleKind::BoxSize)
                    }
                }
            }
            MethodConfig::Dmca {
                kappa_min,
                kappa_max,
            } => ScaleGrid::odd_windows(kappa_min, kappa_max),
            MethodConfig::Hxa { tau_max, jackknife } => {
                if jackknife && tau_max < JACKKNIFE_MIN_TAU {
                    return Err(Error::InvalidParameter(format!(
                        "jackknife needs tau_max >= {JACKKNIFE_MIN_TAU}, got {tau_max}"
                    )));
                }
                ScaleGrid::lags(1, tau_max)
            }
        }
    }
}

fn squared_correlations(
    method: Method,
    grid: &ScaleGrid,
    moments: &[CrossMoments],
    series_len: usize,
    box_step: BoxStep,
) -> Result<CoherencyProfile> {
    let mut entries = Vec::with_capacity(moments.len());
    let mut dropped = Vec::new();
    for (&scale, m) in grid.scales().iter().zip(moments) {
        let denom = m.xx * m.yy;
        if denom > 0.0 {
            entries.push((scale, (m.xy * m.xy) / denom));
        } else {
            dropped.push(scale);
        }
    }
    if entries.is_empty() {
        return Err(Error::DegenerateSeries);
    }
    Ok(CoherencyProfile {
        method,
        entries,
        meta: CoherencyMeta {
            series_len,
            grid: grid.clone(),
            box_step: (method == Method::Dcca).then_some(box_step),
            dropped,
        },
    })
}

/// Squared scale-specific correlations of a pair on `grid`.
pub fn coherency_profile(
    method: Method,
    pair: &SeriesPair,
    grid: &ScaleGrid,
    box_step: BoxStep,
) -> Result<CoherencyProfile> {
    let px = build_profile(pair.x())?;
    let py = build_profile(pair.y())?;
    let moments = cross_moments(method, &px, &py, grid, box_step)?;
    squared_correlations(method, grid, &moments, pair.len(), box_step)
}

fn fit_rho2<'a>(entries: impl IntoIterator<Item = &'a (usize, f64)>) -> Result<LogLogFit> {
    loglog_fit(entries.into_iter().map(|&(s, r)| (s as f64, r)))
}

/// `H_rho` as a quarter of the log-log slope of `rho2` against scale. Scales
/// with `rho2 = 0` do not enter the fit.
pub fn h_rho_from_profile(profile: &CoherencyProfile) -> Result<HurstEstimate> {
    let fit = fit_rho2(&profile.entries)?;
    Ok(HurstEstimate {
        value: fit.slope / 4.0,
        kind: HurstKind::HRho,
        method: profile.method,
        grid_used: profile.meta.grid.clone(),
        fit: Some(fit),
    })
}

pub fn estimate_h_rho_on_grid(
    method: Method,
    pair: &SeriesPair,
    grid: &ScaleGrid,
    box_step: BoxStep,
) -> Result<HurstEstimate> {
    h_rho_from_profile(&coherency_profile(method, pair, grid, box_step)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JackknifeEstimate {
    pub estimate: HurstEstimate,
    /// Sub-fits that entered the average.
    pub n_fits: usize,
    /// Sub-fits skipped for lack of positive points.
    pub skipped: usize,
}

/// Unweighted mean of `H_rho` fitted over lags `1..=k` for every
/// `k = 5..=tau_max`, from an HXA coherency profile covering those lags.
pub fn jackknife_from_profile(profile: &CoherencyProfile, tau_max: usize) -> Result<JackknifeEstimate> {
    if tau_max < JACKKNIFE_MIN_TAU {
        return Err(Error::InvalidParameter(format!(
            "jackknife needs tau_max >= {JACKKNIFE_MIN_TAU}, got {tau_max}"
        )));
    }
    let mut total = 0.0;
    let mut n_fits = 0usize;
    let mut skipped = 0usize;
    for k in JACKKNIFE_MIN_TAU..=tau_max {
        match fit_rho2(profile.entries.iter().filter(|e| e.0 <= k)) {
            Ok(fit) => {
                total += fit.slope / 4.0;
                n_fits += 1;
            }
            Err(Error::InsufficientPoints { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if n_fits == 0 {
        return Err(Error::AllFitsFailed { attempted: skipped });
    }
    Ok(JackknifeEstimate {
        estimate: HurstEstimate {
            value: total / n_fits as f64,
            kind: HurstKind::HRho,
            method: Method::Hxa,
            grid_used: profile.meta.grid.clone(),
            fit: None,
        },
        n_fits,
        skipped,
    })
}

/// HXA-based `H_rho` averaged over the fit ranges `1..=5`, ..., `1..=tau_max`.
pub fn estimate_h_rho_hxa_jackknife(pair: &SeriesPair, tau_max: usize) -> Result<JackknifeEstimate> {
    let grid = MethodConfig::hxa_jackknife(tau_max).grid(pair.len())?;
    let profile = coherency_profile(Method::Hxa, pair, &grid, BoxStep::default())?;
    jackknife_from_profile(&profile, tau_max)
}

/// `H_rho` with the grid and fitting scheme described by `config`.
pub fn estimate_h_rho(pair: &SeriesPair, config: &MethodConfig) -> Result<HurstEstimate> {
    match *config {
        MethodConfig::Hxa {
            tau_max,
            jackknife: true,
        } => estimate_h_rho_hxa_jackknife(pair, tau_max).map(|j| j.estimate),
        _ => {
            let grid = config.grid(pair.len())?;
            estimate_h_rho_on_grid(config.method(), pair, &grid, config.box_step())
        }
    }
}

/// Everything one estimation run reports: `H_rho` together with the
/// univariate and bivariate exponents read from the same detrended moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherencyAnalysis {
    pub config: MethodConfig,
    pub h_rho: HurstEstimate,
    /// Set for jackknife estimates.
    pub jackknife: Option<(usize, usize)>,
    pub hx: Option<HurstEstimate>,
    pub hy: Option<HurstEstimate>,
    pub hxy: Option<HurstEstimate>,
    pub profile: CoherencyProfile,
}

pub fn analyze(pair: &SeriesPair, config: &MethodConfig) -> Result<CoherencyAnalysis> {
    let method = config.method();
    let grid = config.grid(pair.len())?;
    let box_step = config.box_step();
    let px = build_profile(pair.x())?;
    let py = build_profile(pair.y())?;
    let moments = cross_moments(method, &px, &py, &grid, box_step)?;
    let profile = squared_correlations(method, &grid, &moments, pair.len(), box_step)?;

    let (h_rho, jackknife) = match *config {
        MethodConfig::Hxa {
            tau_max,
            jackknife: true,
        } => {
            let j = jackknife_from_profile(&profile, tau_max)?;
            (j.estimate, Some((j.n_fits, j.skipped)))
        }
        _ => (h_rho_from_profile(&profile)?, None),
    };

    let exponent = |kind: HurstKind, pick: fn(&CrossMoments) -> f64| {
        loglog_fit(
            grid.scales()
                .iter()
                .zip(&moments)
                .map(|(&s, m)| (s as f64, pick(m).abs())),
        )
        .ok()
        .map(|fit| HurstEstimate {
            value: fit.slope / 2.0,
            kind,
            method,
            grid_used: grid.clone(),
            fit: Some(fit),
        })
    };

    Ok(CoherencyAnalysis {
        config: *config,
        hx: exponent(HurstKind::Hx, |m| m.xx),
        hy: exponent(HurstKind::Hy, |m| m.yy),
        hxy: exponent(HurstKind::Hxy, |m| m.xy),
        h_rho,
        jackknife,
        profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(method: Method, grid: ScaleGrid, exponent: f64) -> CoherencyProfile {
        CoherencyProfile {
            method,
            entries: grid
                .scales()
                .iter()
                .map(|&s| (s, (s as f64).powf(exponent)))
                .collect(),
            meta: CoherencyMeta {
                series_len: 1000,
                grid,
                box_step: None,
                dropped: vec![],
            },
        }
    }

    #[test]
    fn exact_power_law_recovery() {
        let p = synthetic(Method::Dmca, ScaleGrid::odd_windows(3, 21).unwrap(), -0.8);
        assert!((h_rho_from_profile(&p).unwrap().value + 0.2).abs() < 1e-10);
    }

    #[test]
    fn jackknife_on_exact_law() {
        let p = synthetic(Method::Hxa, ScaleGrid::lags(1, 20).unwrap(), -0.8);
        let j = jackknife_from_profile(&p, 20).unwrap();
        assert_eq!(j.n_fits, 16);
        assert_eq!(j.skipped, 0);
        assert!((j.estimate.value + 0.2).abs() < 1e-10);
    }

    #[test]
    fn jackknife_single_range_equals_plain_fit() {
        let grid = ScaleGrid::lags(1, 5).unwrap();
        let p = CoherencyProfile {
            method: Method::Hxa,
            entries: vec![(1, 0.9), (2, 0.7), (3, 0.75), (4, 0.5), (5, 0.52)],
            meta: CoherencyMeta {
                series_len: 100,
                grid,
                box_step: None,
                dropped: vec![],
            },
        };
        let j = jackknife_from_profile(&p, 5).unwrap();
        assert_eq!(j.n_fits, 1);
        assert_eq!(j.estimate.value, h_rho_from_profile(&p).unwrap().value);
    }

    #[test]
    fn jackknife_skips_and_fails() {
        let grid = ScaleGrid::lags(1, 7).unwrap();
        let mut entries: Vec<(usize, f64)> = (1..=7).map(|t| (t, 0.0)).collect();
        let meta = CoherencyMeta {
            series_len: 100,
            grid,
            box_step: None,
            dropped: vec![],
        };
        let p = CoherencyProfile {
            method: Method::Hxa,
            entries: entries.clone(),
            meta: meta.clone(),
        };
        assert_eq!(jackknife_from_profile(&p, 7), Err(Error::AllFitsFailed { attempted: 3 }));

        // positive only at lags 2, 6, 7: ranges 1..=5 and 1..=6 fail, 1..=7 fits
        entries[1].1 = 0.5;
        entries[5].1 = 0.3;
        entries[6].1 = 0.25;
        let p = CoherencyProfile {
            method: Method::Hxa,
            entries,
            meta,
        };
        let j = jackknife_from_profile(&p, 7).unwrap();
        assert_eq!((j.n_fits, j.skipped), (1, 2));
        assert!(matches!(
            jackknife_from_profile(&p, 4),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn self_coherency_is_one() {
        let x: Vec<f64> = (0..500).map(|i| ((i * 37 % 101) as f64).sin()).collect();
        let pair = SeriesPair::diagonal(x).unwrap();
        for config in [MethodConfig::dcca(10), MethodConfig::dmca(21), MethodConfig::hxa_jackknife(20)] {
            let a = analyze(&pair, &config).unwrap();
            assert!(a.profile.entries.iter().all(|e| e.1 == 1.0));
            assert_eq!(a.h_rho.value, 0.0);
            assert_eq!(estimate_h_rho(&pair, &config).unwrap().value, 0.0);
        }
    }

    #[test]
    fn constant_series_is_degenerate() {
        let pair = SeriesPair::new(vec![1.0; 200], (0..200).map(|i| i as f64).collect()).unwrap();
        assert_eq!(
            estimate_h_rho(&pair, &MethodConfig::dmca(21)),
            Err(Error::DegenerateSeries)
        );
    }

    #[test]
    fn dcca_grid_defaults_to_fifth_of_length() {
        let g = MethodConfig::dcca(10).grid(500).unwrap();
        assert_eq!(g.scales(), &[10, 20, 30, 40, 50, 60, 70, 80, 90, 100]);
        let g = MethodConfig::dcca(50).grid(1003).unwrap();
        assert_eq!(g.scales(), &[50, 60, 70, 80, 90, 100, 110, 120, 130, 140, 150, 160, 170, 180, 190, 200]);
        let log = MethodConfig::Dcca {
            s_min: 10,
            s_max: None,
            spacing: ScaleSpacing::Log { per_decade: 10 },
            box_step: BoxStep::Fixed(10),
        };
        assert_eq!(log.grid(5000).unwrap().len(), 21);
        assert!(MethodConfig::dcca(100).grid(400).is_err());
        assert!(MethodConfig::hxa_jackknife(4).grid(100).is_err());
    }
}
