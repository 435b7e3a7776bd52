//! Power-law coherency between two simultaneously recorded series.
//!
//! The coherency exponent `H_rho = H_xy - (H_x + H_y) / 2` is estimated from
//! the scaling of squared scale-specific correlations built on one of three
//! detrending methods (DCCA, DMCA, HXA). The crate also simulates
//! mixed-correlated ARFIMA pairs with known exponents and runs Monte Carlo
//! bias / variance studies of the estimators.

pub mod coherency;
pub mod error;
pub mod fluctuation;
pub mod generators;
pub mod montecarlo;
pub mod series;

pub use coherency::{
    analyze, coherency_profile, estimate_h_rho, estimate_h_rho_hxa_jackknife,
    estimate_h_rho_on_grid, h_rho_from_profile, CoherencyAnalysis, CoherencyProfile,
    JackknifeEstimate, MethodConfig, ScaleSpacing,
};
pub use error::{Error, Result};
pub use fluctuation::{
    dcca_profile, dfa_profile, dma_profile, dmca_profile, estimate_hurst, estimate_hxy,
    fluctuation_profile, hhca_profile, hxa_profile, BoxStep, FluctuationProfile,
};
pub use generators::{
    arfima_coefficients, generate_innovations, generate_mc_arfima, CoefficientTable,
    McArfimaGenerator, MCArfimaParams,
};
pub use montecarlo::{run_cell, run_length_sweep, run_table, CellResult, ExperimentConfig, Preset};
pub use series::{
    build_profile, loglog_fit, HurstEstimate, HurstKind, LogLogFit, Method, Profile, ScaleGrid,
    ScaleKind, SeriesPair,
};
