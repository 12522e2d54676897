//! Panel construction, OLS with period fixed effects, Wald restriction
//! tests, model selection, and the composite/conditional-correlation
//! diagnostics.

mod analysis;
mod depvar;
pub mod dist;
mod ols;
mod panel;
mod select;
mod wald;

pub use analysis::{composite_eci, conditional_correlation, ConditionalCorrelation};
pub use depvar::{
    emission_intensity_depvar, growth_depvar, panel_average_depvar, YearSeries,
};
pub use ols::{ols, RegressionFit};
pub use panel::{build_panel, ColumnSet, ModelSpec, PanelDataset, PanelObservation};
pub use select::{select_multidimensional_model, CandidateReport, SelectionReport};
pub use wald::{wald_f, WaldResult};
