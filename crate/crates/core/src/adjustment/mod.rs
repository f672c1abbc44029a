//! Predictors at the two ends of the parity spectrum and in between.

mod cells;
mod efficient;
mod fair;
mod learners;

pub use cells::{rational_label, rational_value, Rational};
pub use efficient::{fit_efficient_predictor, EfficientFit, EfficientPredictor, PredictedColumn};
pub use fair::{adjusted_name, fair_adjust, AdjustReport, AdjustedPredictor};
pub use learners::{CellMeanLearner, LinearLearner};
