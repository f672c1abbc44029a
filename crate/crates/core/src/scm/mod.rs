//! Structural causal models: specification, sampling with counterfactual
//! worlds, exact enumeration, and predictive-parity term analysis.

pub mod builtin;
mod enumerate;
mod expr;
mod sample;
mod spec;
mod terms;

pub use enumerate::{enumerate_discrete, ExactDistribution, UnitClass, MAX_STATES};
pub use expr::Expr;
pub use sample::{format_value, sample_units, PanelWorld, Predictions, UnitPanel, UnitPredictor};
pub use spec::{
    Coefficient, Distribution, ExogenousSpec, LinearSpec, Role, ScmDocument, ScmSpec, VariableSpec,
};
pub use terms::{linear_path_effect, pp_terms, PanelOutcome, PpBin, PpTermsReport};
