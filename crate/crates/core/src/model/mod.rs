//! Standard Fairness Model data representation: schema, validated
//! categorical datasets, quantile binning, and the shared estimate types.

mod binning;
mod dataset;
mod schema;
mod types;

pub use binning::{bin_column, quantile_sorted, BinnedColumn, QuantileBins};
pub use dataset::{parse_number, validate_schema, Dataset, RawTable, Roles, Strata};
pub use schema::Schema;
pub use types::{
    BnSpec, Contrast, EffectEstimate, EstimateRecord, Event, Flag, Intervention, Pathway,
    DEFAULT_LEVEL,
};
