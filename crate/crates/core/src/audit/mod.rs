//! Business-necessity auditing and the statistical/predictive parity sweep.

mod cookbook;
mod equality;
mod pareto;

pub use cookbook::{
    audit_exact, bn_cookbook, yhat_outcome, AuditEcho, AuditReport, Overall, PathwayRecord,
};
pub use equality::{equality_test, Reference, TestDetail, TestOutcome, Verdict, TOLERANCE};
pub use pareto::{default_bn_sets, pareto_sweep, pareto_table, parity_pair, ParetoPoint};
