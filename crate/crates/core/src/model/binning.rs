use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::dataset::Dataset;

/// Quantile bin edges with duplicate edges merged.
///
/// Bins are left-closed and right-open except the top bin, which is closed on
/// both ends. Values outside the fitted range are clamped to the end bins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileBins {
    pub edges: Vec<f64>,
    pub requested: usize,
}

impl QuantileBins {
    /// Fits edges at the `i/k` sample quantiles (linear interpolation between
    /// order statistics).
    pub fn fit(values: &[f64], k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Parameter(format!(
                "bin count must be at least 2, got {k}"
            )));
        }
        if values.is_empty() {
            return Err(Error::EmptyInput("no values to bin".into()));
        }
        if let Some(row) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data {
                row,
                message: format!("non-finite value {}", values[row]),
            });
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut edges: Vec<f64> = Vec::with_capacity(k + 1);
        for i in 0..=k {
            let q = quantile_sorted(&sorted, i as f64 / k as f64);
            if edges.last() != Some(&q) {
                edges.push(q);
            }
        }
        Ok(QuantileBins {
            edges,
            requested: k,
        })
    }

    /// Number of bins actually realized after merging duplicate edges.
    pub fn realized(&self) -> usize {
        (self.edges.len() - 1).max(1)
    }

    /// Zero-based bin index of `value`.
    pub fn assign(&self, value: f64) -> usize {
        let m = self.realized();
        // interior edges e_1..e_{m-1}; the bin is the count of those <= value
        let interior = &self.edges[1..self.edges.len().saturating_sub(1).max(1)];
        let idx = interior.partition_point(|&e| e <= value);
        idx.min(m - 1)
    }

    pub fn label(index: usize) -> String {
        format!("b{}", index + 1)
    }
}

/// Sample quantile of sorted data (R type 7).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Outcome of [`bin_column`].
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedColumn {
    pub dataset: Dataset,
    pub bins: QuantileBins,
}

impl BinnedColumn {
    pub fn realized(&self) -> usize {
        self.bins.realized()
    }
}

/// Replaces `column` with `k` quantile-bin labels `b1..bk` computed from
/// `raw_values` (one per row). Labels are ordered by bin, not appearance.
pub fn bin_column(
    dataset: &Dataset,
    column: &str,
    k: usize,
    raw_values: &[f64],
) -> Result<BinnedColumn> {
    if raw_values.len() != dataset.n() {
        return Err(Error::Parameter(format!(
            "{} raw values for {} rows",
            raw_values.len(),
            dataset.n()
        )));
    }
    let bins = QuantileBins::fit(raw_values, k)?;
    let codes = raw_values.iter().map(|&v| bins.assign(v) as u32).collect();
    let levels = (0..bins.realized()).map(QuantileBins::label).collect();
    let dataset = dataset.with_encoded_column(column, codes, levels)?;
    Ok(BinnedColumn { dataset, bins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_schema, RawTable, Schema};

    fn dataset(n: usize) -> Dataset {
        let x: Vec<String> = (0..n).map(|i| (i % 2).to_string()).collect();
        let v: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        validate_schema(
            &RawTable::from_columns(&[("x", x), ("v", v)]),
            &Schema::new("x", "0", "1").with_w(&["v"]),
        )
        .unwrap()
    }

    fn labels(b: &BinnedColumn) -> Vec<String> {
        let c = b.dataset.column_index("v").unwrap();
        (0..b.dataset.n())
            .map(|r| b.dataset.cell(r, c).to_string())
            .collect()
    }

    #[test]
    fn four_points_split_at_median() {
        let b = bin_column(&dataset(4), "v", 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(b.bins.edges, vec![1.0, 2.5, 4.0]);
        assert_eq!(labels(&b), ["b1", "b1", "b2", "b2"]);
    }

    #[test]
    fn constant_values_merge_into_one_bin() {
        let b = bin_column(&dataset(10), "v", 20, &[3.0; 10]).unwrap();
        assert_eq!(b.realized(), 1);
        assert!(labels(&b).iter().all(|l| l == "b1"));
    }

    #[test]
    fn uniform_grid_has_five_per_bin() {
        let values: Vec<f64> = (0..100).map(f64::from).collect();
        let b = bin_column(&dataset(100), "v", 20, &values).unwrap();
        assert_eq!(b.realized(), 20);
        let c = b.dataset.column_index("v").unwrap();
        let mut counts = [0usize; 20];
        for &code in b.dataset.codes(c) {
            counts[code as usize] += 1;
        }
        assert_eq!(counts, [5; 20]);
    }

    #[test]
    fn parameter_and_data_errors() {
        let ds = dataset(4);
        assert!(matches!(
            bin_column(&ds, "v", 1, &[1.0, 2.0, 3.0, 4.0]),
            Err(Error::Parameter(_))
        ));
        assert_eq!(
            bin_column(&ds, "v", 2, &[1.0, f64::NAN, 3.0, 4.0]).unwrap_err(),
            Error::Data {
                row: 1,
                message: "non-finite value NaN".into()
            }
        );
    }

    #[test]
    fn out_of_range_values_clamp() {
        let bins = QuantileBins::fit(&[0.0, 1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(bins.assign(-5.0), 0);
        assert_eq!(bins.assign(1.5), 1);
        assert_eq!(bins.assign(3.0), 1);
        assert_eq!(bins.assign(99.0), 1);
    }
}
