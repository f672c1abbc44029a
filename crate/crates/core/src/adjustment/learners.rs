//! Regression learners for continuous panels.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::QuantileBins;
use crate::scm::UnitPredictor;

fn check_shapes(x: &[f64], features: &[Vec<f64>], y: &[f64]) -> Result<()> {
    if x.is_empty() || y.len() != x.len() || features.iter().any(|f| f.len() != x.len()) {
        return Err(Error::Parameter(
            "learner inputs must be non-empty and of equal length".into(),
        ));
    }
    Ok(())
}

/// Empirical conditional mean E[y | x, bins(features)] on quantile-binned
/// features, falling back to E[y | x] for unseen cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMeanLearner {
    bins: Vec<QuantileBins>,
    cells: HashMap<(u8, Vec<usize>), f64>,
    per_x: [f64; 2],
}

impl CellMeanLearner {
    pub fn fit(x: &[f64], features: &[Vec<f64>], y: &[f64], k: usize) -> Result<Self> {
        check_shapes(x, features, y)?;
        let bins = features
            .iter()
            .map(|f| QuantileBins::fit(f, k))
            .collect::<Result<Vec<_>>>()?;
        let mut acc: HashMap<(u8, Vec<usize>), (f64, usize)> = HashMap::new();
        let mut per_x = [(0.0, 0usize); 2];
        for i in 0..x.len() {
            let key = (
                x[i] as u8,
                bins.iter()
                    .zip(features)
                    .map(|(b, f)| b.assign(f[i]))
                    .collect(),
            );
            let e = acc.entry(key).or_default();
            e.0 += y[i];
            e.1 += 1;
            let g = &mut per_x[usize::from(x[i] != 0.0)];
            g.0 += y[i];
            g.1 += 1;
        }
        let mean = |(s, n): (f64, usize)| if n == 0 { 0.0 } else { s / n as f64 };
        Ok(CellMeanLearner {
            bins,
            cells: acc.into_iter().map(|(k, v)| (k, mean(v))).collect(),
            per_x: per_x.map(mean),
        })
    }

    pub fn predict(&self, x: f64, features: &[f64]) -> f64 {
        let key = (
            x as u8,
            self.bins
                .iter()
                .zip(features)
                .map(|(b, f)| b.assign(*f))
                .collect(),
        );
        self.cells
            .get(&key)
            .copied()
            .unwrap_or(self.per_x[usize::from(x != 0.0)])
    }
}

/// Ordinary least squares on (1, x, features).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearLearner {
    pub coefficients: Vec<f64>,
}

impl LinearLearner {
    pub fn fit(x: &[f64], features: &[Vec<f64>], y: &[f64]) -> Result<Self> {
        check_shapes(x, features, y)?;
        let p = 2 + features.len();
        let design = DMatrix::from_fn(x.len(), p, |i, j| match j {
            0 => 1.0,
            1 => x[i],
            _ => features[j - 2][i],
        });
        let target = DVector::from_column_slice(y);
        let beta = design
            .svd(true, true)
            .solve(&target, 1e-12)
            .map_err(|e| Error::Estimation(format!("least squares failed: {e}")))?;
        Ok(LinearLearner {
            coefficients: beta.iter().copied().collect(),
        })
    }

    pub fn predict(&self, x: f64, features: &[f64]) -> f64 {
        let c = &self.coefficients;
        c[0] + c[1] * x + c[2..].iter().zip(features).map(|(b, f)| b * f).sum::<f64>()
    }
}

fn joined(z: &[f64], w: &[f64]) -> Vec<f64> {
    z.iter().chain(w).copied().collect()
}

impl UnitPredictor for CellMeanLearner {
    fn predict(&self, x: f64, z: &[f64], w: &[f64]) -> f64 {
        CellMeanLearner::predict(self, x, &joined(z, w))
    }
}

impl UnitPredictor for LinearLearner {
    fn predict(&self, x: f64, z: &[f64], w: &[f64]) -> f64 {
        LinearLearner::predict(self, x, &joined(z, w))
    }
}
