use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::QuantileBins;
use crate::scm::sample::{PanelWorld, UnitPanel};
use crate::scm::spec::ScmSpec;

/// How Y enters the conditional means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PanelOutcome {
    /// Indicator of `Y == level`.
    Level(f64),
    /// Y itself (continuous mode).
    Mean,
}

impl PanelOutcome {
    fn apply(self, v: f64) -> f64 {
        match self {
            PanelOutcome::Level(l) => f64::from(u8::from(v == l)),
            PanelOutcome::Mean => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpBin {
    pub bin: usize,
    pub lo: f64,
    pub hi: f64,
    pub term1: f64,
    pub term2: f64,
    pub term3: f64,
    pub ppm: f64,
    /// `ppm − (term1 + term2 + term3)`.
    pub residual: f64,
    /// Units with X = x1, ŷ ∈ b / X = x1, ŷ_x0 ∈ b / X = x0, ŷ ∈ b.
    pub counts: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpTermsReport {
    pub bins: Vec<PpBin>,
    /// Indices of bins skipped because a stratum was empty.
    pub skipped: Vec<usize>,
    pub edges: Vec<f64>,
    pub i_term1: f64,
    pub i_term2: f64,
    pub i_term3: f64,
    pub i_ppm: f64,
    pub max_abs_residual: f64,
}

#[derive(Default, Clone, Copy)]
struct Mean {
    n: usize,
    sum: f64,
}

impl Mean {
    fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
    }

    fn get(self) -> f64 {
        self.sum / self.n as f64
    }
}

/// Splits each bin's predictive-parity gap into the causal term (I), the
/// reverse-causal spurious term (II) and the confounding term (III), using
/// the panel's ground-truth counterfactuals.
///
/// Bins come from quantiles of the factual ŷ; counterfactual ŷ values
/// outside the range are clamped into the end bins.
pub fn pp_terms(panel: &UnitPanel, outcome: PanelOutcome, k_bins: usize) -> Result<PpTermsReport> {
    let preds = panel
        .predictions()
        .ok_or_else(|| Error::Parameter("panel has no predictor columns".into()))?;
    let bins = QuantileBins::fit(&preds.factual, k_bins)?;
    let k = bins.realized();
    let x = panel.x();
    let y = panel.y(PanelWorld::Factual);
    let y0 = panel.y(PanelWorld::X0);
    let y1 = panel.y(PanelWorld::X1);

    // per bin: E[Y_x1|x1,ŷ], E[Y_x0|x1,ŷ], E[Y_x0|x1,ŷ_x0], E[Y_x0|x0,ŷ_x0]
    let mut m = vec![[Mean::default(); 4]; k];
    for u in 0..panel.n() {
        if x[u] == 1.0 {
            let b = bins.assign(preds.factual[u]);
            m[b][0].push(outcome.apply(y1[u]));
            m[b][1].push(outcome.apply(y0[u]));
            m[bins.assign(preds.x0[u])][2].push(outcome.apply(y0[u]));
        } else {
            m[bins.assign(preds.x0[u])][3].push(outcome.apply(y0[u]));
        }
    }
    // consistency makes Y = Y_x1 on x1 units and Y = Y_x0, ŷ = ŷ_x0 on x0
    // units, so PPM_b = E[Y|x1,ŷ∈b] − E[Y|x0,ŷ∈b] = m0 − m3.
    debug_assert!((0..panel.n()).all(|u| {
        let world = PanelWorld::under(x[u] as u8);
        panel.y(world)[u] == y[u] && preds.world(world)[u] == preds.factual[u]
    }));

    let mut out = Vec::new();
    let mut skipped = Vec::new();
    for (b, cell) in m.iter().enumerate() {
        if cell.iter().any(|c| c.n == 0) {
            skipped.push(b);
            continue;
        }
        let [a, bb, c, d] = cell.map(Mean::get);
        let (term1, term2, term3, ppm) = (a - bb, bb - c, c - d, a - d);
        out.push(PpBin {
            bin: b,
            lo: bins.edges[b],
            hi: bins.edges[b + 1],
            term1,
            term2,
            term3,
            ppm,
            residual: ppm - (term1 + term2 + term3),
            counts: [cell[0].n, cell[2].n, cell[3].n],
        });
    }
    if out.is_empty() {
        return Err(Error::Estimation("every bin has an empty stratum".into()));
    }
    let avg = |f: fn(&PpBin) -> f64| out.iter().map(f).sum::<f64>() / out.len() as f64;
    Ok(PpTermsReport {
        i_term1: avg(|b| b.term1),
        i_term2: avg(|b| b.term2),
        i_term3: avg(|b| b.term3),
        i_ppm: avg(|b| b.ppm),
        max_abs_residual: out.iter().map(|b| b.residual.abs()).fold(0.0, f64::max),
        edges: bins.edges.clone(),
        bins: out,
        skipped,
    })
}

/// Path-analysis effect α_XW·α_WY + α_XY of a linear X → W → Y model.
/// With several mediators the products are summed over the W-paths.
pub fn linear_path_effect(scm: &ScmSpec) -> Result<f64> {
    if !scm.is_linear() {
        return Err(Error::Contract("SCM is not declared linear".into()));
    }
    let names = scm.names();
    // total effect of X on each variable, accumulated in topological order
    let mut total = vec![0.0; scm.n_vars()];
    total[scm.x_index()] = 1.0;
    for &i in scm.w_indices().iter().chain([scm.y_index()].iter()) {
        let mut t = 0.0;
        for (j, name) in names.iter().enumerate().take(i) {
            if total[j] != 0.0 {
                t += total[j] * scm.coefficient(name, names[i])?;
            }
        }
        total[i] = t;
    }
    Ok(total[scm.y_index()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::{builtin, sample_units};

    #[test]
    fn linear_effect_formula() {
        assert_eq!(linear_path_effect(&builtin::linear()).unwrap(), 7.0);
        let src = builtin::source("linear")
            .unwrap()
            .replace("2 * X + UW", "0 * X + UW")
            .replace("3 * W + X + UY", "3 * W + 0 * X + UY")
            .replace("value = 2.0", "value = 0.0")
            .replace("value = 1.0", "value = 0.0");
        assert_eq!(
            linear_path_effect(&ScmSpec::from_toml(&src).unwrap()).unwrap(),
            0.0
        );
        assert!(matches!(
            linear_path_effect(&builtin::s1()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn terms_telescope_per_bin() {
        let scm = builtin::gaussian_mediators();
        let pred = |x: f64, _: &[f64], w: &[f64]| w[0] + 0.5 * x + w[1] / 10.0;
        let panel = sample_units(&scm, 3000, 5, Some(&pred)).unwrap();
        let r = pp_terms(&panel, PanelOutcome::Mean, 20).unwrap();
        assert!(r.max_abs_residual <= 1e-12);
        assert_eq!(r.bins.len() + r.skipped.len(), 20);
    }

    #[test]
    fn requires_predictor() {
        let panel = sample_units(&builtin::s1(), 10, 0, None).unwrap();
        assert!(pp_terms(&panel, PanelOutcome::Level(1.0), 2).is_err());
    }
}
