use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::adjustment::cells::{rational_value, CellCounts, Rational};
use crate::adjustment::efficient::PredictedColumn;
use crate::error::Result;
use crate::model::{BnSpec, Dataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustReport {
    pub bn: String,
    /// Rows whose x1-cell was unobserved and scored from a coarser cell.
    pub pooled_rows: usize,
    /// The centring constant P̂(y | x1) used for removed pathways.
    pub constant: f64,
    /// Range of the adjusted scores, which need not lie in [0, 1].
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjustedPredictor {
    pub name: String,
    pub column: PredictedColumn,
    pub report: AdjustReport,
}

/// Column name of an adjusted predictor, e.g. `yhat_bn_010`.
pub fn adjusted_name(bn: BnSpec) -> String {
    format!("yhat_bn_{bn}")
}

/// Builds Ŷ_BN from the cell frequencies f(x, z, w) = P̂(y | x, z, w).
///
/// With q1(z) = Σ_w f(x1, z, w) P̂(w | x1, z) = P̂(y | x1, z),
/// h̄(w) = Σ_z P̂(z | x0) f(x1, z, w) and c = P̂(y | x1), the x1-score is
///
/// | IE | SE | h(z, w)     |
/// |----|----|-------------|
/// | 1  | 1  | f(x1, z, w) |
/// | 0  | 1  | q1(z)       |
/// | 1  | 0  | h̄(w)        |
/// | 0  | 0  | c           |
///
/// and the x0-score is h − [DE ∈ bn]·(f(x1, z, w) − f(x0, z, w)).
///
/// On the fitted data the DE, SE-only and IE+SE rows reproduce the plug-in
/// effects of Y exactly and zero out the others. The W-only row drops z
/// entirely; its IE equals that of Y and its SE vanishes when W ⫫ Z | X,
/// and otherwise up to the z-dependence of the mediator distribution.
/// Values are exact rationals; bn = 111 reproduces the efficient predictor.
pub fn fair_adjust(data: &Dataset, bn: BnSpec, y_level: &str) -> Result<AdjustedPredictor> {
    let counts = CellCounts::new(data, y_level)?;
    let st = data.strata();
    let c = counts.p_x(1);
    let z_free = (bn.ie && !bn.se).then(|| z_free_scores(data, &counts));
    let mut pooled_rows = 0;
    let values: Vec<Rational> = (0..data.n())
        .map(|r| {
            let (x, z, zw) = (st.x[r] as usize, st.z[r] as usize, st.zw[r] as usize);
            let (f1, pooled) = counts.p_zw(1, zw, z);
            pooled_rows += usize::from(pooled);
            let q1 = counts.p_z(1, z).0;
            let h = match (bn.ie, bn.se) {
                (true, true) => f1,
                (false, true) => q1,
                (true, false) => z_free.as_ref().unwrap()[zw],
                (false, false) => c,
            };
            if x == 0 && bn.de {
                let f0 = Rational::new(counts.s_zw[0][zw], counts.n_zw[0][zw]);
                h - (f1 - f0)
            } else {
                h
            }
        })
        .collect();
    let numeric: Vec<f64> = values.iter().map(rational_value).collect();
    let report = AdjustReport {
        bn: bn.to_string(),
        pooled_rows,
        constant: rational_value(&c),
        min: numeric.iter().copied().fold(f64::INFINITY, f64::min),
        max: numeric.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    };
    Ok(AdjustedPredictor {
        name: adjusted_name(bn),
        column: PredictedColumn::from_values(values, 0),
        report,
    })
}

/// h̄(w) = Σ_z P̂(z | x0) f(x1, z, w) for the w-part of every (z, w) stratum.
fn z_free_scores(data: &Dataset, counts: &CellCounts) -> Vec<Rational> {
    let st = data.strata();
    let nz = data.schema().z.len();
    let mut z_codes: Vec<Option<&[u32]>> = vec![None; st.n_z];
    for (zw, t) in st.zw_tuples.iter().enumerate() {
        z_codes[st.zw_to_z[zw] as usize].get_or_insert(&t[..nz]);
    }
    let n_x0 = counts.n_x[0];
    let mut by_w: HashMap<&[u32], Rational> = HashMap::new();
    let mut key = Vec::new();
    for t in &st.zw_tuples {
        let w = &t[nz..];
        if by_w.contains_key(w) {
            continue;
        }
        let mut acc = Rational::from_integer(0);
        for (z, codes) in z_codes.iter().enumerate() {
            if counts.n_z[0][z] == 0 {
                continue;
            }
            key.clear();
            key.extend_from_slice(codes.expect("every z stratum has a tuple"));
            key.extend_from_slice(w);
            let f1 = match st.lookup(&key) {
                Some(zw) => counts.p_zw(1, zw as usize, z).0,
                None => counts.p_z(1, z).0,
            };
            acc += Rational::new(counts.n_z[0][z], n_x0) * f1;
        }
        by_w.insert(w, acc);
    }
    st.zw_tuples.iter().map(|t| by_w[&t[nz..]]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adjustment::fit_efficient_predictor;
    use crate::estimators::{decompose_spm, Estimator, Outcome, Sample};
    use crate::scm::{builtin, sample_units};

    fn sfm_data(n: usize, seed: u64) -> Dataset {
        sample_units(&builtin::full_sfm(), n, seed, None)
            .unwrap()
            .to_dataset(20)
            .unwrap()
    }

    #[test]
    fn all_pathways_kept_is_the_efficient_predictor() {
        let ds = sfm_data(3000, 1);
        let adj = fair_adjust(&ds, BnSpec::ALL, "1").unwrap();
        let eff = fit_efficient_predictor(&ds, "1").unwrap();
        assert_eq!(adj.column.labels, eff.column.labels);
        assert_eq!(adj.name, "yhat_bn_111");
    }

    #[test]
    fn pathways_match_y_or_vanish() {
        let ds = sfm_data(5000, 2);
        let y = Outcome::level("Y", "1");
        let dy = decompose_spm(&ds, &y).unwrap();
        for bits in ["000", "001", "011", "100", "101", "111"] {
            let bn: BnSpec = bits.parse().unwrap();
            let adj = fair_adjust(&ds, bn, "1").unwrap();
            let with = adj.column.attach(&ds, &adj.name).unwrap();
            let est = Estimator::new(Sample::full(&with));
            let d = est.decompose_spm(&Outcome::mean(&adj.name)).unwrap();
            let want = |keep: bool, v: f64| if keep { v } else { 0.0 };
            assert!(
                (d.de - want(bn.de, dy.de)).abs() < 1e-12,
                "{bits} de {} {}",
                d.de,
                dy.de
            );
            assert!((d.ie - want(bn.ie, dy.ie)).abs() < 1e-12, "{bits} ie");
            assert!((d.se - want(bn.se, dy.se)).abs() < 1e-12, "{bits} se");
        }
    }

    #[test]
    fn mediator_only_set_ignores_confounders() {
        // W ⫫ Z | X holds in the model, so the pathways match up to noise
        let ds = sfm_data(20_000, 6);
        let dy = decompose_spm(&ds, &Outcome::level("Y", "1")).unwrap();
        for bits in ["010", "110"] {
            let bn: BnSpec = bits.parse().unwrap();
            let adj = fair_adjust(&ds, bn, "1").unwrap();
            let with = adj.column.attach(&ds, &adj.name).unwrap();
            let d = decompose_spm(&with, &Outcome::mean(&adj.name)).unwrap();
            assert!(
                (d.de - if bn.de { dy.de } else { 0.0 }).abs() < 1e-12,
                "{bits}"
            );
            assert!(
                (d.ie - dy.ie).abs() < 0.01,
                "{bits} ie {} vs {}",
                d.ie,
                dy.ie
            );
            assert!(d.se.abs() < 0.01, "{bits} se {}", d.se);
            // one score per mediator level
            let col = with.column_index(&adj.name).unwrap();
            let w_levels = ds.levels(ds.column_index("W").unwrap()).len();
            assert!(with.levels(col).len() <= w_levels * if bn.de { 4 } else { 1 });
        }
    }

    #[test]
    fn y_and_x_untouched() {
        let ds = sfm_data(500, 3);
        let adj = fair_adjust(&ds, BnSpec::NONE, "1").unwrap();
        let with = adj.column.attach(&ds, &adj.name).unwrap();
        for col in ["X", "Y", "Z", "W"] {
            let i = ds.column_index(col).unwrap();
            assert_eq!(with.codes(with.column_index(col).unwrap()), ds.codes(i));
        }
        assert!(adj.column.labels.iter().all(|l| l == &adj.column.labels[0]));
    }
}
