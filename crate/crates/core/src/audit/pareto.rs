use serde::{Deserialize, Serialize};

use crate::adjustment::fair_adjust;
use crate::error::{Error, Result};
use crate::estimators::{ippm, resample_weights, spm, Outcome};
use crate::model::{BnSpec, Dataset, RawTable};
use crate::par::map_indices;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub bn: String,
    /// Business-necessity set over {Z, W}: ∅, Z, W or {Z,W}.
    pub set: String,
    pub spm_mean: f64,
    pub spm_sd: f64,
    pub ippm_mean: f64,
    pub ippm_sd: f64,
    pub repetitions: usize,
}

/// BN = ∅, Z, W, {Z,W} with the direct effect always removed.
pub fn default_bn_sets() -> Vec<BnSpec> {
    ["000", "001", "010", "011"]
        .iter()
        .map(|s| s.parse().expect("valid vector"))
        .collect()
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn resample(data: &Dataset, seed: u64, rep: usize) -> Dataset {
    let weights = resample_weights(data.n(), seed, rep as u64);
    let rows: Vec<usize> = weights
        .iter()
        .enumerate()
        .flat_map(|(r, &w)| std::iter::repeat_n(r, w as usize))
        .collect();
    data.select_rows(&rows)
}

/// SPM of Ŷ_BN and its iPPM against y.
pub fn parity_pair(data: &Dataset, bn: BnSpec, y_level: &str) -> Result<(f64, f64)> {
    let adj = fair_adjust(data, bn, y_level)?;
    let with = adj.column.attach(data, &adj.name)?;
    let y = data
        .schema()
        .y
        .clone()
        .ok_or_else(|| Error::Schema("the sweep needs an outcome column".into()))?;
    let s = spm(&with, &Outcome::mean(&adj.name))?.value;
    let i = ippm(&with, &adj.name, &Outcome::level(&y, y_level))?.ippm;
    Ok((s, i))
}

/// For each BN set, repeats the adjustment on `repetitions` seed-derived
/// bootstrap resamples of the data and summarizes SPM and iPPM. Failed
/// repetitions reduce the reported count.
pub fn pareto_sweep(
    data: &Dataset,
    bn_sets: &[BnSpec],
    repetitions: usize,
    y_level: &str,
    seed: u64,
) -> Result<Vec<ParetoPoint>> {
    if repetitions == 0 {
        return Err(Error::Parameter("repetitions must be at least 1".into()));
    }
    let samples: Vec<Dataset> = map_indices(repetitions, |r| resample(data, seed, r));
    let runs: Vec<Result<(f64, f64)>> = map_indices(bn_sets.len() * repetitions, |i| {
        parity_pair(&samples[i % repetitions], bn_sets[i / repetitions], y_level)
    });
    let mut points = Vec::new();
    for (b, bn) in bn_sets.iter().enumerate() {
        let mut ok = Vec::new();
        let mut first_err = None;
        for r in &runs[b * repetitions..(b + 1) * repetitions] {
            match r {
                Ok(v) => ok.push(*v),
                Err(e) => {
                    first_err.get_or_insert_with(|| e.clone());
                }
            }
        }
        if ok.is_empty() {
            return Err(first_err.expect("some repetition failed"));
        }
        let (spm_mean, spm_sd) = mean_sd(&ok.iter().map(|v| v.0).collect::<Vec<_>>());
        let (ippm_mean, ippm_sd) = mean_sd(&ok.iter().map(|v| v.1).collect::<Vec<_>>());
        points.push(ParetoPoint {
            bn: bn.to_string(),
            set: bn.set_name().to_string(),
            spm_mean,
            spm_sd,
            ippm_mean,
            ippm_sd,
            repetitions: ok.len(),
        });
    }
    Ok(points)
}

pub fn pareto_table(points: &[ParetoPoint]) -> RawTable {
    let headers = [
        "bn",
        "set",
        "spm_mean",
        "spm_sd",
        "ippm_mean",
        "ippm_sd",
        "repetitions",
    ];
    let rows = points
        .iter()
        .map(|p| {
            vec![
                p.bn.clone(),
                p.set.clone(),
                p.spm_mean.to_string(),
                p.spm_sd.to_string(),
                p.ippm_mean.to_string(),
                p.ippm_sd.to_string(),
                p.repetitions.to_string(),
            ]
        })
        .collect();
    RawTable::new(headers.iter().map(|s| s.to_string()).collect(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::{builtin, sample_units};

    #[test]
    fn single_repetition_has_zero_spread() {
        let ds = sample_units(&builtin::full_sfm(), 2000, 3, None)
            .unwrap()
            .to_dataset(20)
            .unwrap();
        let pts = pareto_sweep(&ds, &default_bn_sets(), 1, "1", 5).unwrap();
        assert_eq!(pts.len(), 4);
        for p in &pts {
            assert_eq!((p.spm_sd, p.ippm_sd, p.repetitions), (0.0, 0.0, 1));
        }
        assert_eq!(pts[0].set, "∅");
        assert_eq!(
            pareto_sweep(&ds, &default_bn_sets(), 1, "1", 5).unwrap(),
            pts
        );
        assert!(pareto_sweep(&ds, &default_bn_sets(), 0, "1", 5).is_err());
    }
}
