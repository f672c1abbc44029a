//! Nonparametric bootstrap over row multiplicities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::Sample;
use crate::model::{quantile_sorted, Dataset, EffectEstimate, Flag, DEFAULT_LEVEL};
use crate::par::map_indices;

/// Resampling configuration; percentile intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            replicates: 1000,
            level: DEFAULT_LEVEL,
            seed: 0,
        }
    }
}

impl BootstrapConfig {
    pub fn new(replicates: usize, level: f64, seed: u64) -> Self {
        BootstrapConfig {
            replicates,
            level,
            seed,
        }
    }

    fn check(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Parameter(
                "bootstrap needs at least one replicate".into(),
            ));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Parameter(format!(
                "confidence level must lie in (0, 1), got {}",
                self.level
            )));
        }
        Ok(())
    }
}

/// Fraction of undefined replicates above which resampling is rejected.
pub const MAX_UNDEFINED_FRACTION: f64 = 0.2;

/// Row multiplicities of bootstrap replicate `index`. Each replicate owns an
/// independent ChaCha stream, so replicates can run in any order.
pub fn resample_weights(n: usize, seed: u64, index: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut weights = vec![0u32; n];
    for _ in 0..n {
        weights[rng.random_range(0..n)] += 1;
    }
    weights
}

/// Joint bootstrap distribution of several measures evaluated on the same
/// resamples.
#[derive(Debug, Clone, PartialEq)]
pub struct JointBootstrap {
    pub point: Vec<f64>,
    /// One vector of measure values per retained replicate, in replicate order.
    pub draws: Vec<Vec<f64>>,
    pub dropped: usize,
    pub config: BootstrapConfig,
}

impl JointBootstrap {
    /// Percentile interval of an arbitrary statistic of the measure vector.
    pub fn estimate_of(&self, stat: impl Fn(&[f64]) -> f64) -> EffectEstimate {
        let value = stat(&self.point);
        let mut values: Vec<f64> = self.draws.iter().map(|d| stat(d)).collect();
        values.sort_by(f64::total_cmp);
        let alpha = (1.0 - self.config.level) / 2.0;
        // the interval always brackets the full-data estimate
        let low = quantile_sorted(&values, alpha).min(value);
        let high = quantile_sorted(&values, 1.0 - alpha).max(value);
        let mut flags = Vec::new();
        if self.dropped > 0 {
            flags.push(Flag::DroppedReplicates {
                count: self.dropped,
            });
        }
        EffectEstimate::point(value)
            .with_interval(low, high, self.config.level, self.draws.len())
            .with_flags(flags)
    }

    pub fn estimate(&self, index: usize) -> EffectEstimate {
        self.estimate_of(|v| v[index])
    }

    /// Interval of the paired difference `measure a − measure b`.
    pub fn difference(&self, a: usize, b: usize) -> EffectEstimate {
        self.estimate_of(|v| v[a] - v[b])
    }
}

/// Bootstraps a vector-valued measure. Replicates on which the measure errors
/// or returns a non-finite value are dropped and counted.
pub fn bootstrap_joint<F>(
    measure: F,
    data: &Dataset,
    config: BootstrapConfig,
) -> Result<JointBootstrap>
where
    F: Fn(&Sample) -> Result<Vec<f64>> + Sync + Send,
{
    config.check()?;
    let point = measure(&Sample::full(data))?;
    let n = data.n();
    let run = |r: usize| -> Option<Vec<f64>> {
        let weights = resample_weights(n, config.seed, r as u64);
        let sample = Sample::weighted(data, &weights);
        match measure(&sample) {
            Ok(v) if v.iter().all(|x| x.is_finite()) => Some(v),
            _ => None,
        }
    };
    let results: Vec<Option<Vec<f64>>> = map_indices(config.replicates, run);
    let dropped = results.iter().filter(|r| r.is_none()).count();
    if dropped as f64 > MAX_UNDEFINED_FRACTION * config.replicates as f64 {
        return Err(Error::Instability {
            undefined: dropped,
            replicates: config.replicates,
        });
    }
    Ok(JointBootstrap {
        point,
        draws: results.into_iter().flatten().collect(),
        dropped,
        config,
    })
}

/// Bootstraps a scalar measure into a percentile interval around the
/// full-data estimate.
pub fn bootstrap<F>(measure: F, data: &Dataset, config: BootstrapConfig) -> Result<EffectEstimate>
where
    F: Fn(&Sample) -> Result<f64> + Sync + Send,
{
    let joint = bootstrap_joint(|s| measure(s).map(|v| vec![v]), data, config)?;
    Ok(joint.estimate(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{Estimator, Outcome};
    use crate::model::{validate_schema, RawTable, Schema};

    fn data() -> Dataset {
        let x: Vec<String> = (0..200).map(|i| (i % 2).to_string()).collect();
        let y: Vec<String> = (0..200)
            .map(|i| ((i / 2) % 3 == 0) as u8)
            .map(|v| v.to_string())
            .collect();
        let c: Vec<String> = vec!["k".to_string(); 200];
        validate_schema(
            &RawTable::from_columns(&[("x", x), ("y", y), ("c", c)]),
            &Schema::new("x", "0", "1").with_y("y").with_yhat(&["c"]),
        )
        .unwrap()
    }

    #[test]
    fn weights_sum_to_n_and_are_seeded() {
        let w = resample_weights(50, 3, 7);
        assert_eq!(w.iter().sum::<u32>(), 50);
        assert_eq!(w, resample_weights(50, 3, 7));
        assert_ne!(w, resample_weights(50, 3, 8));
    }

    #[test]
    fn constant_measure_has_zero_width() {
        let ds = data();
        let out = Outcome::level("c", "k");
        let est = bootstrap(
            |s| Estimator::new(*s).spm(&out).map(|e| e.value),
            &ds,
            BootstrapConfig::new(200, 0.95, 1),
        )
        .unwrap();
        assert_eq!((est.value, est.ci_low, est.ci_high), (0.0, 0.0, 0.0));
        assert_eq!(est.replicates, 200);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let ds = data();
        let out = Outcome::level("y", "1");
        let run = || {
            bootstrap(
                |s| Estimator::new(*s).ctf_de(&out, 0).map(|e| e.value),
                &ds,
                BootstrapConfig::new(100, 0.9, 42),
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn mostly_undefined_measure_is_unstable() {
        let ds = data();
        let err = bootstrap(|_| Ok(f64::NAN), &ds, BootstrapConfig::new(10, 0.95, 0));
        // the full-data point estimate is itself NaN but only replicates are screened
        assert!(matches!(
            err,
            Err(Error::Instability {
                undefined: 10,
                replicates: 10
            })
        ));
    }

    #[test]
    fn bad_config_rejected() {
        let ds = data();
        assert!(bootstrap(|_| Ok(0.0), &ds, BootstrapConfig::new(0, 0.95, 0)).is_err());
        assert!(bootstrap(|_| Ok(0.0), &ds, BootstrapConfig::new(5, 1.0, 0)).is_err());
    }
}
