//! Plug-in estimators over a validated [`Dataset`]: statistical and
//! predictive parity, the counterfactual DE/IE/SE family, the SPM
//! decomposition and bootstrap intervals.
//!
//! Every estimator reads only level codes and counts, so all of them work on
//! bootstrap resamples expressed as row multiplicities ([`Sample`]).

mod bootstrap;
mod counterfactual;
mod outcome;
mod parity;

pub use bootstrap::{
    bootstrap, bootstrap_joint, resample_weights, BootstrapConfig, JointBootstrap,
    MAX_UNDEFINED_FRACTION,
};
pub use counterfactual::{EstimatorOptions, Smoothing, SpmDecomposition};
pub use outcome::Outcome;
pub use parity::{LevelPpm, LevelWeighting, PpmProfile};

use crate::error::{Error, Result};
use crate::model::{Dataset, EffectEstimate, Pathway};

/// A dataset together with optional row multiplicities.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub data: &'a Dataset,
    pub weights: Option<&'a [u32]>,
}

impl<'a> Sample<'a> {
    pub fn full(data: &'a Dataset) -> Self {
        Sample {
            data,
            weights: None,
        }
    }

    pub fn weighted(data: &'a Dataset, weights: &'a [u32]) -> Self {
        Sample {
            data,
            weights: Some(weights),
        }
    }

    #[inline]
    pub fn weight(&self, row: usize) -> f64 {
        self.weights.map_or(1.0, |w| w[row] as f64)
    }
}

/// Estimator bundle bound to one sample and option set.
#[derive(Debug, Clone)]
pub struct Estimator<'a> {
    sample: Sample<'a>,
    opts: EstimatorOptions,
}

impl<'a> Estimator<'a> {
    pub fn new(sample: Sample<'a>) -> Self {
        Estimator {
            sample,
            opts: EstimatorOptions::default(),
        }
    }

    pub fn with_options(mut self, opts: EstimatorOptions) -> Self {
        self.opts = opts;
        self
    }

    /// P(target | x1) − P(target | x0) from raw frequencies.
    pub fn spm(&self, target: &Outcome) -> Result<EffectEstimate> {
        parity::spm(&self.sample, &target.resolve(self.sample.data)?)
    }

    /// P(y | x1, ŷ) − P(y | x0, ŷ) at one predictor level.
    pub fn ppm(&self, yhat: &str, y: &Outcome, yhat_level: &str) -> Result<EffectEstimate> {
        let col = self.yhat_column(yhat)?;
        parity::ppm(&self.sample, col, &y.resolve(self.sample.data)?, yhat_level)
    }

    /// Per-level PP measures averaged over the defined predictor levels.
    pub fn ippm(&self, yhat: &str, y: &Outcome, weighting: LevelWeighting) -> Result<PpmProfile> {
        let col = self.yhat_column(yhat)?;
        parity::ippm(&self.sample, col, &y.resolve(self.sample.data)?, weighting)
    }

    pub fn ctf_de(&self, outcome: &Outcome, baseline: u8) -> Result<EffectEstimate> {
        counterfactual::ctf_de(
            &self.sample,
            &outcome.resolve(self.sample.data)?,
            baseline,
            &self.opts,
        )
    }

    pub fn ctf_ie(&self, outcome: &Outcome, baseline: u8) -> Result<EffectEstimate> {
        counterfactual::ctf_ie(
            &self.sample,
            &outcome.resolve(self.sample.data)?,
            baseline,
            &self.opts,
        )
    }

    pub fn ctf_se(&self, outcome: &Outcome) -> Result<EffectEstimate> {
        counterfactual::ctf_se(
            &self.sample,
            &outcome.resolve(self.sample.data)?,
            &self.opts,
        )
    }

    /// The pathway measure used by the audit (DE/IE at baseline x0).
    pub fn pathway(&self, p: Pathway, outcome: &Outcome) -> Result<EffectEstimate> {
        match p {
            Pathway::De => self.ctf_de(outcome, 0),
            Pathway::Ie => self.ctf_ie(outcome, 0),
            Pathway::Se => self.ctf_se(outcome),
        }
    }

    pub fn decompose_spm(&self, outcome: &Outcome) -> Result<SpmDecomposition> {
        counterfactual::decompose(&self.sample, outcome, &self.opts)
    }

    fn yhat_column(&self, yhat: &str) -> Result<usize> {
        let data = self.sample.data;
        if data.schema().yhat.is_empty() {
            return Err(Error::Schema("no predictor column declared".into()));
        }
        data.require_column(yhat)
    }
}

pub fn spm(data: &Dataset, target: &Outcome) -> Result<EffectEstimate> {
    Estimator::new(Sample::full(data)).spm(target)
}

pub fn ppm(data: &Dataset, yhat: &str, y: &Outcome, yhat_level: &str) -> Result<EffectEstimate> {
    Estimator::new(Sample::full(data)).ppm(yhat, y, yhat_level)
}

pub fn ippm(data: &Dataset, yhat: &str, y: &Outcome) -> Result<PpmProfile> {
    Estimator::new(Sample::full(data)).ippm(yhat, y, LevelWeighting::Equal)
}

pub fn ctf_de(data: &Dataset, outcome: &Outcome, baseline: u8) -> Result<EffectEstimate> {
    Estimator::new(Sample::full(data)).ctf_de(outcome, baseline)
}

pub fn ctf_ie(data: &Dataset, outcome: &Outcome, baseline: u8) -> Result<EffectEstimate> {
    Estimator::new(Sample::full(data)).ctf_ie(outcome, baseline)
}

pub fn ctf_se(data: &Dataset, outcome: &Outcome) -> Result<EffectEstimate> {
    Estimator::new(Sample::full(data)).ctf_se(outcome)
}

pub fn decompose_spm(data: &Dataset, outcome: &Outcome) -> Result<SpmDecomposition> {
    Estimator::new(Sample::full(data)).decompose_spm(outcome)
}
