//! Statistical and predictive parity measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::outcome::ResolvedOutcome;
use crate::estimators::Sample;
use crate::model::{EffectEstimate, Flag};

pub(crate) fn spm_value(sample: &Sample, outcome: &ResolvedOutcome) -> Result<f64> {
    let data = sample.data;
    let mut n = [0.0f64; 2];
    let mut s = [0.0f64; 2];
    let codes = data.codes(outcome.column);
    for (r, &x) in data.x().iter().enumerate() {
        let w = sample.weight(r);
        n[x as usize] += w;
        s[x as usize] += w * outcome.per_level[codes[r] as usize];
    }
    if n[0] == 0.0 || n[1] == 0.0 {
        return Err(Error::Estimation(
            "both protected-attribute levels need at least one row".into(),
        ));
    }
    Ok(s[1] / n[1] - s[0] / n[0])
}

pub(crate) fn spm(sample: &Sample, outcome: &ResolvedOutcome) -> Result<EffectEstimate> {
    let value = spm_value(sample, outcome)?;
    let flags = if outcome.degenerate {
        vec![Flag::Degenerate]
    } else {
        Vec::new()
    };
    Ok(EffectEstimate::point(value).with_flags(flags))
}

/// Weighted counts of (x, ŷ level) and of y = level within them.
struct PpTable {
    n: [Vec<f64>; 2],
    hits: [Vec<f64>; 2],
}

fn pp_table(sample: &Sample, yhat: usize, y: &ResolvedOutcome) -> PpTable {
    let data = sample.data;
    let k = data.levels(yhat).len();
    let mut t = PpTable {
        n: [vec![0.0; k], vec![0.0; k]],
        hits: [vec![0.0; k], vec![0.0; k]],
    };
    let yh = data.codes(yhat);
    let yc = data.codes(y.column);
    for (r, &x) in data.x().iter().enumerate() {
        let w = sample.weight(r);
        let l = yh[r] as usize;
        t.n[x as usize][l] += w;
        t.hits[x as usize][l] += w * y.per_level[yc[r] as usize];
    }
    t
}

impl PpTable {
    fn ppm(&self, level: usize) -> Option<f64> {
        let (n0, n1) = (self.n[0][level], self.n[1][level]);
        (n0 > 0.0 && n1 > 0.0).then(|| self.hits[1][level] / n1 - self.hits[0][level] / n0)
    }
}

pub(crate) fn ppm(
    sample: &Sample,
    yhat: usize,
    y: &ResolvedOutcome,
    yhat_level: &str,
) -> Result<EffectEstimate> {
    let data = sample.data;
    let code = data.level_code(yhat, yhat_level);
    let undefined = || {
        EffectEstimate::point(f64::NAN).with_flags(vec![Flag::UndefinedForLevel {
            level: yhat_level.to_string(),
        }])
    };
    let Some(code) = code else {
        return Ok(undefined());
    };
    let t = pp_table(sample, yhat, y);
    Ok(match t.ppm(code as usize) {
        Some(v) => EffectEstimate::point(v),
        None => undefined(),
    })
}

/// How per-level PP measures are averaged into the integrated measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LevelWeighting {
    #[default]
    Equal,
    /// Weighted by the pooled frequency of each ŷ level.
    Prevalence,
}

/// Per-level predictive parity measures and their average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpmProfile {
    pub levels: Vec<LevelPpm>,
    pub ippm: f64,
    pub skipped: usize,
    pub weighting: LevelWeighting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelPpm {
    pub level: String,
    /// `None` when one of the (x, ŷ) strata is empty.
    pub ppm: Option<f64>,
    pub count: f64,
}

pub(crate) fn ippm(
    sample: &Sample,
    yhat: usize,
    y: &ResolvedOutcome,
    weighting: LevelWeighting,
) -> Result<PpmProfile> {
    let data = sample.data;
    let t = pp_table(sample, yhat, y);
    let mut levels = Vec::new();
    let (mut acc, mut norm, mut skipped) = (0.0, 0.0, 0);
    for (l, name) in data.levels(yhat).iter().enumerate() {
        let count = t.n[0][l] + t.n[1][l];
        if count == 0.0 {
            continue;
        }
        let ppm = t.ppm(l);
        match ppm {
            Some(v) => {
                let w = match weighting {
                    LevelWeighting::Equal => 1.0,
                    LevelWeighting::Prevalence => count,
                };
                acc += w * v;
                norm += w;
            }
            None => skipped += 1,
        }
        levels.push(LevelPpm {
            level: name.clone(),
            ppm,
            count,
        });
    }
    if norm == 0.0 {
        return Err(Error::Estimation(
            "predictive parity is undefined at every predictor level".into(),
        ));
    }
    Ok(PpmProfile {
        levels,
        ippm: acc / norm,
        skipped,
        weighting,
    })
}
