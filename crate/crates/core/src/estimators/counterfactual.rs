//! Plug-in identification of the counterfactual direct, indirect and
//! spurious effects over discrete (x, z, w) strata.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::outcome::{Outcome, ResolvedOutcome};
use crate::estimators::Sample;
use crate::model::{EffectEstimate, Flag};

/// How inner conditionals over empty strata are handled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Smoothing {
    /// Borrow the other group's (z, w) cell, i.e. assume no direct effect
    /// where x is unobserved; then P(out | x, z), then P(out | x). Keeps
    /// SPM = DE − IE − SE exact.
    Pool,
    /// Drop the term and tally its outer weight as excluded mass.
    Exclude,
    /// Add-α smoothing of P(out | x, z, w) for level outcomes.
    AddAlpha(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    pub smoothing: Smoothing,
    /// Excluded mass above this fraction is a hard error.
    pub max_excluded_mass: f64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            smoothing: Smoothing::Pool,
            max_excluded_mass: 0.05,
        }
    }
}

/// Weighted counts and outcome sums per (x, z) and (x, z, w) stratum.
pub(crate) struct Tally {
    pub n_x: [f64; 2],
    pub s_x: [f64; 2],
    pub n_z: [Vec<f64>; 2],
    pub s_z: [Vec<f64>; 2],
    pub n_zw: [Vec<f64>; 2],
    pub s_zw: [Vec<f64>; 2],
}

impl Tally {
    pub fn new(sample: &Sample, outcome: &ResolvedOutcome) -> Self {
        let data = sample.data;
        let st = data.strata();
        let mut t = Tally {
            n_x: [0.0; 2],
            s_x: [0.0; 2],
            n_z: [vec![0.0; st.n_z], vec![0.0; st.n_z]],
            s_z: [vec![0.0; st.n_z], vec![0.0; st.n_z]],
            n_zw: [vec![0.0; st.n_zw], vec![0.0; st.n_zw]],
            s_zw: [vec![0.0; st.n_zw], vec![0.0; st.n_zw]],
        };
        let codes = data.codes(outcome.column);
        #[allow(clippy::needless_range_loop)]
        for r in 0..data.n() {
            let w = sample.weight(r);
            if w == 0.0 {
                continue;
            }
            let x = st.x[r] as usize;
            let v = outcome.per_level[codes[r] as usize] * w;
            t.n_x[x] += w;
            t.s_x[x] += v;
            let z = st.z[r] as usize;
            t.n_z[x][z] += w;
            t.s_z[x][z] += v;
            let zw = st.zw[r] as usize;
            t.n_zw[x][zw] += w;
            t.s_zw[x][zw] += v;
        }
        t
    }

    pub fn mean_x(&self, x: usize) -> Option<f64> {
        (self.n_x[x] > 0.0).then(|| self.s_x[x] / self.n_x[x])
    }
}

/// Inner conditionals and outer weights shared by the three measures.
struct Components {
    /// f[x][zw]: E[out | x, z, w], `None` when undefined under Exclude.
    f: [Vec<Option<f64>>; 2],
    /// Whether f[x][zw] was pooled/smoothed rather than observed.
    f_pooled: [Vec<bool>; 2],
    /// P(w | x, z) for each zw id, per x.
    pw: [Vec<f64>; 2],
    /// P(z | x).
    pz: [Vec<f64>; 2],
    /// E[out_{x1} | z] assembled as Σ_w f(x1,z,w) P(w|x1,z).
    g1: Vec<Option<f64>>,
    g1_pooled: Vec<bool>,
    zw_to_z: Vec<u32>,
}

fn components(
    sample: &Sample,
    outcome: &ResolvedOutcome,
    opts: &EstimatorOptions,
) -> Result<Components> {
    let t = Tally::new(sample, outcome);
    if t.n_x[0] == 0.0 || t.n_x[1] == 0.0 {
        return Err(Error::Estimation(
            "both protected-attribute levels need at least one row".into(),
        ));
    }
    let st = sample.data.strata();
    let n_zw = st.n_zw;
    let alpha = match opts.smoothing {
        Smoothing::AddAlpha(a) => {
            if outcome.categories == 0 {
                return Err(Error::Parameter(
                    "add-α smoothing needs a level outcome".into(),
                ));
            }
            Some(a)
        }
        _ => None,
    };

    let mut f = [vec![None; n_zw], vec![None; n_zw]];
    let mut f_pooled = [vec![false; n_zw], vec![false; n_zw]];
    let mut pw = [vec![0.0; n_zw], vec![0.0; n_zw]];
    for x in 0..2 {
        let pooled_x = t.s_x[x] / t.n_x[x];
        for zw in 0..n_zw {
            let z = st.zw_to_z[zw] as usize;
            let (n, s) = (t.n_zw[x][zw], t.s_zw[x][zw]);
            if t.n_z[x][z] > 0.0 {
                pw[x][zw] = n / t.n_z[x][z];
            }
            f[x][zw] = match (alpha, opts.smoothing) {
                (Some(a), _) => {
                    f_pooled[x][zw] = n == 0.0;
                    Some((s + a) / (n + a * outcome.categories as f64))
                }
                _ if n > 0.0 => Some(s / n),
                (_, Smoothing::Exclude) => None,
                _ => {
                    f_pooled[x][zw] = true;
                    let other = 1 - x;
                    if t.n_zw[other][zw] > 0.0 {
                        Some(t.s_zw[other][zw] / t.n_zw[other][zw])
                    } else if t.n_z[x][z] > 0.0 {
                        Some(t.s_z[x][z] / t.n_z[x][z])
                    } else {
                        Some(pooled_x)
                    }
                }
            };
        }
    }
    let pz = [
        t.n_z[0].iter().map(|n| n / t.n_x[0]).collect(),
        t.n_z[1].iter().map(|n| n / t.n_x[1]).collect::<Vec<_>>(),
    ];

    let mut g1: Vec<Option<f64>> = vec![Some(0.0); st.n_z];
    let mut g1_pooled = vec![false; st.n_z];
    for zw in 0..n_zw {
        let z = st.zw_to_z[zw] as usize;
        if pw[1][zw] > 0.0 {
            g1[z] = match (g1[z], f[1][zw]) {
                (Some(acc), Some(v)) => Some(acc + v * pw[1][zw]),
                _ => None,
            };
        }
    }
    for z in 0..st.n_z {
        if t.n_z[1][z] == 0.0 {
            g1_pooled[z] = true;
            g1[z] = match opts.smoothing {
                Smoothing::Exclude => None,
                _ if t.n_z[0][z] > 0.0 => Some(t.s_z[0][z] / t.n_z[0][z]),
                _ => Some(t.s_x[1] / t.n_x[1]),
            };
        }
    }
    Ok(Components {
        f,
        f_pooled,
        pw,
        pz,
        g1,
        g1_pooled,
        zw_to_z: st.zw_to_z.clone(),
    })
}

/// Mass accounting for pooled or excluded terms.
#[derive(Default)]
struct Mass {
    pooled: f64,
    excluded: f64,
}

impl Mass {
    fn finish(
        self,
        value: f64,
        opts: &EstimatorOptions,
        extra: Vec<Flag>,
    ) -> Result<EffectEstimate> {
        if self.excluded > opts.max_excluded_mass {
            return Err(Error::Estimation(format!(
                "excluded mass {:.4} exceeds {:.4}",
                self.excluded, opts.max_excluded_mass
            )));
        }
        let mut flags = extra;
        if self.pooled > 0.0 {
            flags.push(Flag::PooledMass { mass: self.pooled });
        }
        if self.excluded > 0.0 {
            flags.push(Flag::ExcludedMass {
                mass: self.excluded,
            });
        }
        Ok(EffectEstimate::point(value).with_flags(flags))
    }
}

/// Mediator weights P(w | x0, z) for stratum `zw`, falling back to the x1
/// mediator distribution when (x0, z) is empty.
fn mediator_weight(c: &Components, zw: usize, x0_z_empty: bool) -> f64 {
    if x0_z_empty {
        c.pw[1][zw]
    } else {
        c.pw[0][zw]
    }
}

fn x0_z_empty(c: &Components) -> Vec<bool> {
    let mut has = vec![false; c.pz[0].len()];
    for (z, p) in c.pz[0].iter().enumerate() {
        has[z] = *p > 0.0;
    }
    has.into_iter().map(|h| !h).collect()
}

pub(crate) fn ctf_de(
    sample: &Sample,
    outcome: &ResolvedOutcome,
    baseline: u8,
    opts: &EstimatorOptions,
) -> Result<EffectEstimate> {
    let c = components(sample, outcome, opts)?;
    let empty0 = x0_z_empty(&c);
    let b = baseline as usize;
    let mut mass = Mass::default();
    let mut value = 0.0;
    for zw in 0..c.zw_to_z.len() {
        let z = c.zw_to_z[zw] as usize;
        let weight = mediator_weight(&c, zw, empty0[z]) * c.pz[b][z];
        if weight == 0.0 {
            continue;
        }
        if empty0[z] {
            mass.pooled += weight;
        }
        match (c.f[1][zw], c.f[0][zw]) {
            (Some(f1), Some(f0)) => {
                if c.f_pooled[1][zw] || c.f_pooled[0][zw] {
                    mass.pooled += weight;
                }
                value += (f1 - f0) * weight;
            }
            _ => mass.excluded += weight,
        }
    }
    mass.finish(value, opts, degenerate_flag(outcome))
}

pub(crate) fn ctf_ie(
    sample: &Sample,
    outcome: &ResolvedOutcome,
    baseline: u8,
    opts: &EstimatorOptions,
) -> Result<EffectEstimate> {
    let c = components(sample, outcome, opts)?;
    let empty0 = x0_z_empty(&c);
    let b = baseline as usize;
    let mut mass = Mass::default();
    let mut per_z: Vec<Option<f64>> = vec![Some(0.0); c.pz[0].len()];
    for zw in 0..c.zw_to_z.len() {
        let z = c.zw_to_z[zw] as usize;
        let pw0 = mediator_weight(&c, zw, empty0[z]);
        if pw0 == 0.0 || c.pz[b][z] == 0.0 {
            continue;
        }
        if c.f_pooled[1][zw] {
            mass.pooled += pw0 * c.pz[b][z];
        }
        per_z[z] = match (per_z[z], c.f[1][zw]) {
            (Some(acc), Some(f1)) => Some(acc + f1 * pw0),
            _ => None,
        };
    }
    let mut value = 0.0;
    for (z, acc) in per_z.iter().enumerate() {
        let pz = c.pz[b][z];
        if pz == 0.0 {
            continue;
        }
        if empty0[z] || c.g1_pooled[z] {
            mass.pooled += pz;
        }
        match (acc, c.g1[z]) {
            (Some(a), Some(g)) => value += (a - g) * pz,
            _ => mass.excluded += pz,
        }
    }
    mass.finish(value, opts, degenerate_flag(outcome))
}

pub(crate) fn ctf_se(
    sample: &Sample,
    outcome: &ResolvedOutcome,
    opts: &EstimatorOptions,
) -> Result<EffectEstimate> {
    let mut flags = degenerate_flag(outcome);
    if sample.data.roles().z.is_empty() {
        let t = Tally::new(sample, outcome);
        if t.mean_x(0).is_none() || t.mean_x(1).is_none() {
            return Err(Error::Estimation(
                "both protected-attribute levels need at least one row".into(),
            ));
        }
        flags.push(Flag::NoSpuriousPathway);
        return Ok(EffectEstimate::point(0.0).with_flags(flags));
    }
    let c = components(sample, outcome, opts)?;
    let mut mass = Mass::default();
    let mut value = 0.0;
    for z in 0..c.pz[0].len() {
        let delta = c.pz[0][z] - c.pz[1][z];
        if delta == 0.0 {
            continue;
        }
        if c.g1_pooled[z] {
            mass.pooled += c.pz[0][z];
        }
        match c.g1[z] {
            Some(g) => value += g * delta,
            None => mass.excluded += c.pz[0][z],
        }
    }
    mass.finish(value, opts, flags)
}

fn degenerate_flag(outcome: &ResolvedOutcome) -> Vec<Flag> {
    if outcome.degenerate {
        vec![Flag::Degenerate]
    } else {
        Vec::new()
    }
}

/// SPM together with its counterfactual decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpmDecomposition {
    pub de: f64,
    pub ie: f64,
    pub se: f64,
    pub spm: f64,
    /// spm − (de − ie − se)
    pub residual: f64,
}

pub(crate) fn decompose(
    sample: &Sample,
    outcome: &Outcome,
    opts: &EstimatorOptions,
) -> Result<SpmDecomposition> {
    let resolved = outcome.resolve(sample.data)?;
    let de = ctf_de(sample, &resolved, 0, opts)?.value;
    let ie = ctf_ie(sample, &resolved, 0, opts)?.value;
    let se = ctf_se(sample, &resolved, opts)?.value;
    let spm = super::parity::spm_value(sample, &resolved)?;
    Ok(SpmDecomposition {
        de,
        ie,
        se,
        spm,
        residual: spm - (de - ie - se),
    })
}
