use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{Contrast, Event, Intervention};
use crate::scm::sample::solve;
use crate::scm::spec::ScmSpec;

/// Largest exogenous state space enumerated.
pub const MAX_STATES: u128 = 10_000_000;

/// Worlds solved per exogenous configuration.
const WORLDS: [Intervention; 5] = [
    Intervention::NONE,
    Intervention {
        x: Some(0),
        w_from: None,
    },
    Intervention {
        x: Some(1),
        w_from: None,
    },
    Intervention {
        x: Some(1),
        w_from: Some(0),
    },
    Intervention {
        x: Some(0),
        w_from: Some(1),
    },
];

fn world_index(c: &Intervention) -> Result<usize> {
    WORLDS
        .iter()
        .position(|w| w == c)
        .ok_or_else(|| Error::Parameter(format!("unsupported intervention {c:?}")))
}

/// An equivalence class of units: every world's values and total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitClass {
    pub prob: f64,
    /// Values of all variables in each world (factual, do(x0), do(x1),
    /// do(x1, W_x0), do(x0, W_x1)).
    pub worlds: [Vec<f64>; 5],
}

impl UnitClass {
    pub fn world(&self, c: &Intervention) -> Result<&[f64]> {
        Ok(&self.worlds[world_index(c)?])
    }
}

/// Exact joint and counterfactual distribution of a finite SCM.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    pub scm: ScmSpec,
    pub classes: Vec<UnitClass>,
}

/// Iterates every exogenous configuration and aggregates units by their
/// values in all worlds.
pub fn enumerate_discrete(scm: &ScmSpec) -> Result<ExactDistribution> {
    let mut supports = Vec::new();
    for e in scm.exogenous() {
        match e.dist.support() {
            Some(s) => supports.push(s),
            None => return Err(Error::NotEnumerable(e.name.clone())),
        }
    }
    let size = supports
        .iter()
        .fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128));
    if size > MAX_STATES {
        return Err(Error::Capacity {
            size,
            limit: MAX_STATES,
        });
    }

    let k = scm.n_vars();
    let names = scm.names();
    let mut classes: BTreeMap<Vec<u64>, UnitClass> = BTreeMap::new();
    let mut digits = vec![0usize; supports.len()];
    let mut exo = vec![0.0; supports.len()];
    let mut env = Vec::new();
    for _ in 0..size {
        let mut prob = 1.0;
        for (j, s) in supports.iter().enumerate() {
            exo[j] = s[digits[j]].0;
            prob *= s[digits[j]].1;
        }
        if prob > 0.0 {
            let mut worlds: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; k]);
            let fail = |var: usize| Error::Simulation {
                variable: names[var].to_string(),
                unit: 0,
            };
            let (first, rest) = worlds.split_at_mut(3);
            solve(scm, &exo, None, None, &mut first[0], &mut env).map_err(fail)?;
            let x = first[0][scm.x];
            if x != 0.0 && x != 1.0 {
                return Err(Error::Simulation {
                    variable: format!("{} (must be 0 or 1, got {x})", names[scm.x]),
                    unit: 0,
                });
            }
            solve(scm, &exo, Some(0.0), None, &mut first[1], &mut env).map_err(fail)?;
            solve(scm, &exo, Some(1.0), None, &mut first[2], &mut env).map_err(fail)?;
            solve(
                scm,
                &exo,
                Some(1.0),
                Some(&first[1]),
                &mut rest[0],
                &mut env,
            )
            .map_err(fail)?;
            solve(
                scm,
                &exo,
                Some(0.0),
                Some(&first[2]),
                &mut rest[1],
                &mut env,
            )
            .map_err(fail)?;
            let key: Vec<u64> = worlds.iter().flatten().map(|v| v.to_bits()).collect();
            classes
                .entry(key)
                .and_modify(|c| c.prob += prob)
                .or_insert(UnitClass { prob, worlds });
        }
        // odometer increment
        for (j, s) in supports.iter().enumerate() {
            digits[j] += 1;
            if digits[j] < s.len() {
                break;
            }
            digits[j] = 0;
        }
    }
    Ok(ExactDistribution {
        scm: scm.clone(),
        classes: classes.into_values().collect(),
    })
}

impl ExactDistribution {
    /// Indicator outcome `variable == level` over a world's values.
    pub fn indicator(&self, variable: &str, level: f64) -> Result<impl Fn(&[f64]) -> f64> {
        let i = self
            .scm
            .index_of(variable)
            .ok_or_else(|| Error::MissingColumn(variable.to_string()))?;
        Ok(move |v: &[f64]| f64::from(u8::from(v[i] == level)))
    }

    /// `P(y = 1)`-style outcome for the model's Y.
    pub fn y_indicator(&self, level: f64) -> impl Fn(&[f64]) -> f64 {
        let i = self.scm.y;
        move |v: &[f64]| f64::from(u8::from(v[i] == level))
    }

    fn matches(&self, class: &UnitClass, e: &Event) -> Result<bool> {
        let f = &class.worlds[0];
        if let Some(x) = e.x {
            if f[self.scm.x] != f64::from(x) {
                return Ok(false);
            }
        }
        for (name, value) in &e.other {
            let i = self
                .scm
                .index_of(name)
                .ok_or_else(|| Error::MissingColumn(name.clone()))?;
            if f[i] != *value {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `E[out(V_c) | e]`.
    pub fn expectation(
        &self,
        c: &Intervention,
        e: &Event,
        out: &dyn Fn(&[f64]) -> f64,
    ) -> Result<f64> {
        let w = world_index(c)?;
        let (mut mass, mut total) = (0.0, 0.0);
        for class in &self.classes {
            if self.matches(class, e)? {
                mass += class.prob;
                total += class.prob * out(&class.worlds[w]);
            }
        }
        if mass == 0.0 {
            return Err(Error::Estimation(format!(
                "conditioning event {e:?} has probability 0"
            )));
        }
        Ok(total / mass)
    }

    /// `E[out_{c1} | e1] − E[out_{c0} | e0]`.
    pub fn contrast(&self, c: &Contrast, out: &dyn Fn(&[f64]) -> f64) -> Result<f64> {
        Ok(self.expectation(&c.c1, &c.e1, out)? - self.expectation(&c.c0, &c.e0, out)?)
    }

    pub fn spm(&self, out: &dyn Fn(&[f64]) -> f64) -> Result<f64> {
        self.contrast(&Contrast::spm(), out)
    }

    pub fn ctf_de(&self, out: &dyn Fn(&[f64]) -> f64, baseline: u8) -> Result<f64> {
        self.contrast(&Contrast::ctf_de(baseline), out)
    }

    pub fn ctf_ie(&self, out: &dyn Fn(&[f64]) -> f64, baseline: u8) -> Result<f64> {
        self.contrast(&Contrast::ctf_ie(baseline), out)
    }

    pub fn ctf_se(&self, out: &dyn Fn(&[f64]) -> f64) -> Result<f64> {
        self.contrast(&Contrast::ctf_se(), out)
    }

    /// Probability of X = x.
    pub fn p_x(&self, x: u8) -> f64 {
        self.classes
            .iter()
            .filter(|c| c.worlds[0][self.scm.x] == f64::from(x))
            .map(|c| c.prob)
            .sum()
    }

    /// Exact factual joint P(V), aggregated over unit classes.
    pub fn joint(&self) -> Vec<(Vec<f64>, f64)> {
        let mut acc: BTreeMap<Vec<u64>, (Vec<f64>, f64)> = BTreeMap::new();
        for c in &self.classes {
            let key = c.worlds[0].iter().map(|v| v.to_bits()).collect();
            acc.entry(key)
                .or_insert_with(|| (c.worlds[0].clone(), 0.0))
                .1 += c.prob;
        }
        acc.into_values().collect()
    }

    /// Exact PPM `E[y | x1, ŷ = v] − E[y | x0, ŷ = v]` for each predictor
    /// value `v` with both strata populated.
    pub fn ppm(&self, y: &dyn Fn(&[f64]) -> f64, yhat: &dyn Fn(&[f64]) -> f64) -> Vec<(f64, f64)> {
        let mut acc: BTreeMap<u64, [[f64; 2]; 2]> = BTreeMap::new();
        for c in &self.classes {
            let f = &c.worlds[0];
            let x = f[self.scm.x] as usize;
            let cell = acc.entry(yhat(f).to_bits()).or_default();
            cell[x][0] += c.prob;
            cell[x][1] += c.prob * y(f);
        }
        acc.into_iter()
            .filter(|(_, m)| m[0][0] > 0.0 && m[1][0] > 0.0)
            .map(|(v, m)| (f64::from_bits(v), m[1][1] / m[1][0] - m[0][1] / m[0][0]))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::builtin;

    fn effects(scm: &ScmSpec) -> [f64; 4] {
        let d = enumerate_discrete(scm).unwrap();
        let y = d.y_indicator(1.0);
        [
            d.spm(&y).unwrap(),
            d.ctf_de(&y, 0).unwrap(),
            d.ctf_ie(&y, 0).unwrap(),
            d.ctf_se(&y).unwrap(),
        ]
    }

    #[test]
    fn s1_chain() {
        assert_eq!(effects(&builtin::s1()), [1.0, 0.0, -1.0, 0.0]);
    }

    #[test]
    fn s2_direct() {
        assert_eq!(effects(&builtin::s2()), [1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn s3_noisy_mediator() {
        let [spm, de, ie, se] = effects(&builtin::s3());
        assert!((spm - 0.4).abs() < 1e-15, "{spm}");
        assert_eq!(de, 0.0);
        assert!((ie + 0.4).abs() < 1e-15);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn constant_system_has_no_effects() {
        let scm = ScmSpec::from_toml(
            r#"
            [[exogenous]]
            name = "UX"
            dist = { kind = "bernoulli", p = 0.4 }
            [[variables]]
            name = "X"
            role = "X"
            mechanism = "UX"
            [[variables]]
            name = "W"
            role = "W"
            mechanism = "1"
            [[variables]]
            name = "Y"
            role = "Y"
            mechanism = "0"
        "#,
        )
        .unwrap();
        assert_eq!(effects(&scm), [0.0; 4]);
    }

    #[test]
    fn decomposition_holds_exactly_in_population() {
        let [spm, de, ie, se] = effects(&builtin::confounded());
        assert!((spm - (de - ie - se)).abs() < 1e-12);
        assert!(de != 0.0 && ie != 0.0 && se != 0.0);
    }

    #[test]
    fn continuous_rejected_and_capacity_enforced() {
        assert!(matches!(
            enumerate_discrete(&builtin::gaussian_mediators()),
            Err(Error::NotEnumerable(_))
        ));
        let mut doc = builtin::s1().document().clone();
        for i in 0..24 {
            doc.exogenous.push(crate::scm::ExogenousSpec {
                name: format!("N{i}"),
                dist: crate::scm::Distribution::Bernoulli { p: 0.5 },
            });
        }
        let big = ScmSpec::new(doc).unwrap();
        assert!(matches!(
            enumerate_discrete(&big),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn joint_sums_to_one() {
        let d = enumerate_discrete(&builtin::confounded()).unwrap();
        let total: f64 = d.joint().iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((d.p_x(0) + d.p_x(1) - 1.0).abs() < 1e-12);
    }
}
