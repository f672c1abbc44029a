use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Schema;
use crate::scm::expr::Expr;

/// Role of an endogenous variable in the Standard Fairness Model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    X,
    Z,
    W,
    Y,
}

/// Distribution of an exogenous variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    Bernoulli { p: f64 },
    Normal { mean: f64, sd: f64 },
    Categorical { values: Vec<f64>, probs: Vec<f64> },
}

impl Distribution {
    /// Finite support with probabilities, or `None` for continuous laws.
    pub fn support(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            Distribution::Bernoulli { p } => Some(vec![(0.0, 1.0 - p), (1.0, *p)]),
            Distribution::Categorical { values, probs } => {
                Some(values.iter().copied().zip(probs.iter().copied()).collect())
            }
            Distribution::Normal { .. } => None,
        }
    }

    fn check(&self, name: &str) -> Result<()> {
        let bad = |m: String| Err(Error::Parse(format!("exogenous `{name}`: {m}")));
        match self {
            Distribution::Bernoulli { p } if !(0.0..=1.0).contains(p) => {
                bad(format!("Bernoulli p={p} outside [0, 1]"))
            }
            Distribution::Normal { sd, .. } if sd.is_nan() || *sd < 0.0 => {
                bad(format!("negative sd {sd}"))
            }
            Distribution::Categorical { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return bad("values and probs must be non-empty and of equal length".into());
                }
                if probs.iter().any(|p| p.is_nan() || *p < 0.0) {
                    return bad("negative probability".into());
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return bad(format!("probabilities sum to {total}"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExogenousSpec {
    pub name: String,
    pub dist: Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub role: Role,
    #[serde(default)]
    pub parents: Vec<String>,
    pub mechanism: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub from: String,
    pub to: String,
    pub value: f64,
}

/// Path coefficients of a linear SCM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSpec {
    pub coefficients: Vec<Coefficient>,
}

/// Serializable SCM document (the SCM file format).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScmDocument {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub exogenous: Vec<ExogenousSpec>,
    pub variables: Vec<VariableSpec>,
    #[serde(default)]
    pub linear: Option<LinearSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Slot {
    Var(usize),
    Exo(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Mechanism {
    pub expr: Expr,
    pub slots: Vec<Slot>,
}

/// A validated, compiled structural causal model over the SFM roles.
///
/// Variables are in topological order; X is binary with levels 0 (x0) and
/// 1 (x1). Mechanisms reference exactly their declared parents plus any
/// exogenous variables, so X↔Z confounding is expressed by shared exogenous
/// draws.
#[derive(Debug, Clone, PartialEq)]
pub struct ScmSpec {
    doc: ScmDocument,
    pub(crate) mechanisms: Vec<Mechanism>,
    pub(crate) x: usize,
    pub(crate) y: usize,
    pub(crate) z: Vec<usize>,
    pub(crate) w: Vec<usize>,
}

impl ScmSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: ScmDocument = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        ScmSpec::new(doc)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.doc).expect("document serializes")
    }

    pub fn new(doc: ScmDocument) -> Result<Self> {
        let mut var_index: HashMap<&str, usize> = HashMap::new();
        let exo_index: HashMap<&str, usize> = doc
            .exogenous
            .iter()
            .enumerate()
            .map(|(i, e)| (e.name.as_str(), i))
            .collect();
        if exo_index.len() != doc.exogenous.len() {
            return Err(Error::Parse("duplicate exogenous name".into()));
        }
        for e in &doc.exogenous {
            e.dist.check(&e.name)?;
        }

        let mut mechanisms = Vec::with_capacity(doc.variables.len());
        let (mut x, mut y, mut z, mut w) = (None, None, Vec::new(), Vec::new());
        for (i, v) in doc.variables.iter().enumerate() {
            if exo_index.contains_key(v.name.as_str()) || var_index.contains_key(v.name.as_str()) {
                return Err(Error::Parse(format!("duplicate name `{}`", v.name)));
            }
            let declared: BTreeSet<&str> = v.parents.iter().map(String::as_str).collect();
            for p in &declared {
                if !var_index.contains_key(p) {
                    return Err(Error::Parse(format!(
                        "parent `{p}` of `{}` is not an earlier variable (variables must be listed in topological order)",
                        v.name
                    )));
                }
            }
            let used = Expr::identifiers(&v.mechanism)?;
            let used_vars: BTreeSet<&str> = used
                .iter()
                .map(String::as_str)
                .filter(|n| !exo_index.contains_key(n))
                .collect();
            if used_vars != declared {
                return Err(Error::Parse(format!(
                    "mechanism of `{}` references {:?} but declares parents {:?}",
                    v.name, used_vars, declared
                )));
            }
            let mut slots = Vec::new();
            let mut slot_of: HashMap<String, usize> = HashMap::new();
            for name in &used {
                let slot = match (var_index.get(name.as_str()), exo_index.get(name.as_str())) {
                    (Some(&j), _) => Slot::Var(j),
                    (None, Some(&k)) => Slot::Exo(k),
                    (None, None) => unreachable!("checked above"),
                };
                slot_of.insert(name.clone(), slots.len());
                slots.push(slot);
            }
            let expr = Expr::parse(&v.mechanism, &|n| slot_of.get(n).copied())?;
            mechanisms.push(Mechanism { expr, slots });

            let role_of = |p: &str| doc.variables[var_index[p]].role;
            let allowed: &[Role] = match v.role {
                Role::X => &[],
                Role::Z => &[Role::Z],
                Role::W => &[Role::X, Role::Z, Role::W],
                Role::Y => &[Role::X, Role::Z, Role::W],
            };
            if let Some(p) = declared.iter().find(|p| !allowed.contains(&role_of(p))) {
                return Err(Error::Parse(format!(
                    "`{}` ({:?}) may not have parent `{p}` ({:?}) under the standard fairness model",
                    v.name,
                    v.role,
                    role_of(p)
                )));
            }
            match v.role {
                Role::X if x.is_some() => {
                    return Err(Error::Parse("more than one X variable".into()))
                }
                Role::Y if y.is_some() => {
                    return Err(Error::Parse("more than one Y variable".into()))
                }
                Role::X => x = Some(i),
                Role::Y => y = Some(i),
                Role::Z => z.push(i),
                Role::W => w.push(i),
            }
            var_index.insert(v.name.as_str(), i);
        }
        let x = x.ok_or_else(|| Error::Parse("no X variable".into()))?;
        let y = y.ok_or_else(|| Error::Parse("no Y variable".into()))?;

        let spec = ScmSpec {
            mechanisms,
            x,
            y,
            z,
            w,
            doc,
        };
        spec.check_linear()?;
        Ok(spec)
    }

    pub fn document(&self) -> &ScmDocument {
        &self.doc
    }

    pub fn names(&self) -> Vec<&str> {
        self.doc.variables.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn n_vars(&self) -> usize {
        self.doc.variables.len()
    }

    pub fn n_exogenous(&self) -> usize {
        self.doc.exogenous.len()
    }

    pub fn exogenous(&self) -> &[ExogenousSpec] {
        &self.doc.exogenous
    }

    pub fn role(&self, var: usize) -> Role {
        self.doc.variables[var].role
    }

    pub fn x_index(&self) -> usize {
        self.x
    }

    pub fn y_index(&self) -> usize {
        self.y
    }

    pub fn z_indices(&self) -> &[usize] {
        &self.z
    }

    pub fn w_indices(&self) -> &[usize] {
        &self.w
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.doc.variables.iter().position(|v| v.name == name)
    }

    pub fn is_linear(&self) -> bool {
        self.doc.linear.is_some()
    }

    /// Linear coefficient α_{from,to}; zero when not listed.
    pub fn coefficient(&self, from: &str, to: &str) -> Result<f64> {
        let lin = self
            .doc
            .linear
            .as_ref()
            .ok_or_else(|| Error::Contract("SCM is not declared linear".into()))?;
        Ok(lin
            .coefficients
            .iter()
            .find(|c| c.from == from && c.to == to)
            .map_or(0.0, |c| c.value))
    }

    /// SFM schema matching this model: x levels "0"/"1", all Z/W by name.
    pub fn sfm_schema(&self) -> Schema {
        let names = self.names();
        Schema {
            x: names[self.x].to_string(),
            x0: "0".into(),
            x1: "1".into(),
            z: self.z.iter().map(|&i| names[i].to_string()).collect(),
            w: self.w.iter().map(|&i| names[i].to_string()).collect(),
            y: Some(names[self.y].to_string()),
            yhat: Vec::new(),
        }
    }

    /// Evaluates the mechanism of `var` given current values and exogenous draws.
    #[inline]
    pub(crate) fn eval(&self, var: usize, values: &[f64], exo: &[f64], env: &mut Vec<f64>) -> f64 {
        let m = &self.mechanisms[var];
        env.clear();
        env.extend(m.slots.iter().map(|s| match *s {
            Slot::Var(j) => values[j],
            Slot::Exo(k) => exo[k],
        }));
        m.expr.eval(env)
    }

    /// Verifies declared-linear mechanisms are affine in their parents with
    /// the declared coefficients and unit weight on a single exogenous term.
    fn check_linear(&self) -> Result<()> {
        let Some(lin) = &self.doc.linear else {
            return Ok(());
        };
        let names = self.names();
        for c in &lin.coefficients {
            let to = self.index_of(&c.to).ok_or_else(|| {
                Error::Parse(format!("linear coefficient targets unknown `{}`", c.to))
            })?;
            if !self.doc.variables[to].parents.contains(&c.from) {
                return Err(Error::Parse(format!(
                    "linear coefficient {}→{} is not a graph edge",
                    c.from, c.to
                )));
            }
        }
        let mut env = Vec::new();
        let probes = [-1.7, 0.3, 2.9];
        for (i, m) in self.mechanisms.iter().enumerate() {
            if i == self.x {
                continue;
            }
            let eval_at = |assign: &dyn Fn(Slot) -> f64, env: &mut Vec<f64>| {
                env.clear();
                env.extend(m.slots.iter().map(|&s| assign(s)));
                m.expr.eval(env)
            };
            let base = eval_at(&|_| 0.0, &mut env);
            let mut slope = Vec::new();
            for &s in &m.slots {
                let d = eval_at(&|t| if t == s { 1.0 } else { 0.0 }, &mut env) - base;
                let expected = match s {
                    Slot::Var(j) => self.coefficient(names[j], names[i])?,
                    Slot::Exo(_) => 1.0,
                };
                if (d - expected).abs() > 1e-9 {
                    return Err(Error::Parse(format!(
                        "`{}` is declared linear but its slope on {:?} is {d}, expected {expected}",
                        names[i], s
                    )));
                }
                slope.push(d);
            }
            for (k, &p) in probes.iter().enumerate() {
                let point = |s: Slot| {
                    let pos = m.slots.iter().position(|&t| t == s).unwrap();
                    p * (pos as f64 + 1.0) - k as f64
                };
                let got = eval_at(&point, &mut env);
                let want = base
                    + m.slots
                        .iter()
                        .zip(&slope)
                        .map(|(&s, d)| d * point(s))
                        .sum::<f64>();
                if (got - want).abs() > 1e-9 * (1.0 + want.abs()) {
                    return Err(Error::Parse(format!(
                        "`{}` is declared linear but its mechanism is not affine",
                        names[i]
                    )));
                }
            }
            if m.slots.iter().filter(|s| matches!(s, Slot::Exo(_))).count() != 1 {
                return Err(Error::Parse(format!(
                    "`{}` is declared linear and must use exactly one exogenous term",
                    names[i]
                )));
            }
        }
        Ok(())
    }
}
