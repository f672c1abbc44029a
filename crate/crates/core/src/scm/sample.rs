use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};

use crate::error::{Error, Result};
use crate::model::{bin_column, validate_schema, Dataset, RawTable};
use crate::par::map_indices;
use crate::scm::spec::{Distribution, Role, ScmSpec};

/// A deterministic predictor mechanism Ŷ = f(x, z, w), evaluated in every
/// world of a unit.
pub trait UnitPredictor: Sync {
    fn predict(&self, x: f64, z: &[f64], w: &[f64]) -> f64;
}

impl<F> UnitPredictor for F
where
    F: Fn(f64, &[f64], &[f64]) -> f64 + Sync,
{
    fn predict(&self, x: f64, z: &[f64], w: &[f64]) -> f64 {
        self(x, z, w)
    }
}

/// World of a unit: factual, or under do(X = x0) / do(X = x1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PanelWorld {
    Factual,
    X0,
    X1,
}

impl PanelWorld {
    pub fn under(x: u8) -> Self {
        if x == 0 {
            PanelWorld::X0
        } else {
            PanelWorld::X1
        }
    }
}

/// Solves the mechanisms in topological order. `x_set` pins X; `w_from`
/// pins every W to the values of another world of the same unit. Returns
/// the index of the first variable evaluating to a non-finite value.
pub(crate) fn solve(
    scm: &ScmSpec,
    exo: &[f64],
    x_set: Option<f64>,
    w_from: Option<&[f64]>,
    out: &mut [f64],
    env: &mut Vec<f64>,
) -> std::result::Result<(), usize> {
    for var in 0..scm.n_vars() {
        let v = match (x_set, scm.role(var), w_from) {
            (Some(x), _, _) if var == scm.x => x,
            (_, Role::W, Some(src)) => src[var],
            _ => scm.eval(var, out, exo, env),
        };
        if !v.is_finite() {
            return Err(var);
        }
        out[var] = v;
    }
    Ok(())
}

/// Draws one exogenous vector for `unit` from its own ChaCha stream.
pub(crate) fn draw_exogenous(scm: &ScmSpec, seed: u64, unit: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(unit as u64);
    scm.exogenous()
        .iter()
        .map(|e| match &e.dist {
            Distribution::Bernoulli { p } => f64::from(u8::from(rng.random::<f64>() < *p)),
            Distribution::Normal { mean, sd } => Normal::new(*mean, *sd)
                .expect("sd checked at parse time")
                .sample(&mut rng),
            Distribution::Categorical { values, probs } => {
                let u = rng.random::<f64>();
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                *values.last().unwrap()
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub factual: Vec<f64>,
    pub x0: Vec<f64>,
    pub x1: Vec<f64>,
}

impl Predictions {
    pub fn world(&self, world: PanelWorld) -> &[f64] {
        match world {
            PanelWorld::Factual => &self.factual,
            PanelWorld::X0 => &self.x0,
            PanelWorld::X1 => &self.x1,
        }
    }
}

/// Sampled units with exogenous draws, factual values and both
/// interventional worlds. Storage is column-major: `[variable][unit]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitPanel {
    pub scm: ScmSpec,
    pub seed: u64,
    exo: Vec<Vec<f64>>,
    factual: Vec<Vec<f64>>,
    x0: Vec<Vec<f64>>,
    x1: Vec<Vec<f64>>,
    predictions: Option<Predictions>,
}

struct UnitRow {
    exo: Vec<f64>,
    factual: Vec<f64>,
    x0: Vec<f64>,
    x1: Vec<f64>,
}

/// Samples `n` units, solving each under no intervention and under
/// do(X = 0), do(X = 1). Deterministic per seed.
pub fn sample_units(
    scm: &ScmSpec,
    n: usize,
    seed: u64,
    predictor: Option<&dyn UnitPredictor>,
) -> Result<UnitPanel> {
    if n == 0 {
        return Err(Error::Parameter("sample size must be at least 1".into()));
    }
    let names = scm.names();
    let k = scm.n_vars();
    let fail = |var: usize, unit: usize| Error::Simulation {
        variable: names[var].to_string(),
        unit,
    };
    let rows: Vec<Result<UnitRow>> = map_indices(n, |unit| {
        let exo = draw_exogenous(scm, seed, unit);
        let mut env = Vec::new();
        let mut factual = vec![0.0; k];
        let mut x0 = vec![0.0; k];
        let mut x1 = vec![0.0; k];
        solve(scm, &exo, None, None, &mut factual, &mut env).map_err(|v| fail(v, unit))?;
        let x = factual[scm.x];
        if x != 0.0 && x != 1.0 {
            return Err(Error::Simulation {
                variable: format!("{} (must be 0 or 1, got {x})", names[scm.x]),
                unit,
            });
        }
        solve(scm, &exo, Some(0.0), None, &mut x0, &mut env).map_err(|v| fail(v, unit))?;
        solve(scm, &exo, Some(1.0), None, &mut x1, &mut env).map_err(|v| fail(v, unit))?;
        // consistency axiom: V_{X(u)}(u) = V(u)
        let same = if x == 0.0 { &x0 } else { &x1 };
        assert!(
            same.iter()
                .zip(&factual)
                .all(|(a, b)| a.to_bits() == b.to_bits()),
            "consistency violated at unit {unit}"
        );
        Ok(UnitRow {
            exo,
            factual,
            x0,
            x1,
        })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;

    let columns = |pick: &dyn Fn(&UnitRow) -> &Vec<f64>, width: usize| -> Vec<Vec<f64>> {
        (0..width)
            .map(|j| rows.iter().map(|r| pick(r)[j]).collect())
            .collect()
    };
    let mut panel = UnitPanel {
        scm: scm.clone(),
        seed,
        exo: columns(&|r| &r.exo, scm.n_exogenous()),
        factual: columns(&|r| &r.factual, k),
        x0: columns(&|r| &r.x0, k),
        x1: columns(&|r| &r.x1, k),
        predictions: None,
    };
    if let Some(p) = predictor {
        panel.attach_predictor(p);
    }
    Ok(panel)
}

impl UnitPanel {
    pub fn n(&self) -> usize {
        self.factual[0].len()
    }

    pub fn names(&self) -> Vec<&str> {
        self.scm.names()
    }

    pub fn exogenous(&self, index: usize) -> &[f64] {
        &self.exo[index]
    }

    pub fn values(&self, var: usize, world: PanelWorld) -> &[f64] {
        match world {
            PanelWorld::Factual => &self.factual[var],
            PanelWorld::X0 => &self.x0[var],
            PanelWorld::X1 => &self.x1[var],
        }
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.scm.index_of(name).map(|i| self.factual[i].as_slice())
    }

    pub fn x(&self) -> &[f64] {
        &self.factual[self.scm.x]
    }

    pub fn y(&self, world: PanelWorld) -> &[f64] {
        self.values(self.scm.y, world)
    }

    pub fn predictions(&self) -> Option<&Predictions> {
        self.predictions.as_ref()
    }

    /// Pushes a predictor through every world: Ŷ = f(X, Z, W),
    /// Ŷ_x = f(x, Z, W_x).
    pub fn attach_predictor(&mut self, predictor: &dyn UnitPredictor) {
        let eval = |unit: usize, world: PanelWorld| {
            let z: Vec<f64> = self
                .scm
                .z
                .iter()
                .map(|&i| self.values(i, world)[unit])
                .collect();
            let w: Vec<f64> = self
                .scm
                .w
                .iter()
                .map(|&i| self.values(i, world)[unit])
                .collect();
            predictor.predict(self.values(self.scm.x, world)[unit], &z, &w)
        };
        let n = self.n();
        let rows: Vec<[f64; 3]> = map_indices(n, |u| {
            [
                eval(u, PanelWorld::Factual),
                eval(u, PanelWorld::X0),
                eval(u, PanelWorld::X1),
            ]
        });
        self.predictions = Some(Predictions {
            factual: rows.iter().map(|r| r[0]).collect(),
            x0: rows.iter().map(|r| r[1]).collect(),
            x1: rows.iter().map(|r| r[2]).collect(),
        });
    }

    /// Per-unit (x, z ++ w) features and y of the factual world, for fitting
    /// panel learners.
    pub fn training_view(&self) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
        let features = self
            .scm
            .z
            .iter()
            .chain(&self.scm.w)
            .map(|&i| self.factual[i].clone())
            .collect();
        (
            self.x().to_vec(),
            features,
            self.y(PanelWorld::Factual).to_vec(),
        )
    }

    /// Export with `V, V_x0, V_x1` per variable (and `yhat, yhat_x0, yhat_x1`
    /// when a predictor is attached).
    pub fn to_table(&self) -> RawTable {
        let mut headers = Vec::new();
        let mut cols: Vec<&[f64]> = Vec::new();
        for (i, name) in self.names().iter().enumerate() {
            headers.extend([name.to_string(), format!("{name}_x0"), format!("{name}_x1")]);
            cols.extend([self.factual[i].as_slice(), &self.x0[i], &self.x1[i]]);
        }
        if let Some(p) = &self.predictions {
            headers.extend(["yhat".to_string(), "yhat_x0".into(), "yhat_x1".into()]);
            cols.extend([p.factual.as_slice(), &p.x0, &p.x1]);
        }
        RawTable::new(headers, rows_of(&cols, self.n()))
    }

    /// Factual observational table (plus `yhat` when attached).
    pub fn factual_table(&self) -> RawTable {
        let mut headers: Vec<String> = self.names().iter().map(|s| s.to_string()).collect();
        let mut cols: Vec<&[f64]> = self.factual.iter().map(Vec::as_slice).collect();
        if let Some(p) = &self.predictions {
            headers.push("yhat".into());
            cols.push(&p.factual);
        }
        RawTable::new(headers, rows_of(&cols, self.n()))
    }

    /// Observational dataset under the SFM schema of the model. Z and W
    /// columns with more than `bins` distinct values are quantile-binned.
    pub fn to_dataset(&self, bins: usize) -> Result<Dataset> {
        let mut schema = self.scm.sfm_schema();
        if self.predictions.is_some() {
            schema.yhat.push("yhat".into());
        }
        let mut ds = validate_schema(&self.factual_table(), &schema)?;
        for &i in self.scm.z.iter().chain(&self.scm.w) {
            let name = self.names()[i].to_string();
            let col = ds.require_column(&name)?;
            if ds.levels(col).len() > bins {
                ds = bin_column(&ds, &name, bins, &self.factual[i])?.dataset;
            }
        }
        Ok(ds)
    }
}

fn rows_of(cols: &[&[f64]], n: usize) -> Vec<Vec<String>> {
    (0..n)
        .map(|u| cols.iter().map(|c| format_value(c[u])).collect())
        .collect()
}

/// Shortest round-trip decimal form; integral values print without a point.
pub fn format_value(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::builtin;

    #[test]
    fn same_seed_same_panel() {
        let scm = builtin::gaussian_mediators();
        let a = sample_units(&scm, 200, 9, None).unwrap();
        let b = sample_units(&scm, 200, 9, None).unwrap();
        assert_eq!(a, b);
        let c = sample_units(&scm, 200, 10, None).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn consistency_holds() {
        let scm = builtin::confounded();
        let p = sample_units(&scm, 500, 1, None).unwrap();
        let y = scm.y_index();
        for u in 0..p.n() {
            let world = PanelWorld::under(p.x()[u] as u8);
            assert_eq!(p.values(y, world)[u], p.values(y, PanelWorld::Factual)[u]);
        }
    }

    #[test]
    fn no_descendants_means_equal_potential_outcomes() {
        let scm = ScmSpec::from_toml(
            r#"
            [[exogenous]]
            name = "UX"
            dist = { kind = "bernoulli", p = 0.5 }
            [[exogenous]]
            name = "UY"
            dist = { kind = "normal", mean = 0.0, sd = 1.0 }
            [[variables]]
            name = "X"
            role = "X"
            mechanism = "UX"
            [[variables]]
            name = "Y"
            role = "Y"
            mechanism = "UY"
        "#,
        )
        .unwrap();
        let p = sample_units(&scm, 300, 4, None).unwrap();
        assert_eq!(p.y(PanelWorld::X0), p.y(PanelWorld::X1));
    }

    #[test]
    fn non_finite_mechanism_reports_variable_and_unit() {
        let scm = ScmSpec::from_toml(
            r#"
            [[exogenous]]
            name = "UX"
            dist = { kind = "bernoulli", p = 1.0 }
            [[variables]]
            name = "X"
            role = "X"
            mechanism = "UX"
            [[variables]]
            name = "Y"
            role = "Y"
            parents = ["X"]
            mechanism = "ln(X - 1)"
        "#,
        )
        .unwrap();
        let err = sample_units(&scm, 3, 0, None).unwrap_err();
        assert_eq!(
            err,
            Error::Simulation {
                variable: "Y".into(),
                unit: 0
            }
        );
    }

    #[test]
    fn predictor_pushed_through_worlds() {
        let scm = builtin::s1();
        let pred = |x: f64, _: &[f64], w: &[f64]| x + 10.0 * w[0];
        let p = sample_units(&scm, 50, 2, Some(&pred)).unwrap();
        let pr = p.predictions().unwrap();
        assert!(pr.x0.iter().all(|&v| v == 0.0));
        assert!(pr.x1.iter().all(|&v| v == 11.0));
        let t = p.to_table();
        assert_eq!(t.headers.len(), 3 * 3 + 3);
        assert_eq!(t.headers[1], "X_x0");
    }
}
