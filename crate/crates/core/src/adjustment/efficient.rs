use std::collections::HashMap;

use crate::adjustment::cells::{rational_label, rational_value, CellCounts, Rational};
use crate::error::Result;
use crate::model::Dataset;

/// A predictor column with exact rational values and discrete labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictedColumn {
    pub labels: Vec<String>,
    pub values: Vec<Rational>,
    /// Rows scored through a fallback because their cell was unseen.
    pub fallbacks: usize,
}

impl PredictedColumn {
    pub(crate) fn from_values(values: Vec<Rational>, fallbacks: usize) -> Self {
        PredictedColumn {
            labels: values.iter().map(rational_label).collect(),
            values,
            fallbacks,
        }
    }

    pub fn numeric(&self) -> Vec<f64> {
        self.values.iter().map(rational_value).collect()
    }

    /// Copy of `data` with this column appended as predictor `name`.
    pub fn attach(&self, data: &Dataset, name: &str) -> Result<Dataset> {
        data.with_column(name, &self.labels)?.with_yhat_role(name)
    }
}

/// Ŷ(x, z, w) = P̂(y | x, z, w) from cell frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficientPredictor {
    pub y_level: String,
    inputs: Vec<String>,
    cells: HashMap<Vec<String>, Rational>,
    per_x: HashMap<String, Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficientFit {
    pub predictor: EfficientPredictor,
    /// In-sample fitted column.
    pub column: PredictedColumn,
}

pub fn fit_efficient_predictor(data: &Dataset, y_level: &str) -> Result<EfficientFit> {
    let counts = CellCounts::new(data, y_level)?;
    let st = data.strata();
    let schema = data.schema();
    let inputs: Vec<String> = schema.columns_xzw().map(str::to_string).collect();

    let mut cells = HashMap::new();
    let values: Vec<Rational> = (0..data.n())
        .map(|r| {
            let (x, zw) = (st.x[r] as usize, st.zw[r] as usize);
            let v = Rational::new(counts.s_zw[x][zw], counts.n_zw[x][zw]);
            cells.entry(key(data, &inputs, r)).or_insert(v);
            v
        })
        .collect();
    let per_x = (0..2u8)
        .map(|x| (schema.level(x).to_string(), counts.p_x(x as usize)))
        .collect();
    Ok(EfficientFit {
        predictor: EfficientPredictor {
            y_level: y_level.to_string(),
            inputs,
            cells,
            per_x,
        },
        column: PredictedColumn::from_values(values, 0),
    })
}

fn key(data: &Dataset, inputs: &[String], row: usize) -> Vec<String> {
    inputs
        .iter()
        .map(|c| {
            data.cell(row, data.column_index(c).expect("input column"))
                .to_string()
        })
        .collect()
}

impl EfficientPredictor {
    /// Scores a dataset carrying the same input columns. Unseen cells fall
    /// back to P̂(y | x) and are counted.
    pub fn predict(&self, data: &Dataset) -> Result<PredictedColumn> {
        for c in &self.inputs {
            data.require_column(c)?;
        }
        let mut fallbacks = 0;
        let values = (0..data.n())
            .map(|r| {
                let k = key(data, &self.inputs, r);
                match self.cells.get(&k) {
                    Some(v) => *v,
                    None => {
                        fallbacks += 1;
                        self.per_x[&k[0]]
                    }
                }
            })
            .collect();
        Ok(PredictedColumn::from_values(values, fallbacks))
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{ippm, Outcome};
    use crate::model::{validate_schema, RawTable, Schema};

    fn table(rows: &[(&str, &str, &str)]) -> Dataset {
        let col = |i: usize| {
            rows.iter()
                .map(|r| [r.0, r.1, r.2][i].to_string())
                .collect::<Vec<_>>()
        };
        validate_schema(
            &RawTable::from_columns(&[("x", col(0)), ("w", col(1)), ("y", col(2))]),
            &Schema::new("x", "a", "b").with_w(&["w"]).with_y("y"),
        )
        .unwrap()
    }

    #[test]
    fn fitted_values_are_cell_frequencies() {
        let ds = table(&[
            ("a", "0", "1"),
            ("a", "0", "0"),
            ("a", "1", "1"),
            ("b", "0", "0"),
            ("b", "0", "1"),
            ("b", "1", "1"),
            ("b", "1", "1"),
            ("b", "1", "0"),
        ]);
        let fit = fit_efficient_predictor(&ds, "1").unwrap();
        assert_eq!(
            fit.column.labels,
            ["1/2", "1/2", "1", "1/2", "1/2", "2/3", "2/3", "2/3"]
        );
        let with = fit.column.attach(&ds, "yhat").unwrap();
        let prof = ippm(&with, "yhat", &Outcome::level("y", "1")).unwrap();
        assert_eq!(prof.skipped, 2);
        assert_eq!(prof.ippm, 0.0);
    }

    #[test]
    fn deterministic_outcome_gives_indicator_predictions() {
        let ds = table(&[
            ("a", "0", "0"),
            ("a", "1", "1"),
            ("b", "1", "1"),
            ("b", "0", "0"),
        ]);
        let fit = fit_efficient_predictor(&ds, "1").unwrap();
        assert_eq!(fit.column.labels, ["0", "1", "1", "0"]);
    }

    #[test]
    fn unseen_cells_fall_back_to_group_rate() {
        let train = table(&[("a", "0", "1"), ("a", "0", "0"), ("b", "1", "1")]);
        let fit = fit_efficient_predictor(&train, "1").unwrap();
        let test = table(&[("a", "1", "0"), ("b", "1", "1"), ("b", "0", "0")]);
        let out = fit.predictor.predict(&test).unwrap();
        assert_eq!(out.labels, ["1/2", "1", "1"]);
        assert_eq!(out.fallbacks, 2);
    }
}
