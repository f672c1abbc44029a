use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::schema::Schema;

/// A column-named table of raw string cells, as read from CSV.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn new(headers: Vec<String>, rows: Vec<Vec<String>>) -> Self {
        RawTable { headers, rows }
    }

    /// Builds a table from column-major string slices.
    pub fn from_columns<S: AsRef<str>>(columns: &[(&str, Vec<S>)]) -> Self {
        let headers = columns.iter().map(|(h, _)| h.to_string()).collect();
        let n = columns.first().map_or(0, |(_, c)| c.len());
        let rows = (0..n)
            .map(|i| {
                columns
                    .iter()
                    .map(|(_, c)| c[i].as_ref().to_string())
                    .collect()
            })
            .collect();
        RawTable { headers, rows }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }
}

/// Resolved column indices for each SFM role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Roles {
    pub x: usize,
    pub z: Vec<usize>,
    pub w: Vec<usize>,
    pub y: Option<usize>,
    pub yhat: Vec<usize>,
}

/// Dense stratum identifiers shared by all plug-in estimators.
///
/// `z[i]` indexes the confounder tuple of row `i`, `zw[i]` the joint
/// confounder+mediator tuple; `zw_to_z` maps the latter onto the former.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strata {
    pub x: Vec<u8>,
    pub z: Vec<u32>,
    pub zw: Vec<u32>,
    pub zw_to_z: Vec<u32>,
    pub zw_tuples: Vec<Vec<u32>>,
    zw_lookup: HashMap<Vec<u32>, u32>,
    pub n_z: usize,
    pub n_zw: usize,
}

impl Strata {
    /// Stratum id of a (z, w) code tuple, if it was observed.
    pub fn lookup(&self, zw_codes: &[u32]) -> Option<u32> {
        self.zw_lookup.get(zw_codes).copied()
    }
}

/// Role-annotated categorical data; immutable once validated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    schema: Schema,
    names: Vec<String>,
    columns: Vec<Vec<u32>>,
    levels: Vec<Vec<String>>,
    roles: Roles,
    strata: Strata,
}

/// Validates a raw table against a schema and encodes every column.
///
/// Level tables follow first-appearance order except for the protected
/// attribute, whose levels are always `(x0, x1)`.
pub fn validate_schema(table: &RawTable, schema: &Schema) -> Result<Dataset> {
    schema.check()?;
    for name in schema.columns() {
        if table.column_index(name).is_none() {
            return Err(Error::MissingColumn(name.to_string()));
        }
    }
    if table.rows.is_empty() {
        return Err(Error::EmptyInput("table has no rows".into()));
    }
    let width = table.headers.len();
    let mut columns = vec![Vec::with_capacity(table.rows.len()); width];
    let mut levels: Vec<Vec<String>> = vec![Vec::new(); width];
    let mut lookups: Vec<HashMap<String, u32>> = vec![HashMap::new(); width];
    let x_idx = table.column_index(&schema.x).unwrap();
    levels[x_idx] = vec![schema.x0.clone(), schema.x1.clone()];
    lookups[x_idx].insert(schema.x0.clone(), 0);
    lookups[x_idx].insert(schema.x1.clone(), 1);
    let mut x_extra: Vec<String> = Vec::new();

    for (r, row) in table.rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::Data {
                row: r,
                message: format!("expected {width} cells, found {}", row.len()),
            });
        }
        for (c, cell) in row.iter().enumerate() {
            let code = match lookups[c].get(cell) {
                Some(&code) => code,
                None if c == x_idx => {
                    if !x_extra.contains(cell) {
                        x_extra.push(cell.clone());
                    }
                    continue;
                }
                None => {
                    let code = levels[c].len() as u32;
                    levels[c].push(cell.clone());
                    lookups[c].insert(cell.clone(), code);
                    code
                }
            };
            columns[c].push(code);
        }
    }

    let x_codes = &columns[x_idx];
    let has0 = x_codes.contains(&0);
    let has1 = x_codes.contains(&1);
    let observed = has0 as usize + has1 as usize + x_extra.len();
    if observed != 2 {
        return Err(Error::Cardinality {
            column: schema.x.clone(),
            found: observed,
        });
    }
    if !x_extra.is_empty() {
        return Err(Error::Schema(format!(
            "column `{}` has level `{}` which is neither x0=`{}` nor x1=`{}`",
            schema.x, x_extra[0], schema.x0, schema.x1
        )));
    }

    Dataset::from_parts(schema.clone(), table.headers.clone(), columns, levels)
}

impl Dataset {
    fn from_parts(
        schema: Schema,
        names: Vec<String>,
        columns: Vec<Vec<u32>>,
        levels: Vec<Vec<String>>,
    ) -> Result<Self> {
        let find = |name: &str| {
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::MissingColumn(name.to_string()))
        };
        let roles = Roles {
            x: find(&schema.x)?,
            z: schema.z.iter().map(|c| find(c)).collect::<Result<_>>()?,
            w: schema.w.iter().map(|c| find(c)).collect::<Result<_>>()?,
            y: schema.y.as_deref().map(find).transpose()?,
            yhat: schema.yhat.iter().map(|c| find(c)).collect::<Result<_>>()?,
        };
        let strata = build_strata(&columns, &roles);
        Ok(Dataset {
            schema,
            names,
            columns,
            levels,
            roles,
            strata,
        })
    }

    pub fn n(&self) -> usize {
        self.strata.x.len()
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn roles(&self) -> &Roles {
        &self.roles
    }

    pub fn strata(&self) -> &Strata {
        &self.strata
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn require_column(&self, name: &str) -> Result<usize> {
        self.column_index(name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    pub fn codes(&self, column: usize) -> &[u32] {
        &self.columns[column]
    }

    pub fn levels(&self, column: usize) -> &[String] {
        &self.levels[column]
    }

    pub fn level_code(&self, column: usize, level: &str) -> Option<u32> {
        self.levels[column]
            .iter()
            .position(|l| l == level)
            .map(|p| p as u32)
    }

    /// Protected-attribute codes: 0 for x0, 1 for x1.
    pub fn x(&self) -> &[u8] {
        &self.strata.x
    }

    pub fn count_x(&self) -> [usize; 2] {
        let ones = self.strata.x.iter().filter(|&&v| v == 1).count();
        [self.n() - ones, ones]
    }

    /// Cell value of row `row` in column `column`.
    pub fn cell(&self, row: usize, column: usize) -> &str {
        &self.levels[column][self.columns[column][row] as usize]
    }

    /// Exports the dataset back to a raw string table.
    pub fn to_table(&self) -> RawTable {
        let rows = (0..self.n())
            .map(|r| {
                (0..self.names.len())
                    .map(|c| self.cell(r, c).to_string())
                    .collect()
            })
            .collect();
        RawTable::new(self.names.clone(), rows)
    }

    /// Returns a copy with `name` replaced (or appended) by the given labels.
    pub fn with_column(&self, name: &str, labels: &[String]) -> Result<Dataset> {
        if labels.len() != self.n() {
            return Err(Error::Parameter(format!(
                "column `{name}` has {} values for {} rows",
                labels.len(),
                self.n()
            )));
        }
        let mut levels = Vec::new();
        let mut lookup: HashMap<&str, u32> = HashMap::new();
        let codes = labels
            .iter()
            .map(|l| {
                *lookup.entry(l.as_str()).or_insert_with(|| {
                    levels.push(l.clone());
                    levels.len() as u32 - 1
                })
            })
            .collect();
        self.with_encoded_column(name, codes, levels)
    }

    pub(crate) fn with_encoded_column(
        &self,
        name: &str,
        codes: Vec<u32>,
        levels: Vec<String>,
    ) -> Result<Dataset> {
        if name == self.schema.x {
            return Err(Error::Parameter(
                "the protected attribute column cannot be replaced".into(),
            ));
        }
        let mut names = self.names.clone();
        let mut columns = self.columns.clone();
        let mut all_levels = self.levels.clone();
        match self.column_index(name) {
            Some(c) => {
                columns[c] = codes;
                all_levels[c] = levels;
            }
            None => {
                names.push(name.to_string());
                columns.push(codes);
                all_levels.push(levels);
            }
        }
        Dataset::from_parts(self.schema.clone(), names, columns, all_levels)
    }

    /// Returns a copy with `name` registered as an additional predictor column.
    pub fn with_yhat_role(&self, name: &str) -> Result<Dataset> {
        self.require_column(name)?;
        let mut schema = self.schema.clone();
        if !schema.yhat.iter().any(|c| c == name) {
            schema.yhat.push(name.to_string());
        }
        schema.check()?;
        Dataset::from_parts(
            schema,
            self.names.clone(),
            self.columns.clone(),
            self.levels.clone(),
        )
    }

    /// Rows selected by index, with repetition (used for resampling).
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let columns = self
            .columns
            .iter()
            .map(|col| rows.iter().map(|&r| col[r]).collect())
            .collect();
        Dataset::from_parts(
            self.schema.clone(),
            self.names.clone(),
            columns,
            self.levels.clone(),
        )
        .expect("roles unchanged")
    }

    /// Parses every level of a column as a number; accepts decimals and
    /// `p/q` rational labels.
    pub fn numeric_levels(&self, column: usize) -> Result<Vec<f64>> {
        self.levels[column]
            .iter()
            .map(|l| {
                parse_number(l).ok_or_else(|| {
                    Error::Parse(format!(
                        "level `{l}` of column `{}` is not numeric",
                        self.names[column]
                    ))
                })
            })
            .collect()
    }

    /// Per-row numeric values of a column.
    pub fn numeric_column(&self, column: usize) -> Result<Vec<f64>> {
        let values = self.numeric_levels(column)?;
        Ok(self.columns[column]
            .iter()
            .map(|&c| values[c as usize])
            .collect())
    }
}

/// Parses a decimal or `p/q` label.
pub fn parse_number(label: &str) -> Option<f64> {
    let label = label.trim();
    if let Some((p, q)) = label.split_once('/') {
        let p: f64 = p.trim().parse().ok()?;
        let q: f64 = q.trim().parse().ok()?;
        (q != 0.0).then(|| p / q)
    } else {
        label.parse().ok()
    }
}

fn build_strata(columns: &[Vec<u32>], roles: &Roles) -> Strata {
    let n = columns[roles.x].len();
    let x = columns[roles.x].iter().map(|&c| c as u8).collect();
    let mut z_ids: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut zw_lookup: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut zw_tuples = Vec::new();
    let mut zw_to_z = Vec::new();
    let mut z = Vec::with_capacity(n);
    let mut zw = Vec::with_capacity(n);
    let mut key = Vec::with_capacity(roles.z.len() + roles.w.len());
    #[allow(clippy::needless_range_loop)]
    for r in 0..n {
        key.clear();
        key.extend(roles.z.iter().map(|&c| columns[c][r]));
        let next = z_ids.len() as u32;
        let zid = *z_ids.entry(key.clone()).or_insert(next);
        key.extend(roles.w.iter().map(|&c| columns[c][r]));
        let next = zw_lookup.len() as u32;
        let zwid = *zw_lookup.entry(key.clone()).or_insert_with(|| {
            zw_tuples.push(key.clone());
            zw_to_z.push(zid);
            next
        });
        z.push(zid);
        zw.push(zwid);
    }
    Strata {
        x,
        z,
        zw,
        zw_to_z,
        zw_tuples,
        n_z: z_ids.len(),
        n_zw: zw_lookup.len(),
        zw_lookup,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> RawTable {
        RawTable::from_columns(&[
            ("x", vec!["b", "a", "a", "b"]),
            ("y", vec!["0", "1", "0", "1"]),
        ])
    }

    #[test]
    fn x_levels_follow_declaration_order() {
        let ds = validate_schema(&table(), &Schema::new("x", "a", "b").with_y("y")).unwrap();
        assert_eq!(ds.n(), 4);
        assert_eq!(ds.levels(0), ["a", "b"]);
        assert_eq!(ds.x(), [1, 0, 0, 1]);
        assert_eq!(ds.levels(1), ["0", "1"]);
    }

    #[test]
    fn missing_column_is_named() {
        let t = RawTable::from_columns(&[("x", vec!["a", "b"])]);
        let err = validate_schema(&t, &Schema::new("x", "a", "b").with_y("y")).unwrap_err();
        assert_eq!(err, Error::MissingColumn("y".into()));
    }

    #[test]
    fn three_x_levels_is_cardinality_error() {
        let t = RawTable::from_columns(&[("x", vec!["a", "b", "c"])]);
        let err = validate_schema(&t, &Schema::new("x", "a", "b")).unwrap_err();
        assert!(matches!(err, Error::Cardinality { found: 3, .. }));
        let t = RawTable::from_columns(&[("x", vec!["a", "a"])]);
        let err = validate_schema(&t, &Schema::new("x", "a", "b")).unwrap_err();
        assert!(matches!(err, Error::Cardinality { found: 1, .. }));
    }

    #[test]
    fn empty_table_rejected() {
        let t = RawTable::new(vec!["x".into()], vec![]);
        let err = validate_schema(&t, &Schema::new("x", "a", "b")).unwrap_err();
        assert!(matches!(err, Error::EmptyInput(_)));
    }

    #[test]
    fn round_trip_through_table() {
        let ds = validate_schema(&table(), &Schema::new("x", "a", "b").with_y("y")).unwrap();
        let again = validate_schema(&ds.to_table(), ds.schema()).unwrap();
        assert_eq!(again, ds);
    }

    #[test]
    fn rational_labels_parse() {
        assert_eq!(parse_number("3/4"), Some(0.75));
        assert_eq!(parse_number("-0.5"), Some(-0.5));
        assert_eq!(parse_number("1/0"), None);
        assert_eq!(parse_number("abc"), None);
    }
}
