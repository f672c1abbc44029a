use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column roles of the Standard Fairness Model.
///
/// `x` is the protected attribute with its two declared levels; `z` are the
/// confounders, `w` the mediators, `y` the outcome and `yhat` any number of
/// predictor columns. Roles are always declared, never inferred.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub x: String,
    pub x0: String,
    pub x1: String,
    #[serde(default)]
    pub z: Vec<String>,
    #[serde(default)]
    pub w: Vec<String>,
    #[serde(default)]
    pub y: Option<String>,
    #[serde(default)]
    pub yhat: Vec<String>,
}

impl Schema {
    pub fn new(x: &str, x0: &str, x1: &str) -> Self {
        Schema {
            x: x.to_string(),
            x0: x0.to_string(),
            x1: x1.to_string(),
            z: Vec::new(),
            w: Vec::new(),
            y: None,
            yhat: Vec::new(),
        }
    }

    pub fn with_z<S: AsRef<str>>(mut self, z: &[S]) -> Self {
        self.z = z.iter().map(|s| s.as_ref().to_string()).collect();
        self
    }

    pub fn with_w<S: AsRef<str>>(mut self, w: &[S]) -> Self {
        self.w = w.iter().map(|s| s.as_ref().to_string()).collect();
        self
    }

    pub fn with_y(mut self, y: &str) -> Self {
        self.y = Some(y.to_string());
        self
    }

    pub fn with_yhat<S: AsRef<str>>(mut self, yhat: &[S]) -> Self {
        self.yhat = yhat.iter().map(|s| s.as_ref().to_string()).collect();
        self
    }

    /// Parses a TOML key-value document with keys `x, x0, x1, z, w, y, yhat`.
    pub fn from_toml(text: &str) -> Result<Self> {
        let schema: Schema = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        schema.check()?;
        Ok(schema)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("schema serializes")
    }

    /// Label of the protected-attribute level with code 0 (x0) or 1 (x1).
    pub fn level(&self, code: u8) -> &str {
        if code == 0 {
            &self.x0
        } else {
            &self.x1
        }
    }

    /// Protected attribute, confounders and mediators: the predictor inputs.
    pub fn columns_xzw(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.x.as_str())
            .chain(self.z.iter().map(String::as_str))
            .chain(self.w.iter().map(String::as_str))
    }

    /// Every column name the schema refers to, in role order.
    pub fn columns(&self) -> Vec<&str> {
        let mut out = vec![self.x.as_str()];
        out.extend(self.z.iter().map(String::as_str));
        out.extend(self.w.iter().map(String::as_str));
        out.extend(self.y.iter().map(String::as_str));
        out.extend(self.yhat.iter().map(String::as_str));
        out
    }

    /// Checks the role sets are pairwise disjoint and the x levels distinct.
    pub fn check(&self) -> Result<()> {
        if self.x0 == self.x1 {
            return Err(Error::Schema(format!(
                "x0 and x1 must differ (both `{}`)",
                self.x0
            )));
        }
        let mut seen = HashSet::new();
        for name in self.columns() {
            if name.is_empty() {
                return Err(Error::Schema("empty column name".into()));
            }
            if !seen.insert(name) {
                return Err(Error::Schema(format!(
                    "column `{name}` is assigned more than one role"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let schema = Schema::new("race", "white", "nonwhite")
            .with_z(&["sex", "age"])
            .with_w(&["priors"])
            .with_y("recid")
            .with_yhat(&["score"]);
        let parsed = Schema::from_toml(&schema.to_toml()).unwrap();
        assert_eq!(parsed, schema);
    }

    #[test]
    fn optional_keys_default_to_empty() {
        let s = Schema::from_toml("x = \"a\"\nx0 = \"0\"\nx1 = \"1\"\n").unwrap();
        assert!(s.z.is_empty() && s.w.is_empty() && s.y.is_none());
    }

    #[test]
    fn overlapping_roles_rejected() {
        let s = Schema::new("x", "0", "1").with_z(&["a"]).with_w(&["a"]);
        assert!(matches!(s.check(), Err(Error::Schema(_))));
        let s = Schema::new("x", "0", "0");
        assert!(s.check().is_err());
    }
}
