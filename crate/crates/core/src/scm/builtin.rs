//! Built-in models used by the tests, the CLI defaults and the demo.

use crate::error::{Error, Result};
use crate::scm::spec::ScmSpec;

const SOURCES: [(&str, &str); 7] = [
    ("s1", include_str!("../../scms/s1.toml")),
    ("s2", include_str!("../../scms/s2.toml")),
    ("s3", include_str!("../../scms/s3.toml")),
    ("confounded", include_str!("../../scms/confounded.toml")),
    ("full-sfm", include_str!("../../scms/full_sfm.toml")),
    (
        "gaussian-mediators",
        include_str!("../../scms/gaussian_mediators.toml"),
    ),
    ("linear", include_str!("../../scms/linear.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    SOURCES.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Option<&'static str> {
    SOURCES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn by_name(name: &str) -> Result<ScmSpec> {
    let src = source(name).ok_or_else(|| {
        Error::Parameter(format!(
            "unknown built-in SCM `{name}` (known: {})",
            names().collect::<Vec<_>>().join(", ")
        ))
    })?;
    ScmSpec::from_toml(src)
}

fn load(name: &str) -> ScmSpec {
    by_name(name).expect("built-in SCMs are valid")
}

/// X ~ Bern(.5), W ← X, Y ← W.
pub fn s1() -> ScmSpec {
    load("s1")
}

/// Y ← X, W exogenous.
pub fn s2() -> ScmSpec {
    load("s2")
}

/// W ← X ⊕ U_W with U_W ~ Bern(.3), Y ← W.
pub fn s3() -> ScmSpec {
    load("s3")
}

/// Binary X, Z, W, Y with X↔Z confounding through a shared draw.
pub fn confounded() -> ScmSpec {
    load("confounded")
}

/// Discrete model with nonzero direct, indirect and spurious effects.
pub fn full_sfm() -> ScmSpec {
    load("full-sfm")
}

/// The continuous synthetic model with two mediators and Gaussian noise.
pub fn gaussian_mediators() -> ScmSpec {
    load("gaussian-mediators")
}

/// Linear X → W → Y chain with α_XW = 2, α_WY = 3, α_XY = 1.
pub fn linear() -> ScmSpec {
    load("linear")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtins_parse() {
        for n in names() {
            by_name(n).unwrap();
        }
        assert!(by_name("nope").is_err());
        assert!(linear().is_linear());
    }
}
