use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EffectEstimate;

/// Absolute slack when checking whether an interval contains zero, to absorb
/// floating-point accumulation in exactly-zero effects.
pub const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

/// What an estimate is tested against.
#[derive(Debug, Clone, Copy)]
pub enum Reference<'a> {
    Zero,
    /// Another estimate; `paired_difference` is the bootstrap estimate of
    /// `a − other` on shared resamples.
    Estimate {
        other: &'a EffectEstimate,
        paired_difference: Option<&'a EffectEstimate>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestDetail {
    /// `zero` or `y`.
    pub target: String,
    pub difference: f64,
    pub difference_ci: [f64; 2],
    pub level: f64,
    /// Whether the two marginal intervals overlap (equality tests only).
    pub ci_overlap: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub verdict: Verdict,
    pub detail: TestDetail,
}

fn same_level(a: f64, b: f64) -> Result<()> {
    if (a - b).abs() > 1e-12 {
        return Err(Error::Parameter(format!(
            "confidence levels differ ({a} vs {b})"
        )));
    }
    Ok(())
}

/// PASS iff the interval of `a` (against zero) or of the paired difference
/// (against another estimate) contains 0.
pub fn equality_test(a: &EffectEstimate, reference: Reference) -> Result<TestOutcome> {
    let (target, diff, overlap) = match reference {
        Reference::Zero => ("zero", a.clone(), None),
        Reference::Estimate {
            other,
            paired_difference,
        } => {
            same_level(a.level, other.level)?;
            let diff = match paired_difference {
                Some(d) => {
                    same_level(a.level, d.level)?;
                    d.clone()
                }
                None if a == other => {
                    EffectEstimate::point(0.0).with_interval(0.0, 0.0, a.level, a.replicates)
                }
                None if a.replicates == 0 && other.replicates == 0 => {
                    let v = a.value - other.value;
                    EffectEstimate::point(v).with_interval(v, v, a.level, 0)
                }
                None => {
                    return Err(Error::Parameter(
                        "comparing two bootstrap estimates needs their paired difference".into(),
                    ))
                }
            };
            let overlap =
                a.ci_low <= other.ci_high + TOLERANCE && other.ci_low <= a.ci_high + TOLERANCE;
            ("y", diff, Some(overlap))
        }
    };
    let verdict = if diff.contains(0.0, TOLERANCE) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(TestOutcome {
        verdict,
        detail: TestDetail {
            target: target.to_string(),
            difference: diff.value,
            difference_ci: [diff.ci_low, diff.ci_high],
            level: diff.level,
            ci_overlap: overlap,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(v: f64, lo: f64, hi: f64) -> EffectEstimate {
        EffectEstimate::point(v).with_interval(lo, hi, 0.95, 1000)
    }

    #[test]
    fn reported_direct_effect_fails() {
        let a = est(0.06, 0.0304, 0.0896);
        assert_eq!(
            equality_test(&a, Reference::Zero).unwrap().verdict,
            Verdict::Fail
        );
    }

    #[test]
    fn fair_predictor_effect_passes() {
        let a = est(-0.0072, -0.0183, 0.0039);
        assert_eq!(
            equality_test(&a, Reference::Zero).unwrap().verdict,
            Verdict::Pass
        );
    }

    #[test]
    fn identical_estimates_are_equal() {
        let a = est(0.2, 0.1, 0.3);
        let out = equality_test(
            &a,
            Reference::Estimate {
                other: &a,
                paired_difference: None,
            },
        )
        .unwrap();
        assert_eq!(out.verdict, Verdict::Pass);
        assert_eq!(out.detail.difference, 0.0);
        assert_eq!(out.detail.ci_overlap, Some(true));
    }

    #[test]
    fn paired_difference_decides() {
        let a = est(0.2, 0.1, 0.3);
        let b = est(0.25, 0.15, 0.35);
        let d = est(-0.05, -0.07, -0.03);
        let out = equality_test(
            &a,
            Reference::Estimate {
                other: &b,
                paired_difference: Some(&d),
            },
        )
        .unwrap();
        assert_eq!(out.verdict, Verdict::Fail);
        assert_eq!(out.detail.ci_overlap, Some(true));
        assert!(equality_test(
            &a,
            Reference::Estimate {
                other: &b,
                paired_difference: None
            }
        )
        .is_err());
    }

    #[test]
    fn mismatched_levels_rejected() {
        let a = est(0.2, 0.1, 0.3);
        let mut b = a.clone();
        b.level = 0.9;
        let err = equality_test(
            &a,
            Reference::Estimate {
                other: &b,
                paired_difference: None,
            },
        );
        assert!(matches!(err, Err(Error::Parameter(_))));
    }
}
