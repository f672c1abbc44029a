use serde::{Deserialize, Serialize};

use crate::audit::equality::{equality_test, Reference, TestDetail, Verdict};
use crate::error::{Error, Result};
use crate::estimators::{bootstrap_joint, BootstrapConfig, Estimator, Outcome, Sample};
use crate::model::{BnSpec, Dataset, EffectEstimate, Flag, Pathway, RawTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Overall {
    Success,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathwayRecord {
    pub pathway: Pathway,
    pub in_bn: bool,
    pub effect_y: Option<EffectEstimate>,
    pub effect_yhat: EffectEstimate,
    pub verdict: Verdict,
    pub test_detail: TestDetail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEcho {
    pub bn: String,
    pub baseline: String,
    pub y: String,
    pub yhat: String,
    pub yhat_mode: String,
    pub replicates: usize,
    pub level: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub pathways: Vec<PathwayRecord>,
    pub overall: Overall,
    pub config: AuditEcho,
}

impl AuditReport {
    fn assemble(pathways: Vec<PathwayRecord>, config: AuditEcho) -> Self {
        let overall = if pathways.iter().all(|p| p.verdict == Verdict::Pass) {
            Overall::Success
        } else {
            Overall::Fail
        };
        AuditReport {
            pathways,
            overall,
            config,
        }
    }

    pub fn record(&self, p: Pathway) -> &PathwayRecord {
        self.pathways
            .iter()
            .find(|r| r.pathway == p)
            .expect("every pathway is audited")
    }

    /// One row per pathway.
    pub fn to_table(&self) -> RawTable {
        let headers = [
            "pathway",
            "in_bn",
            "effect_y",
            "y_ci_low",
            "y_ci_high",
            "effect_yhat",
            "yhat_ci_low",
            "yhat_ci_high",
            "target",
            "difference",
            "diff_ci_low",
            "diff_ci_high",
            "ci_overlap",
            "verdict",
            "overall",
        ];
        let f = |v: f64| format!("{v}");
        let rows = self
            .pathways
            .iter()
            .map(|r| {
                let (ey, ly, hy) = match &r.effect_y {
                    Some(e) => (f(e.value), f(e.ci_low), f(e.ci_high)),
                    None => Default::default(),
                };
                vec![
                    r.pathway.name().to_string(),
                    u8::from(r.in_bn).to_string(),
                    ey,
                    ly,
                    hy,
                    f(r.effect_yhat.value),
                    f(r.effect_yhat.ci_low),
                    f(r.effect_yhat.ci_high),
                    r.test_detail.target.clone(),
                    f(r.test_detail.difference),
                    f(r.test_detail.difference_ci[0]),
                    f(r.test_detail.difference_ci[1]),
                    r.test_detail
                        .ci_overlap
                        .map(|b| b.to_string())
                        .unwrap_or_default(),
                    format!("{:?}", r.verdict).to_uppercase(),
                    format!("{:?}", self.overall).to_uppercase(),
                ]
            })
            .collect();
        RawTable::new(headers.iter().map(|s| s.to_string()).collect(), rows)
    }
}

/// Predictor outcome used by the audit: the mean of ŷ when every label is
/// numeric (this is P(ŷ = 1) for a 0/1 predictor), otherwise P(ŷ = y_level).
pub fn yhat_outcome(data: &Dataset, yhat: &str, y_level: &str) -> Result<Outcome> {
    let col = data.require_column(yhat)?;
    Ok(if data.numeric_levels(col).is_ok() {
        Outcome::mean(yhat)
    } else {
        Outcome::level(yhat, y_level)
    })
}

fn tag(p: Pathway, e: Error) -> Error {
    if e.is_estimation() {
        Error::Estimation(format!("{} pathway: {e}", p.name()))
    } else {
        e
    }
}

/// Business Necessity Cookbook: pathways in `bn` must carry the same effect
/// in ŷ as in y, all others must carry none. Effects of y and ŷ share
/// bootstrap resamples so equality is judged on the paired difference.
pub fn bn_cookbook(
    data: &Dataset,
    yhat: &str,
    bn: BnSpec,
    y_level: &str,
    config: BootstrapConfig,
) -> Result<AuditReport> {
    let y_col = data
        .schema()
        .y
        .clone()
        .ok_or_else(|| Error::Schema("the audit needs an outcome column".into()))?;
    let y = Outcome::level(&y_col, y_level);
    let yh = yhat_outcome(data, yhat, y_level)?;

    // measure layout: for each pathway, [ŷ] or [ŷ, y] when in bn
    let mut layout = Vec::new();
    for p in Pathway::ALL {
        layout.push((p, false));
        if bn.contains(p) {
            layout.push((p, true));
        }
    }
    let measure = |s: &Sample| -> Result<Vec<f64>> {
        let est = Estimator::new(*s);
        layout
            .iter()
            .map(|&(p, is_y)| {
                est.pathway(p, if is_y { &y } else { &yh })
                    .map(|e| e.value)
                    .map_err(|e| tag(p, e))
            })
            .collect()
    };
    let joint = bootstrap_joint(measure, data, config)?;

    let no_z = data.schema().z.is_empty();
    let mut records = Vec::new();
    for p in Pathway::ALL {
        let i_hat = layout.iter().position(|&l| l == (p, false)).unwrap();
        let mut effect_yhat = joint.estimate(i_hat);
        if p == Pathway::Se && no_z {
            effect_yhat.flags.push(Flag::NoSpuriousPathway);
        }
        let (effect_y, outcome) = match layout.iter().position(|&l| l == (p, true)) {
            Some(i_y) => {
                let ey = joint.estimate(i_y);
                let diff = joint.difference(i_hat, i_y);
                let out = equality_test(
                    &effect_yhat,
                    Reference::Estimate {
                        other: &ey,
                        paired_difference: Some(&diff),
                    },
                )?;
                (Some(ey), out)
            }
            None => (None, equality_test(&effect_yhat, Reference::Zero)?),
        };
        records.push(PathwayRecord {
            pathway: p,
            in_bn: bn.contains(p),
            effect_y,
            effect_yhat,
            verdict: outcome.verdict,
            test_detail: outcome.detail,
        });
    }
    Ok(AuditReport::assemble(
        records,
        AuditEcho {
            bn: bn.to_string(),
            baseline: data.schema().x0.clone(),
            y: y.to_string(),
            yhat: yhat.to_string(),
            yhat_mode: yh.to_string(),
            replicates: config.replicates,
            level: config.level,
            seed: config.seed,
        },
    ))
}

/// The cookbook on exact effects (zero-width intervals), e.g. from the
/// enumeration oracle. Arrays are ordered (DE, IE, SE).
pub fn audit_exact(bn: BnSpec, effects_y: [f64; 3], effects_yhat: [f64; 3]) -> Result<AuditReport> {
    let mut records = Vec::new();
    for (i, p) in Pathway::ALL.into_iter().enumerate() {
        let a = EffectEstimate::point(effects_yhat[i]);
        let (effect_y, out) = if bn.contains(p) {
            let b = EffectEstimate::point(effects_y[i]);
            let out = equality_test(
                &a,
                Reference::Estimate {
                    other: &b,
                    paired_difference: None,
                },
            )?;
            (Some(b), out)
        } else {
            (None, equality_test(&a, Reference::Zero)?)
        };
        records.push(PathwayRecord {
            pathway: p,
            in_bn: bn.contains(p),
            effect_y,
            effect_yhat: a,
            verdict: out.verdict,
            test_detail: out.detail,
        });
    }
    Ok(AuditReport::assemble(
        records,
        AuditEcho {
            bn: bn.to_string(),
            baseline: "x0".into(),
            y: "exact".into(),
            yhat: "exact".into(),
            yhat_mode: "exact".into(),
            replicates: 0,
            level: crate::model::DEFAULT_LEVEL,
            seed: 0,
        },
    ))
}
