use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Diagnostic attached to an estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Flag {
    /// The target level never occurs; both conditionals are zero.
    Degenerate,
    /// A conditioning stratum is empty so the measure is undefined.
    UndefinedForLevel { level: String },
    /// Outer-weight mass whose inner conditional was pooled to a coarser stratum.
    PooledMass { mass: f64 },
    /// Outer-weight mass dropped because its inner conditional was undefined.
    ExcludedMass { mass: f64 },
    /// No confounders declared, so the spurious effect is zero by construction.
    NoSpuriousPathway,
    /// Bootstrap replicates on which the measure was undefined.
    DroppedReplicates { count: usize },
    /// ŷ levels skipped when averaging per-level parity measures.
    SkippedLevels { count: usize },
}

/// A point estimate with an optional percentile bootstrap interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectEstimate {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub replicates: usize,
    #[serde(default)]
    pub flags: Vec<Flag>,
}

pub const DEFAULT_LEVEL: f64 = 0.95;

impl EffectEstimate {
    /// A point estimate without resampling; the interval collapses on it.
    pub fn point(value: f64) -> Self {
        EffectEstimate {
            value,
            ci_low: value,
            ci_high: value,
            level: DEFAULT_LEVEL,
            replicates: 0,
            flags: Vec::new(),
        }
    }

    pub fn with_flags(mut self, flags: Vec<Flag>) -> Self {
        self.flags = flags;
        self
    }

    pub fn with_interval(mut self, low: f64, high: f64, level: f64, replicates: usize) -> Self {
        self.ci_low = low;
        self.ci_high = high;
        self.level = level;
        self.replicates = replicates;
        self
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        self.ci_low - tol <= v && v <= self.ci_high + tol
    }

    pub fn has_flag(&self, pred: impl Fn(&Flag) -> bool) -> bool {
        self.flags.iter().any(pred)
    }
}

/// Serialized report line for one estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub measure: String,
    pub outcome: String,
    pub value: f64,
    pub ci: [f64; 2],
    pub level: f64,
    pub replicates: usize,
    pub flags: Vec<Flag>,
}

impl EstimateRecord {
    pub fn new(measure: &str, outcome: &str, est: &EffectEstimate) -> Self {
        EstimateRecord {
            measure: measure.to_string(),
            outcome: outcome.to_string(),
            value: est.value,
            ci: [est.ci_low, est.ci_high],
            level: est.level,
            replicates: est.replicates,
            flags: est.flags.clone(),
        }
    }
}

/// Causal pathway from the protected attribute to an outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pathway {
    De,
    Ie,
    Se,
}

impl Pathway {
    pub const ALL: [Pathway; 3] = [Pathway::De, Pathway::Ie, Pathway::Se];

    pub fn name(self) -> &'static str {
        match self {
            Pathway::De => "DE",
            Pathway::Ie => "IE",
            Pathway::Se => "SE",
        }
    }
}

/// Business-necessity set as a 0/1 vector ordered (DE, IE, SE).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BnSpec {
    pub de: bool,
    pub ie: bool,
    pub se: bool,
}

impl BnSpec {
    /// Statistical-parity end: nothing is business-necessary.
    pub const NONE: BnSpec = BnSpec {
        de: false,
        ie: false,
        se: false,
    };
    /// Predictive-parity end: every pathway is business-necessary.
    pub const ALL: BnSpec = BnSpec {
        de: true,
        ie: true,
        se: true,
    };

    pub fn new(de: bool, ie: bool, se: bool) -> Self {
        BnSpec { de, ie, se }
    }

    pub fn contains(self, p: Pathway) -> bool {
        match p {
            Pathway::De => self.de,
            Pathway::Ie => self.ie,
            Pathway::Se => self.se,
        }
    }

    pub fn with(mut self, p: Pathway) -> Self {
        match p {
            Pathway::De => self.de = true,
            Pathway::Ie => self.ie = true,
            Pathway::Se => self.se = true,
        }
        self
    }

    pub fn vector(self) -> [u8; 3] {
        [self.de as u8, self.ie as u8, self.se as u8]
    }

    /// Name in terms of the variable sets kept (`∅`, `Z`, `W`, `{Z,W}`),
    /// ignoring the direct-effect slot.
    pub fn set_name(self) -> &'static str {
        match (self.ie, self.se) {
            (false, false) => "∅",
            (false, true) => "Z",
            (true, false) => "W",
            (true, true) => "{Z,W}",
        }
    }
}

impl fmt::Display for BnSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.vector();
        write!(f, "{a}{b}{c}")
    }
}

impl FromStr for BnSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits: Vec<char> = s.trim().chars().collect();
        if bits.len() != 3 || bits.iter().any(|c| *c != '0' && *c != '1') {
            return Err(Error::Parameter(format!(
                "business-necessity vector must be three 0/1 characters ordered DE,IE,SE; got `{s}`"
            )));
        }
        Ok(BnSpec::new(bits[0] == '1', bits[1] == '1', bits[2] == '1'))
    }
}

/// Counterfactual clause: an intervention on X and, optionally, the
/// mediators set to their potential values under another level of X.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Intervention {
    pub x: Option<u8>,
    pub w_from: Option<u8>,
}

impl Intervention {
    pub const NONE: Intervention = Intervention {
        x: None,
        w_from: None,
    };

    pub fn set_x(x: u8) -> Self {
        Intervention {
            x: Some(x),
            w_from: None,
        }
    }

    pub fn nested(x: u8, w_from: u8) -> Self {
        Intervention {
            x: Some(x),
            w_from: Some(w_from),
        }
    }
}

/// Factual clause: conditioning event on observed variables. Only the
/// protected attribute is used by the standard measures.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Event {
    pub x: Option<u8>,
    #[serde(default)]
    pub other: Vec<(String, f64)>,
}

impl Event {
    pub fn any() -> Self {
        Event::default()
    }

    pub fn x(x: u8) -> Self {
        Event {
            x: Some(x),
            other: Vec::new(),
        }
    }
}

/// A contrast `E[y_{c1} | e1] − E[y_{c0} | e0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contrast {
    pub c0: Intervention,
    pub c1: Intervention,
    pub e0: Event,
    pub e1: Event,
}

impl Contrast {
    pub fn is_counterfactual(&self) -> bool {
        self.e0 == self.e1
    }

    pub fn is_factual(&self) -> bool {
        self.c0 == self.c1
    }

    /// Statistical parity: P(y | x1) − P(y | x0).
    pub fn spm() -> Self {
        Contrast {
            c0: Intervention::NONE,
            c1: Intervention::NONE,
            e0: Event::x(0),
            e1: Event::x(1),
        }
    }

    /// Ctf-DE_{x0,x1}(y | x) = P(y_{x1,W_{x0}} | x) − P(y_{x0} | x).
    pub fn ctf_de(baseline: u8) -> Self {
        Contrast {
            c0: Intervention::set_x(0),
            c1: Intervention::nested(1, 0),
            e0: Event::x(baseline),
            e1: Event::x(baseline),
        }
    }

    /// Ctf-IE_{x1,x0}(y | x) = P(y_{x1,W_{x0}} | x) − P(y_{x1} | x).
    pub fn ctf_ie(baseline: u8) -> Self {
        Contrast {
            c0: Intervention::set_x(1),
            c1: Intervention::nested(1, 0),
            e0: Event::x(baseline),
            e1: Event::x(baseline),
        }
    }

    /// Ctf-SE_{x1,x0}(y) = P(y_{x1} | x0) − P(y_{x1} | x1).
    pub fn ctf_se() -> Self {
        Contrast {
            c0: Intervention::set_x(1),
            c1: Intervention::set_x(1),
            e0: Event::x(1),
            e1: Event::x(0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bn_vector_decodes_in_de_ie_se_order() {
        let bn: BnSpec = "001".parse().unwrap();
        assert_eq!(bn, BnSpec::new(false, false, true));
        assert_eq!(bn.to_string(), "001");
        assert_eq!(bn.set_name(), "Z");
        assert!("01".parse::<BnSpec>().is_err());
        assert!("0a1".parse::<BnSpec>().is_err());
    }

    #[test]
    fn contrast_kinds() {
        assert!(Contrast::ctf_de(0).is_counterfactual());
        assert!(!Contrast::ctf_de(0).is_factual());
        assert!(Contrast::ctf_se().is_factual());
        assert!(Contrast::spm().is_factual());
        let trivial = Contrast {
            c0: Intervention::NONE,
            c1: Intervention::NONE,
            e0: Event::any(),
            e1: Event::any(),
        };
        assert!(trivial.is_factual() && trivial.is_counterfactual());
    }

    #[test]
    fn point_estimate_interval_is_degenerate() {
        let e = EffectEstimate::point(0.25);
        assert_eq!((e.ci_low, e.ci_high, e.replicates), (0.25, 0.25, 0));
        assert!(e.contains(0.25, 0.0));
    }
}
