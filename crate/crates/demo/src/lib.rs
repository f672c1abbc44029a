//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export takes plain parameters and returns a JSON document; the
//! `*_json` functions hold the logic so they also run natively.

use parity_spectrum::adjustment::CellMeanLearner;
use parity_spectrum::audit::{default_bn_sets, pareto_sweep, ParetoPoint};
use parity_spectrum::estimators::{decompose_spm, Outcome, SpmDecomposition};
use parity_spectrum::scm::{
    builtin, enumerate_discrete, pp_terms, sample_units, PanelOutcome, PpTermsReport,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Upper bound on sampled units, to keep the page responsive.
pub const MAX_UNITS: usize = 200_000;

fn check_n(n: usize) -> Result<(), String> {
    if n == 0 || n > MAX_UNITS {
        return Err(format!("n must lie in 1..={MAX_UNITS}"));
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("reports serialize")
}

#[derive(Serialize)]
struct Decomposition {
    model: String,
    n: usize,
    sample: SpmDecomposition,
    /// Population values when the model is finite.
    exact: Option<[f64; 4]>,
}

/// Names of the built-in models.
pub fn models_json() -> String {
    to_json(&builtin::names().collect::<Vec<_>>())
}

/// SPM = DE − IE − SE on a sample of a built-in model, with the exact
/// population values alongside.
pub fn decompose_json(model: &str, n: usize, seed: u64) -> Result<String, String> {
    check_n(n)?;
    let scm = builtin::by_name(model).map_err(|e| e.to_string())?;
    let ds = sample_units(&scm, n, seed, None)
        .and_then(|p| p.to_dataset(20))
        .map_err(|e| e.to_string())?;
    let y = scm.names()[scm.y_index()].to_string();
    let sample = decompose_spm(&ds, &Outcome::mean(&y)).map_err(|e| e.to_string())?;
    let exact = enumerate_discrete(&scm).ok().and_then(|d| {
        let out = d.y_indicator(1.0);
        Some([
            d.spm(&out).ok()?,
            d.ctf_de(&out, 0).ok()?,
            d.ctf_ie(&out, 0).ok()?,
            d.ctf_se(&out).ok()?,
        ])
    });
    Ok(to_json(&Decomposition {
        model: model.to_string(),
        n,
        sample,
        exact,
    }))
}

/// Per-bin Terms I/II/III of a cell-mean learner's predictive-parity gap.
pub fn pp_terms_json(model: &str, n: usize, bins: usize, seed: u64) -> Result<String, String> {
    check_n(n)?;
    let scm = builtin::by_name(model).map_err(|e| e.to_string())?;
    let run = || -> parity_spectrum::Result<PpTermsReport> {
        let mut panel = sample_units(&scm, n, seed, None)?;
        let (x, f, y) = panel.training_view();
        panel.attach_predictor(&CellMeanLearner::fit(&x, &f, &y, bins)?);
        pp_terms(&panel, PanelOutcome::Mean, bins)
    };
    run().map(|r| to_json(&r)).map_err(|e| e.to_string())
}

/// SPM and iPPM of fair-adjusted predictors for BN = ∅, Z, W, {Z,W}.
pub fn pareto_json(model: &str, n: usize, reps: usize, seed: u64) -> Result<String, String> {
    check_n(n)?;
    let scm = builtin::by_name(model).map_err(|e| e.to_string())?;
    let run = || -> parity_spectrum::Result<Vec<ParetoPoint>> {
        let ds = sample_units(&scm, n, seed, None)?.to_dataset(20)?;
        pareto_sweep(&ds, &default_bn_sets(), reps, "1", seed)
    };
    run().map(|p| to_json(&p)).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn models() -> String {
    models_json()
}

#[wasm_bindgen]
pub fn decompose(model: &str, n: usize, seed: u32) -> Result<String, JsError> {
    decompose_json(model, n, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = ppTerms)]
pub fn pp_terms_js(model: &str, n: usize, bins: usize, seed: u32) -> Result<String, JsError> {
    pp_terms_json(model, n, bins, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn pareto(model: &str, n: usize, reps: usize, seed: u32) -> Result<String, JsError> {
    pareto_json(model, n, reps, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn decomposition_carries_exact_values() {
        let v: Value = serde_json::from_str(&decompose_json("s3", 5000, 1).unwrap()).unwrap();
        let exact = v["exact"].as_array().unwrap();
        assert!((exact[0].as_f64().unwrap() - 0.4).abs() < 1e-12);
        assert!(v["sample"]["residual"].as_f64().unwrap().abs() < 1e-9);
        let cont: Value =
            serde_json::from_str(&decompose_json("gaussian-mediators", 2000, 1).unwrap()).unwrap();
        assert!(cont["exact"].is_null());
    }

    #[test]
    fn terms_and_sweep_serialize() {
        let t: Value =
            serde_json::from_str(&pp_terms_json("gaussian-mediators", 4000, 10, 2).unwrap())
                .unwrap();
        assert!(t["max_abs_residual"].as_f64().unwrap() <= 1e-12);
        let p: Value = serde_json::from_str(&pareto_json("full-sfm", 3000, 2, 2).unwrap()).unwrap();
        assert_eq!(p.as_array().unwrap().len(), 4);
    }

    #[test]
    fn bad_inputs_are_messages() {
        assert!(decompose_json("nope", 100, 1)
            .unwrap_err()
            .contains("unknown"));
        assert!(pareto_json("s1", 0, 1, 1).is_err());
        assert!(models_json().contains("full-sfm"));
    }
}
