//! Browser front end for three computations: the closed-form ratio curve of
//! the counterexample family, the objective landscape behind the pointwise
//! constants, and exact martingale bounds for a small family member.
//!
//! Each operation is a plain function returning a JSON string so it can be
//! tested natively; the `#[wasm_bindgen]` wrappers only translate errors.

use mwi_core::counterexamples::{asymptotics, closed_form_ratio, closed_forms, family_1d, loglog_slope, FamilyParams};
use mwi_core::inequality::ratio_from_bounds;
use mwi_core::lemma::{kappa_objective, kappa_tilde_objective, lemma_constants};
use mwi_core::martingale::{mot_bounds, MartingaleProblem};
use mwi_core::{ExtendedIndex, Norm};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest `n` the in-browser LP is allowed to take on.
pub const MAX_LP_N: usize = 40;
/// Largest exponent `k` in `n = 2^k` for the ratio curve.
pub const MAX_CURVE_K: u32 = 24;
/// Side length cap of the objective grid.
pub const MAX_GRID: usize = 200;

const Z_RANGE: (f64, f64) = (-3.0, 5.0);
const OMEGA_RANGE: (f64, f64) = (0.0, 4.0);

fn parse_q(q: &str) -> Result<ExtendedIndex, String> {
    q.parse::<ExtendedIndex>().map_err(|e| e.to_string())
}

/// Closed-form ratio of the family for `n = 2^2 .. 2^k_max` with
/// `z = n^-alpha`, next to the predicted power law and the fitted slope.
pub fn ratio_curve_json(rho: f64, q: &str, alpha: f64, k_max: u32) -> Result<String, String> {
    let q = parse_q(q)?;
    if !(3..=MAX_CURVE_K).contains(&k_max) {
        return Err(format!("k_max must lie in 3..={MAX_CURVE_K}, got {k_max}"));
    }
    let asym = asymptotics(rho, q, alpha).map_err(|e| e.to_string())?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut rows = Vec::new();
    for k in 2..=k_max {
        let n = 1usize << k;
        let z = (n as f64).powf(-alpha);
        let r = closed_form_ratio(n, z, rho, q).map_err(|e| e.to_string())?;
        xs.push(n as f64);
        ys.push(r);
        rows.push(json!({
            "n": n,
            "ratio": r,
            "predicted": asym.prefactor * (n as f64).powf(asym.exponent),
        }));
    }
    let slope = loglog_slope(&xs, &ys).map_err(|e| e.to_string())?;
    Ok(json!({
        "rho": rho,
        "alpha": alpha,
        "exponent": asym.exponent,
        "prefactor": asym.prefactor,
        "fitted_exponent": slope,
        "rows": rows,
    })
    .to_string())
}

/// One of the two lemma objectives sampled on a `size x size` grid over
/// `z in [-3, 5]`, `omega in [0, 4]` (the objectives are even in omega),
/// plus the constants themselves.
pub fn lemma_field_json(rho: f64, which: &str, size: usize) -> Result<String, String> {
    let f: fn(f64, f64, f64) -> f64 = match which {
        "kappa" => kappa_objective,
        "kappa_tilde" => kappa_tilde_objective,
        other => return Err(format!("unknown objective {other:?}; use kappa or kappa_tilde")),
    };
    if !(2..=MAX_GRID).contains(&size) {
        return Err(format!("grid size must lie in 2..={MAX_GRID}, got {size}"));
    }
    let constants = lemma_constants(rho).map_err(|e| e.to_string())?;
    let step = |(lo, hi): (f64, f64), i: usize| lo + (hi - lo) * i as f64 / (size - 1) as f64;
    // rows run from the top of the picture (largest omega) down
    let values: Vec<Value> = (0..size)
        .rev()
        .flat_map(|r| {
            let omega = step(OMEGA_RANGE, r);
            (0..size).map(move |c| {
                let v = f(step(Z_RANGE, c), omega, rho);
                if v.is_finite() { json!(v) } else { Value::Null }
            })
        })
        .collect();
    Ok(json!({
        "rho": rho,
        "which": which,
        "size": size,
        "z_range": [Z_RANGE.0, Z_RANGE.1],
        "omega_range": [OMEGA_RANGE.0, OMEGA_RANGE.1],
        "values": values,
        "constants": constants,
    })
    .to_string())
}

/// Exact lower and upper martingale costs of the line family `(n, z)` by LP,
/// the ratios at `q = 1`, and the closed-form cost of the explicit coupling.
pub fn family_bounds_json(n: usize, z: f64, rho: f64) -> Result<String, String> {
    if n > MAX_LP_N {
        return Err(format!("n is capped at {MAX_LP_N} in the browser, got {n}"));
    }
    let q = ExtendedIndex::Finite(1.0);
    let params = FamilyParams::new(n, z, rho, q).map_err(|e| e.to_string())?;
    let f = family_1d(n, z).map_err(|e| e.to_string())?;
    let problem = MartingaleProblem::new(f.mu.clone(), f.nu.clone(), rho, Norm::Euclidean).map_err(|e| e.to_string())?;
    let bounds = mot_bounds(&problem).map_err(|e| e.to_string())?;
    let report = ratio_from_bounds(&f.mu, &f.nu, &bounds, rho, q, Norm::Euclidean, &Default::default())
        .map_err(|e| e.to_string())?;
    let cf = closed_forms(&params);
    Ok(json!({
        "n": n,
        "z": z,
        "rho": rho,
        "mot_lower": bounds.lower_cost,
        "mot_upper": bounds.upper_cost,
        "coupling_cost": cf.coupling_cost,
        "w1": report.w_q,
        "sigma": report.sigma_value,
        "ratio_lower": report.ratio_lower,
        "ratio_upper": report.ratio_upper,
        "closed_form_ratio": closed_form_ratio(n, z, rho, q).map_err(|e| e.to_string())?,
        "upper_support": bounds.argmax.entries.len(),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn ratio_curve(rho: f64, q: &str, alpha: f64, k_max: u32) -> Result<String, JsError> {
    ratio_curve_json(rho, q, alpha, k_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn lemma_field(rho: f64, which: &str, size: usize) -> Result<String, JsError> {
    lemma_field_json(rho, which, size).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn family_bounds(n: usize, z: f64, rho: f64) -> Result<String, JsError> {
    family_bounds_json(n, z, rho).map_err(|e| JsError::new(&e))
}
