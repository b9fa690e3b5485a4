//! Browser bindings. Every export takes and returns JSON strings so the page
//! needs no glue beyond `wasm-bindgen`'s generated module. Failures come
//! back as `{"error": "..."}`.

use std::f64::consts::PI;

use gsod_core::criticality::{best_rank_one_of, criticality_residual, CriticalSet, DEFAULT_TOL_CRIT};
use gsod_core::oracle::{make_fixture, paper_example};
use gsod_core::{gsod, DenseTensor, MultiVector, Shape, SolverOptions};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn respond(result: Result<Value, String>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn parse_tensor(text: &str) -> Result<DenseTensor, String> {
    serde_json::from_str(text).map_err(|e| format!("tensor JSON: {e}"))
}

fn decompose_value(tensor_json: &str, seed: u64) -> Result<Value, String> {
    let a = parse_tensor(tensor_json)?;
    let res = gsod(&a, &SolverOptions::with_seed(seed)).map_err(|e| e.to_string())?;
    let d = res.decomposition;
    let residuals = d
        .terms()
        .iter()
        .map(|t| criticality_residual(&a, &t.factors, DEFAULT_TOL_CRIT).map(|r| r.max_residual))
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|e| e.to_string())?;
    let best = best_rank_one_of(&d);
    Ok(json!({
        "rank": res.rank,
        "decomposition": d,
        "kkt_residuals": residuals,
        "best_rank_one": best,
    }))
}

/// GSOD of a tensor given as `{"shape": [...], "coeffs": [...]}`.
#[wasm_bindgen]
pub fn decompose(tensor_json: &str, seed: u64) -> String {
    respond(decompose_value(tensor_json, seed))
}

fn circle(theta: f64) -> Vec<f64> {
    vec![theta.cos(), theta.sin()]
}

fn landscape_value(tensor_json: &str, resolution: usize) -> Result<Value, String> {
    let a = parse_tensor(tensor_json)?;
    let p = a.order();
    if !(a.dims().iter().all(|&n| n == 2) && (p == 2 || p == 3)) {
        return Err("landscape needs a 2×2 or 2×2×2 tensor".into());
    }
    let res = resolution.clamp(8, 256);
    let step = 2.0 * PI / res as f64;
    let mut values = Vec::with_capacity(res * res);
    for i in 0..res {
        for k in 0..res {
            let u1 = circle(i as f64 * step);
            let u2 = circle(k as f64 * step);
            let v = if p == 2 {
                a.evaluate(&MultiVector::new(vec![u1, u2]).map_err(|e| e.to_string())?)
            } else {
                // Maximized over the third factor: ‖z_3(u1, u2, ·)‖.
                let probe = MultiVector::new(vec![u1, u2, vec![1.0, 0.0]]).map_err(|e| e.to_string())?;
                a.gradient_components(&probe).map(|z| z.part(2).iter().map(|x| x * x).sum::<f64>().sqrt())
            }
            .map_err(|e| e.to_string())?;
            values.push(v);
        }
    }
    let d = gsod(&a, &SolverOptions::default()).map_err(|e| e.to_string())?.decomposition;
    let set = CriticalSet::from_decomposition(&d, &a, DEFAULT_TOL_CRIT).map_err(|e| e.to_string())?;
    let angle = |v: &[f64]| v[1].atan2(v[0]).rem_euclid(2.0 * PI);
    // With the third factor optimized out, ±u3 land on the same pixel.
    let marks: Vec<Value> = set
        .points
        .iter()
        .filter(|x| p == 2 || x.epsilon.signs()[2] > 0)
        .map(|x| json!({ "theta": [angle(x.parts.part(0)), angle(x.parts.part(1))], "value": x.value, "k": x.k }))
        .collect();
    Ok(json!({
        "resolution": res,
        "values": values,
        "min": values.iter().copied().fold(f64::INFINITY, f64::min),
        "max": values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "critical_points": marks,
        "sigmas": d.sigmas(),
    }))
}

/// Values of the form on a `resolution²` grid of angles `(θ1, θ2)` with
/// `u_j = (cos θ_j, sin θ_j)`, plus the critical points in those angles.
/// For 2×2×2 tensors the third factor is maximized out.
#[wasm_bindgen]
pub fn landscape(tensor_json: &str, resolution: usize) -> String {
    respond(landscape_value(tensor_json, resolution))
}

fn fixture_value(shape_csv: &str, r: usize, seed: u64) -> Result<Value, String> {
    let f = if shape_csv.trim() == "paper" {
        paper_example()
    } else {
        let dims = shape_csv
            .split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|e| format!("shape entry {s:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        let shape = Shape::new(dims).map_err(|e| e.to_string())?;
        make_fixture(&shape, r, seed).map_err(|e| e.to_string())?
    };
    let found = gsod(&f.tensor, &SolverOptions::with_seed(seed)).map_err(|e| e.to_string())?.decomposition;
    let set = CriticalSet::from_decomposition(&found, &f.tensor, DEFAULT_TOL_CRIT).map_err(|e| e.to_string())?;
    Ok(json!({
        "tensor": f.tensor,
        "truth": f.truth,
        "found": found,
        "critical_count": set.len(),
        "max_residual": set.max_residual(),
    }))
}

/// A ground-truth fixture (`"paper"` for the named 2×2×2 example), its
/// recovered decomposition, and the size of its critical set.
#[wasm_bindgen]
pub fn fixture(shape_csv: &str, r: usize, seed: u64) -> String {
    respond(fixture_value(shape_csv, r, seed))
}
