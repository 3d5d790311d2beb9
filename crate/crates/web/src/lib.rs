//! Browser demo: every exported function takes plain numbers and returns a
//! JSON document that `www/main.js` draws on a canvas.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use pacap_core::augustin::{contraction_factor, FixedPoint};
use pacap_core::channel::{embed_classical, ClassicalChannel};
use pacap_core::experiment::{run_experiment, Setup};
use pacap_core::oracle::classical_renyi_information;
use pacap_core::{random_channel, solve_augustin, AugustinOptions, ProbVector};

/// Demo inputs are capped so a single call stays interactive.
pub const MAX_N: usize = 32;
pub const MAX_D: usize = 12;
pub const MAX_ITERS: usize = 2000;

fn check_shape(n: usize, d: usize, iters: usize) -> Result<(), String> {
    if n == 0 || n > MAX_N || d == 0 || d > MAX_D {
        return Err(format!("choose 1 ≤ n ≤ {MAX_N} and 1 ≤ d ≤ {MAX_D}"));
    }
    if iters == 0 || iters > MAX_ITERS {
        return Err(format!("choose 1 ≤ T ≤ {MAX_ITERS}"));
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("demo output serializes")
}

#[derive(Serialize)]
struct CurveOut {
    label: &'static str,
    errors: Vec<f64>,
    best: f64,
}

#[derive(Serialize)]
struct ConvergenceOut {
    reference: f64,
    curves: Vec<CurveOut>,
}

/// Optimization-error curves of FGM–Balanced, FGM–1e-9 and EMD on a random
/// channel.
pub fn convergence_json(n: usize, d: usize, seed: u64, alpha: f64, iters: usize) -> Result<String, String> {
    check_shape(n, d, iters)?;
    let setup = Setup {
        alpha,
        n,
        d,
        iters,
        seed,
    };
    let exp = run_experiment(&setup, false).map_err(|e| e.to_string())?;
    Ok(to_json(&ConvergenceOut {
        reference: exp.reference,
        curves: exp
            .curves
            .into_iter()
            .map(|c| CurveOut {
                label: c.method.label(),
                errors: c.errors,
                best: c.best,
            })
            .collect(),
    }))
}

#[derive(Serialize)]
struct FixedPointOut {
    kappa: f64,
    /// Certified bound `κ/(1-κ) · d_T(Q_t^{1-α}, Q_{t+1}^{1-α})` per step.
    bounds: Vec<f64>,
    info: f64,
}

/// A-posteriori bounds of the Augustin fixed-point iteration at the uniform
/// input, run until the bound reaches `tol` (at most `iters` steps).
pub fn fixed_point_json(n: usize, d: usize, seed: u64, alpha: f64, iters: usize, tol: f64) -> Result<String, String> {
    check_shape(n, d, iters)?;
    let ch = random_channel(n, d, seed).map_err(|e| e.to_string())?;
    let powered = ch.powered(alpha).map_err(|e| e.to_string())?;
    let p = ProbVector::uniform(n);
    let mut fp = FixedPoint::new(&powered, &p).map_err(|e| e.to_string())?;
    let kappa = contraction_factor(alpha);
    let mut bounds = Vec::new();
    while bounds.len() < iters {
        let b = kappa / (1.0 - kappa) * fp.step().map_err(|e| e.to_string())?;
        bounds.push(b);
        if b <= tol {
            break;
        }
    }
    let (_, info) = fp.estimates().map_err(|e| e.to_string())?;
    Ok(to_json(&FixedPointOut { kappa, bounds, info }))
}

#[derive(Serialize)]
struct LandscapeOut {
    p: Vec<f64>,
    renyi: Vec<f64>,
    augustin: Vec<f64>,
    capacity: f64,
}

/// Rényi and Augustin information along `p = (x, 1−x)` for the binary
/// channel with rows `(1−a, a)` and `(b, 1−b)`.
pub fn binary_landscape_json(a: f64, b: f64, alpha: f64, points: usize) -> Result<String, String> {
    // open interval: a shared zero column would make the Augustin mean singular
    if !(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) {
        return Err("crossover probabilities must lie strictly between 0 and 1".into());
    }
    if !(2..=400).contains(&points) {
        return Err("choose between 2 and 400 points".into());
    }
    let cc = ClassicalChannel::new(vec![vec![1.0 - a, a], vec![b, 1.0 - b]]).map_err(|e| e.to_string())?;
    let ch = embed_classical(&cc);
    let opts = AugustinOptions::default();
    let mut out = LandscapeOut {
        p: Vec::with_capacity(points),
        renyi: Vec::with_capacity(points),
        augustin: Vec::with_capacity(points),
        capacity: f64::NEG_INFINITY,
    };
    for k in 1..=points {
        // interior points only: the fixed point needs strictly positive p
        let x = k as f64 / (points + 1) as f64;
        let p = [x, 1.0 - x];
        let (ir, _) = classical_renyi_information(cc.rows(), &p, alpha);
        let pv = ProbVector::normalized(&p).map_err(|e| e.to_string())?;
        let ia = solve_augustin(&pv, &ch, alpha, &opts).map_err(|e| e.to_string())?.info;
        out.capacity = out.capacity.max(ir).max(ia);
        out.p.push(x);
        out.renyi.push(ir);
        out.augustin.push(ia);
    }
    Ok(to_json(&out))
}

#[wasm_bindgen]
pub fn convergence(n: usize, d: usize, seed: u32, alpha: f64, iters: usize) -> Result<String, JsError> {
    convergence_json(n, d, seed as u64, alpha, iters).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn fixed_point(n: usize, d: usize, seed: u32, alpha: f64, iters: usize, tol: f64) -> Result<String, JsError> {
    fixed_point_json(n, d, seed as u64, alpha, iters, tol).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn binary_landscape(a: f64, b: f64, alpha: f64, points: usize) -> Result<String, JsError> {
    binary_landscape_json(a, b, alpha, points).map_err(|e| JsError::new(&e))
}
