use crate::error::{Error, Result};
use crate::simplex::ProbVector;

/// Entropic mirror step `z ⊙ exp(-η v) / ‖z ⊙ exp(-η v)‖_1`, i.e. the
/// minimizer of `⟨v, x⟩ + B_h(x, z)/η` over the simplex for the negative
/// entropy `h`. Computed on log-weights with max subtraction.
pub fn bregman_prox(z: &ProbVector, v: &[f64], eta: f64) -> Result<ProbVector> {
    if v.len() != z.len() {
        return Err(Error::invalid(format!(
            "direction has length {} but the point has {}",
            v.len(),
            z.len()
        )));
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::invalid(format!(
            "step size must be positive and finite, got {eta}"
        )));
    }
    if let Some((i, x)) = v.iter().enumerate().find(|(_, x)| !x.is_finite()) {
        return Err(Error::invalid(format!("direction entry {i} is {x}")));
    }
    if !z.is_interior() {
        return Err(Error::invalid("prox center must be strictly positive"));
    }
    let logits: Vec<f64> = z.log_weights().iter().zip(v).map(|(l, g)| l - eta * g).collect();
    Ok(ProbVector::from_log_weights(&logits))
}
