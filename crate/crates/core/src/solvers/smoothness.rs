use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::augustin::{AugustinOptions, FixedPoint};
use crate::channel::{CQChannel, PoweredChannel};
use crate::error::{Error, Result};
use crate::simplex::{random_simplex_point, ProbVector};

#[derive(Clone, Debug, Serialize)]
pub struct RelSmoothCase {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub violation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelSmoothReport {
    pub alpha: f64,
    pub trials: usize,
    /// Largest `φ((p+q)/2) − (φ(p)+φ(q))/2` with `φ = h − g_α^A`.
    pub worst_violation: f64,
    /// Allowed slack `4 · inner_tol` for three inexact inner solves.
    pub threshold: f64,
    pub passed: bool,
    pub worst: Option<RelSmoothCase>,
}

fn augustin_value(powered: &PoweredChannel, p: &ProbVector, opts: &AugustinOptions) -> Result<f64> {
    let out = FixedPoint::new(powered, p)?.run(opts)?;
    if !out.converged {
        return Err(Error::InnerNotConverged {
            iterations: out.iterations,
            bound: out.error_bound,
            tol: opts.tol,
        });
    }
    Ok(out.info)
}

/// Tests midpoint convexity of `h − g_α^A = h + I_α^A` (1-smoothness of
/// `g_α^A` relative to the negative entropy) on `trials` random pairs drawn
/// uniformly from the simplex.
///
/// The inner solver needs a contraction factor below one, so `α = 1/2` is
/// rejected.
pub fn relative_smoothness_check(
    ch: &CQChannel,
    alpha: f64,
    trials: usize,
    inner_tol: f64,
    seed: u64,
) -> Result<RelSmoothReport> {
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "relative smoothness is checked for α in (1/2, 1) where the inner solver contracts, got {alpha}"
        )));
    }
    let powered = ch.powered(alpha)?;
    let opts = AugustinOptions {
        tol: inner_tol,
        ..AugustinOptions::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = |p: &ProbVector| -> Result<f64> { Ok(p.neg_entropy() + augustin_value(&powered, p, &opts)?) };
    let mut worst_violation = f64::NEG_INFINITY;
    let mut worst = None;
    for _ in 0..trials {
        let p = random_simplex_point(&mut rng, ch.n());
        let q = random_simplex_point(&mut rng, ch.n());
        let m = ProbVector::mix(0.5, &p, &q);
        let violation = phi(&m)? - 0.5 * (phi(&p)? + phi(&q)?);
        if violation > worst_violation {
            worst_violation = violation;
            worst = Some(RelSmoothCase {
                p: p.weights().to_vec(),
                q: q.weights().to_vec(),
                violation,
            });
        }
    }
    let threshold = 4.0 * inner_tol;
    Ok(RelSmoothReport {
        alpha,
        trials,
        worst_violation,
        threshold,
        passed: worst_violation <= threshold,
        worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{constant_channel, embed_classical, random_channel, ClassicalChannel};

    #[test]
    fn identical_states_reduce_to_entropy_convexity() {
        let rho = random_channel(1, 3, 5).unwrap().states()[0].clone();
        let ch = constant_channel(4, &rho).unwrap();
        let r = relative_smoothness_check(&ch, 0.6, 50, 1e-10, 1).unwrap();
        assert!(r.passed);
        assert!(r.worst_violation <= 1e-12);
    }

    #[test]
    fn random_and_classical_channels_pass() {
        let ch = random_channel(5, 3, 2).unwrap();
        assert!(relative_smoothness_check(&ch, 0.75, 30, 1e-10, 3).unwrap().passed);
        let cc = embed_classical(&ClassicalChannel::random(4, 3, 8).unwrap());
        assert!(relative_smoothness_check(&cc, 0.6, 30, 1e-10, 4).unwrap().passed);
    }

    #[test]
    fn half_is_rejected() {
        let ch = random_channel(2, 2, 2).unwrap();
        assert!(relative_smoothness_check(&ch, 0.5, 1, 1e-10, 0).is_err());
    }
}
