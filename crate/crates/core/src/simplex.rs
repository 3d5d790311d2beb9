//! Points of the probability simplex, stored with their log-weights.

use crate::error::{Error, Result};

/// Max `|Σ p - 1|` accepted for a probability vector.
pub const SUM_TOL: f64 = 1e-12;

/// A point of the simplex `Δ_n`.
///
/// Log-weights are kept alongside the weights so that multiplicative updates
/// never lose letters to underflow: a weight may round to `0.0` while its
/// log-weight stays finite. Only exact zeros carry `-∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector {
    weights: Vec<f64>,
    log_weights: Vec<f64>,
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

impl ProbVector {
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "simplex dimension must be positive");
        Self {
            weights: vec![1.0 / n as f64; n],
            log_weights: vec![-(n as f64).ln(); n],
        }
    }

    /// Accepts weights that already sum to one within [`SUM_TOL`].
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("probability vector must be non-empty"));
        }
        if let Some((i, x)) = weights
            .iter()
            .enumerate()
            .find(|(_, x)| !(**x >= 0.0) || !x.is_finite())
        {
            return Err(Error::invalid(format!("entry {i} is {x}, not a probability")));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::invalid(format!("weights sum to {s}, not 1")));
        }
        let log_weights = weights.iter().map(|x| x.ln()).collect();
        Ok(Self { weights, log_weights })
    }

    /// Rescales nonnegative weights onto the simplex.
    pub fn normalized(weights: &[f64]) -> Result<Self> {
        let s: f64 = weights.iter().sum();
        if !(s > 0.0) || !s.is_finite() || weights.iter().any(|x| !(*x >= 0.0)) {
            return Err(Error::invalid(
                "cannot normalize: weights must be nonnegative with positive sum",
            ));
        }
        let logs: Vec<f64> = weights.iter().map(|x| x.ln()).collect();
        Ok(Self::from_log_weights(&logs))
    }

    /// Softmax of arbitrary finite-or-`-∞` logits.
    pub fn from_log_weights(logits: &[f64]) -> Self {
        assert!(!logits.is_empty(), "simplex dimension must be positive");
        let lse = log_sum_exp(logits);
        let log_weights: Vec<f64> = logits.iter().map(|x| x - lse).collect();
        let mut weights: Vec<f64> = log_weights.iter().map(|x| x.exp()).collect();
        // exp of normalized logs can be off by a few ulps; renormalize the
        // linear weights so their sum is exact to rounding
        let s: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= s);
        Self { weights, log_weights }
    }

    /// `τ a + (1 - τ) b`, mixed in the log domain.
    pub fn mix(tau: f64, a: &ProbVector, b: &ProbVector) -> Self {
        assert_eq!(a.len(), b.len());
        assert!((0.0..=1.0).contains(&tau), "mixing weight {tau} outside [0,1]");
        if tau == 1.0 {
            return a.clone();
        }
        if tau == 0.0 {
            return b.clone();
        }
        let (lt, lc) = (tau.ln(), (1.0 - tau).ln());
        let logits: Vec<f64> = a
            .log_weights
            .iter()
            .zip(&b.log_weights)
            .map(|(&x, &y)| {
                let (u, v) = (x + lt, y + lc);
                let m = u.max(v);
                if m == f64::NEG_INFINITY {
                    m
                } else {
                    m + ((u - m).exp() + (v - m).exp()).ln()
                }
            })
            .collect();
        Self::from_log_weights(&logits)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// True when no log-weight is `-∞`.
    pub fn is_interior(&self) -> bool {
        self.log_weights.iter().all(|x| x.is_finite())
    }

    /// Negative Shannon entropy `⟨p, log p⟩` (with `0 log 0 = 0`).
    pub fn neg_entropy(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.log_weights)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, l)| w * l)
            .sum()
    }

    pub fn l1_distance(&self, other: &ProbVector) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    pub fn dot(&self, v: &[f64]) -> f64 {
        self.weights.iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

/// Draws a point uniformly from `Δ_n` (normalized standard exponentials).
pub fn random_simplex_point<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> ProbVector {
    use rand_distr::{Distribution, Exp1};
    let w: Vec<f64> = (0..n)
        .map(|_| {
            let x: f64 = Exp1.sample(rng);
            x.max(f64::MIN_POSITIVE)
        })
        .collect();
    ProbVector::normalized(&w).expect("exponential draws are positive")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_and_validation() {
        let p = ProbVector::uniform(4);
        assert_eq!(p.weights(), &[0.25; 4]);
        assert!(ProbVector::from_weights(vec![0.5, 0.6]).is_err());
        assert!(ProbVector::from_weights(vec![1.5, -0.5]).is_err());
        let q = ProbVector::from_weights(vec![1.0, 0.0]).unwrap();
        assert_eq!(q.log_weights()[1], f64::NEG_INFINITY);
        assert!(!q.is_interior());
    }

    #[test]
    fn log_domain_survives_underflow() {
        let p = ProbVector::from_log_weights(&[0.0, -2000.0]);
        assert_eq!(p.weights()[1], 0.0);
        assert!(p.log_weights()[1].is_finite());
        assert!(p.is_interior());
        let back = ProbVector::from_log_weights(&[p.log_weights()[0], p.log_weights()[1] + 1999.0]);
        assert!((back.weights()[1] - (-1.0f64).exp() / (1.0 + (-1.0f64).exp())).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn softmax_and_mix_stay_on_simplex(
            logits in prop::collection::vec(-50.0f64..50.0, 1..20),
            other in prop::collection::vec(-50.0f64..50.0, 20),
            tau in 0.0f64..1.0,
        ) {
            let p = ProbVector::from_log_weights(&logits);
            prop_assert!((p.weights().iter().sum::<f64>() - 1.0).abs() <= SUM_TOL);
            let q = ProbVector::from_log_weights(&other[..logits.len()]);
            let m = ProbVector::mix(tau, &p, &q);
            prop_assert!((m.weights().iter().sum::<f64>() - 1.0).abs() <= SUM_TOL);
            for i in 0..p.len() {
                let lin = tau * p.weights()[i] + (1.0 - tau) * q.weights()[i];
                prop_assert!((m.weights()[i] - lin).abs() <= 1e-14);
            }
        }
    }
}
