//! Petz-Augustin information via the fixed-point iteration
//!
//! ```text
//! Q_{t+1} = ( Σ_j p[j] W(j)^α / Tr[W(j)^α Q_t^{1-α}] )^{1/α}
//! ```
//!
//! which contracts in the Thompson metric on `Q^{1-α}` with factor
//! `κ = |1 - 1/α|` for `α ∈ (1/2, 1) ∪ (1, ∞)`. The geometric tail of the
//! observed increments gives the a-posteriori certificate
//! `κ/(1-κ) · d_T(Q_t^{1-α}, Q_{t+1}^{1-α}) ≥ d_T(Q_{t+1}^{1-α}, Q_⋆^{1-α})`.

use crate::channel::{CQChannel, PoweredChannel};
use crate::error::{Error, Result};
use crate::matcore::{
    divergence_from_trace, herm_eig, thompson_metric_from, trace_product, Divergence, Eigen, HermitianMatrix,
    DEFAULT_TOLERANCES,
};
use crate::simplex::ProbVector;

/// Input weights at or below this are treated as zero.
pub const MIN_WEIGHT: f64 = 1e-300;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AugustinOptions {
    /// Target for the certified Thompson-metric bound.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for AugustinOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

/// Result of one fixed-point solve.
#[derive(Clone, Debug)]
pub struct FixedPointOutput {
    /// Final iterate, the Augustin mean estimate.
    pub q_star: HermitianMatrix,
    /// `⟨p, grad⟩`, the Petz-Augustin information estimate.
    pub info: f64,
    /// `grad[k] = D_α(W(k) ‖ Q_final)` for every letter `k`.
    pub grad: Vec<f64>,
    pub iterations: usize,
    /// Certified bound on `d_T(Q_final^{1-α}, Q_⋆^{1-α})`.
    pub error_bound: f64,
    pub converged: bool,
    pub alpha: f64,
}

impl FixedPointOutput {
    /// Bound on `|info - I_α^A|` and on every gradient entry error implied
    /// by `error_bound`: perturbing `Q^{1-α}` by Thompson distance `r`
    /// scales each trace term by at most `e^{±r}`.
    pub fn value_bound(&self) -> f64 {
        self.error_bound / (1.0 - self.alpha).abs()
    }
}

/// `κ = |1 - 1/α|`.
pub fn contraction_factor(alpha: f64) -> f64 {
    (1.0 - 1.0 / alpha).abs()
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.5 && alpha.is_finite() && alpha != 1.0) {
        return Err(Error::invalid(format!(
            "the fixed-point iteration contracts only for α in (1/2,1) ∪ (1,∞), got {alpha}"
        )));
    }
    Ok(())
}

/// State of the fixed-point iteration for one `(p, W, α)`.
pub struct FixedPoint<'a> {
    powered: &'a PoweredChannel,
    letters: Vec<usize>,
    weights: Vec<f64>,
    /// Spectral form of the current iterate `Q_t`.
    q: Eigen,
    iteration: usize,
}

impl<'a> FixedPoint<'a> {
    /// Requires every entry of `p` to exceed [`MIN_WEIGHT`].
    pub fn new(powered: &'a PoweredChannel, p: &ProbVector) -> Result<Self> {
        if let Some((j, w)) = p.weights().iter().enumerate().find(|(_, w)| **w <= MIN_WEIGHT) {
            return Err(Error::invalid(format!(
                "input weight p[{j}] = {w:e} is not strictly positive; drop zero-weight letters \
                 from the alphabet (the Augustin information is unchanged)"
            )));
        }
        Self::on_support(powered, p)
    }

    /// Runs on the letters with weight above [`MIN_WEIGHT`] only; the
    /// Augustin mean does not depend on zero-weight letters.
    pub fn on_support(powered: &'a PoweredChannel, p: &ProbVector) -> Result<Self> {
        check_alpha(powered.alpha())?;
        if p.len() != powered.n() {
            return Err(Error::invalid(format!(
                "probability vector has length {} but the channel has {} inputs",
                p.len(),
                powered.n()
            )));
        }
        let (letters, weights): (Vec<usize>, Vec<f64>) = p
            .weights()
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > MIN_WEIGHT)
            .map(|(j, w)| (j, *w))
            .unzip();
        let d = powered.d();
        let q = Eigen {
            values: vec![1.0 / d as f64; d],
            vectors: crate::matcore::CMatrix::identity(d, d),
        };
        Ok(Self {
            powered,
            letters,
            weights,
            q,
            iteration: 0,
        })
    }

    /// Restarts from a given positive-definite iterate.
    pub fn set_iterate(&mut self, q: &HermitianMatrix) -> Result<()> {
        let eig = herm_eig(q)?;
        if eig.min() <= DEFAULT_TOLERANCES.positive_definite {
            return Err(Error::singular(format!(
                "fixed-point iterate must be positive definite, has eigenvalue {:e}",
                eig.min()
            )));
        }
        self.q = eig;
        Ok(())
    }

    fn alpha(&self) -> f64 {
        self.powered.alpha()
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn iterate(&self) -> HermitianMatrix {
        self.q.reconstruct()
    }

    /// `Q_t^{1-α}`.
    pub fn iterate_power(&self) -> HermitianMatrix {
        let r = 1.0 - self.alpha();
        self.q.reconstruct_with(|x| x.powf(r))
    }

    fn power_spectrum(&self) -> Eigen {
        let r = 1.0 - self.alpha();
        Eigen {
            values: self.q.values.iter().map(|x| x.powf(r)).collect(),
            vectors: self.q.vectors.clone(),
        }
    }

    /// Advances one iteration and returns `d_T(Q_t^{1-α}, Q_{t+1}^{1-α})`.
    pub fn step(&mut self) -> Result<f64> {
        let alpha = self.alpha();
        let old_power = self.power_spectrum();
        let old_power_mat = old_power.reconstruct();
        let mut s = HermitianMatrix::zeros(self.powered.d());
        for (&j, &w) in self.letters.iter().zip(&self.weights) {
            let wa = &self.powered.states()[j];
            let t = trace_product(wa, &old_power_mat);
            if !(t > 0.0) {
                return Err(Error::singular(format!("Tr[W({j})^α Q^(1-α)] = {t:e} is not positive")));
            }
            s.add_scaled(w / t, wa);
        }
        let s_eig = herm_eig(&s)?;
        if s_eig.min() <= DEFAULT_TOLERANCES.positive_definite {
            return Err(Error::singular(format!(
                "fixed-point map left the positive-definite cone (eigenvalue {:e}); the channel \
                 outputs on the support of p must jointly have full support",
                s_eig.min()
            )));
        }
        let next = Eigen {
            values: s_eig.values.iter().map(|x| x.powf(1.0 / alpha)).collect(),
            vectors: s_eig.vectors,
        };
        let r = 1.0 - alpha;
        let next_power = next.reconstruct_with(|x| x.powf(r));
        let increment = thompson_metric_from(&old_power, &next_power)?;
        self.q = next;
        self.iteration += 1;
        Ok(increment)
    }

    /// Gradient estimates `D_α(W(k) ‖ Q_t)` for every letter and their
    /// `p`-weighted sum.
    pub fn estimates(&self) -> Result<(Vec<f64>, f64)> {
        let alpha = self.alpha();
        let power = self.iterate_power();
        let mut grad = Vec::with_capacity(self.powered.n());
        for (k, wa) in self.powered.states().iter().enumerate() {
            match divergence_from_trace(trace_product(wa, &power), alpha) {
                Divergence::Finite(x) => grad.push(x),
                Divergence::Infinite => {
                    return Err(Error::singular(format!("D_α(W({k}) ‖ Q) is infinite")));
                }
            }
        }
        let info = self.letters.iter().zip(&self.weights).map(|(&j, &w)| w * grad[j]).sum();
        Ok((grad, info))
    }

    /// Iterates until the certified bound drops to `opts.tol` or the
    /// iteration budget runs out.
    pub fn run(mut self, opts: &AugustinOptions) -> Result<FixedPointOutput> {
        let alpha = self.alpha();
        let kappa = contraction_factor(alpha);
        let factor = kappa / (1.0 - kappa);
        let mut bound = f64::INFINITY;
        let mut converged = false;
        while self.iteration < opts.max_iters {
            bound = factor * self.step()?;
            if bound <= opts.tol {
                converged = true;
                break;
            }
        }
        let (grad, info) = self.estimates()?;
        Ok(FixedPointOutput {
            q_star: self.iterate(),
            info,
            grad,
            iterations: self.iteration,
            error_bound: bound,
            converged,
            alpha,
        })
    }
}

/// One application of the fixed-point map to `q`.
pub fn fixed_point_step(q: &HermitianMatrix, p: &ProbVector, ch: &CQChannel, alpha: f64) -> Result<HermitianMatrix> {
    let powered = ch.powered(alpha)?;
    let mut fp = FixedPoint::new(&powered, p)?;
    fp.set_iterate(q)?;
    fp.step()?;
    Ok(fp.iterate())
}

/// Solves for the Augustin mean starting from `I/d`.
pub fn solve_augustin(p: &ProbVector, ch: &CQChannel, alpha: f64, opts: &AugustinOptions) -> Result<FixedPointOutput> {
    check_alpha(alpha)?;
    let powered = ch.powered(alpha)?;
    FixedPoint::new(&powered, p)?.run(opts)
}

pub fn solve_augustin_powered(
    p: &ProbVector,
    powered: &PoweredChannel,
    opts: &AugustinOptions,
) -> Result<FixedPointOutput> {
    FixedPoint::new(powered, p)?.run(opts)
}

/// The Petz-Augustin information alone; non-convergence is an error here
/// because the bare value cannot carry the flag.
pub fn augustin_information(p: &ProbVector, ch: &CQChannel, alpha: f64, tol: f64) -> Result<f64> {
    let out = solve_augustin(
        p,
        ch,
        alpha,
        &AugustinOptions {
            tol,
            ..AugustinOptions::default()
        },
    )?;
    if !out.converged {
        return Err(Error::InnerNotConverged {
            iterations: out.iterations,
            bound: out.error_bound,
            tol,
        });
    }
    Ok(out.info)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{constant_channel, orthogonal_pure_channel, random_channel};
    use crate::matcore::{mat_pow, petz_renyi_divergence, thompson_metric, DensityMatrix};

    #[test]
    fn single_letter_channel() {
        let ch = random_channel(1, 3, 5).unwrap();
        let w = ch.states()[0].as_hermitian().clone();
        for alpha in [0.6, 0.9, 2.0] {
            let q = fixed_point_step(&w, &ProbVector::uniform(1), &ch, alpha).unwrap();
            assert!(q.max_abs_diff(&w) < 1e-12);
            let out = solve_augustin(&ProbVector::uniform(1), &ch, alpha, &AugustinOptions::default()).unwrap();
            assert!(out.converged);
            assert!(out.info.abs() < 1e-9);
            assert!(out.grad[0].abs() < 1e-9);
        }
    }

    #[test]
    fn identical_states_fix_rho() {
        let rho = random_channel(1, 3, 6).unwrap().states()[0].clone();
        let ch = constant_channel(4, &rho).unwrap();
        let p = ProbVector::normalized(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        let q = fixed_point_step(rho.as_hermitian(), &p, &ch, 0.7).unwrap();
        assert!(q.max_abs_diff(&rho) < 1e-12);
        let info = augustin_information(&p, &ch, 0.7, 1e-12).unwrap();
        assert!(info.abs() < 1e-10);
    }

    #[test]
    fn orthogonal_pure_states() {
        let ch = orthogonal_pure_channel(4).unwrap();
        for alpha in [0.55, 0.75, 0.9, 1.5, 3.0] {
            let out = solve_augustin(&ProbVector::uniform(4), &ch, alpha, &AugustinOptions::default()).unwrap();
            assert!(out.converged);
            assert!((out.info - 4f64.ln()).abs() < 1e-9, "alpha {alpha}: {}", out.info);
            assert!(out.q_star.max_abs_diff(&HermitianMatrix::scaled_identity(4, 0.25)) < 1e-9);
        }
    }

    #[test]
    fn one_step_contracts_toward_reference() {
        let ch = random_channel(5, 3, 17).unwrap();
        let p = ProbVector::normalized(&[0.3, 0.1, 0.2, 0.25, 0.15]).unwrap();
        let alpha = 0.75;
        let powered = ch.powered(alpha).unwrap();
        let reference = FixedPoint::new(&powered, &p)
            .unwrap()
            .run(&AugustinOptions {
                tol: 0.0,
                max_iters: 400,
            })
            .unwrap();
        let star_pow = mat_pow(&reference.q_star, 1.0 - alpha).unwrap();
        let mut fp = FixedPoint::new(&powered, &p).unwrap();
        for _ in 0..8 {
            let before = thompson_metric(&fp.iterate_power(), &star_pow).unwrap();
            fp.step().unwrap();
            let after = thompson_metric(&fp.iterate_power(), &star_pow).unwrap();
            assert!(after <= before / 3.0 + 1e-12, "{after} vs {before}");
        }
    }

    #[test]
    fn certificate_dominates_true_error() {
        let ch = random_channel(6, 4, 2).unwrap();
        let p = ProbVector::normalized(&[1.0, 2.0, 3.0, 1.0, 2.0, 3.0]).unwrap();
        for alpha in [0.6, 0.9, 2.0] {
            let powered = ch.powered(alpha).unwrap();
            let star = FixedPoint::new(&powered, &p)
                .unwrap()
                .run(&AugustinOptions {
                    tol: 0.0,
                    max_iters: 300,
                })
                .unwrap();
            let star_pow = mat_pow(&star.q_star, 1.0 - alpha).unwrap();
            let rough = FixedPoint::new(&powered, &p)
                .unwrap()
                .run(&AugustinOptions {
                    tol: 1e-4,
                    max_iters: 1000,
                })
                .unwrap();
            assert!(rough.converged);
            let true_err = thompson_metric(&mat_pow(&rough.q_star, 1.0 - alpha).unwrap(), &star_pow).unwrap();
            assert!(true_err <= rough.error_bound + 1e-13);
            assert!((rough.info - star.info).abs() <= rough.value_bound() + 1e-13);
        }
    }

    #[test]
    fn info_is_weighted_gradient_and_a_minimum() {
        let ch = random_channel(4, 3, 8).unwrap();
        let p = ProbVector::normalized(&[0.4, 0.3, 0.2, 0.1]).unwrap();
        let alpha = 0.8;
        let out = solve_augustin(&p, &ch, alpha, &AugustinOptions::default()).unwrap();
        assert!((out.info - p.dot(&out.grad)).abs() < 1e-12);
        assert!(out.info >= 0.0);
        let other = random_channel(5, 3, 100).unwrap();
        for q in other.states() {
            let upper: f64 = ch
                .states()
                .iter()
                .zip(p.weights())
                .map(|(w, pj)| pj * petz_renyi_divergence(w, q, alpha).unwrap().finite().unwrap())
                .sum();
            assert!(out.info <= upper + 1e-10);
        }
    }

    #[test]
    fn gradient_entries_are_divergences_to_final_iterate() {
        let ch = random_channel(3, 2, 31).unwrap();
        let p = ProbVector::uniform(3);
        let out = solve_augustin(&p, &ch, 1.7, &AugustinOptions::default()).unwrap();
        for (w, g) in ch.states().iter().zip(&out.grad) {
            let d = petz_renyi_divergence(w, &out.q_star, 1.7).unwrap().finite().unwrap();
            assert!((d - g).abs() < 1e-12);
        }
        // the fixed point has unit trace even though iterates are not renormalized
        assert!((out.q_star.trace() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn non_convergence_is_flagged() {
        let ch = random_channel(8, 4, 3).unwrap();
        let p = ProbVector::uniform(8);
        let out = solve_augustin(
            &p,
            &ch,
            0.6,
            &AugustinOptions {
                tol: 1e-14,
                max_iters: 3,
            },
        )
        .unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
        assert!(out.error_bound > 1e-14);
        assert!(matches!(
            augustin_information(&p, &ch, 0.6, 1e-300),
            Err(Error::InnerNotConverged { .. })
        ));
    }

    #[test]
    fn preconditions() {
        let ch = random_channel(2, 2, 3).unwrap();
        let p = ProbVector::from_weights(vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            solve_augustin(&p, &ch, 0.7, &AugustinOptions::default()),
            Err(Error::InvalidParameter(_))
        ));
        for alpha in [0.5, 0.3, 1.0] {
            assert!(solve_augustin(&ProbVector::uniform(2), &ch, alpha, &AugustinOptions::default()).is_err());
        }
        let pure = CQChannel::new(vec![DensityMatrix::basis_state(2, 0).unwrap()]).unwrap();
        assert!(solve_augustin(&ProbVector::uniform(1), &pure, 0.7, &AugustinOptions::default()).is_err());
    }
}
