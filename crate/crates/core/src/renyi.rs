//! The exponentiated Petz-Rényi objective
//! `g̃(p) = Tr[(Σ_j p[j] W(j)^α)^{1/α}]`, its gradient, and the Petz-Rényi
//! information `I_α^R = α/(α-1) · log g̃`.

use crate::channel::{CQChannel, PoweredChannel};
use crate::error::{Error, Result};
use crate::matcore::{herm_eig, trace_product, Eigen, HermitianMatrix, DEFAULT_TOLERANCES};
use crate::simplex::ProbVector;

/// Hölder-smoothness parameters `(ν, L_ν)` of `g̃` with respect to `‖·‖_1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderParams {
    pub nu: f64,
    pub l: f64,
}

/// `(ν, L) = ((1-α)/α, 1/α)`, valid for `α ∈ [1/2, 1)`.
pub fn holder_constants(alpha: f64) -> Result<HolderParams> {
    if !(0.5..1.0).contains(&alpha) {
        return Err(Error::invalid(format!(
            "Hölder constants ((1-α)/α, 1/α) are established only for α in [1/2, 1), got {alpha}"
        )));
    }
    Ok(HolderParams {
        nu: (1.0 - alpha) / alpha,
        l: 1.0 / alpha,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "the exponentiated Rényi objective needs α in (0,1), got {alpha}"
        )));
    }
    Ok(())
}

/// Value and gradient of `g̃` at one point.
#[derive(Clone, Debug)]
pub struct RenyiEval {
    pub value: f64,
    pub gradient: Vec<f64>,
}

/// `g̃` bound to one channel and order, with `W(j)^α` precomputed.
#[derive(Clone, Debug)]
pub struct ExpRenyi {
    powered: PoweredChannel,
}

impl ExpRenyi {
    pub fn new(ch: &CQChannel, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            powered: ch.powered(alpha)?,
        })
    }

    pub fn from_powered(powered: PoweredChannel) -> Result<Self> {
        check_alpha(powered.alpha())?;
        Ok(Self { powered })
    }

    pub fn alpha(&self) -> f64 {
        self.powered.alpha()
    }

    pub fn n(&self) -> usize {
        self.powered.n()
    }

    pub fn powered(&self) -> &PoweredChannel {
        &self.powered
    }

    fn mixture_spectrum(&self, p: &ProbVector) -> Result<Eigen> {
        if p.len() != self.n() {
            return Err(Error::invalid(format!(
                "probability vector has length {} but the channel has {} inputs",
                p.len(),
                self.n()
            )));
        }
        let mut m = HermitianMatrix::zeros(self.powered.d());
        for (w, s) in p.weights().iter().zip(self.powered.states()) {
            if *w != 0.0 {
                m.add_scaled(*w, s);
            }
        }
        herm_eig(&m)
    }

    fn value_from_spectrum(&self, eig: &Eigen) -> Result<f64> {
        let r = 1.0 / self.alpha();
        let mut total = 0.0;
        for &x in &eig.values {
            if x < -DEFAULT_TOLERANCES.clip {
                return Err(Error::singular(format!("mixture has negative eigenvalue {x:e}")));
            }
            total += x.max(0.0).powf(r);
        }
        Ok(total)
    }

    pub fn value(&self, p: &ProbVector) -> Result<f64> {
        self.value_from_spectrum(&self.mixture_spectrum(p)?)
    }

    /// Value and gradient; gradient entry `j` is `(1/α) Tr[M^{1/α-1} W(j)^α]`
    /// with `M = Σ_k p[k] W(k)^α`.
    pub fn eval(&self, p: &ProbVector) -> Result<RenyiEval> {
        let eig = self.mixture_spectrum(p)?;
        if eig.min() <= DEFAULT_TOLERANCES.positive_definite {
            return Err(Error::singular(format!(
                "Σ p[j] W(j)^α has eigenvalue {:e}; restrict the input alphabet to letters whose \
                 outputs jointly have full support",
                eig.min()
            )));
        }
        let value = self.value_from_spectrum(&eig)?;
        let alpha = self.alpha();
        let power = eig.psd_pow(1.0 / alpha - 1.0, &DEFAULT_TOLERANCES)?;
        let gradient = self
            .powered
            .states()
            .iter()
            .map(|s| trace_product(&power, s) / alpha)
            .collect();
        Ok(RenyiEval { value, gradient })
    }

    pub fn information(&self, p: &ProbVector) -> Result<f64> {
        Ok(information_from_objective(self.value(p)?, self.alpha()))
    }
}

/// `I_α^R = α/(α-1) · log g̃`.
pub fn information_from_objective(value: f64, alpha: f64) -> f64 {
    alpha / (alpha - 1.0) * value.ln()
}

pub fn renyi_objective(p: &ProbVector, ch: &CQChannel, alpha: f64) -> Result<f64> {
    ExpRenyi::new(ch, alpha)?.value(p)
}

pub fn renyi_gradient(p: &ProbVector, ch: &CQChannel, alpha: f64) -> Result<Vec<f64>> {
    Ok(ExpRenyi::new(ch, alpha)?.eval(p)?.gradient)
}

pub fn renyi_information(p: &ProbVector, ch: &CQChannel, alpha: f64) -> Result<f64> {
    ExpRenyi::new(ch, alpha)?.information(p)
}

/// `‖∇g̃(p1) - ∇g̃(p2)‖_∞ / ‖p1 - p2‖_1^ν`, the empirical Hölder ratio.
pub fn holder_ratio(g1: &[f64], g2: &[f64], p1: &ProbVector, p2: &ProbVector, nu: f64) -> f64 {
    let num = g1.iter().zip(g2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    num / p1.l1_distance(p2).powf(nu)
}
